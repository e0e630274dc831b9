#include "btsbm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "btsbm/errors.hpp"

namespace btsbm {

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream_id) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                       0x9e3779b9u};
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  auto seq = make_seed_seq(seed, stream_id);
  return std::mt19937_64(seq);
}

// Even Bernoulli numbers B_2 .. B_14.
constexpr double kBernoulli[] = {1.0 / 6.0,   -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
                                 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0};

constexpr double kAsymptoticStart = 10.0;

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is excluded.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(engine_); }

int RngStream::poisson(double mean) {
  if (!(mean > 0.0)) throw DomainError("poisson mean must be positive");
  std::poisson_distribution<int> dist(mean);
  return dist(engine_);
}

int RngStream::binomial(int trials, double p) {
  if (trials < 0 || !(p >= 0.0 && p <= 1.0)) throw DomainError("invalid binomial parameters");
  std::binomial_distribution<int> dist(trials, p);
  return dist(engine_);
}

std::size_t RngStream::categorical_log(std::span<const double> log_weights) {
  if (log_weights.empty()) throw NumericError("categorical draw over an empty support");
  double top = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) top = std::max(top, w);
  if (!std::isfinite(top)) throw NumericError("categorical draw with no finite weight");
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - top);
  double u = uniform() * total;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    u -= std::exp(log_weights[k] - top);
    if (u <= 0.0) return k;
  }
  // Rounding left a sliver of mass; return the last non-negligible entry.
  for (std::size_t k = log_weights.size(); k-- > 0;) {
    if (std::isfinite(log_weights[k])) return k;
  }
  return log_weights.size() - 1;
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma requires x > 0");
  return boost::math::lgamma(x);
}

double digamma(double a) {
  if (!(a > 0.0)) throw DomainError("digamma requires a > 0");
  double shift = 0.0;
  while (a < kAsymptoticStart) {
    shift -= 1.0 / a;
    a += 1.0;
  }
  const double inv2 = 1.0 / (a * a);
  double series = 0.0;
  double power = inv2;
  for (int k = 0; k < 7; ++k) {
    series += kBernoulli[k] / (2.0 * (k + 1)) * power;
    power *= inv2;
  }
  return shift + std::log(a) - 0.5 / a - series;
}

double trigamma(double a) {
  if (!(a > 0.0)) throw DomainError("trigamma requires a > 0");
  double shift = 0.0;
  while (a < kAsymptoticStart) {
    shift += 1.0 / (a * a);
    a += 1.0;
  }
  const double inv = 1.0 / a;
  const double inv2 = inv * inv;
  double series = 0.0;
  double power = inv2 * inv;
  for (int k = 0; k < 7; ++k) {
    series += kBernoulli[k] * power;
    power *= inv2;
  }
  return shift + inv + 0.5 * inv2 + series;
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw DomainError("sample_gamma requires positive finite shape and rate");
  }
  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(rng.uniform(), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v * boost / rate;
    }
  }
}

double log_sum_exp(std::span<const double> values) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : values) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double total = 0.0;
  for (double v : values) total += std::exp(v - top);
  return top + std::log(total);
}

GpdFit fit_generalized_pareto(std::span<const double> tail) {
  const std::size_t n = tail.size();
  if (n < 5) throw DomainError("fit_generalized_pareto needs at least 5 exceedances");
  std::vector<double> x(tail.begin(), tail.end());
  std::sort(x.begin(), x.end());
  if (x.front() == x.back()) throw NumericError("fit_generalized_pareto: degenerate (constant) tail");
  if (!(x.front() >= 0.0)) throw DomainError("fit_generalized_pareto: exceedances must be non-negative");

  constexpr double prior = 3.0;
  const std::size_t grid = 30 + static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const double quartile = x[static_cast<std::size_t>(std::floor(n / 4.0 + 0.5)) - 1];
  const double largest = x.back();

  // theta = -k/sigma over a grid; profile log-likelihood for each point.
  std::vector<double> theta(grid);
  std::vector<double> log_lik(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    theta[j] = 1.0 / largest + (1.0 - std::sqrt(grid / (j + 0.5))) / prior / quartile;
    double mean_log = 0.0;
    for (double xi : x) mean_log += std::log1p(-theta[j] * xi);
    mean_log /= static_cast<double>(n);
    log_lik[j] = static_cast<double>(n) * (std::log(-theta[j] / mean_log) - mean_log - 1.0);
    if (!std::isfinite(log_lik[j])) log_lik[j] = -std::numeric_limits<double>::infinity();
  }
  const double norm = log_sum_exp(log_lik);
  double theta_hat = 0.0;
  for (std::size_t j = 0; j < grid; ++j) {
    if (std::isfinite(log_lik[j])) theta_hat += theta[j] * std::exp(log_lik[j] - norm);
  }
  double k_hat = 0.0;
  for (double xi : x) k_hat += std::log1p(-theta_hat * xi);
  k_hat /= static_cast<double>(n);
  const double sigma_hat = -k_hat / theta_hat;
  // Shrink towards 0.5 with the weight of 10 pseudo-observations.
  const double nd = static_cast<double>(n);
  k_hat = k_hat * nd / (nd + 10.0) + 10.0 * 0.5 / (nd + 10.0);
  if (!std::isfinite(k_hat) || !std::isfinite(sigma_hat) || !(sigma_hat > 0.0)) {
    throw NumericError("fit_generalized_pareto: fit did not converge");
  }
  return {k_hat, sigma_hat};
}

double gpd_quantile(double p, double k, double sigma) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("gpd_quantile requires p in [0, 1)");
  if (std::abs(k) < 1e-12) return -sigma * std::log1p(-p);
  return sigma * std::expm1(-k * std::log1p(-p)) / k;
}

}  // namespace btsbm
