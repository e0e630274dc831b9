#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace btsbm {

/// Per-chain random stream. Equal (seed, stream_id) pairs reproduce the same
/// variates; distinct stream ids are seeded through std::seed_seq so chains
/// and replicates never share an engine.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  int poisson(double mean);
  int binomial(int trials, double p);
  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn with probability proportional to exp(log_weights[k]).
  /// Max-subtracted before exponentiation; throws NumericError if no
  /// weight is finite.
  std::size_t categorical_log(std::span<const double> log_weights);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// ln Γ(x) for x > 0.
double log_gamma(double x);

/// ψ(a), the derivative of ln Γ. Upward recurrence to a ≥ 10 followed by the
/// asymptotic series.
double digamma(double a);

/// ψ₁(a), the derivative of ψ.
double trigamma(double a);

/// Shape-rate Gamma variate (mean shape/rate). Marsaglia-Tsang squeeze for
/// shape ≥ 1; shape < 1 boosted through Gamma(shape + 1)·U^{1/shape}.
double sample_gamma(double shape, double rate, RngStream& rng);

/// ln Σ exp(values); -inf for an empty span.
double log_sum_exp(std::span<const double> values);

struct GpdFit {
  double k_hat;
  double sigma_hat;
};

/// Generalized Pareto fit to positive exceedances by the profile-likelihood
/// grid estimator (Zhang & Stephens), including the weakly informative
/// shrinkage of k̂ towards 0.5 used by PSIS.
GpdFit fit_generalized_pareto(std::span<const double> tail);

/// Quantile of GPD(k, sigma) with location 0.
double gpd_quantile(double p, double k, double sigma);

}  // namespace btsbm
