#include "btsbm/gnedin.hpp"

#include <algorithm>
#include <cmath>

#include "btsbm/errors.hpp"

namespace btsbm {

namespace {

// log of the rising factorial (x)_r.
double log_rising(double x, int r) { return r == 0 ? 0.0 : log_gamma(x + r) - log_gamma(x); }

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie strictly inside (0, 1)");
}

}  // namespace

GnedinParams::GnedinParams(double gamma_, int n_) : gamma(gamma_), n(n_) {
  check_gamma(gamma);
  if (n < 1) throw DomainError("Gnedin prior needs n >= 1");
}

double pmf_K(const GnedinParams& params, int k) {
  const int n = params.n;
  const double g = params.gamma;
  if (k < 1 || k > n) throw std::out_of_range("k outside [1, n]");
  const double log_choose = log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
  return std::exp(log_choose + log_rising(1.0 - g, k - 1) + log_rising(g, n - k) - log_rising(1.0 + g, n - 1));
}

std::vector<double> pmf_K_table(const GnedinParams& params) {
  std::vector<double> out(params.n);
  for (int k = 1; k <= params.n; ++k) out[k - 1] = pmf_K(params, k);
  return out;
}

double mean_K(const GnedinParams& params) {
  return std::exp(log_gamma(params.n + 1.0) + log_gamma(1.0 + params.gamma) - log_gamma(params.n + params.gamma));
}

double var_K(const GnedinParams& params) {
  const double m = mean_K(params);
  const double v = m * (params.n - params.gamma * (params.n - 1)) - m * m;
  return v < 0.0 ? 0.0 : v;  // clamps -0 rounding at n = 1
}

std::vector<double> predictive_weights(std::span<const int> sizes, double gamma) {
  check_gamma(gamma);
  const int k_blocks = static_cast<int>(sizes.size());
  if (k_blocks == 0) return {1.0};
  int n = 0;
  for (int m : sizes) n += m;
  std::vector<double> w;
  w.reserve(k_blocks + 1);
  for (int m : sizes) w.push_back((m + 1.0) * (n - k_blocks + gamma));
  w.push_back(static_cast<double>(k_blocks) * k_blocks - k_blocks * gamma);
  return w;
}

Partition sample_prior_partition(const GnedinParams& params, RngStream& rng) {
  std::vector<int> labels;
  std::vector<int> sizes;
  labels.reserve(params.n);
  for (int i = 0; i < params.n; ++i) {
    const int k_blocks = static_cast<int>(sizes.size());
    // Existing blocks carry Σ_k (m_k + 1)(i - K + γ) = (i + K)(i - K + γ) in total.
    const double existing = static_cast<double>(i + k_blocks) * (i - k_blocks + params.gamma);
    const double fresh = k_blocks == 0 ? 1.0 : static_cast<double>(k_blocks) * k_blocks - k_blocks * params.gamma;
    int k;
    if (rng.uniform() * (existing + fresh) < fresh) {
      k = k_blocks;
      sizes.push_back(0);
    } else {
      // One ticket per placed item plus one per block gives weight m_k + 1.
      const int ticket = std::min(static_cast<int>(rng.uniform() * (i + k_blocks)), i + k_blocks - 1);
      k = ticket < i ? labels[ticket] : ticket - i;
    }
    ++sizes[k];
    labels.push_back(k);
  }
  return Partition(std::move(labels));
}

double log_prior_partition(const Partition& partition, double gamma) {
  check_gamma(gamma);
  const int n = static_cast<int>(partition.size());
  const int k_blocks = partition.num_blocks();
  if (n == 0) return 0.0;
  double log_psi = log_rising(gamma, n - k_blocks);
  for (int k = 1; k < k_blocks; ++k) log_psi += std::log(static_cast<double>(k) * k - gamma * k);
  for (int i = 1; i < n; ++i) log_psi -= std::log(static_cast<double>(i) * i + gamma * i);
  double total = log_psi;
  for (int m : partition.sizes()) total += log_gamma(m + 1.0);
  return total;
}

}  // namespace btsbm
