#pragma once

#include <span>
#include <vector>

#include "btsbm/model.hpp"
#include "btsbm/numerics.hpp"

namespace btsbm {

/// Gnedin partition prior (the σ = -1 Gibbs-type prior) over n items.
struct GnedinParams {
  double gamma = 0.8;
  int n = 1;

  GnedinParams(double gamma, int n);
};

/// P(K = k) for the number of occupied blocks.
double pmf_K(const GnedinParams& params, int k);

/// Full pmf, entry k-1 holds P(K = k).
std::vector<double> pmf_K_table(const GnedinParams& params);

/// E[K] = Γ(n+1) Γ(1+γ) / Γ(n+γ).
double mean_K(const GnedinParams& params);

/// Var(K) = E[K] (n - γ(n-1)) - E[K]².
double var_K(const GnedinParams& params);

/// Unnormalised urn weights for placing one more item next to blocks of the
/// given sizes: (m_k + 1)(n - K + γ) for each existing block and K² - Kγ for a
/// new one (last entry), n = Σ sizes. With no blocks the only weight is 1.
std::vector<double> predictive_weights(std::span<const int> sizes, double gamma);

/// Sequential urn draw of a partition, labels in order of first appearance.
Partition sample_prior_partition(const GnedinParams& params, RngStream& rng);

/// log p(x | γ) = log ψ_{n,K} + Σ_k log m_k!.
double log_prior_partition(const Partition& partition, double gamma);

}  // namespace btsbm
