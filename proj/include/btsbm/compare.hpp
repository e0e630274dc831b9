#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "btsbm/model.hpp"
#include "btsbm/sampler.hpp"

namespace btsbm {

/// Standard Bradley-Terry posterior: the augmented sampler with the partition
/// frozen at singletons (one strength per item).
Trace fit_standard_bt(const ComparisonData& data, const SamplerConfig& config);

/// log p(w_e | θ^(t)) for draws t (rows) and edges e (columns), stored column-major.
class PointwiseLogLik {
 public:
  PointwiseLogLik(std::size_t draws, std::size_t edges);

  std::size_t draws() const noexcept { return draws_; }
  std::size_t edges() const noexcept { return edges_; }
  std::span<double> column(std::size_t e) { return {values_.data() + e * draws_, draws_}; }
  std::span<const double> column(std::size_t e) const { return {values_.data() + e * draws_, draws_}; }
  double& operator()(std::size_t t, std::size_t e) { return values_[e * draws_ + t]; }
  double operator()(std::size_t t, std::size_t e) const { return values_[e * draws_ + t]; }

 private:
  std::size_t draws_;
  std::size_t edges_;
  std::vector<double> values_;
};

/// Binomial log pmf of every edge under every draw. For ModelKind::kBt the
/// trace must carry singleton partitions.
PointwiseLogLik pointwise_loglik(const Trace& trace, const ComparisonData& data, ModelKind model);

/// Fills `out` with the pointwise log likelihood of one edge across draws.
void edge_loglik_column(const Trace& trace, const Edge& edge, std::span<double> out);

struct PsisColumn {
  double lpd = 0.0;
  double pareto_k = 0.0;
  bool smoothed = false;
  std::vector<double> log_weights;  // self-normalised (log Σ exp = 0)
};

/// Pareto-smoothed importance sampling LOO for one held-out edge.
PsisColumn psis_column(std::span<const double> loglik);

struct ElpdReport {
  double elpd = 0.0;
  double se = 0.0;
  std::vector<double> per_edge_lpd;
  std::vector<double> pareto_k;
  std::size_t n_bad_k = 0;
  std::vector<std::size_t> bad_edges;  // edge indices with k̂ > 0.7
  std::size_t n_draws = 0;
};

constexpr double kParetoKThreshold = 0.7;

ElpdReport psis_loo(const PointwiseLogLik& loglik);

/// Same as psis_loo(pointwise_loglik(...)) without materialising the matrix.
ElpdReport psis_loo(const Trace& trace, const ComparisonData& data, ModelKind model);

enum class DeltaSeMode {
  kHalved,        // sqrt(se1² + se2²) / 2
  kConventional,  // sqrt(se1² + se2²)
  kPaired,        // sqrt(E · var(lpd1_e - lpd2_e))
};

struct DeltaElpd {
  double delta = 0.0;
  double se_delta = 0.0;
};

DeltaElpd delta_elpd(const ElpdReport& m1, const ElpdReport& m2, DeltaSeMode mode = DeltaSeMode::kHalved);

}  // namespace btsbm
