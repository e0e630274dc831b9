#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "btsbm/model.hpp"
#include "btsbm/sampler.hpp"

namespace btsbm {

/// Trace whose draws have blocks ordered by decreasing strength (label 0 is
/// the strongest block).
struct RelabeledTrace {
  int n_items = 0;
  std::vector<Draw> draws;
};

/// Sorts blocks by decreasing λ in every draw and remaps the labels; exact ties
/// keep the smaller original label first.
RelabeledTrace relabel(const Trace& trace);

/// Variation of information in nats.
double vi_distance(const Partition& a, const Partition& b);
double vi_distance(std::span<const int> a, std::span<const int> b);

/// Hubert-Arabie adjusted Rand index.
double adjusted_rand_index(const Partition& a, const Partition& b);

/// Distinct set partitions of a trace with their posterior weights, in
/// order of first appearance.
struct PartitionSample {
  std::vector<Partition> partitions;
  std::vector<double> weights;     // sum to 1
  std::vector<std::size_t> counts;
  std::vector<std::size_t> first;  // index of first draw showing each partition
};

PartitionSample distinct_partitions(std::span<const Draw> draws);

struct ConsensusOptions {
  /// Distinct sampled partitions scored as candidates, most frequent first.
  std::size_t max_candidates = 2000;
  bool greedy_merge = true;
};

struct ConsensusSummary {
  Partition point_partition;
  double expected_vi = 0.0;
  int k_point = 0;
};

/// Posterior expected VI from `candidate` to the sample.
double expected_vi(const Partition& candidate, const PartitionSample& sample);

/// Minimiser of the posterior expected VI over sampled partitions, refined by
/// greedy block merges of the incumbent.
ConsensusSummary consensus_partition(const RelabeledTrace& trace, const ConsensusOptions& options = {});

struct CredibleBall {
  double epsilon_star = 0.0;
  double coverage = 0.0;
  Partition vertical_upper;
  Partition vertical_lower;
  Partition horizontal;
  std::pair<int, int> k_bounds{0, 0};  // (K_ub, K_lb)
};

CredibleBall credible_ball(const RelabeledTrace& trace, const Partition& point, double alpha);

struct KPosterior {
  int mode = 0;
  std::map<int, double> probabilities;
  std::pair<int, int> ci95{0, 0};
};

/// Empirical law of K; mode ties go to the smaller K.
KPosterior k_posterior(const Trace& trace);
KPosterior k_posterior(std::span<const Draw> draws);

/// n_items × columns matrix (row-major) of P(relabelled x_i = k). Columns span
/// the largest K among the used draws (or condition_K).
struct MembershipMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  double operator()(int i, int k) const { return values[static_cast<std::size_t>(i) * cols + k]; }
};

MembershipMatrix membership_probs(const RelabeledTrace& trace, std::optional<int> condition_K = std::nullopt);

struct StrengthSummary {
  double mean = 0.0;
  double hpd_lo = 0.0;
  double hpd_hi = 0.0;
};

/// Shortest interval holding ceil(mass · S) of the sorted values.
std::pair<double, double> hpd_interval(std::vector<double> values, double mass);

/// Per-item strength λ̃_i = λ_{x_i} of its (relabelled) block.
std::vector<StrengthSummary> player_strengths(const RelabeledTrace& trace, std::optional<int> condition_K,
                                              double hpd_mass);

struct BalanceSeries {
  std::vector<double> per_draw_entropy;   // H
  std::vector<double> per_draw_normalized;  // H / log K, 0 when K = 1
  double mean = 0.0;
  std::pair<double, double> ci95{0.0, 0.0};
};

/// Shannon entropy (nats) of block-size proportions.
double block_entropy(std::span<const int> sizes);
/// Block-size entropy normalised by log K.
double normalized_block_entropy(std::span<const int> sizes);

BalanceSeries balance_entropy(const Trace& trace);

/// Linear-interpolation sample quantile (type 7).
double quantile(std::vector<double> values, double p);

}  // namespace btsbm
