#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace btsbm {

/// One unordered pair {i, j} (i < j) with at least one match.
struct Edge {
  int i = 0;
  int j = 0;
  int wins_ij = 0;  // matches won by i against j
  int wins_ji = 0;

  int matches() const noexcept { return wins_ij + wins_ji; }
};

/// A directed win count, the unit accepted by ComparisonData's constructor.
struct WinRecord {
  int winner = 0;
  int loser = 0;
  int count = 1;
};

/// Win/loss counts between n items. Wins are kept per unordered edge with both
/// directions; match counts are derived. Duplicate records are summed.
class ComparisonData {
 public:
  ComparisonData() = default;
  ComparisonData(int n_items, std::span<const WinRecord> records, std::vector<std::string> names = {});

  int n_items() const noexcept { return n_items_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  /// w_ij (0 when the pair never met).
  int wins(int i, int j) const;
  /// n_ij = w_ij + w_ji.
  int matches(int i, int j) const;
  /// Index into edges() for the pair, or -1.
  std::ptrdiff_t edge_index(int i, int j) const;

  /// Item names; generated as "item<i>" when none were supplied.
  const std::vector<std::string>& names() const noexcept { return names_; }

  /// Same items and match counts, with each edge's wins replaced. new_wins_ij[e]
  /// is the number of matches item edges()[e].i won; must lie in [0, n_e].
  ComparisonData with_wins(std::span<const int> new_wins_ij) const;

  /// Same items with one edge dropped.
  ComparisonData without_edge(std::size_t edge) const;

  /// Data-quality notes: items without matches, disconnected components.
  std::vector<std::string> warnings() const;

 private:
  static std::uint64_t key(int i, int j) noexcept;

  int n_items_ = 0;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<std::string> names_;
};

/// Block labels 0..K-1, each used at least once.
class Partition {
 public:
  Partition() = default;
  /// Labels must already be contiguous (every value in 0..K-1 used).
  explicit Partition(std::vector<int> labels);
  /// Relabels arbitrary integer labels by order of first appearance.
  static Partition canonical(std::span<const int> labels);
  static Partition singletons(int n);
  static Partition one_block(int n);

  std::size_t size() const noexcept { return labels_.size(); }
  int num_blocks() const noexcept { return static_cast<int>(sizes_.size()); }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const noexcept { return labels_; }
  std::span<const int> sizes() const noexcept { return sizes_; }

  /// Equality as set partitions (label-invariant).
  bool same_clustering(const Partition& other) const;
  /// Labels in first-appearance order; equal for equal set partitions.
  std::vector<int> canonical_labels() const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<int> labels_;
  std::vector<int> sizes_;
};

/// Positive block strengths λ, one per block.
class BlockStrengths {
 public:
  BlockStrengths() = default;
  explicit BlockStrengths(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// Z_ij per edge, aligned with ComparisonData::edges().
struct AugmentedLatents {
  std::vector<double> z;
};

struct Hyperparameters {
  double a = 2.0;
  double b = 0.0;  // 0 selects aligned_rate(a)
  double gamma = 0.8;

  /// Fills b with aligned_rate(a) when unset and checks a, b > 0, γ ∈ (0, 1).
  Hyperparameters validated() const;
};

struct SufficientStats {
  std::vector<int> total_wins;
  std::vector<double> total_z;
};

/// λ_i / (λ_i + λ_j).
double bt_win_prob(double lambda_i, double lambda_j);

/// log C(n, w) + w log p + (n - w) log(1 - p).
double binomial_log_pmf(int wins, int trials, double p);

/// Observed-data log likelihood, binomial coefficients included.
double log_likelihood(const ComparisonData& data, const Partition& partition, const BlockStrengths& strengths);

/// Complete-data log likelihood: binomial coefficient, wins and the Gamma(n_ij,
/// λ_i + λ_j) density of each Z_ij.
double log_augmented_likelihood(const ComparisonData& data, const Partition& partition,
                                const BlockStrengths& strengths, const AugmentedLatents& latents);

/// b = exp(ψ(a)), the rate that makes the prior mean of log λ zero.
double aligned_rate(double a);

/// τ = sqrt(ψ₁(a)), prior SD of log λ.
double log_sd_tau(double a);

SufficientStats compute_sufficient_stats(const ComparisonData& data, const AugmentedLatents& latents);

/// Per-item total wins w_i (latent independent).
std::vector<int> total_wins(const ComparisonData& data);

/// Change in the log new-block likelihood when the prior rate is b = exp(ψ(a) - δ)
/// instead of the aligned rate.
double new_cluster_bias(double a, int w_i, double z_i, double delta);

}  // namespace btsbm
