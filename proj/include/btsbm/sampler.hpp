#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "btsbm/model.hpp"
#include "btsbm/numerics.hpp"

namespace btsbm {

enum class ModelKind { kBtSbm, kBt };

/// How the sweep ends. Stored draws are normalised to geometric mean one in
/// every mode; the mode only changes the chain's own dynamics.
///  - kScaleGibbs: redraw the total strength Σλ_k from its full conditional
///    Gamma(K·a, b), keeping the ratios. Leaves the posterior invariant.
///  - kRescale: divide by the geometric mean inside the chain. This is the
///    deterministic global rescaling; it perturbs the stationary law when the
///    data are weak.
///  - kNone: no scale step.
enum class ScaleStep { kScaleGibbs, kRescale, kNone };

struct SamplerConfig {
  int total_iters = 30000;
  int burn_in = 10000;
  int thin = 1;
  Hyperparameters hyper{};
  std::uint64_t seed = 1;
  int n_chains = 1;
  ScaleStep scale_step = ScaleStep::kScaleGibbs;

  /// Throws ConfigError; returns a copy with the hyperparameters resolved.
  SamplerConfig validated() const;
};

/// One stored posterior draw. Labels are 0-based and contiguous.
struct Draw {
  std::uint64_t iteration = 0;
  int chain = 0;
  std::vector<int> labels;
  std::vector<double> strengths;

  int num_blocks() const noexcept { return static_cast<int>(strengths.size()); }
  Partition partition() const { return Partition(labels); }
};

/// Wall-clock seconds spent in each phase of the sweep, summed over chains.
struct PhaseTimings {
  double latents = 0.0;
  double strengths = 0.0;
  double assignments = 0.0;
  double rescale = 0.0;

  double total() const noexcept { return latents + strengths + assignments + rescale; }
};

struct Trace {
  ModelKind model = ModelKind::kBtSbm;
  int n_items = 0;
  SamplerConfig config;
  std::vector<Draw> draws;
  PhaseTimings timings;
};

/// Z_ij ~ Gamma(n_ij, λ_{x_i} + λ_{x_j}) for every edge.
AugmentedLatents update_latents(const ComparisonData& data, const Partition& partition,
                                const BlockStrengths& strengths, RngStream& rng);

/// λ_k ~ Gamma(a + Σ_{i∈k} w_i, b + Σ_{i∈k} Z_i) for each block, not rescaled.
BlockStrengths update_strengths(const SufficientStats& stats, const Partition& partition,
                                const Hyperparameters& hyper, RngStream& rng);

/// Unnormalised log full-conditional weights for one item over the K blocks
/// of the remaining items plus a new block (last entry). `sizes` and
/// `strengths` describe the partition with the item removed; `n_others` is
/// implied by Σ sizes. The new-block term integrates λ against its prior.
void assignment_log_weights(std::span<const int> sizes, std::span<const double> strengths, int w_i, double z_i,
                            const Hyperparameters& hyper, std::span<double> out);

std::vector<double> assignment_probabilities(std::span<const int> sizes, std::span<const double> strengths,
                                             int w_i, double z_i, const Hyperparameters& hyper);

/// Divides by the geometric mean so that mean log λ = 0.
BlockStrengths rescale(const BlockStrengths& strengths);
void rescale_in_place(std::span<double> strengths);

/// Single-site Gibbs sampler with Gamma augmentation. Owns the mutable chain
/// state; the data must outlive the sampler.
class GibbsSampler {
 public:
  GibbsSampler(const ComparisonData& data, const Hyperparameters& hyper, RngStream rng,
               ModelKind model = ModelKind::kBtSbm, ScaleStep scale_step = ScaleStep::kScaleGibbs);

  /// x_i = i, K = n, λ_k ~ Gamma(a, b).
  void initialize_singletons();
  void set_state(const Partition& partition, const BlockStrengths& strengths);
  /// Points the sampler at new data with the same item count (win counts may differ).
  void rebind(const ComparisonData& data);

  /// Latents, strengths, every assignment in index order, then the scale step.
  void sweep();

  void update_latents();
  void update_strengths();
  void update_assignment(int item);
  void update_scale();

  /// Current strengths divided by their geometric mean.
  std::vector<double> normalized_strengths() const;

  int num_blocks() const noexcept { return static_cast<int>(strengths_.size()); }
  std::span<const int> labels() const noexcept { return labels_; }
  std::span<const int> sizes() const noexcept { return sizes_; }
  std::span<const double> strengths() const noexcept { return strengths_; }
  std::span<const double> latents() const noexcept { return z_; }
  const PhaseTimings& timings() const noexcept { return timings_; }
  RngStream& rng() noexcept { return rng_; }

 private:
  void remove_item(int item);
  void compute_item_latent_totals();

  const ComparisonData* data_;
  Hyperparameters hyper_;
  RngStream rng_;
  ModelKind model_;
  ScaleStep scale_step_;

  std::vector<int> labels_;
  std::vector<int> sizes_;
  std::vector<double> strengths_;
  std::vector<double> z_;
  std::vector<int> item_wins_;
  std::vector<double> item_z_;
  std::vector<double> log_weights_;
  PhaseTimings timings_;
};

/// Runs config.n_chains independent chains (stream id = chain index) from the
/// singleton start and concatenates their stored draws in chain order.
Trace run_chain(const ComparisonData& data, const SamplerConfig& config, ModelKind model = ModelKind::kBtSbm);

}  // namespace btsbm
