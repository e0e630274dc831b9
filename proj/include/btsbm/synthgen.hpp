#pragma once

#include <cstdint>

#include "btsbm/model.hpp"
#include "btsbm/numerics.hpp"

namespace btsbm {

struct SynthSpec {
  int n_items = 105;
  int k_true = 3;
  double edge_prob = 0.5;
  double match_rate = 5.0;
  double lambda_lo = 0.1;
  double lambda_hi = 3.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError on invalid fields.
  void validate() const;
};

struct SynthData {
  ComparisonData data;
  Partition truth;
  BlockStrengths strengths;
};

/// Round-robin blocks with evenly spaced strengths from lo to hi.
SynthData generate_fixed(const SynthSpec& spec);
SynthData generate_fixed(const SynthSpec& spec, RngStream& rng);

/// Partition from the Gnedin urn, λ_k ~ Gamma(a, b), then matches as in
/// generate_fixed.
SynthData generate_from_prior(int n, const Hyperparameters& hyper, double edge_prob, double match_rate,
                              RngStream& rng);

/// Matches and wins for a given truth. A zero Poisson draw leaves the pair unplayed.
ComparisonData simulate_matches(const Partition& truth, const BlockStrengths& strengths, double edge_prob,
                                double match_rate, RngStream& rng);

}  // namespace btsbm
