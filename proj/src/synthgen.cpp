#include "btsbm/synthgen.hpp"

#include <cmath>
#include <vector>

#include "btsbm/errors.hpp"
#include "btsbm/gnedin.hpp"

namespace btsbm {

void SynthSpec::validate() const {
  if (n_items < 1) throw ConfigError("n_items must be positive");
  if (k_true < 2) throw ConfigError("k_true must be at least 2");
  if (k_true > n_items) throw ConfigError("k_true exceeds n_items");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ConfigError("edge_prob must lie in [0, 1]");
  if (!(match_rate > 0.0) || !std::isfinite(match_rate)) throw ConfigError("match_rate must be positive");
  if (!(lambda_lo > 0.0)) throw ConfigError("lambda_lo must be positive");
  if (!(lambda_lo < lambda_hi) || !std::isfinite(lambda_hi)) throw ConfigError("need lambda_lo < lambda_hi");
}

ComparisonData simulate_matches(const Partition& truth, const BlockStrengths& strengths, double edge_prob,
                                double match_rate, RngStream& rng) {
  const int n = static_cast<int>(truth.size());
  std::vector<WinRecord> records;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!rng.bernoulli(edge_prob)) continue;
      const int n_ij = rng.poisson(match_rate);
      if (n_ij == 0) continue;
      const double li = strengths[truth.label(i)];
      const double lj = strengths[truth.label(j)];
      const int w_ij = rng.binomial(n_ij, bt_win_prob(li, lj));
      if (w_ij > 0) records.push_back({i, j, w_ij});
      if (n_ij - w_ij > 0) records.push_back({j, i, n_ij - w_ij});
    }
  }
  return ComparisonData(n, records);
}

SynthData generate_fixed(const SynthSpec& spec) {
  RngStream rng(spec.seed);
  return generate_fixed(spec, rng);
}

SynthData generate_fixed(const SynthSpec& spec, RngStream& rng) {
  spec.validate();
  std::vector<int> labels(spec.n_items);
  for (int i = 0; i < spec.n_items; ++i) labels[i] = i % spec.k_true;
  std::vector<double> lambda(spec.k_true);
  for (int k = 0; k < spec.k_true; ++k) {
    lambda[k] = spec.lambda_lo + k * (spec.lambda_hi - spec.lambda_lo) / (spec.k_true - 1);
  }
  SynthData out{{}, Partition(std::move(labels)), BlockStrengths(std::move(lambda))};
  out.data = simulate_matches(out.truth, out.strengths, spec.edge_prob, spec.match_rate, rng);
  return out;
}

SynthData generate_from_prior(int n, const Hyperparameters& hyper, double edge_prob, double match_rate,
                              RngStream& rng) {
  const Hyperparameters h = hyper.validated();
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ConfigError("edge_prob must lie in [0, 1]");
  if (!(match_rate > 0.0)) throw ConfigError("match_rate must be positive");
  Partition truth = sample_prior_partition(GnedinParams(h.gamma, n), rng);
  std::vector<double> lambda(truth.num_blocks());
  for (double& l : lambda) l = sample_gamma(h.a, h.b, rng);
  SynthData out{{}, std::move(truth), BlockStrengths(std::move(lambda))};
  out.data = simulate_matches(out.truth, out.strengths, edge_prob, match_rate, rng);
  return out;
}

}  // namespace btsbm
