#include "btsbm/sampler.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "btsbm/errors.hpp"

namespace btsbm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

SamplerConfig SamplerConfig::validated() const {
  SamplerConfig c = *this;
  if (c.total_iters < 1) throw ConfigError("total_iters must be positive");
  if (c.burn_in < 0 || c.burn_in >= c.total_iters) throw ConfigError("burn_in must lie in [0, total_iters)");
  if (c.thin < 1) throw ConfigError("thin must be >= 1");
  if (c.n_chains < 1) throw ConfigError("n_chains must be >= 1");
  c.hyper = c.hyper.validated();
  return c;
}

AugmentedLatents update_latents(const ComparisonData& data, const Partition& partition,
                                const BlockStrengths& strengths, RngStream& rng) {
  AugmentedLatents out;
  out.z.reserve(data.num_edges());
  for (const auto& e : data.edges()) {
    const double rate = strengths[partition.label(e.i)] + strengths[partition.label(e.j)];
    out.z.push_back(sample_gamma(e.matches(), rate, rng));
  }
  return out;
}

BlockStrengths update_strengths(const SufficientStats& stats, const Partition& partition,
                                const Hyperparameters& hyper, RngStream& rng) {
  const int k_blocks = partition.num_blocks();
  std::vector<double> shape(k_blocks, hyper.a);
  std::vector<double> rate(k_blocks, hyper.b);
  for (std::size_t i = 0; i < partition.size(); ++i) {
    shape[partition.label(i)] += stats.total_wins[i];
    rate[partition.label(i)] += stats.total_z[i];
  }
  std::vector<double> out(k_blocks);
  for (int k = 0; k < k_blocks; ++k) out[k] = sample_gamma(shape[k], rate[k], rng);
  return BlockStrengths(std::move(out));
}

void assignment_log_weights(std::span<const int> sizes, std::span<const double> strengths, int w_i, double z_i,
                            const Hyperparameters& hyper, std::span<double> out) {
  const int k_blocks = static_cast<int>(sizes.size());
  int others = 0;
  for (int m : sizes) others += m;
  const double log_existing = std::log(others - k_blocks + hyper.gamma);
  for (int k = 0; k < k_blocks; ++k) {
    out[k] = std::log(sizes[k] + 1.0) + log_existing + w_i * std::log(strengths[k]) - strengths[k] * z_i;
  }
  const double shape = hyper.a + w_i;
  const double log_marginal =
      hyper.a * std::log(hyper.b) + log_gamma(shape) - log_gamma(hyper.a) - shape * std::log(hyper.b + z_i);
  // With no other block the urn opens a new one for sure.
  const double log_urn_new =
      k_blocks == 0 ? 0.0 : std::log(static_cast<double>(k_blocks) * k_blocks - k_blocks * hyper.gamma);
  out[k_blocks] = log_urn_new + log_marginal;
}

std::vector<double> assignment_probabilities(std::span<const int> sizes, std::span<const double> strengths,
                                             int w_i, double z_i, const Hyperparameters& hyper) {
  std::vector<double> w(sizes.size() + 1);
  assignment_log_weights(sizes, strengths, w_i, z_i, hyper, w);
  const double norm = log_sum_exp(w);
  for (double& x : w) x = std::exp(x - norm);
  return w;
}

void rescale_in_place(std::span<double> strengths) {
  if (strengths.empty()) return;
  double mean_log = 0.0;
  for (double l : strengths) mean_log += std::log(l);
  mean_log /= static_cast<double>(strengths.size());
  for (double& l : strengths) l = std::exp(std::log(l) - mean_log);
}

BlockStrengths rescale(const BlockStrengths& strengths) {
  std::vector<double> v(strengths.values().begin(), strengths.values().end());
  rescale_in_place(v);
  return BlockStrengths(std::move(v));
}

GibbsSampler::GibbsSampler(const ComparisonData& data, const Hyperparameters& hyper, RngStream rng, ModelKind model,
                           ScaleStep scale_step)
    : data_(&data), hyper_(hyper.validated()), rng_(std::move(rng)), model_(model), scale_step_(scale_step) {
  rebind(data);
  initialize_singletons();
}

void GibbsSampler::rebind(const ComparisonData& data) {
  if (!labels_.empty() && data.n_items() != static_cast<int>(labels_.size())) {
    throw DataError("rebind: item count changed");
  }
  data_ = &data;
  item_wins_ = total_wins(data);
  z_.assign(data.num_edges(), 0.0);
  item_z_.assign(data.n_items(), 0.0);
}

void GibbsSampler::initialize_singletons() {
  const int n = data_->n_items();
  labels_.resize(n);
  sizes_.assign(n, 1);
  strengths_.resize(n);
  for (int i = 0; i < n; ++i) {
    labels_[i] = i;
    strengths_[i] = sample_gamma(hyper_.a, hyper_.b, rng_);
  }
}

void GibbsSampler::set_state(const Partition& partition, const BlockStrengths& strengths) {
  if (static_cast<int>(partition.size()) != data_->n_items() ||
      static_cast<int>(strengths.size()) != partition.num_blocks()) {
    throw DomainError("set_state: inconsistent partition/strengths");
  }
  labels_.assign(partition.labels().begin(), partition.labels().end());
  sizes_.assign(partition.sizes().begin(), partition.sizes().end());
  strengths_.assign(strengths.values().begin(), strengths.values().end());
}

void GibbsSampler::compute_item_latent_totals() {
  std::fill(item_z_.begin(), item_z_.end(), 0.0);
  const auto edges = data_->edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    item_z_[edges[e].i] += z_[e];
    item_z_[edges[e].j] += z_[e];
  }
}

void GibbsSampler::update_latents() {
  const auto edges = data_->edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    const double rate = strengths_[labels_[edge.i]] + strengths_[labels_[edge.j]];
    z_[e] = sample_gamma(edge.matches(), rate, rng_);
  }
  compute_item_latent_totals();
}

void GibbsSampler::update_strengths() {
  const int k_blocks = num_blocks();
  std::vector<double> shape(k_blocks, hyper_.a);
  std::vector<double> rate(k_blocks, hyper_.b);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    shape[labels_[i]] += item_wins_[i];
    rate[labels_[i]] += item_z_[i];
  }
  for (int k = 0; k < k_blocks; ++k) strengths_[k] = sample_gamma(shape[k], rate[k], rng_);
}

void GibbsSampler::remove_item(int item) {
  const int k = labels_[item];
  if (--sizes_[k] > 0) return;
  sizes_.erase(sizes_.begin() + k);
  strengths_.erase(strengths_.begin() + k);
  for (int& x : labels_) {
    if (x > k) --x;
  }
}

void GibbsSampler::update_assignment(int item) {
  remove_item(item);
  const int k_blocks = num_blocks();
  log_weights_.resize(k_blocks + 1);
  assignment_log_weights(sizes_, strengths_, item_wins_[item], item_z_[item], hyper_, log_weights_);
  const auto k = static_cast<int>(rng_.categorical_log(log_weights_));
  if (k == k_blocks) {
    sizes_.push_back(1);
    strengths_.push_back(sample_gamma(hyper_.a + item_wins_[item], hyper_.b + item_z_[item], rng_));
  } else {
    ++sizes_[k];
  }
  labels_[item] = k;
}

void GibbsSampler::update_scale() {
  switch (scale_step_) {
    case ScaleStep::kScaleGibbs: {
      // λ = s·u with u on the simplex: under the Gamma(a, b) prior s ~ Gamma(K a, b)
      // independently of u, and the likelihood only sees u.
      double total = 0.0;
      for (double l : strengths_) total += l;
      const double target = sample_gamma(hyper_.a * num_blocks(), hyper_.b, rng_);
      const double factor = target / total;
      for (double& l : strengths_) l *= factor;
      break;
    }
    case ScaleStep::kRescale:
      rescale_in_place(strengths_);
      break;
    case ScaleStep::kNone:
      break;
  }
}

std::vector<double> GibbsSampler::normalized_strengths() const {
  std::vector<double> out = strengths_;
  rescale_in_place(out);
  return out;
}

void GibbsSampler::sweep() {
  auto t0 = Clock::now();
  update_latents();
  timings_.latents += seconds_since(t0);

  t0 = Clock::now();
  update_strengths();
  timings_.strengths += seconds_since(t0);

  if (model_ == ModelKind::kBtSbm) {
    t0 = Clock::now();
    const int n = static_cast<int>(labels_.size());
    for (int i = 0; i < n; ++i) update_assignment(i);
    timings_.assignments += seconds_since(t0);
  }

  t0 = Clock::now();
  update_scale();
  timings_.rescale += seconds_since(t0);
}

namespace {

Trace run_one(const ComparisonData& data, const SamplerConfig& config, ModelKind model, int chain) {
  Trace trace;
  trace.model = model;
  trace.n_items = data.n_items();
  trace.config = config;
  GibbsSampler sampler(data, config.hyper, RngStream(config.seed, static_cast<std::uint64_t>(chain)), model,
                       config.scale_step);
  const int kept = (config.total_iters - config.burn_in + config.thin - 1) / config.thin;
  trace.draws.reserve(kept);
  for (int t = 1; t <= config.total_iters; ++t) {
    sampler.sweep();
    if (t > config.burn_in && (t - config.burn_in - 1) % config.thin == 0) {
      Draw d;
      d.iteration = static_cast<std::uint64_t>(t);
      d.chain = chain;
      d.labels.assign(sampler.labels().begin(), sampler.labels().end());
      d.strengths = sampler.normalized_strengths();
      trace.draws.push_back(std::move(d));
    }
  }
  trace.timings = sampler.timings();
  return trace;
}

}  // namespace

Trace run_chain(const ComparisonData& data, const SamplerConfig& config_in, ModelKind model) {
  const SamplerConfig config = config_in.validated();
  std::vector<Trace> chains(config.n_chains);
  if (config.n_chains == 1) {
    chains[0] = run_one(data, config, model, 0);
  } else {
    std::vector<std::exception_ptr> errors(config.n_chains);
    {
      std::vector<std::jthread> workers;
      workers.reserve(config.n_chains);
      for (int c = 0; c < config.n_chains; ++c) {
        workers.emplace_back([&, c] {
          try {
            chains[c] = run_one(data, config, model, c);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  Trace out = std::move(chains[0]);
  for (int c = 1; c < config.n_chains; ++c) {
    auto& draws = chains[c].draws;
    out.draws.insert(out.draws.end(), std::make_move_iterator(draws.begin()), std::make_move_iterator(draws.end()));
    out.timings.latents += chains[c].timings.latents;
    out.timings.strengths += chains[c].timings.strengths;
    out.timings.assignments += chains[c].timings.assignments;
    out.timings.rescale += chains[c].timings.rescale;
  }
  return out;
}

}  // namespace btsbm
