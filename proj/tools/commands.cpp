#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>

#include "json.hpp"

#include "btsbm/errors.hpp"
#include "btsbm/gnedin.hpp"
#include "btsbm/io.hpp"
#include "btsbm/postprocess.hpp"

namespace btsbm::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string num(double x) { return format_double(x); }

ComparisonData load_input(const fs::path& input, const fs::path& roster) {
  std::vector<std::string> names;
  if (!roster.empty()) names = load_roster(roster);
  ComparisonData data = load_matches(input, names);
  for (const auto& w : data.warnings()) std::cerr << "warning: " << w << '\n';
  return data;
}

const char* scale_step_name(ScaleStep s) {
  switch (s) {
    case ScaleStep::kScaleGibbs: return "gibbs";
    case ScaleStep::kRescale: return "rescale";
    case ScaleStep::kNone: return "none";
  }
  return "?";
}

const char* se_mode_name(DeltaSeMode m) {
  switch (m) {
    case DeltaSeMode::kHalved: return "halved";
    case DeltaSeMode::kConventional: return "conventional";
    case DeltaSeMode::kPaired: return "paired";
  }
  return "?";
}

ordered_json sampler_json(const SamplerConfig& c) {
  return {{"total_iters", c.total_iters}, {"burn_in", c.burn_in}, {"thin", c.thin},
          {"chains", c.n_chains},         {"seed", c.seed},       {"a", c.hyper.a},
          {"b", c.hyper.b},               {"gamma", c.hyper.gamma}, {"scale_step", scale_step_name(c.scale_step)}};
}

Trace timed_run(const ComparisonData& data, const SamplerConfig& config, ModelKind model, const char* tag) {
  const auto t0 = std::chrono::steady_clock::now();
  Trace trace = run_chain(data, config, model);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& t = trace.timings;
  std::cerr << tag << ": " << secs << " s (latents " << t.latents << ", strengths " << t.strengths
            << ", assignments " << t.assignments << ", scale " << t.rescale << ")\n";
  return trace;
}

// Consensus blocks numbered by decreasing mean posterior strength of their
// members, ties by first appearance.
std::vector<int> order_by_strength(const Partition& p, const std::vector<StrengthSummary>& strengths) {
  const int k = p.num_blocks();
  std::vector<double> mean(k, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) mean[p.label(i)] += strengths[i].mean;
  for (int b = 0; b < k; ++b) mean[b] /= p.sizes()[b];
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return mean[x] > mean[y]; });
  std::vector<int> rank(k);
  for (int r = 0; r < k; ++r) rank[order[r]] = r;
  std::vector<int> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = rank[p.label(i)];
  return out;
}

ordered_json elpd_json(const ElpdReport& r) {
  return {{"elpd", r.elpd}, {"se", r.se}, {"n_bad_k", r.n_bad_k}, {"bad_edges", r.bad_edges},
          {"pareto_k_threshold", kParetoKThreshold}};
}

void write_lpd_table(const fs::path& path, const ComparisonData& data, const ElpdReport& r) {
  auto out = open_out(path);
  out << "edge,item_i,item_j,wins_ij,wins_ji,lpd,pareto_k\n";
  const auto edges = data.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& ed = edges[e];
    out << e << ',' << csv_field(data.names()[ed.i]) << ',' << csv_field(data.names()[ed.j]) << ',' << ed.wins_ij
        << ',' << ed.wins_ji << ',' << num(r.per_edge_lpd[e]) << ',' << num(r.pareto_k[e]) << '\n';
  }
}

}  // namespace

void run_fit(const FitConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(config.hpd_mass > 0.0 && config.hpd_mass <= 1.0)) throw ConfigError("hpd mass must lie in (0, 1]");
  if (config.condition_k && *config.condition_k < 1) throw ConfigError("condition-k must be positive");
  const SamplerConfig sampler = config.sampler.validated();
  const ComparisonData data = load_input(config.input, config.roster);
  if (data.n_items() == 0) throw DataError("no items in input");
  fs::create_directories(config.out_dir);

  const Trace trace = timed_run(data, sampler, ModelKind::kBtSbm, "fit");
  const RelabeledTrace rel = relabel(trace);
  const KPosterior kpost = k_posterior(trace);
  const ConsensusSummary cons = consensus_partition(rel);
  const CredibleBall ball = credible_ball(rel, cons.point_partition, config.alpha);
  const MembershipMatrix member = membership_probs(rel, config.condition_k);
  const auto strengths = player_strengths(rel, config.condition_k, config.hpd_mass);
  const BalanceSeries balance = balance_entropy(trace);
  const auto& names = data.names();
  const int n = data.n_items();

  ordered_json pmf = ordered_json::array();
  for (const auto& [k, p] : kpost.probabilities) pmf.push_back({{"K", k}, {"probability", p}});
  ordered_json summary;
  summary["n_items"] = n;
  summary["n_edges"] = data.num_edges();
  summary["n_draws"] = trace.draws.size();
  summary["sampler"] = sampler_json(sampler);
  summary["k_posterior"] = {{"mode", kpost.mode},
                            {"ci95", {kpost.ci95.first, kpost.ci95.second}},
                            {"pmf", pmf}};
  summary["consensus"] = {{"K", cons.k_point}, {"expected_vi", cons.expected_vi}};
  summary["credible_ball"] = {{"alpha", config.alpha},
                              {"epsilon_star", ball.epsilon_star},
                              {"coverage", ball.coverage},
                              {"K_vertical_upper", ball.vertical_upper.num_blocks()},
                              {"K_vertical_lower", ball.vertical_lower.num_blocks()},
                              {"K_horizontal", ball.horizontal.num_blocks()}};
  summary["balance_entropy"] = {{"mean", balance.mean}, {"ci95", {balance.ci95.first, balance.ci95.second}}};
  summary["condition_K"] = config.condition_k ? ordered_json(*config.condition_k) : ordered_json(nullptr);
  summary["hpd_mass"] = config.hpd_mass;
  if (config.loo) summary["loo"] = elpd_json(psis_loo(trace, data, ModelKind::kBtSbm));
  summary["warnings"] = data.warnings();
  write_json(config.out_dir / "summary.json", summary);

  {
    auto out = open_out(config.out_dir / "k_pmf.csv");
    out << "K,probability\n";
    for (const auto& [k, p] : kpost.probabilities) out << k << ',' << num(p) << '\n';
  }
  {
    auto out = open_out(config.out_dir / "membership.csv");
    out << "id";
    for (int k = 1; k <= member.cols; ++k) out << ",block_" << k;
    out << '\n';
    for (int i = 0; i < n; ++i) {
      out << csv_field(names[i]);
      for (int k = 0; k < member.cols; ++k) out << ',' << num(member(i, k));
      out << '\n';
    }
  }
  {
    auto out = open_out(config.out_dir / "strengths.csv");
    out << "id,mean,hpd_lo,hpd_hi\n";
    for (int i = 0; i < n; ++i) {
      out << csv_field(names[i]) << ',' << num(strengths[i].mean) << ',' << num(strengths[i].hpd_lo) << ','
          << num(strengths[i].hpd_hi) << '\n';
    }
  }
  {
    auto out = open_out(config.out_dir / "entropy.csv");
    out << "draw,H,H_norm\n";
    for (std::size_t t = 0; t < balance.per_draw_entropy.size(); ++t) {
      out << t << ',' << num(balance.per_draw_entropy[t]) << ',' << num(balance.per_draw_normalized[t]) << '\n';
    }
  }
  {
    const auto c = order_by_strength(cons.point_partition, strengths);
    const auto up = order_by_strength(ball.vertical_upper, strengths);
    const auto lo = order_by_strength(ball.vertical_lower, strengths);
    const auto hz = order_by_strength(ball.horizontal, strengths);
    auto out = open_out(config.out_dir / "partitions.csv");
    out << "id,consensus,vertical_upper,vertical_lower,horizontal\n";
    for (int i = 0; i < n; ++i) {
      out << csv_field(names[i]) << ',' << c[i] + 1 << ',' << up[i] + 1 << ',' << lo[i] + 1 << ',' << hz[i] + 1
          << '\n';
    }
  }
  if (config.write_trace) write_trace(config.out_dir / "trace.bin", trace);
}

void run_compare(const CompareConfig& config) {
  const SamplerConfig sampler = config.sampler.validated();
  const ComparisonData data = load_input(config.input, config.roster);
  if (data.num_edges() == 0) throw DataError("no comparisons to score");
  fs::create_directories(config.out_dir);

  auto obtain = [&](const fs::path& path, ModelKind model, const char* tag) {
    if (path.empty()) return timed_run(data, sampler, model, tag);
    Trace t = read_trace(path);
    if (t.n_items != data.n_items()) throw DataError(path.string() + ": item count does not match the data");
    return t;
  };
  const Trace sbm = obtain(config.trace_sbm, ModelKind::kBtSbm, "bt-sbm");
  const Trace bt = obtain(config.trace_bt, ModelKind::kBt, "bt");
  // A supplied trace is scored with the likelihood it carries: BT traces hold
  // singletons and the block likelihood reduces to the same thing.
  const ElpdReport r_sbm = psis_loo(sbm, data, ModelKind::kBtSbm);
  const ElpdReport r_bt = psis_loo(bt, data, ModelKind::kBtSbm);
  const DeltaElpd d = delta_elpd(r_sbm, r_bt, config.se_mode);

  write_lpd_table(config.out_dir / "lpd_btsbm.csv", data, r_sbm);
  write_lpd_table(config.out_dir / "lpd_bt.csv", data, r_bt);
  ordered_json report;
  report["n_items"] = data.n_items();
  report["n_edges"] = data.num_edges();
  report["sampler"] = sampler_json(sampler);
  report["btsbm"] = elpd_json(r_sbm);
  report["btsbm"]["n_draws"] = r_sbm.n_draws;
  report["bt"] = elpd_json(r_bt);
  report["bt"]["n_draws"] = r_bt.n_draws;
  report["delta_elpd"] = d.delta;
  report["se_delta"] = d.se_delta;
  report["se_mode"] = se_mode_name(config.se_mode);
  write_json(config.out_dir / "compare.json", report);
}

void run_prior(const PriorConfig& config) {
  if (!(config.gamma > 0.0 && config.gamma < 1.0)) throw ConfigError("gamma must lie strictly inside (0, 1)");
  if (config.n < 1) throw ConfigError("n must be positive");
  const GnedinParams params(config.gamma, config.n);
  const auto pmf = pmf_K_table(params);
  fs::create_directories(config.out_dir);
  {
    auto out = open_out(config.out_dir / "prior_pmf.csv");
    out << "K,pmf,cdf\n";
    double cdf = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      cdf += pmf[k];
      out << k + 1 << ',' << num(pmf[k]) << ',' << num(cdf) << '\n';
    }
  }
  ordered_json j;
  j["n"] = config.n;
  j["gamma"] = config.gamma;
  j["mean_K"] = mean_K(params);
  j["var_K"] = var_K(params);
  j["pmf_sum"] = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  j["pmf"] = pmf;
  write_json(config.out_dir / "prior.json", j);
}

void run_simulate(const SimulateConfig& config) {
  if (config.replicates < 1) throw ConfigError("replicates must be positive");
  std::vector<int> grid = config.k_grid;
  if (config.from_prior) {
    grid = {0};
    (void)config.hyper.validated();
    SynthSpec probe = config.spec;
    probe.k_true = std::max(2, std::min(probe.k_true, probe.n_items));
    if (probe.n_items >= 2) probe.validate();
  } else {
    if (grid.empty()) grid = {config.spec.k_true};
    for (int k : grid) {
      SynthSpec s = config.spec;
      s.k_true = k;
      s.validate();
    }
  }
  fs::create_directories(config.out_dir);

  ordered_json runs = ordered_json::array();
  std::uint64_t index = 0;
  char tag[64];
  for (int k : grid) {
    for (int r = 1; r <= config.replicates; ++r, ++index) {
      const std::uint64_t seed = config.spec.seed + index;
      RngStream rng(seed);
      SynthData sim;
      if (config.from_prior) {
        sim = generate_from_prior(config.spec.n_items, config.hyper, config.spec.edge_prob, config.spec.match_rate,
                                  rng);
        std::snprintf(tag, sizeof tag, "prior_r%02d", r);
      } else {
        SynthSpec s = config.spec;
        s.k_true = k;
        s.seed = seed;
        sim = generate_fixed(s, rng);
        std::snprintf(tag, sizeof tag, "K%d_r%02d", k, r);
      }
      const std::string prefix = std::string("sim_") + tag;
      write_matches(config.out_dir / (prefix + "_data.csv"), sim.data);
      write_roster(config.out_dir / (prefix + "_items.txt"), sim.data.names());
      {
        auto out = open_out(config.out_dir / (prefix + "_truth.csv"));
        out << "id,block,lambda\n";
        for (int i = 0; i < sim.data.n_items(); ++i) {
          const int b = sim.truth.label(i);
          out << csv_field(sim.data.names()[i]) << ',' << b + 1 << ',' << num(sim.strengths[b]) << '\n';
        }
      }
      runs.push_back({{"prefix", prefix},
                      {"k_true", sim.truth.num_blocks()},
                      {"replicate", r},
                      {"seed", seed},
                      {"n_edges", sim.data.num_edges()}});
    }
  }
  ordered_json spec;
  spec["n_items"] = config.spec.n_items;
  spec["edge_prob"] = config.spec.edge_prob;
  spec["match_rate"] = config.spec.match_rate;
  if (config.from_prior) {
    const Hyperparameters h = config.hyper.validated();
    spec["generator"] = "prior";
    spec["a"] = h.a;
    spec["b"] = h.b;
    spec["gamma"] = h.gamma;
  } else {
    spec["generator"] = "fixed";
    spec["lambda_lo"] = config.spec.lambda_lo;
    spec["lambda_hi"] = config.spec.lambda_hi;
    spec["k_grid"] = grid;
  }
  spec["replicates"] = config.replicates;
  spec["base_seed"] = config.spec.seed;
  spec["runs"] = runs;
  write_json(config.out_dir / "spec.json", spec);
}

void run_diagnose(const DiagnoseConfig& config) {
  if (config.wins < 0) throw ConfigError("wins must be non-negative");
  if (!(config.gamma > 0.0 && config.gamma < 1.0)) throw ConfigError("gamma must lie strictly inside (0, 1)");
  if (config.context_sizes.size() != config.context_strengths.size()) {
    throw ConfigError("context sizes and strengths differ in length");
  }
  for (double a : config.a_grid) {
    if (!(a > 0.0)) throw ConfigError("a must be positive");
  }
  for (double z : config.z_grid) {
    if (!(z >= 0.0)) throw ConfigError("Z must be non-negative");
  }
  for (int m : config.context_sizes) {
    if (m < 1) throw ConfigError("context block sizes must be positive");
  }
  for (double l : config.context_strengths) {
    if (!(l > 0.0)) throw ConfigError("context strengths must be positive");
  }
  fs::create_directories(config.out_dir);
  constexpr double h = 1e-5;
  {
    auto out = open_out(config.out_dir / "bias.csv");
    out << "a,delta,w,z,bias,slope\n";
    for (double a : config.a_grid)
      for (double z : config.z_grid)
        for (double d : config.delta_grid) {
          const double bias = new_cluster_bias(a, config.wins, z, d);
          const double slope =
              (new_cluster_bias(a, config.wins, z, d + h) - new_cluster_bias(a, config.wins, z, d - h)) / (2 * h);
          out << num(a) << ',' << num(d) << ',' << config.wins << ',' << num(z) << ',' << num(bias) << ','
              << num(slope) << '\n';
        }
  }
  {
    auto out = open_out(config.out_dir / "pnew.csv");
    out << "a,delta,b,w,z,p_new\n";
    for (double a : config.a_grid)
      for (double z : config.z_grid)
        for (double d : config.delta_grid) {
          Hyperparameters hyper{a, std::exp(digamma(a) - d), config.gamma};
          const auto p = assignment_probabilities(config.context_sizes, config.context_strengths, config.wins, z,
                                                  hyper.validated());
          out << num(a) << ',' << num(d) << ',' << num(hyper.b) << ',' << config.wins << ',' << num(z) << ','
              << num(p.back()) << '\n';
        }
  }
}

}  // namespace btsbm::cli
