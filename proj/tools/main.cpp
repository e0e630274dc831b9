#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "btsbm/errors.hpp"
#include "commands.hpp"

namespace {

using namespace btsbm;

const std::map<std::string, ScaleStep> kScaleSteps{
    {"gibbs", ScaleStep::kScaleGibbs}, {"rescale", ScaleStep::kRescale}, {"none", ScaleStep::kNone}};
const std::map<std::string, DeltaSeMode> kSeModes{{"halved", DeltaSeMode::kHalved},
                                                  {"conventional", DeltaSeMode::kConventional},
                                                  {"paired", DeltaSeMode::kPaired}};

void add_sampler_options(CLI::App* cmd, SamplerConfig& c) {
  cmd->add_option("--iters", c.total_iters, "Total sweeps per chain")->capture_default_str();
  cmd->add_option("--burn-in", c.burn_in, "Discarded leading sweeps")->capture_default_str();
  cmd->add_option("--thin", c.thin, "Keep every k-th sweep after burn-in")->capture_default_str();
  cmd->add_option("--chains", c.n_chains, "Independent chains")->capture_default_str();
  cmd->add_option("--a", c.hyper.a, "Gamma shape for block strengths")->capture_default_str();
  cmd->add_option("--b", c.hyper.b, "Gamma rate (0 = aligned with a)")->capture_default_str();
  cmd->add_option("--gamma", c.hyper.gamma, "Gnedin prior parameter in (0, 1)")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--scale-step", c.scale_step, "End-of-sweep scale move")
      ->transform(CLI::CheckedTransformer(kScaleSteps, CLI::ignore_case))
      ->default_str("gibbs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bradley-Terry stochastic block model inference"};
  app.require_subcommand(1);

  cli::FitConfig fit;
  auto* fit_cmd = app.add_subcommand("fit", "Sample the block model posterior and summarise it");
  fit_cmd->add_option("-i,--input", fit.input, "Match CSV (winner,loser[,count])")->required();
  fit_cmd->add_option("--items", fit.roster, "Item roster, one identifier per line");
  fit_cmd->add_option("-o,--out", fit.out_dir, "Output directory")->required();
  add_sampler_options(fit_cmd, fit.sampler);
  fit_cmd->add_option("--alpha", fit.alpha, "Credible ball level")->capture_default_str();
  fit_cmd->add_option("--hpd-mass", fit.hpd_mass, "HPD interval mass")->capture_default_str();
  int condition_k = 0;
  fit_cmd->add_option("--condition-k", condition_k, "Summarise only draws with this many blocks");
  bool no_loo = false;
  bool no_trace = false;
  fit_cmd->add_flag("--no-loo", no_loo, "Skip the PSIS-LOO fields");
  fit_cmd->add_flag("--no-trace", no_trace, "Do not write trace.bin");

  cli::CompareConfig cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "PSIS-LOO comparison of the block model against plain BT");
  cmp_cmd->add_option("-i,--input", cmp.input, "Match CSV")->required();
  cmp_cmd->add_option("--items", cmp.roster, "Item roster");
  cmp_cmd->add_option("-o,--out", cmp.out_dir, "Output directory")->required();
  add_sampler_options(cmp_cmd, cmp.sampler);
  cmp_cmd->add_option("--se-mode", cmp.se_mode, "Standard error of the difference")
      ->transform(CLI::CheckedTransformer(kSeModes, CLI::ignore_case))
      ->default_str("halved");
  cmp_cmd->add_option("--trace-sbm", cmp.trace_sbm, "Use this trace for the block model");
  cmp_cmd->add_option("--trace-bt", cmp.trace_bt, "Use this trace for plain BT");

  cli::PriorConfig prior;
  auto* prior_cmd = app.add_subcommand("prior", "Prior law of the number of blocks");
  prior_cmd->add_option("-n,--n", prior.n, "Number of items")->capture_default_str();
  prior_cmd->add_option("--gamma", prior.gamma, "Gnedin parameter")->capture_default_str();
  prior_cmd->add_option("-o,--out", prior.out_dir, "Output directory")->required();

  cli::SimulateConfig sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Synthetic match data with known blocks");
  sim_cmd->add_option("-n,--n", sim.spec.n_items, "Number of items")->capture_default_str();
  sim_cmd->add_option("-k,--k", sim.k_grid, "True block counts (one batch per value)");
  sim_cmd->add_option("-r,--replicates", sim.replicates, "Replicates per block count")->capture_default_str();
  sim_cmd->add_option("--edge-prob", sim.spec.edge_prob, "Probability that a pair meets")->capture_default_str();
  sim_cmd->add_option("--match-rate", sim.spec.match_rate, "Poisson mean of matches per pair")
      ->capture_default_str();
  sim_cmd->add_option("--lambda-lo", sim.spec.lambda_lo, "Weakest block strength")->capture_default_str();
  sim_cmd->add_option("--lambda-hi", sim.spec.lambda_hi, "Strongest block strength")->capture_default_str();
  sim_cmd->add_option("--seed", sim.spec.seed, "Base seed, incremented per replicate")->capture_default_str();
  sim_cmd->add_flag("--from-prior", sim.from_prior, "Draw partition and strengths from the prior");
  sim_cmd->add_option("--a", sim.hyper.a, "Prior shape (with --from-prior)")->capture_default_str();
  sim_cmd->add_option("--gamma", sim.hyper.gamma, "Gnedin parameter (with --from-prior)")->capture_default_str();
  sim_cmd->add_option("-o,--out", sim.out_dir, "Output directory")->required();

  cli::DiagnoseConfig diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Rate-alignment diagnostics for opening new blocks");
  diag_cmd->add_option("--a-grid", diag.a_grid, "Shape values")->delimiter(',');
  diag_cmd->add_option("--delta-grid", diag.delta_grid, "Bias values psi(a) - log b")->delimiter(',');
  diag_cmd->add_option("--z-grid", diag.z_grid, "Latent totals Z_i")->delimiter(',');
  diag_cmd->add_option("--wins", diag.wins, "Wins w_i of the item")->capture_default_str();
  diag_cmd->add_option("--gamma", diag.gamma, "Gnedin parameter")->capture_default_str();
  diag_cmd->add_option("--sizes", diag.context_sizes, "Sizes of the other blocks")->delimiter(',');
  diag_cmd->add_option("--strengths", diag.context_strengths, "Strengths of the other blocks")->delimiter(',');
  diag_cmd->add_option("-o,--out", diag.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*fit_cmd) {
      if (fit_cmd->count("--condition-k") > 0) fit.condition_k = condition_k;
      fit.loo = !no_loo;
      fit.write_trace = !no_trace;
      cli::run_fit(fit);
    } else if (*cmp_cmd) {
      cli::run_compare(cmp);
    } else if (*prior_cmd) {
      cli::run_prior(prior);
    } else if (*sim_cmd) {
      cli::run_simulate(sim);
    } else if (*diag_cmd) {
      cli::run_diagnose(diag);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const DomainError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
