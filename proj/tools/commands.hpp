#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "btsbm/compare.hpp"
#include "btsbm/sampler.hpp"
#include "btsbm/synthgen.hpp"

namespace btsbm::cli {

struct FitConfig {
  std::filesystem::path input;
  std::filesystem::path roster;  // optional
  std::filesystem::path out_dir;
  SamplerConfig sampler;
  double alpha = 0.05;
  double hpd_mass = 0.95;
  std::optional<int> condition_k;
  bool loo = true;
  bool write_trace = true;
};

struct CompareConfig {
  std::filesystem::path input;
  std::filesystem::path roster;
  std::filesystem::path out_dir;
  SamplerConfig sampler;
  DeltaSeMode se_mode = DeltaSeMode::kHalved;
  // Precomputed traces replace the two fits when given.
  std::filesystem::path trace_sbm;
  std::filesystem::path trace_bt;
};

struct PriorConfig {
  int n = 105;
  double gamma = 0.8;
  std::filesystem::path out_dir;
};

struct SimulateConfig {
  SynthSpec spec;
  std::vector<int> k_grid;
  int replicates = 1;
  bool from_prior = false;
  Hyperparameters hyper;
  std::filesystem::path out_dir;
};

struct DiagnoseConfig {
  std::vector<double> a_grid{1, 2, 3, 4, 5, 6};
  std::vector<double> delta_grid{-2, -1, -0.5, 0, 0.5, 1, 2};
  std::vector<double> z_grid{0.1, 1, 10};
  int wins = 5;
  double gamma = 0.8;
  std::vector<int> context_sizes{40, 40, 24};
  std::vector<double> context_strengths{2.5, 1.0, 0.4};
  std::filesystem::path out_dir;
};

void run_fit(const FitConfig& config);
void run_compare(const CompareConfig& config);
void run_prior(const PriorConfig& config);
void run_simulate(const SimulateConfig& config);
void run_diagnose(const DiagnoseConfig& config);

}  // namespace btsbm::cli
