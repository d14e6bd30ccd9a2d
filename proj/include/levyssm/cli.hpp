#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "levyssm/forecast.hpp"
#include "levyssm/gibbs.hpp"
#include "levyssm/sim.hpp"

namespace levyssm::cli {

struct Normalization {
  double time_scale = 1.0;
  double value_scale = 1.0;
  double value_offset = 0.0;
};

struct TickDataset {
  std::vector<double> times;   // normalized, strictly increasing, shifted to start at 0
  std::vector<double> values;  // normalized
  Normalization normalization;
  double first_raw_time = 0.0;  // subtracted before scaling; kept for inversion
  std::size_t raw_rows = 0;
};

// CSV `time,value` with a header. Exact-duplicate timestamps collapse to the
// last value; non-monotone times after collapsing are an error.
TickDataset ingest(const std::filesystem::path& path, const Normalization& norm);

// Flat `key = value` text with [section] headers; keys become "section.key".
using ConfigMap = std::map<std::string, std::string>;

ConfigMap default_config();
ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::filesystem::path& path);
void apply_override(ConfigMap& config, const std::string& assignment);

struct SimulateConfig {
  sim::AnalyticSubordinator subordinator;
  double horizon = 100.0;
  int n_obs = 200;
  std::string spacing = "regular";  // or "exponential"
  sim::NVMParams nvm{1.0, 1.0};
  double theta = -0.5;
  double cv_norm = 0.01;
  Eigen::Vector2d x0{0.0, 0.0};
  int truth_mc = 100000;
  int grid_points = 60;
};

struct ForecastConfig {
  int particles = 1000;
  int n_test = 300;
  std::string run_dir;       // infer output to read the posterior from
  bool mix_posterior = false;
};

struct DiagnoseConfig {
  std::string run_dir;
  int max_lag = 200;
  int grid_points = 40;
};

struct RunConfig {
  std::uint64_t seed = 12345;
  std::string data_input;
  Normalization norm;
  gibbs::ChainConfig chain;
  SimulateConfig simulate;
  ForecastConfig forecast;
  DiagnoseConfig diagnose;
  double band_coverage = 0.9;
  int grid_points = 60;
  ConfigMap effective;  // merged key/value view, embedded in manifests
};

// Field-level validation: throws std::invalid_argument naming the bad key.
RunConfig make_run_config(const ConfigMap& map);

int run_simulate(const RunConfig& config, const std::filesystem::path& out_dir);
int run_infer(const RunConfig& config, const std::filesystem::path& out_dir);
int run_forecast(const RunConfig& config, const std::filesystem::path& out_dir);
int run_diagnose(const RunConfig& config, const std::filesystem::path& out_dir);

// Dispatch by subcommand name; returns a process exit status.
int run(const std::string& subcommand, const RunConfig& config,
        const std::filesystem::path& out_dir);

}  // namespace levyssm::cli
