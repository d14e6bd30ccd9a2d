#include "levyssm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "levyssm/io.hpp"

namespace levyssm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

double get_double(const ConfigMap& map, const std::string& key) {
  const auto it = map.find(key);
  if (it == map.end()) throw std::invalid_argument("config: missing key " + key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key " + key + " is not a number: '" +
                                it->second + "'");
  }
}

long get_long(const ConfigMap& map, const std::string& key) {
  const double v = get_double(map, key);
  if (v != std::floor(v)) {
    throw std::invalid_argument("config: key " + key + " must be an integer");
  }
  return static_cast<long>(v);
}

bool get_bool(const ConfigMap& map, const std::string& key) {
  const auto it = map.find(key);
  if (it == map.end()) throw std::invalid_argument("config: missing key " + key);
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::invalid_argument("config: key " + key + " must be true/false");
}

std::string get_string(const ConfigMap& map, const std::string& key) {
  const auto it = map.find(key);
  if (it == map.end()) throw std::invalid_argument("config: missing key " + key);
  return it->second;
}

sim::AnalyticSubordinator subordinator_from(const ConfigMap& map,
                                            const std::string& section) {
  sim::AnalyticSubordinator spec;
  const std::string family = get_string(map, section + ".family");
  if (family == "gamma") {
    spec.family = sim::SubordinatorFamily::kGamma;
  } else if (family == "tempered_stable") {
    spec.family = sim::SubordinatorFamily::kTemperedStable;
  } else if (family == "point_mass") {
    spec.family = sim::SubordinatorFamily::kPointMass;
  } else {
    throw std::invalid_argument("config: " + section +
                                ".family must be gamma|tempered_stable|point_mass");
  }
  spec.shape_c = get_double(map, section + ".c");
  spec.beta = get_double(map, section + ".beta");
  spec.kappa = get_double(map, section + ".kappa");
  spec.gamma = get_double(map, section + ".gamma");
  spec.lambda0 = get_double(map, section + ".lambda0");
  spec.z0 = get_double(map, section + ".z0");
  spec.eps = get_double(map, section + ".eps");
  sim::validate(spec);
  return spec;
}

}  // namespace

TickDataset ingest(const std::filesystem::path& path, const Normalization& norm) {
  if (!(norm.time_scale > 0.0) || !(norm.value_scale > 0.0)) {
    throw std::invalid_argument("ingest: normalization scales must be positive");
  }
  const io::Csv csv = io::read_csv(path);
  if (csv.header.size() != 2) {
    throw std::runtime_error("ingest: expected a time,value CSV with 2 columns");
  }
  TickDataset ds;
  ds.normalization = norm;
  ds.raw_rows = csv.rows.size();
  if (csv.rows.empty()) throw std::runtime_error("ingest: no data rows");

  // Collapse duplicate timestamps, last value wins.
  std::vector<std::pair<double, double>> rows;
  rows.reserve(csv.rows.size());
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const double t = csv.rows[i][0];
    const double v = csv.rows[i][1];
    if (!std::isfinite(t) || !std::isfinite(v)) {
      throw std::runtime_error("ingest: non-finite value at data line " +
                               std::to_string(i + 2));
    }
    if (!rows.empty() && t == rows.back().first) {
      rows.back().second = v;
      continue;
    }
    if (!rows.empty() && t < rows.back().first) {
      throw std::runtime_error("ingest: non-monotone time at data line " +
                               std::to_string(i + 2));
    }
    rows.emplace_back(t, v);
  }
  ds.first_raw_time = rows.front().first;
  ds.times.reserve(rows.size());
  ds.values.reserve(rows.size());
  for (const auto& [t, v] : rows) {
    ds.times.push_back((t - ds.first_raw_time) / norm.time_scale);
    ds.values.push_back((v - norm.value_offset) / norm.value_scale);
  }
  return ds;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::string section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config: malformed section at line " +
                                    std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || section.empty()) {
      throw std::invalid_argument("config: key outside a [section] at line " +
                                  std::to_string(line_no));
    }
    map[section + "." + key] = value;
  }
  return map;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
  return parse_config_text(io::read_file(path));
}

void apply_override(ConfigMap& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || assignment.find('.') == std::string::npos ||
      assignment.find('.') > eq) {
    throw std::invalid_argument("--set expects section.key=value, got '" +
                                assignment + "'");
  }
  config[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

ConfigMap default_config() {
  ConfigMap m;
  m["run.seed"] = "12345";

  m["data.input"] = "";
  m["data.time_scale"] = "1";
  m["data.value_scale"] = "1";
  m["data.value_offset"] = "0";

  m["model.cv_norm"] = "0.01";
  m["model.kappa0"] = "10";
  m["model.x0_pos"] = "0";
  m["model.x0_vel"] = "0";

  m["priors.alpha_w"] = "2";
  m["priors.beta_w"] = "1";
  m["priors.mu_hat_w"] = "0";
  m["priors.k_w"] = "1";
  m["priors.lambda_shape"] = "1";
  m["priors.lambda_rate"] = "0.1";
  m["priors.alpha_shape"] = "1";
  m["priors.alpha_rate"] = "1";
  m["priors.base_shape"] = "1";
  m["priors.base_rate"] = "2";
  m["priors.theta_log_mean"] = "0";
  m["priors.theta_log_sd"] = "1.5";

  m["truncation.k"] = "0";
  m["truncation.k_max"] = "4096";

  m["chain.iterations"] = "120000";
  m["chain.burn_in"] = "20000";
  m["chain.thin"] = "100";
  m["chain.block_len"] = "5";
  m["chain.block_overlap"] = "2";
  m["chain.theta_prop_scale"] = "0.5";
  m["chain.adapt_theta"] = "true";
  m["chain.theta_init"] = "0";

  m["init.family"] = "tempered_stable";
  m["init.c"] = "1";
  m["init.beta"] = "1";
  m["init.kappa"] = "0.5";
  m["init.gamma"] = "1";
  m["init.lambda0"] = "1";
  m["init.z0"] = "1";
  m["init.eps"] = "0.01";

  m["simulate.family"] = "gamma";
  m["simulate.c"] = "2";
  m["simulate.beta"] = "2";
  m["simulate.kappa"] = "0.5";
  m["simulate.gamma"] = "1";
  m["simulate.lambda0"] = "1";
  m["simulate.z0"] = "1";
  m["simulate.eps"] = "0.03";
  m["simulate.horizon"] = "100";
  m["simulate.n_obs"] = "200";
  m["simulate.spacing"] = "regular";
  m["simulate.mu_w"] = "1";
  m["simulate.sigma_w2"] = "1";
  m["simulate.theta"] = "-0.5";
  m["simulate.cv_norm"] = "0.01";
  m["simulate.x0_pos"] = "0";
  m["simulate.x0_vel"] = "0";
  m["simulate.truth_mc"] = "100000";

  m["forecast.particles"] = "1000";
  m["forecast.n_test"] = "300";
  m["forecast.run_dir"] = "";
  m["forecast.mix_posterior"] = "false";

  m["diagnose.run_dir"] = "";
  m["diagnose.max_lag"] = "200";
  m["diagnose.grid_points"] = "40";

  m["output.band_coverage"] = "0.9";
  m["output.grid_points"] = "60";
  return m;
}

RunConfig make_run_config(const ConfigMap& user) {
  ConfigMap map = default_config();
  for (const auto& [k, v] : user) {
    if (map.find(k) == map.end()) {
      throw std::invalid_argument("config: unknown key " + k);
    }
    map[k] = v;
  }

  RunConfig cfg;
  cfg.effective = map;
  const double seed = get_double(map, "run.seed");
  if (seed < 0 || seed != std::floor(seed)) {
    throw std::invalid_argument("config: run.seed must be a nonnegative integer");
  }
  cfg.seed = static_cast<std::uint64_t>(seed);

  cfg.data_input = get_string(map, "data.input");
  cfg.norm.time_scale = get_double(map, "data.time_scale");
  cfg.norm.value_scale = get_double(map, "data.value_scale");
  cfg.norm.value_offset = get_double(map, "data.value_offset");

  gibbs::ChainConfig& chain = cfg.chain;
  chain.model.obs_noise_norm = get_double(map, "model.cv_norm");
  chain.model.kappa0 = get_double(map, "model.kappa0");
  chain.model.x0_mean = {get_double(map, "model.x0_pos"),
                         get_double(map, "model.x0_vel")};
  chain.model.prior.alpha_w = get_double(map, "priors.alpha_w");
  chain.model.prior.beta_w = get_double(map, "priors.beta_w");
  chain.model.prior.mu_hat_w = get_double(map, "priors.mu_hat_w");
  chain.model.prior.k_w = get_double(map, "priors.k_w");
  chain.lambda_prior = {get_double(map, "priors.lambda_shape"),
                        get_double(map, "priors.lambda_rate")};
  chain.dp_hyper.alpha_prior = {get_double(map, "priors.alpha_shape"),
                                get_double(map, "priors.alpha_rate")};
  chain.dp_hyper.base = {get_double(map, "priors.base_shape"),
                         get_double(map, "priors.base_rate")};
  chain.dp_hyper.truncation = static_cast<int>(get_long(map, "truncation.k"));
  chain.dp_hyper.truncation_cap = static_cast<int>(get_long(map, "truncation.k_max"));
  chain.theta_prior = {get_double(map, "priors.theta_log_mean"),
                       get_double(map, "priors.theta_log_sd")};
  chain.n_iter = get_long(map, "chain.iterations");
  chain.burn_in = get_long(map, "chain.burn_in");
  chain.thin = static_cast<int>(get_long(map, "chain.thin"));
  chain.schedule.block_len = static_cast<int>(get_long(map, "chain.block_len"));
  chain.schedule.overlap = static_cast<int>(get_long(map, "chain.block_overlap"));
  chain.theta_prop_scale = get_double(map, "chain.theta_prop_scale");
  chain.adapt_theta = get_bool(map, "chain.adapt_theta");
  chain.theta_init = get_double(map, "chain.theta_init");
  chain.init_subordinator = subordinator_from(map, "init");

  SimulateConfig& simc = cfg.simulate;
  simc.subordinator = subordinator_from(map, "simulate");
  simc.horizon = get_double(map, "simulate.horizon");
  simc.n_obs = static_cast<int>(get_long(map, "simulate.n_obs"));
  simc.spacing = get_string(map, "simulate.spacing");
  if (simc.spacing != "regular" && simc.spacing != "exponential") {
    throw std::invalid_argument("config: simulate.spacing must be regular|exponential");
  }
  simc.nvm = {get_double(map, "simulate.mu_w"), get_double(map, "simulate.sigma_w2")};
  simc.theta = get_double(map, "simulate.theta");
  simc.cv_norm = get_double(map, "simulate.cv_norm");
  simc.x0 = {get_double(map, "simulate.x0_pos"), get_double(map, "simulate.x0_vel")};
  simc.truth_mc = static_cast<int>(get_long(map, "simulate.truth_mc"));
  if (!(simc.horizon > 0.0) || simc.n_obs < 1) {
    throw std::invalid_argument("config: simulate.horizon > 0 and simulate.n_obs >= 1 required");
  }
  if (!(simc.theta < 0.0)) {
    throw std::invalid_argument("config: simulate.theta must be negative");
  }

  cfg.forecast.particles = static_cast<int>(get_long(map, "forecast.particles"));
  cfg.forecast.n_test = static_cast<int>(get_long(map, "forecast.n_test"));
  cfg.forecast.run_dir = get_string(map, "forecast.run_dir");
  cfg.forecast.mix_posterior = get_bool(map, "forecast.mix_posterior");
  if (cfg.forecast.particles < 1 || cfg.forecast.n_test < 1) {
    throw std::invalid_argument("config: forecast.particles and forecast.n_test must be >= 1");
  }

  cfg.diagnose.run_dir = get_string(map, "diagnose.run_dir");
  cfg.diagnose.max_lag = static_cast<int>(get_long(map, "diagnose.max_lag"));
  cfg.diagnose.grid_points = static_cast<int>(get_long(map, "diagnose.grid_points"));

  cfg.band_coverage = get_double(map, "output.band_coverage");
  cfg.grid_points = static_cast<int>(get_long(map, "output.grid_points"));
  if (!(cfg.band_coverage > 0.0) || !(cfg.band_coverage < 1.0)) {
    throw std::invalid_argument("config: output.band_coverage must be in (0, 1)");
  }
  if (cfg.grid_points < 2) {
    throw std::invalid_argument("config: output.grid_points must be >= 2");
  }
  return cfg;
}

int run(const std::string& subcommand, const RunConfig& config,
        const std::filesystem::path& out_dir) {
  if (subcommand == "simulate") return run_simulate(config, out_dir);
  if (subcommand == "infer") return run_infer(config, out_dir);
  if (subcommand == "forecast") return run_forecast(config, out_dir);
  if (subcommand == "diagnose") return run_diagnose(config, out_dir);
  throw std::invalid_argument("unknown subcommand: " + subcommand);
}

}  // namespace levyssm::cli
