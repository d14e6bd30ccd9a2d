// Workflow implementations behind the CLI subcommands: simulate, infer,
// forecast, diagnose. Each writes plot-ready CSV plus a manifest that pins the
// effective config, seed, and input hash so a run can be reproduced exactly.

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <set>

#include "levyssm/cli.hpp"
#include "levyssm/diag.hpp"
#include "levyssm/io.hpp"
#include "levyssm/nvm.hpp"
#include "levyssm/quadrature.hpp"

namespace levyssm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json config_json(const ConfigMap& map) {
  json j = json::object();
  for (const auto& [k, v] : map) j[k] = v;
  return j;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const RunConfig& cfg, const json& extra) {
  json manifest;
  manifest["command"] = command;
  manifest["seed"] = cfg.seed;
  manifest["config"] = config_json(cfg.effective);
  for (const auto& [k, v] : extra.items()) manifest[k] = v;
  io::write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<double> make_obs_times(const SimulateConfig& cfg, Rng& rng) {
  std::vector<double> times(static_cast<std::size_t>(cfg.n_obs));
  if (cfg.spacing == "regular") {
    for (int j = 0; j < cfg.n_obs; ++j) {
      times[static_cast<std::size_t>(j)] =
          cfg.horizon * static_cast<double>(j + 1) / cfg.n_obs;
    }
    return times;
  }
  // Exponential gaps rescaled to end exactly at the horizon.
  std::exponential_distribution<double> expo(1.0);
  double acc = 0.0;
  for (auto& t : times) {
    acc += expo(rng);
    t = acc;
  }
  for (auto& t : times) t *= cfg.horizon / acc;
  return times;
}

nvm::NvmGroundTruth make_truth(const SimulateConfig& cfg, Rng& rng) {
  return nvm::nvm_ground_truth(cfg.subordinator, cfg.nvm, cfg.truth_mc, rng);
}

struct RetainedFiles {
  std::vector<dp::DiscreteLevyMeasure> measures;
  std::vector<double> thetas;
  std::vector<double> sigw2_shape, sigw2_scale, muw_mean, muw_rel_var;
};

RetainedFiles read_infer_run(const fs::path& run_dir) {
  RetainedFiles out;
  const io::Csv params = io::read_csv(run_dir / "retained_params.csv");
  for (const auto& row : params.rows) {
    out.thetas.push_back(row[1]);
    out.sigw2_shape.push_back(row[4]);
    out.sigw2_scale.push_back(row[5]);
    out.muw_mean.push_back(row[6]);
    out.muw_rel_var.push_back(row[7]);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(run_dir / "measures")) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const io::Csv csv = io::read_csv(f);
    dp::DiscreteLevyMeasure m;
    m.measure.atoms.resize(static_cast<Eigen::Index>(csv.rows.size()));
    m.measure.weights.resize(m.measure.atoms.size());
    double total = 0.0;
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
      m.measure.atoms(static_cast<Eigen::Index>(i)) = csv.rows[i][0];
      m.measure.weights(static_cast<Eigen::Index>(i)) = csv.rows[i][1];
      total += csv.rows[i][1];
    }
    m.rate = total;
    m.measure.weights /= total;
    out.measures.push_back(std::move(m));
  }
  if (out.measures.empty() || out.measures.size() != out.thetas.size()) {
    throw std::runtime_error("read_infer_run: inconsistent retained samples in " +
                             run_dir.string());
  }
  return out;
}

// Posterior-mean measure usable for proposals: pool every retained atom with
// mass W / N_s, merge duplicates, drop a vanishing fraction of small mass.
dp::DiscreteLevyMeasure pooled_measure(const std::vector<dp::DiscreteLevyMeasure>& samples) {
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  std::map<double, double> mass;
  for (const auto& s : samples) {
    for (Eigen::Index j = 0; j < s.measure.atoms.size(); ++j) {
      mass[s.measure.atoms(j)] += inv_n * s.mass(j);
    }
  }
  double total = 0.0;
  for (const auto& [a, w] : mass) total += w;
  std::vector<std::pair<double, double>> kept(mass.begin(), mass.end());
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.second > b.second; });
  double acc = 0.0;
  std::size_t n_keep = kept.size();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    acc += kept[i].second;
    if (acc >= total * (1.0 - 1e-9)) {
      n_keep = i + 1;
      break;
    }
  }
  kept.resize(n_keep);
  dp::DiscreteLevyMeasure out;
  out.rate = total;
  out.measure.atoms.resize(static_cast<Eigen::Index>(kept.size()));
  out.measure.weights.resize(out.measure.atoms.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    out.measure.atoms(static_cast<Eigen::Index>(i)) = kept[i].first;
    out.measure.weights(static_cast<Eigen::Index>(i)) = kept[i].second / total;
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

// Writes retained measure samples as they arrive (duplicates merged when
// reporting, per the measure CSV contract).
class CsvSampleSink : public gibbs::SampleSink {
 public:
  explicit CsvSampleSink(fs::path dir) : dir_(std::move(dir)) {}

  void on_sample(const gibbs::RetainedSample& sample) override {
    const dp::DiscreteMeasure merged = dp::merge_duplicates(sample.measure.measure);
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(merged.atoms.size()));
    for (Eigen::Index j = 0; j < merged.atoms.size(); ++j) {
      rows.push_back({merged.atoms(j), sample.measure.rate * merged.weights(j)});
    }
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%06ld.csv", sample.iteration);
    io::write_csv(dir_ / name, {"atom", "mass"}, rows);
  }

 private:
  fs::path dir_;
};

struct MixtureMoments {
  double mean = 0.0;
  double sd = 0.0;
};

MixtureMoments mixture_moments(const std::vector<gibbs::RetainedSample>& samples,
                               std::size_t t_index, int coord) {
  double mean = 0.0;
  double second = 0.0;
  for (const auto& s : samples) {
    const gibbs::TimeMarginal& tm = s.filtering[t_index];
    const double dof = std::max(tm.dof, 2.5);
    const double var = tm.scale_diag(coord) * dof / (dof - 2.0);
    mean += tm.location(coord);
    second += var + tm.location(coord) * tm.location(coord);
  }
  const double n = static_cast<double>(samples.size());
  mean /= n;
  return {mean, std::sqrt(std::max(0.0, second / n - mean * mean))};
}

}  // namespace

int run_simulate(const RunConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  Rng rng_times = make_rng(cfg.seed, "sim-times");
  Rng rng_series = make_rng(cfg.seed, "sim-series");
  Rng rng_ssm = make_rng(cfg.seed, "sim-ssm");
  Rng rng_truth = make_rng(cfg.seed, "sim-truth");

  const SimulateConfig& sc = cfg.simulate;
  // Truncation must keep the expected jump count per observation window
  // bounded (<= 1e4); otherwise eps is too small for the chosen grid.
  const double window = sc.horizon / sc.n_obs;
  const double activity = sim::truncated_activity(sc.subordinator);
  if (activity * window > 1e4) {
    throw std::invalid_argument(
        "simulate: truncated activity " + std::to_string(activity) +
        " per unit time exceeds 1e4 jumps per observation window; raise simulate.eps");
  }
  const std::vector<double> times = make_obs_times(sc, rng_times);
  const sim::JumpSeries series = sim::regroup(
      sim::simulate_subordinator(sc.subordinator, sc.horizon, rng_series), times);
  const sim::LangevinParams params{sc.theta, sc.cv_norm};
  const sim::SsmPath path =
      sim::simulate_ssm(series, params, sc.nvm, times, sc.x0, rng_ssm);

  std::vector<std::vector<double>> obs_rows, state_rows, jump_rows;
  for (std::size_t j = 0; j < times.size(); ++j) {
    obs_rows.push_back({times[j], path.observations[j]});
    state_rows.push_back({times[j], path.states[j](0), path.states[j](1)});
    for (const auto& jump : series.groups[j]) {
      jump_rows.push_back({static_cast<double>(j), jump.size, jump.time});
    }
  }
  io::write_csv(out_dir / "observations.csv", {"time", "value"}, obs_rows);
  io::write_csv(out_dir / "true_states.csv", {"time", "position", "velocity"},
                state_rows);
  io::write_csv(out_dir / "true_jumps.csv", {"interval_index", "size", "time"},
                jump_rows);

  // Ground-truth sidecars: subordinator tail by quadrature, NVM by the
  // truncated Monte Carlo estimator.
  const double eps = sc.subordinator.eps;
  double max_size = 10.0 * eps;
  for (const auto& g : series.groups) {
    for (const auto& j : g) max_size = std::max(max_size, j.size);
  }
  const std::vector<double> grid =
      nvm::log_grid(eps / 10.0, 10.0 * max_size, cfg.grid_points);
  std::vector<std::vector<double>> tail_rows;
  for (double x : grid) {
    tail_rows.push_back({x, sim::truncated_tail(sc.subordinator, x)});
  }
  io::write_csv(out_dir / "true_subordinator_tail.csv", {"x", "tail"}, tail_rows);

  const nvm::NvmGroundTruth truth = make_truth(sc, rng_truth);
  std::vector<std::vector<double>> nvm_tail_rows, nvm_density_rows;
  for (double x : grid) {
    nvm_tail_rows.push_back({x, truth.upper_tail(x), truth.lower_tail(x)});
  }
  const double half_width =
      std::abs(sc.nvm.mu_w) * max_size +
      5.0 * std::sqrt(sc.nvm.sigma_w2 * max_size);
  for (int i = 0; i <= 2 * cfg.grid_points; ++i) {
    const double x =
        -half_width + half_width * static_cast<double>(i) / cfg.grid_points;
    nvm_density_rows.push_back({x, truth.density(x)});
  }
  io::write_csv(out_dir / "true_nvm_tail.csv", {"x", "upper_tail", "lower_tail"},
                nvm_tail_rows);
  io::write_csv(out_dir / "true_nvm_density.csv", {"x", "density"},
                nvm_density_rows);

  json extra;
  extra["outputs"] = {"observations.csv", "true_states.csv", "true_jumps.csv",
                      "true_subordinator_tail.csv", "true_nvm_tail.csv",
                      "true_nvm_density.csv"};
  extra["truncated_activity"] = truth.rate();
  write_manifest(out_dir, "simulate", cfg, extra);
  return 0;
}

int run_infer(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.data_input.empty()) {
    throw std::invalid_argument("infer: data.input is required");
  }
  fs::create_directories(out_dir / "measures");
  const std::string raw = io::read_file(cfg.data_input);
  const TickDataset data = ingest(cfg.data_input, cfg.norm);

  const double mean_gap = data.times.back() / static_cast<double>(data.times.size());
  const double init_activity = sim::truncated_activity(cfg.chain.init_subordinator);
  if (init_activity * mean_gap > 1e4) {
    throw std::invalid_argument(
        "infer: initial subordinator activity exceeds 1e4 jumps per mean "
        "observation gap; raise init.eps");
  }

  CsvSampleSink sink(out_dir / "measures");
  const gibbs::PosteriorSummary summary =
      gibbs::run_chain(data.times, data.values, cfg.chain, cfg.seed, &sink);
  if (summary.samples.empty()) {
    throw std::runtime_error("infer: no retained samples (check iterations/burn_in)");
  }

  const auto write_trace = [&](const std::string& name,
                               const std::vector<double>& trace) {
    std::vector<std::vector<double>> rows;
    rows.reserve(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
      rows.push_back({static_cast<double>(i), trace[i]});
    }
    io::write_csv(out_dir / name, {"iteration", "value"}, rows);
  };
  write_trace("trace_theta.csv", summary.theta_trace);
  write_trace("trace_alpha.csv", summary.alpha_trace);
  write_trace("trace_lambda.csv", summary.lambda_trace);
  write_trace("trace_loglik.csv", summary.loglik_trace);

  std::vector<std::vector<double>> param_rows;
  for (const auto& s : summary.samples) {
    param_rows.push_back({static_cast<double>(s.iteration), s.theta, s.dp_alpha,
                          s.measure.rate, s.sigma_w2.shape, s.sigma_w2.scale,
                          s.mu_w.mean, s.mu_w.rel_var});
  }
  io::write_csv(out_dir / "retained_params.csv",
                {"iteration", "theta", "alpha", "lambda", "sigw2_shape",
                 "sigw2_scale", "muw_mean", "muw_rel_var"},
                param_rows);

  std::vector<std::string> path_header{"iteration"};
  for (double t : summary.obs_times) path_header.push_back(io::format_double(t));
  std::vector<std::vector<double>> path_rows;
  for (const auto& s : summary.samples) {
    std::vector<double> row{static_cast<double>(s.iteration)};
    row.insert(row.end(), s.path.begin(), s.path.end());
    path_rows.push_back(std::move(row));
  }
  io::write_csv(out_dir / "paths.csv", path_header, path_rows);

  std::vector<std::vector<double>> filter_rows;
  for (std::size_t j = 0; j < summary.obs_times.size(); ++j) {
    const MixtureMoments pos = mixture_moments(summary.samples, j, 0);
    const MixtureMoments vel = mixture_moments(summary.samples, j, 1);
    const MixtureMoments muw = mixture_moments(summary.samples, j, 2);
    filter_rows.push_back({summary.obs_times[j], pos.mean, pos.sd, vel.mean,
                           vel.sd, muw.mean, muw.sd});
  }
  io::write_csv(out_dir / "state_filter.csv",
                {"time", "pos_mean", "pos_sd", "vel_mean", "vel_sd", "muw_mean",
                 "muw_sd"},
                filter_rows);

  // Measure tails with pointwise bands.
  std::vector<dp::DiscreteLevyMeasure> measures;
  measures.reserve(summary.samples.size());
  double atom_lo = std::numeric_limits<double>::infinity();
  double atom_hi = 0.0;
  for (const auto& s : summary.samples) {
    atom_lo = std::min(atom_lo, s.measure.measure.atoms.minCoeff());
    atom_hi = std::max(atom_hi, s.measure.measure.atoms.maxCoeff());
    measures.push_back(s.measure);
  }
  const dp::PosteriorMeanMeasure mean_measure =
      dp::posterior_mean_measure(std::move(measures));
  const std::vector<double> grid =
      nvm::log_grid(0.25 * atom_lo, 4.0 * atom_hi, cfg.grid_points);
  std::vector<std::vector<double>> tail_rows;
  for (double x : grid) {
    const dp::TailBand band = mean_measure.tail_band(x, cfg.band_coverage);
    tail_rows.push_back({x, band.mean, band.lo, band.hi});
  }
  io::write_csv(out_dir / "subordinator_tail.csv",
                {"x", "mean_tail", "lo_band", "hi_band"}, tail_rows);

  // NVM density samples from the per-sample posteriors.
  std::vector<nvm::StudentTMixture> nvm_samples;
  nvm_samples.reserve(summary.samples.size());
  double loc_span = 0.0;
  for (const auto& s : summary.samples) {
    nvm::StudentTMixture mix = nvm::nvm_mixture(s.measure, s.mu_w, s.sigma_w2);
    for (const auto& c : mix.components) {
      loc_span = std::max(loc_span, std::abs(c.location) + 5.0 * c.scale);
    }
    nvm_samples.push_back(std::move(mix));
  }
  const nvm::AveragedNvm averaged = nvm::average_nvm(std::move(nvm_samples));
  std::vector<std::vector<double>> nvm_upper, nvm_lower, nvm_density;
  for (double x : grid) {
    const nvm::ValueBand up = averaged.upper_tail_band(x, cfg.band_coverage);
    const nvm::ValueBand lo = averaged.lower_tail_band(x, cfg.band_coverage);
    nvm_upper.push_back({x, up.mean, up.lo, up.hi});
    nvm_lower.push_back({x, lo.mean, lo.lo, lo.hi});
  }
  for (int i = 0; i <= 2 * cfg.grid_points; ++i) {
    const double x =
        -loc_span + loc_span * static_cast<double>(i) / cfg.grid_points;
    const nvm::ValueBand band = averaged.density_band(x, cfg.band_coverage);
    nvm_density.push_back({x, band.mean, band.lo, band.hi});
  }
  io::write_csv(out_dir / "nvm_upper_tail.csv", {"x", "value", "lo_band", "hi_band"},
                nvm_upper);
  io::write_csv(out_dir / "nvm_lower_tail.csv", {"x", "value", "lo_band", "hi_band"},
                nvm_lower);
  io::write_csv(out_dir / "nvm_density.csv", {"x", "value", "lo_band", "hi_band"},
                nvm_density);

  json stats;
  stats["retained_samples"] = summary.samples.size();
  stats["block_acceptance"] =
      static_cast<double>(summary.counters.accepted_blocks) /
      std::max(1L, summary.counters.proposed_blocks);
  stats["theta_acceptance"] =
      static_cast<double>(summary.counters.accepted_theta) /
      std::max(1L, summary.counters.proposed_theta);
  stats["numerical_rejects"] = summary.counters.numerical_rejects;
  stats["theta_prop_scale_final"] = summary.theta_prop_scale_final;
  std::vector<double> retained_theta;
  for (const auto& s : summary.samples) retained_theta.push_back(s.theta);
  stats["posterior_mean_theta"] = mean_of(retained_theta);
  stats["posterior_mean_lambda"] = mean_measure.mean_rate();
  io::write_file(out_dir / "stats.json", stats.dump(2) + "\n");

  json extra;
  extra["input_hash"] = io::git_blob_hash(raw);
  extra["first_raw_time"] = data.first_raw_time;
  extra["n_observations"] = data.times.size();
  write_manifest(out_dir, "infer", cfg, extra);
  return 0;
}

int run_forecast(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.data_input.empty() || cfg.forecast.run_dir.empty()) {
    throw std::invalid_argument("forecast: data.input and forecast.run_dir are required");
  }
  fs::create_directories(out_dir);
  const std::string raw = io::read_file(cfg.data_input);
  const TickDataset data = ingest(cfg.data_input, cfg.norm);
  const std::size_t n = data.times.size();
  if (n < 20) throw std::runtime_error("forecast: too few observations");
  const std::size_t n_test =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.forecast.n_test), n / 2);
  const std::size_t start = n - n_test;

  const RetainedFiles posterior = read_infer_run(cfg.forecast.run_dir);
  const double theta_bar = mean_of(posterior.thetas);
  const dp::DiscreteLevyMeasure measure = pooled_measure(posterior.measures);

  kalman::ModelSpec model = cfg.chain.model;
  model.theta = theta_bar;

  Rng rng = make_rng(cfg.seed, "forecast");
  const std::vector<forecast::ForecastRecord> naive =
      forecast::naive_forecast(data.times, data.values, start);

  const std::vector<double> train_times(data.times.begin(),
                                        data.times.begin() + static_cast<long>(start));
  const std::vector<double> train_values(data.values.begin(),
                                         data.values.begin() + static_cast<long>(start));
  const forecast::GaussianLangevinFit fit =
      forecast::gaussian_langevin_mle(train_times, train_values);
  const std::vector<forecast::ForecastRecord> gaussian =
      forecast::gaussian_langevin_forecast(data.times, data.values, fit, start);

  forecast::RbpfResult levy;
  if (cfg.forecast.mix_posterior) {
    levy = forecast::rbpf_forecast_mixed(data.times, data.values,
                                         posterior.measures, posterior.thetas,
                                         model, cfg.forecast.particles, start, rng);
  } else {
    levy = forecast::rbpf_forecast(data.times, data.values, measure, theta_bar,
                                   model, cfg.forecast.particles, start, rng);
  }

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < naive.size(); ++i) {
    rows.push_back({naive[i].time, naive[i].actual, naive[i].predicted_mean,
                    gaussian[i].predicted_mean, levy.records[i].predicted_mean,
                    levy.records[i].predictive_var});
  }
  io::write_csv(out_dir / "forecast.csv",
                {"time", "actual", "naive", "gaussian", "levy", "levy_var"}, rows);

  const forecast::Score s_naive = forecast::score(naive);
  const forecast::Score s_gauss = forecast::score(gaussian);
  const forecast::Score s_levy = forecast::score(levy.records);
  json metrics;
  metrics["naive"] = {{"mse", s_naive.mse}, {"hit_rate", s_naive.hit_rate}};
  metrics["gaussian"] = {{"mse", s_gauss.mse}, {"hit_rate", s_gauss.hit_rate}};
  metrics["levy"] = {{"mse", s_levy.mse}, {"hit_rate", s_levy.hit_rate}};
  metrics["n_test"] = n_test;
  metrics["particles"] = cfg.forecast.particles;
  metrics["gaussian_fit"] = {{"theta", fit.theta},
                             {"drive_var", fit.drive_var},
                             {"obs_var", fit.obs_var},
                             {"loglik", fit.loglik},
                             {"converged", fit.converged}};
  metrics["rbpf"] = {{"resamples", levy.resample_count},
                     {"weight_resets", levy.weight_resets},
                     {"theta", theta_bar}};
  io::write_file(out_dir / "metrics.json", metrics.dump(2) + "\n");

  json extra;
  extra["input_hash"] = io::git_blob_hash(raw);
  write_manifest(out_dir, "forecast", cfg, extra);
  return 0;
}

int run_diagnose(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.diagnose.run_dir.empty()) {
    throw std::invalid_argument("diagnose: diagnose.run_dir is required");
  }
  fs::create_directories(out_dir);
  const fs::path run_dir(cfg.diagnose.run_dir);

  json summary;
  const auto write_rho = [&](const std::string& name,
                             const diag::AutocorrResult& acf) {
    std::vector<std::vector<double>> rows;
    for (std::size_t t = 0; t < acf.rho.size(); ++t) {
      rows.push_back({static_cast<double>(t), acf.rho[t]});
    }
    io::write_csv(out_dir / name, {"lag", "rho"}, rows);
  };

  const auto scalar_diag = [&](const std::string& trace_file,
                               const std::string& rho_file,
                               const std::string& key) {
    const io::Csv csv = io::read_csv(run_dir / trace_file);
    std::vector<double> trace;
    trace.reserve(csv.rows.size());
    for (const auto& r : csv.rows) trace.push_back(r[1]);
    const int max_lag = std::max(
        1, std::min(cfg.diagnose.max_lag, static_cast<int>(trace.size()) / 3));
    const diag::TraceStats stats = diag::scalar_trace_stats(trace, max_lag);
    summary[key] = {{"mean", stats.mean},
                    {"variance", stats.variance},
                    {"degenerate", stats.acf.degenerate},
                    {"integrated_time", stats.acf.integrated_time},
                    {"window", stats.acf.window}};
    if (!stats.acf.degenerate) write_rho(rho_file, stats.acf);
  };
  scalar_diag("trace_theta.csv", "rho_theta.csv", "theta");
  scalar_diag("trace_alpha.csv", "rho_alpha.csv", "alpha");

  // Subordinator paths sampled on the observation grid.
  {
    const io::Csv csv = io::read_csv(run_dir / "paths.csv");
    diag::FunctionSampleSet set;
    for (std::size_t c = 1; c < csv.header.size(); ++c) {
      set.grid.push_back(std::stod(csv.header[c]));
    }
    set.values.resize(static_cast<Eigen::Index>(csv.rows.size()),
                      static_cast<Eigen::Index>(set.grid.size()));
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
      for (std::size_t c = 1; c < csv.rows[r].size(); ++c) {
        set.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) =
            csv.rows[r][c];
      }
    }
    const int max_lag = std::max(
        1, std::min(cfg.diagnose.max_lag,
                    static_cast<int>(set.values.rows()) / 3));
    const diag::AutocorrResult acf = diag::functional_autocorr(set, max_lag);
    summary["paths"] = {{"degenerate", acf.degenerate},
                        {"integrated_time", acf.integrated_time},
                        {"window", acf.window}};
    if (!acf.degenerate) write_rho("rho_paths.csv", acf);
  }

  // Measure samples reduced to tail functions on a shared log grid.
  {
    RetainedFiles posterior = read_infer_run(run_dir);
    double atom_lo = std::numeric_limits<double>::infinity();
    double atom_hi = 0.0;
    for (const auto& m : posterior.measures) {
      atom_lo = std::min(atom_lo, m.measure.atoms.minCoeff());
      atom_hi = std::max(atom_hi, m.measure.atoms.maxCoeff());
    }
    diag::FunctionSampleSet set;
    set.grid = nvm::log_grid(0.25 * atom_lo, 4.0 * atom_hi,
                             cfg.diagnose.grid_points);
    set.values.resize(static_cast<Eigen::Index>(posterior.measures.size()),
                      static_cast<Eigen::Index>(set.grid.size()));
    for (std::size_t r = 0; r < posterior.measures.size(); ++r) {
      for (std::size_t c = 0; c < set.grid.size(); ++c) {
        set.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            posterior.measures[r].upper_tail(set.grid[c]);
      }
    }
    const int max_lag = std::max(
        1, std::min(cfg.diagnose.max_lag,
                    static_cast<int>(set.values.rows()) / 3));
    const diag::AutocorrResult acf = diag::functional_autocorr(set, max_lag);
    summary["measure_tails"] = {{"degenerate", acf.degenerate},
                                {"integrated_time", acf.integrated_time},
                                {"window", acf.window}};
    if (!acf.degenerate) write_rho("rho_tails.csv", acf);
  }

  io::write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  write_manifest(out_dir, "diagnose", cfg, json::object());
  return 0;
}

}  // namespace levyssm::cli
