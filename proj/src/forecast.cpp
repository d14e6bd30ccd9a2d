#include "levyssm/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "levyssm/special.hpp"

namespace levyssm::forecast {

namespace {

// Process-noise integral Q_bar(dt) = int_0^dt (e^{Au}h)(e^{Au}h)^T du for the
// Langevin A. Series branch guards the theta -> 0 cancellation.
Eigen::Matrix2d ou_process_noise(double theta, double dt) {
  const double x = theta * dt;
  Eigen::Matrix2d q;
  if (std::abs(x) < 2e-3) {
    const double q11 = dt * dt * dt * (1.0 / 3.0 + x / 4.0 + 7.0 * x * x / 60.0);
    const double q12 = dt * dt * (0.5 + x / 2.0 + 7.0 * x * x / 24.0 + x * x * x / 8.0);
    const double q22 = dt * (1.0 + x + 2.0 * x * x / 3.0 + x * x * x / 3.0);
    q << q11, q12, q12, q22;
    return q;
  }
  const double e1 = std::expm1(x) / theta;          // int e^{theta u} du
  const double e2 = std::expm1(2.0 * x) / (2.0 * theta);
  const double q22 = e2;
  const double q12 = (e2 - e1) / theta;
  const double q11 = (e2 - 2.0 * e1 + dt) / (theta * theta);
  q << q11, q12, q12, q22;
  return q;
}

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, double step,
                             int max_iter, double tol) {
  const int n = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n) + 1, start);
  std::vector<double> vals(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i) + 1](i) += step;
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f(pts[i]);

  const auto order = [&] {
    for (std::size_t i = 1; i < pts.size(); ++i) {
      for (std::size_t j = i; j > 0 && vals[j] < vals[j - 1]; --j) {
        std::swap(vals[j], vals[j - 1]);
        std::swap(pts[j], pts[j - 1]);
      }
    }
  };
  order();

  NelderMeadResult res;
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(vals.back() - vals.front()) <
        tol * (std::abs(vals.front()) + tol)) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd refl = centroid + (centroid - pts.back());
    const double f_refl = f(refl);
    if (f_refl < vals.front()) {
      const Eigen::VectorXd expd = centroid + 2.0 * (centroid - pts.back());
      const double f_expd = f(expd);
      if (f_expd < f_refl) {
        pts.back() = expd;
        vals.back() = f_expd;
      } else {
        pts.back() = refl;
        vals.back() = f_refl;
      }
    } else if (f_refl < vals[vals.size() - 2]) {
      pts.back() = refl;
      vals.back() = f_refl;
    } else {
      const Eigen::VectorXd contr = centroid + 0.5 * (pts.back() - centroid);
      const double f_contr = f(contr);
      if (f_contr < vals.back()) {
        pts.back() = contr;
        vals.back() = f_contr;
      } else {
        for (std::size_t i = 1; i < pts.size(); ++i) {
          pts[i] = pts.front() + 0.5 * (pts[i] - pts.front());
          vals[i] = f(pts[i]);
        }
      }
    }
    order();
  }
  res.x = pts.front();
  res.f = vals.front();
  return res;
}

constexpr double kLogVarLo = -27.631021115928547;  // log(1e-12)
constexpr double kLogVarHi = 27.631021115928547;   // log(1e12)
constexpr double kLogThetaLo = -13.815510557964274;  // log(1e-6)
constexpr double kLogThetaHi = 13.815510557964274;   // log(1e6)

Eigen::Vector3d clamp_params(Eigen::Vector3d p) {
  p(0) = std::clamp(p(0), kLogThetaLo, kLogThetaHi);
  p(1) = std::clamp(p(1), kLogVarLo, kLogVarHi);
  p(2) = std::clamp(p(2), kLogVarLo, kLogVarHi);
  return p;
}

}  // namespace

std::vector<ForecastRecord> naive_forecast(const std::vector<double>& times,
                                           const std::vector<double>& values,
                                           std::size_t start_index) {
  if (values.empty() || times.size() != values.size()) {
    throw std::invalid_argument("naive_forecast: empty or mismatched inputs");
  }
  if (start_index < 1 || start_index >= values.size()) {
    throw std::invalid_argument("naive_forecast: start_index needs history");
  }
  std::vector<ForecastRecord> records;
  records.reserve(values.size() - start_index);
  for (std::size_t j = start_index; j < values.size(); ++j) {
    records.push_back({times[j], values[j - 1], values[j], values[j - 1], 0.0});
  }
  return records;
}

double gaussian_langevin_loglik(const std::vector<double>& times,
                                const std::vector<double>& values, double theta,
                                double drive_var, double obs_var) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("gaussian_langevin_loglik: too few observations");
  }
  double mean_sq = 0.0;
  for (double v : values) mean_sq += v * v;
  Eigen::Vector2d mean{values.front(), 0.0};
  Eigen::Matrix2d cov = (10.0 * mean_sq / static_cast<double>(values.size()) + 1.0) *
                        Eigen::Matrix2d::Identity();
  const Eigen::RowVector2d h{1.0, 0.0};
  double loglik = 0.0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    const double dt = times[j] - times[j - 1];
    const Eigen::Matrix2d trans = sim::transition_matrix(theta, dt);
    mean = trans * mean;
    cov = trans * cov * trans.transpose() + drive_var * ou_process_noise(theta, dt);
    const double f = h * cov * h.transpose() + obs_var;
    const double innov = values[j] - h * mean;
    loglik += special::log_normal_pdf(innov, 0.0, std::sqrt(f));
    const Eigen::Vector2d gain = cov * h.transpose() / f;
    mean += gain * innov;
    cov = ((Eigen::Matrix2d::Identity() - gain * h) * cov).eval();
    cov = 0.5 * (cov + cov.transpose()).eval();
  }
  return loglik;
}

GaussianLangevinFit gaussian_langevin_mle(const std::vector<double>& times,
                                          const std::vector<double>& values) {
  if (times.size() < 10) {
    throw std::invalid_argument("gaussian_langevin_mle: needs at least 10 observations");
  }
  double mean_dt = (times.back() - times.front()) /
                   static_cast<double>(times.size() - 1);
  double diff_var = 0.0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    const double d = values[j] - values[j - 1];
    diff_var += d * d;
  }
  diff_var = std::max(diff_var / static_cast<double>(values.size() - 1), 1e-10);

  const auto objective = [&](const Eigen::VectorXd& p) {
    const Eigen::Vector3d q = clamp_params(p);
    const double theta = -std::exp(q(0));
    return -gaussian_langevin_loglik(times, values, theta, std::exp(q(1)),
                                     std::exp(q(2)));
  };

  // Multi-start over mean-reversion speeds and noise splits.
  std::vector<Eigen::Vector3d> starts;
  for (double rate : {0.1, 1.0, 10.0}) {
    starts.emplace_back(std::log(rate / mean_dt),
                        std::log(diff_var / mean_dt),
                        std::log(0.5 * diff_var));
  }
  starts.emplace_back(std::log(1.0 / mean_dt), std::log(0.01 * diff_var / mean_dt),
                      std::log(diff_var));

  NelderMeadResult best;
  best.f = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (const auto& s : starts) {
    const NelderMeadResult r = nelder_mead(objective, s, 0.7, 2000, 1e-12);
    any_converged = any_converged || r.converged;
    if (r.f < best.f) best = r;
  }
  const Eigen::Vector3d p = clamp_params(best.x);
  GaussianLangevinFit fit;
  fit.theta = -std::exp(p(0));
  fit.drive_var = std::exp(p(1));
  fit.obs_var = std::exp(p(2));
  fit.loglik = -best.f;
  fit.converged = any_converged;
  return fit;
}

std::vector<ForecastRecord> gaussian_langevin_forecast(
    const std::vector<double>& times, const std::vector<double>& values,
    const GaussianLangevinFit& fit, std::size_t start_index) {
  if (start_index < 1 || start_index >= values.size()) {
    throw std::invalid_argument("gaussian_langevin_forecast: bad start_index");
  }
  double mean_sq = 0.0;
  for (double v : values) mean_sq += v * v;
  Eigen::Vector2d mean{values.front(), 0.0};
  Eigen::Matrix2d cov = (10.0 * mean_sq / static_cast<double>(values.size()) + 1.0) *
                        Eigen::Matrix2d::Identity();
  const Eigen::RowVector2d h{1.0, 0.0};
  std::vector<ForecastRecord> records;
  records.reserve(values.size() - start_index);
  for (std::size_t j = 1; j < values.size(); ++j) {
    const double dt = times[j] - times[j - 1];
    const Eigen::Matrix2d trans = sim::transition_matrix(fit.theta, dt);
    mean = trans * mean;
    cov = trans * cov * trans.transpose() +
          fit.drive_var * ou_process_noise(fit.theta, dt);
    const double f = h * cov * h.transpose() + fit.obs_var;
    const double y_hat = h * mean;
    if (j >= start_index) {
      records.push_back({times[j], values[j - 1], values[j], y_hat, f});
    }
    const double innov = values[j] - y_hat;
    const Eigen::Vector2d gain = cov * h.transpose() / f;
    mean += gain * innov;
    cov = ((Eigen::Matrix2d::Identity() - gain * h) * cov).eval();
    cov = 0.5 * (cov + cov.transpose()).eval();
  }
  return records;
}

namespace {

// Measure with precomputed cumulative weights for binary-search atom draws.
struct CumMeasure {
  double rate = 0.0;
  std::vector<double> atoms;
  std::vector<double> cumw;
};

CumMeasure make_cum_measure(const dp::DiscreteLevyMeasure& measure) {
  CumMeasure out;
  out.rate = measure.rate;
  const Eigen::Index k = measure.measure.atoms.size();
  out.atoms.assign(measure.measure.atoms.data(), measure.measure.atoms.data() + k);
  out.cumw.resize(static_cast<std::size_t>(k));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += measure.measure.weights(i);
    out.cumw[static_cast<std::size_t>(i)] = acc;
  }
  out.cumw.back() = 1.0;
  return out;
}

double sample_atom(const CumMeasure& m, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto it = std::lower_bound(m.cumw.begin(), m.cumw.end(), unif(rng));
  return m.atoms[static_cast<std::size_t>(it - m.cumw.begin())];
}

RbpfResult rbpf_core(const std::vector<double>& times,
                     const std::vector<double>& values,
                     const std::vector<CumMeasure>& measures,
                     std::vector<int> measure_of, std::vector<double> theta_of,
                     const kalman::ModelSpec& model, std::size_t start_index,
                     Rng& rng) {
  const std::size_t p = measure_of.size();
  std::vector<kalman::MarginalKalmanState> particles(
      p, kalman::initial_state(model.prior, model.x0_mean, model.kappa0));
  std::vector<double> weights(p, 1.0 / static_cast<double>(p));
  const Eigen::RowVector3d h = kalman::extended_emission();

  RbpfResult result;
  result.records.reserve(values.size() - std::min(start_index, values.size()));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<double> pred_mean(p), pred_scale(p), pred_dof(p), log_inc(p);
  double prev_t = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double t = times[j];
    const double dt = t - prev_t;

    for (std::size_t i = 0; i < p; ++i) {
      const CumMeasure& m = measures[static_cast<std::size_t>(measure_of[i])];
      const double theta = theta_of[i];
      sim::Moments mom;
      if (m.rate > 0.0 && dt > 0.0) {
        std::poisson_distribution<long> pois(m.rate * dt);
        const long n_jumps = pois(rng);
        for (long k = 0; k < n_jumps; ++k) {
          const double v = prev_t + unif(rng) * dt;
          const double z = sample_atom(m, rng);
          const Eigen::Vector2d g = sim::transition_response(theta, t - v);
          mom.mean += z * g;
          mom.cov += z * g * g.transpose();
        }
      }
      kalman::MarginalKalmanState pred = kalman::predict(
          particles[i], mom, sim::transition_matrix(theta, dt));
      const double f = h * pred.cov_norm * h.transpose() + model.obs_noise_norm;
      const double shape = model.prior.alpha_w + 0.5 * pred.n_obs;
      const double scale2 = (model.prior.beta_w + 0.5 * pred.e_accum) / shape * f;
      pred_mean[i] = h * pred.mean;
      pred_scale[i] = std::sqrt(std::max(scale2, 1e-300));
      pred_dof[i] = 2.0 * shape;
      log_inc[i] = special::log_student_t_pdf(values[j], pred_mean[i],
                                              pred_scale[i], pred_dof[i]);
      particles[i] = kalman::update(pred, values[j], h, model.obs_noise_norm);
    }

    if (j >= start_index) {
      // Forecast density uses the pre-update weights with post-propagation
      // particle predictives.
      double mean = 0.0;
      for (std::size_t i = 0; i < p; ++i) mean += weights[i] * pred_mean[i];
      double var = 0.0;
      for (std::size_t i = 0; i < p; ++i) {
        const double dof_eff = std::max(pred_dof[i], 2.5);
        const double comp_var =
            pred_scale[i] * pred_scale[i] * dof_eff / (dof_eff - 2.0);
        var += weights[i] * (comp_var + pred_mean[i] * pred_mean[i]);
      }
      var = std::max(0.0, var - mean * mean);
      result.records.push_back(
          {t, j > 0 ? values[j - 1] : values[0], values[j], mean, var});
    }

    // Weight update in log space, guarding against total collapse.
    double max_lw = -std::numeric_limits<double>::infinity();
    std::vector<double> lw(p);
    for (std::size_t i = 0; i < p; ++i) {
      lw[i] = std::log(weights[i]) + log_inc[i];
      max_lw = std::max(max_lw, lw[i]);
    }
    if (!std::isfinite(max_lw)) {
      ++result.weight_resets;
      std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(p));
    } else {
      double sum = 0.0;
      for (std::size_t i = 0; i < p; ++i) {
        weights[i] = std::exp(lw[i] - max_lw);
        sum += weights[i];
      }
      for (auto& w : weights) w /= sum;
    }

    double ess_inv = 0.0;
    for (double w : weights) ess_inv += w * w;
    if (1.0 / ess_inv < 0.5 * static_cast<double>(p) && p > 1) {
      ++result.resample_count;
      std::vector<kalman::MarginalKalmanState> resampled;
      std::vector<int> resampled_measure;
      std::vector<double> resampled_theta;
      resampled.reserve(p);
      resampled_measure.reserve(p);
      resampled_theta.reserve(p);
      const double u0 = unif(rng) / static_cast<double>(p);
      double cum = weights[0];
      std::size_t idx = 0;
      for (std::size_t i = 0; i < p; ++i) {
        const double u = u0 + static_cast<double>(i) / static_cast<double>(p);
        while (cum < u && idx + 1 < p) cum += weights[++idx];
        resampled.push_back(particles[idx]);
        resampled_measure.push_back(measure_of[idx]);
        resampled_theta.push_back(theta_of[idx]);
      }
      particles = std::move(resampled);
      measure_of = std::move(resampled_measure);
      theta_of = std::move(resampled_theta);
      std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(p));
    }
    prev_t = t;
  }
  return result;
}

}  // namespace

RbpfResult rbpf_forecast(const std::vector<double>& times,
                         const std::vector<double>& values,
                         const dp::DiscreteLevyMeasure& measure, double theta,
                         const kalman::ModelSpec& model, int n_particles,
                         std::size_t start_index, Rng& rng) {
  if (times.size() != values.size() || times.empty()) {
    throw std::invalid_argument("rbpf_forecast: empty or mismatched inputs");
  }
  if (n_particles < 1) {
    throw std::invalid_argument("rbpf_forecast: need at least one particle");
  }
  if (measure.rate < 0.0) {
    throw std::invalid_argument("rbpf_forecast: negative measure rate");
  }
  const std::size_t p = static_cast<std::size_t>(n_particles);
  std::vector<CumMeasure> measures{make_cum_measure(measure)};
  return rbpf_core(times, values, measures, std::vector<int>(p, 0),
                   std::vector<double>(p, theta), model, start_index, rng);
}

RbpfResult rbpf_forecast_mixed(const std::vector<double>& times,
                               const std::vector<double>& values,
                               const std::vector<dp::DiscreteLevyMeasure>& measures,
                               const std::vector<double>& thetas,
                               const kalman::ModelSpec& model, int n_particles,
                               std::size_t start_index, Rng& rng) {
  if (measures.empty() || measures.size() != thetas.size()) {
    throw std::invalid_argument("rbpf_forecast_mixed: posterior sample mismatch");
  }
  if (n_particles < 1) {
    throw std::invalid_argument("rbpf_forecast_mixed: need at least one particle");
  }
  std::vector<CumMeasure> cum;
  cum.reserve(measures.size());
  for (const auto& m : measures) cum.push_back(make_cum_measure(m));
  const std::size_t p = static_cast<std::size_t>(n_particles);
  std::vector<int> measure_of(p);
  std::vector<double> theta_of(p);
  std::uniform_int_distribution<std::size_t> pick(0, measures.size() - 1);
  for (std::size_t i = 0; i < p; ++i) {
    const std::size_t l = pick(rng);
    measure_of[i] = static_cast<int>(l);
    theta_of[i] = thetas[l];
  }
  return rbpf_core(times, values, cum, std::move(measure_of), std::move(theta_of),
                   model, start_index, rng);
}

Score score(const std::vector<ForecastRecord>& records) {
  if (records.empty()) throw std::invalid_argument("score: no records");
  double mse = 0.0;
  double hits = 0.0;
  for (const auto& r : records) {
    const double err = r.predicted_mean - r.actual;
    mse += err * err;
    const double pred_change = r.predicted_mean - r.prev_actual;
    const double real_change = r.actual - r.prev_actual;
    if (pred_change * real_change > 0.0) hits += 1.0;
  }
  const double n = static_cast<double>(records.size());
  return {mse / n, hits / n};
}

Score score(const std::vector<ForecastRecord>& records,
            const std::vector<double>& actuals) {
  if (records.size() != actuals.size()) {
    throw std::invalid_argument("score: records/actuals length mismatch");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].actual != actuals[i]) {
      throw std::invalid_argument("score: actuals misaligned with records");
    }
  }
  return score(records);
}

}  // namespace levyssm::forecast
