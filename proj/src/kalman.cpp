#include "levyssm/kalman.hpp"

#include <cmath>
#include <sstream>

#include "levyssm/special.hpp"

namespace levyssm::kalman {

namespace {

void symmetrize(Eigen::Matrix3d& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

void validate(const NVMPrior& prior) {
  if (!(prior.alpha_w > 0.0) || !(prior.beta_w > 0.0) || !(prior.k_w > 0.0)) {
    throw std::invalid_argument("NVMPrior: alpha_w, beta_w, k_w must be positive");
  }
}

void validate(const ModelSpec& model) {
  validate(model.prior);
  if (!(model.theta < 0.0)) {
    throw std::invalid_argument("ModelSpec: theta must be negative");
  }
  if (!(model.obs_noise_norm > 0.0)) {
    throw std::invalid_argument("ModelSpec: obs_noise_norm must be positive");
  }
  if (!(model.kappa0 > 0.0)) {
    throw std::invalid_argument("ModelSpec: kappa0 must be positive");
  }
}

std::string to_json(const MarginalKalmanState& s) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"mean\":[" << s.mean(0) << "," << s.mean(1) << "," << s.mean(2)
     << "],\"cov_norm\":[";
  for (int r = 0; r < 3; ++r) {
    os << (r ? ",[" : "[");
    for (int c = 0; c < 3; ++c) os << (c ? "," : "") << s.cov_norm(r, c);
    os << "]";
  }
  os << "],\"e_accum\":" << s.e_accum << ",\"logdet_accum\":" << s.logdet_accum
     << ",\"n_obs\":" << s.n_obs << "}";
  return os.str();
}

MarginalKalmanState initial_state(const NVMPrior& prior,
                                  const Eigen::Vector2d& x0_mean, double kappa0) {
  validate(prior);
  if (!(kappa0 > 0.0)) {
    throw std::invalid_argument("initial_state: kappa0 must be positive");
  }
  MarginalKalmanState s;
  s.mean << x0_mean(0), x0_mean(1), prior.mu_hat_w;
  s.cov_norm = Eigen::Vector3d(kappa0, kappa0, prior.k_w).asDiagonal();
  return s;
}

MarginalKalmanState predict(const MarginalKalmanState& state,
                            const sim::Moments& moments,
                            const Eigen::Matrix2d& transition) {
  Eigen::Matrix3d a_hat = Eigen::Matrix3d::Identity();
  a_hat.topLeftCorner<2, 2>() = transition;
  a_hat.topRightCorner<2, 1>() = moments.mean;

  MarginalKalmanState out = state;
  out.mean = a_hat * state.mean;
  out.cov_norm = a_hat * state.cov_norm * a_hat.transpose();
  out.cov_norm.topLeftCorner<2, 2>() += moments.cov;
  symmetrize(out.cov_norm);
  return out;
}

MarginalKalmanState update(const MarginalKalmanState& state, double y,
                           const Eigen::RowVector3d& h_ext, double obs_cov_norm) {
  const double y_hat = h_ext * state.mean;
  const Eigen::Vector3d ph = state.cov_norm * h_ext.transpose();
  const double f = h_ext * ph + obs_cov_norm;
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw NumericalError("kalman update: innovation covariance not positive",
                         state.n_obs);
  }
  const double innov = y - y_hat;
  const Eigen::Vector3d gain = ph / f;

  MarginalKalmanState out = state;
  out.mean = state.mean + gain * innov;
  // Joseph form keeps cov_norm PSD over long MCMC runs.
  const Eigen::Matrix3d ikh =
      Eigen::Matrix3d::Identity() - gain * h_ext;
  out.cov_norm = ikh * state.cov_norm * ikh.transpose() +
                 gain * obs_cov_norm * gain.transpose();
  symmetrize(out.cov_norm);
  out.e_accum = state.e_accum + innov * innov / f;
  out.logdet_accum = state.logdet_accum + std::log(f);
  out.n_obs = state.n_obs + 1;
  if (!std::isfinite(out.e_accum) || !out.mean.allFinite()) {
    throw NumericalError("kalman update: non-finite filter state", state.n_obs);
  }
  return out;
}

double log_marginal(const MarginalKalmanState& state, const NVMPrior& prior,
                    int obs_dim) {
  if (state.n_obs < 1) {
    throw std::invalid_argument("log_marginal: needs at least one observation");
  }
  const double mn2 = 0.5 * obs_dim * state.n_obs;
  return -mn2 * std::log(2.0 * M_PI) - 0.5 * state.logdet_accum +
         prior.alpha_w * std::log(prior.beta_w) -
         special::log_gamma(prior.alpha_w) +
         special::log_gamma(prior.alpha_w + mn2) -
         (prior.alpha_w + mn2) * std::log(prior.beta_w + 0.5 * state.e_accum);
}

SigmaW2Posterior sigma_w2_posterior(const MarginalKalmanState& state,
                                    const NVMPrior& prior, int obs_dim) {
  return {prior.alpha_w + 0.5 * obs_dim * state.n_obs,
          prior.beta_w + 0.5 * state.e_accum};
}

MuWPosterior mu_w_posterior(const MarginalKalmanState& state) {
  return {state.mean(2), state.cov_norm(2, 2)};
}

StudentT3 student_t_filtering(const MarginalKalmanState& state,
                              const NVMPrior& prior) {
  if (state.n_obs < 1) {
    throw std::invalid_argument("student_t_filtering: needs n_obs >= 1");
  }
  const double shape = prior.alpha_w + 0.5 * state.n_obs;
  const double scale_factor = (prior.beta_w + 0.5 * state.e_accum) / shape;
  StudentT3 out;
  out.location = state.mean;
  out.scale = scale_factor * state.cov_norm;
  out.dof = 2.0 * shape;
  return out;
}

MarginalKalmanState run_filter(const sim::JumpSeries& series,
                               const ModelSpec& model,
                               const std::vector<double>& obs_times,
                               const std::vector<double>& obs_values,
                               std::vector<MarginalKalmanState>* snapshots) {
  if (obs_times.size() != obs_values.size() || obs_times.empty()) {
    throw std::invalid_argument("run_filter: observation times/values mismatch");
  }
  if (series.boundaries != obs_times) {
    throw std::invalid_argument("run_filter: series must be grouped on obs_times");
  }
  MarginalKalmanState state =
      initial_state(model.prior, model.x0_mean, model.kappa0);
  if (snapshots) {
    snapshots->clear();
    snapshots->reserve(obs_times.size() + 1);
    snapshots->push_back(state);
  }
  const Eigen::RowVector3d h = extended_emission();
  double prev_t = 0.0;
  for (std::size_t j = 0; j < obs_times.size(); ++j) {
    const double t = obs_times[j];
    const sim::Moments mom =
        sim::transition_moments(series.groups[j], model.theta, prev_t, t);
    state = predict(state, mom, sim::transition_matrix(model.theta, t - prev_t));
    state = update(state, obs_values[j], h, model.obs_noise_norm);
    if (snapshots) snapshots->push_back(state);
    prev_t = t;
  }
  return state;
}

double fixed_params_loglik(const sim::JumpSeries& series, const ModelSpec& model,
                           const std::vector<double>& obs_times,
                           const std::vector<double>& obs_values, double mu_w,
                           double sigma_w2) {
  if (obs_times.size() != obs_values.size() || obs_times.empty()) {
    throw std::invalid_argument("fixed_params_loglik: observation mismatch");
  }
  if (series.boundaries != obs_times) {
    throw std::invalid_argument("fixed_params_loglik: series must be grouped on obs_times");
  }
  Eigen::Vector2d mean = model.x0_mean;
  Eigen::Matrix2d cov = sigma_w2 * model.kappa0 * Eigen::Matrix2d::Identity();
  const Eigen::RowVector2d h{1.0, 0.0};
  double loglik = 0.0;
  double prev_t = 0.0;
  for (std::size_t j = 0; j < obs_times.size(); ++j) {
    const double t = obs_times[j];
    const sim::Moments mom =
        sim::transition_moments(series.groups[j], model.theta, prev_t, t);
    const Eigen::Matrix2d trans = sim::transition_matrix(model.theta, t - prev_t);
    mean = trans * mean + mu_w * mom.mean;
    cov = trans * cov * trans.transpose() + sigma_w2 * mom.cov;
    const double f = h * cov * h.transpose() + sigma_w2 * model.obs_noise_norm;
    const double innov = obs_values[j] - h * mean;
    loglik += special::log_normal_pdf(innov, 0.0, std::sqrt(f));
    const Eigen::Vector2d gain = cov * h.transpose() / f;
    mean += gain * innov;
    cov = ((Eigen::Matrix2d::Identity() - gain * h) * cov).eval();
    cov = 0.5 * (cov + cov.transpose()).eval();
    prev_t = t;
  }
  return loglik;
}

}  // namespace levyssm::kalman
