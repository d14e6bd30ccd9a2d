#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "levyssm/sim.hpp"

namespace levyssm::kalman {

// Conjugate NVM priors: sigma_w^2 ~ IG(alpha_w, beta_w) and
// mu_w ~ N(mu_hat_w, k_w sigma_w^2).
struct NVMPrior {
  double alpha_w = 2.0;
  double beta_w = 1.0;
  double mu_hat_w = 0.0;
  double k_w = 1.0;
};
void validate(const NVMPrior& prior);

// Filter state for the extended vector (X, mu_w) on the normalized system:
// cov_norm is the covariance divided by sigma_w^2. e_accum and logdet_accum
// carry the running quadratic form E_n and sum of log |F_i| that enter the
// marginal likelihood; they make the state a self-contained prefix snapshot.
struct MarginalKalmanState {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov_norm = Eigen::Matrix3d::Identity();
  double e_accum = 0.0;
  double logdet_accum = 0.0;
  int n_obs = 0;
};

std::string to_json(const MarginalKalmanState& state);  // debugging snapshot

struct NumericalError : std::runtime_error {
  NumericalError(const std::string& what, int index)
      : std::runtime_error(what), time_index(index) {}
  int time_index;
};

// X(0) has normalized covariance kappa0 * I; the mu_w block starts at the
// prior (mu_hat_w, k_w).
MarginalKalmanState initial_state(const NVMPrior& prior,
                                  const Eigen::Vector2d& x0_mean, double kappa0);

// Extended-system prediction with A_hat = [[exp(A dt), m_bar], [0, 1]] and
// process noise C_bar injected into the X block.
MarginalKalmanState predict(const MarginalKalmanState& state,
                            const sim::Moments& moments,
                            const Eigen::Matrix2d& transition);

// Scalar-observation update on the normalized system. Accumulates the
// innovation quadratic form and log |F|.
MarginalKalmanState update(const MarginalKalmanState& state, double y,
                           const Eigen::RowVector3d& h_ext, double obs_cov_norm);

// Marginal log-likelihood of all processed observations with mu_w and
// sigma_w^2 integrated out (obs_dim = M).
double log_marginal(const MarginalKalmanState& state, const NVMPrior& prior,
                    int obs_dim = 1);

struct SigmaW2Posterior {
  double shape = 0.0;  // alpha_w'
  double scale = 0.0;  // beta_w'
};
SigmaW2Posterior sigma_w2_posterior(const MarginalKalmanState& state,
                                    const NVMPrior& prior, int obs_dim = 1);

struct MuWPosterior {
  double mean = 0.0;     // mu'
  double rel_var = 0.0;  // k_w', variance relative to sigma_w^2
};
MuWPosterior mu_w_posterior(const MarginalKalmanState& state);

struct StudentT3 {
  Eigen::Vector3d location = Eigen::Vector3d::Zero();
  Eigen::Matrix3d scale = Eigen::Matrix3d::Zero();
  double dof = 0.0;
};

// Marginalized filtering distribution of the extended state: multivariate
// Student-t with 2(alpha_w + n/2) degrees of freedom.
StudentT3 student_t_filtering(const MarginalKalmanState& state,
                              const NVMPrior& prior);

// Everything the filter needs besides the jump series and the data.
struct ModelSpec {
  double theta = -1.0;
  double obs_noise_norm = 1e-2;  // C_bar_v
  NVMPrior prior;
  Eigen::Vector2d x0_mean = Eigen::Vector2d::Zero();
  double kappa0 = 10.0;
};
void validate(const ModelSpec& model);

inline Eigen::RowVector3d extended_emission() { return {1.0, 0.0, 0.0}; }

// Full filter pass over observations on the series' boundary grid. When
// `snapshots` is given it receives N+1 prefix states (initial state first).
MarginalKalmanState run_filter(const sim::JumpSeries& series,
                               const ModelSpec& model,
                               const std::vector<double>& obs_times,
                               const std::vector<double>& obs_values,
                               std::vector<MarginalKalmanState>* snapshots = nullptr);

// Diagnostic mode with mu_w and sigma_w^2 held fixed: exact Gaussian
// log-likelihood of the observations from a plain 2-state Kalman filter.
double fixed_params_loglik(const sim::JumpSeries& series, const ModelSpec& model,
                           const std::vector<double>& obs_times,
                           const std::vector<double>& obs_values, double mu_w,
                           double sigma_w2);

}  // namespace levyssm::kalman
