#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "levyssm/rng.hpp"

namespace levyssm::sim {

struct Jump {
  double size = 0.0;  // subordinator jump Z_i > 0 (NVM series may carry signed sizes)
  double time = 0.0;  // jump time V_i
};

// Jumps grouped by observation interval: group j holds the jumps with times in
// (edge(j-1), edge(j)], where edge(-1) = 0 and edge(j) = boundaries[j]. Order
// inside a group is arbitrary; every downstream moment formula is a plain sum.
struct JumpSeries {
  double horizon = 0.0;
  std::vector<double> boundaries;
  std::vector<std::vector<Jump>> groups;

  std::size_t total_jumps() const;
  std::vector<double> all_sizes() const;
  double max_time() const;  // 0 when empty
};

void validate(const JumpSeries& series);  // boundary/grouping invariants

// Reassign all jumps of `series` onto a new boundary grid.
JumpSeries regroup(const JumpSeries& series, std::vector<double> boundaries);

enum class SubordinatorFamily { kGamma, kTemperedStable, kPointMass };

// Truncated analytic subordinator: jumps below eps are discarded, leaving a
// finite-activity compound Poisson process on [eps, inf).
struct AnalyticSubordinator {
  SubordinatorFamily family = SubordinatorFamily::kGamma;
  double shape_c = 1.0;   // C in Q(x) = C x^{-1} e^{-beta x} or C x^{-1-kappa} e^{-gamma x}
  double beta = 1.0;      // gamma-family exponential rate
  double kappa = 0.5;     // tempered-stable stability index, in (0, 1)
  double gamma = 1.0;     // tempered-stable tempering rate
  double lambda0 = 1.0;   // point-mass rate
  double z0 = 1.0;        // point-mass jump size
  double eps = 1e-2;      // truncation threshold, > 0
};

void validate(const AnalyticSubordinator& spec);

// Levy density Q(x) for the continuous families (gamma, tempered stable).
double levy_density(const AnalyticSubordinator& spec, double x);

// Truncated activity lambda_eps = integral of Q over [eps, inf), by quadrature.
double truncated_activity(const AnalyticSubordinator& spec);

// Upper tail of the truncated measure: integral of Q over [max(x, eps), inf).
double truncated_tail(const AnalyticSubordinator& spec, double x);

// One draw from the normalized truncated jump-size law f_eps on [eps, inf).
double sample_truncated_size(const AnalyticSubordinator& spec, Rng& rng);

struct LangevinParams {
  double theta = -1.0;           // mean reversion, < 0 for stability
  double obs_noise_norm = 1e-2;  // normalized observation variance C_v / sigma_w^2
};
void validate(const LangevinParams& params);

struct NVMParams {
  double mu_w = 0.0;
  double sigma_w2 = 1.0;
};
void validate(const NVMParams& params);

using SizeSampler = std::function<double(Rng&)>;

// Count ~ Poisson(lambda * horizon), times iid Uniform(0, horizon], sizes iid
// from size_sampler. Returned as a single-interval series on (0, horizon].
JumpSeries simulate_compound_poisson(double lambda, double horizon,
                                     const SizeSampler& size_sampler, Rng& rng);

// Shot-noise series with thinning for the analytic families, truncated at eps.
JumpSeries simulate_subordinator(const AnalyticSubordinator& spec, double horizon,
                                 Rng& rng);

// J = mu_w z + sigma_w sqrt(z) u, the per-jump NVM size map.
double nvm_jump(double z, double mu_w, double sigma_w, double u);

// Same jump times, sizes passed through nvm_jump with fresh standard normals.
JumpSeries subordinate_to_nvm(const JumpSeries& series, const NVMParams& nvm,
                              Rng& rng);

// exp(A dt) for A = [[0, 1], [0, theta]], in closed form.
Eigen::Matrix2d transition_matrix(double theta, double dt);

// exp(A dt) h for h = (0, 1)^T: the response of one unit jump after dt.
Eigen::Vector2d transition_response(double theta, double dt);

struct Moments {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();  // m_bar
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();   // C_bar
};

// Normalized moments of the jump contribution over (s, t]:
//   m_bar = sum_i Z_i exp(A(t - V_i)) h
//   C_bar = sum_i Z_i (exp(A(t - V_i)) h)(exp(A(t - V_i)) h)^T
// The mu_w and sigma_w^2 factors are excluded. Jumps must lie in (s, t].
Moments transition_moments(const std::vector<Jump>& block, double theta,
                           double s, double t);

struct SsmPath {
  std::vector<Eigen::Vector2d> states;  // X(t_j)
  std::vector<double> observations;    // Y_j = H X(t_j) + noise
};

// Forward-simulate the Langevin SSM conditional on the subordinator series:
// X(t_j) drawn from the interval Gaussian with mean mu_w m_bar and covariance
// sigma_w^2 C_bar, then Y_j = X_1(t_j) + noise with variance sigma_w^2 C_v.
SsmPath simulate_ssm(const JumpSeries& series, const LangevinParams& params,
                     const NVMParams& nvm, const std::vector<double>& obs_times,
                     const Eigen::Vector2d& x0, Rng& rng);

}  // namespace levyssm::sim
