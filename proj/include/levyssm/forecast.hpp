#pragma once

#include <vector>

#include "levyssm/dp.hpp"
#include "levyssm/kalman.hpp"
#include "levyssm/rng.hpp"

namespace levyssm::forecast {

struct ForecastRecord {
  double time = 0.0;
  double prev_actual = 0.0;     // y_t, the last value before the forecast
  double actual = 0.0;          // realized y_{t+1}
  double predicted_mean = 0.0;  // y_hat_{t+1}
  double predictive_var = 0.0;
};

// Random-walk benchmark: y_hat_{t+1} = y_t, variance reported as 0.
std::vector<ForecastRecord> naive_forecast(const std::vector<double>& times,
                                           const std::vector<double>& values,
                                           std::size_t start_index);

struct GaussianLangevinFit {
  double theta = -1.0;
  double drive_var = 1.0;  // Brownian drive variance sigma_d^2
  double obs_var = 1.0;    // observation noise variance
  double loglik = 0.0;
  bool converged = false;
};

// Exact discrete-time Kalman log-likelihood of the Brownian-driven Langevin
// model over an irregular time grid.
double gaussian_langevin_loglik(const std::vector<double>& times,
                                const std::vector<double>& values, double theta,
                                double drive_var, double obs_var);

// Maximum likelihood over (theta, drive_var, obs_var) by multi-start
// Nelder-Mead on log-transformed parameters.
GaussianLangevinFit gaussian_langevin_mle(const std::vector<double>& times,
                                          const std::vector<double>& values);

std::vector<ForecastRecord> gaussian_langevin_forecast(
    const std::vector<double>& times, const std::vector<double>& values,
    const GaussianLangevinFit& fit, std::size_t start_index);

struct RbpfResult {
  std::vector<ForecastRecord> records;
  long resample_count = 0;
  long weight_resets = 0;  // all-zero weights recovered by a uniform reset
};

// Rao-Blackwellized particle filter for the Levy Langevin model: particles
// carry interval jump draws from `measure` plus a marginalized Kalman state;
// weights are incremental Student-t predictive densities. Systematic
// resampling when the effective sample size drops below half the particles.
RbpfResult rbpf_forecast(const std::vector<double>& times,
                         const std::vector<double>& values,
                         const dp::DiscreteLevyMeasure& measure, double theta,
                         const kalman::ModelSpec& model, int n_particles,
                         std::size_t start_index, Rng& rng);

// Mixing mode: each particle is assigned one retained posterior sample
// (measure, theta) uniformly at random and keeps it through resampling.
RbpfResult rbpf_forecast_mixed(const std::vector<double>& times,
                               const std::vector<double>& values,
                               const std::vector<dp::DiscreteLevyMeasure>& measures,
                               const std::vector<double>& thetas,
                               const kalman::ModelSpec& model, int n_particles,
                               std::size_t start_index, Rng& rng);

struct Score {
  double mse = 0.0;
  double hit_rate = 0.0;
};

// MSE of the one-step predictions plus directional hit rate; an exactly zero
// predicted change counts as a miss (table convention forced by the naive row).
Score score(const std::vector<ForecastRecord>& records);
Score score(const std::vector<ForecastRecord>& records,
            const std::vector<double>& actuals);  // validates alignment

}  // namespace levyssm::forecast
