#pragma once

#include <vector>

#include "levyssm/dp.hpp"
#include "levyssm/kalman.hpp"
#include "levyssm/rng.hpp"
#include "levyssm/sim.hpp"

namespace levyssm::nvm {

struct StudentTComponent {
  double mass = 0.0;      // W_i
  double location = 0.0;  // mu' z_i
  double scale = 0.0;     // sqrt(beta_w' (z_i + z_i^2 k_w') / alpha_w')
  double dof = 0.0;       // 2 alpha_w'
};

struct StudentTMixture {
  std::vector<StudentTComponent> components;
  double total_mass() const;
};

// Convert a subordinator Levy density sample into the marginalized NVM Levy
// density sample: one Student-t component per atom.
StudentTMixture nvm_mixture(const dp::DiscreteLevyMeasure& measure,
                            const kalman::MuWPosterior& mu_post,
                            const kalman::SigmaW2Posterior& sig_post);

double mixture_density(const StudentTMixture& mixture, double x);
double mixture_upper_tail(const StudentTMixture& mixture, double x);  // mass above x
double mixture_lower_tail(const StudentTMixture& mixture, double x);  // mass below -x

struct ValueBand {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Equally weighted average over NVM density samples with pointwise bands.
class AveragedNvm {
 public:
  explicit AveragedNvm(std::vector<StudentTMixture> samples);

  double density(double x) const;
  double upper_tail(double x) const;
  double lower_tail(double x) const;
  ValueBand density_band(double x, double coverage = 0.9) const;
  ValueBand upper_tail_band(double x, double coverage = 0.9) const;
  ValueBand lower_tail_band(double x, double coverage = 0.9) const;
  std::size_t sample_count() const { return samples_.size(); }

 private:
  ValueBand band_of(const std::vector<double>& values, double coverage) const;
  std::vector<StudentTMixture> samples_;
};

AveragedNvm average_nvm(std::vector<StudentTMixture> samples);

// Monte Carlo ground truth for the truncated NVM Levy density:
// density(x) = lambda_eps * mean_i N(x; mu_w z_i, sigma_w^2 z_i) with sizes
// drawn from the truncated subordinator size law.
class NvmGroundTruth {
 public:
  NvmGroundTruth(double rate, std::vector<double> sizes, sim::NVMParams nvm);

  double rate() const { return rate_; }
  double density(double x) const;
  double density_stderr(double x) const;  // Monte Carlo standard error
  double upper_tail(double x) const;
  double lower_tail(double x) const;

 private:
  double rate_;
  std::vector<double> sizes_;
  sim::NVMParams nvm_;
};

NvmGroundTruth nvm_ground_truth(const sim::AnalyticSubordinator& spec,
                                const sim::NVMParams& nvm, int n_mc, Rng& rng);

// Log-spaced evaluation grid spanning [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace levyssm::nvm
