#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "levyssm/rng.hpp"
#include "levyssm/sim.hpp"

namespace levyssm::dp {

struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;  // shape-rate convention throughout
};

// Base distribution H_eta over jump sizes: Gamma(shape, rate). Parameters are
// fixed, never sampled.
struct BaseMeasure {
  double shape = 1.0;
  double rate = 1.0;
};
double base_sample(const BaseMeasure& base, Rng& rng);

struct DPHyper {
  double alpha = 1.0;           // concentration
  BaseMeasure base;
  int truncation = 0;           // stick-breaking level K; 0 selects it from alpha + M
  int truncation_cap = 4096;
  GammaParams alpha_prior{1.0, 1.0};
};
void validate(const DPHyper& hyper);

// K = ceil(4 (alpha + n) log(1/delta)) with delta = 1e-4, capped. The leftover
// stick mass beyond K decays like exp(-K / (alpha + n)).
int resolve_truncation(const DPHyper& hyper, std::size_t n_data);

struct DiscreteMeasure {
  Eigen::VectorXd weights;  // nonnegative, sums to 1
  Eigen::VectorXd atoms;    // positive
};
void validate(const DiscreteMeasure& measure);

// Unnormalized Levy density sample Q = lambda * f: atom j carries mass
// rate * weights[j].
struct DiscreteLevyMeasure {
  double rate = 0.0;
  DiscreteMeasure measure;

  double mass(Eigen::Index j) const { return rate * measure.weights(j); }
  double upper_tail(double x) const;  // sum of masses at atoms > x
};
void validate(const DiscreteLevyMeasure& measure);

// Exact-duplicate atoms merged with summed weights; used when reporting.
DiscreteMeasure merge_duplicates(const DiscreteMeasure& measure);

// Gamma posterior for the rate: Gamma(shape + M, rate + V_max), from the
// consecutive-difference exponential representation of the jump times.
GammaParams lambda_posterior(const sim::JumpSeries& series, GammaParams prior);

// w_k = beta_k prod_{i<k} (1 - beta_i); betas.back() must be 1 and the last
// weight takes the remainder so the left-to-right sum is exactly 1.
Eigen::VectorXd stick_weights(const Eigen::VectorXd& betas);

// One truncated stick-breaking draw from the posterior DP given jump sizes:
// sticks Beta(1, alpha + M), atoms from the posterior base mixture (fresh base
// draw with probability alpha / (alpha + M), else a uniformly chosen size).
DiscreteMeasure sample_posterior_dp(std::span<const double> sizes,
                                    const DPHyper& hyper, Rng& rng);

// Mixture weight rho for the concentration-parameter Gibbs step:
// rho / (1 - rho) = (a + k - 1) / (n (b - log phi)).
double alpha_mixture_weight(double a, double b, double k, double n,
                            double log_phi);

// Auxiliary-variable Gibbs update of the DP concentration: phi ~ Beta(alpha+1, n),
// then alpha from the two-component Gamma mixture.
double sample_alpha(int k_distinct, int n, double alpha, const GammaParams& prior,
                    Rng& rng);

DiscreteLevyMeasure combine_measure(double rate, DiscreteMeasure f);

struct TailBand {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Posterior mean of the sampled Levy densities, exposed through the upper
// tail function x -> mean_l sum_{atoms > x} mass, with pointwise bands from
// the per-sample tails.
class PosteriorMeanMeasure {
 public:
  explicit PosteriorMeanMeasure(std::vector<DiscreteLevyMeasure> samples);

  double mean_tail(double x) const;
  TailBand tail_band(double x, double coverage = 0.9) const;
  double mean_rate() const;
  const std::vector<DiscreteLevyMeasure>& samples() const { return samples_; }

 private:
  std::vector<DiscreteLevyMeasure> samples_;
};

PosteriorMeanMeasure posterior_mean_measure(std::vector<DiscreteLevyMeasure> samples);

}  // namespace levyssm::dp
