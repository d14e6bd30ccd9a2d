#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "levyssm/dp.hpp"
#include "levyssm/kalman.hpp"
#include "levyssm/rng.hpp"
#include "levyssm/sim.hpp"

namespace levyssm::gibbs {

// Prior over the mean reversion: log-normal on -theta, i.e. Gaussian on
// xi = log(-theta). Working in xi space folds the random-walk proposal's
// Jacobian into the prior density.
struct ThetaPrior {
  double log_mean = 0.0;
  double log_sd = 1.5;
};
double theta_log_prior_xi(const ThetaPrior& prior, double xi);

// Log acceptance ratio for the theta move: likelihood ratio times the prior
// ratio expressed in xi space (proposal is symmetric in xi).
double theta_log_accept(double loglik_new, double loglik_old,
                        double log_prior_xi_new, double log_prior_xi_old);

struct BlockSchedule {
  int block_len = 5;
  int overlap = 2;
};
void validate(const BlockSchedule& schedule);

// Half-open interval-index blocks covering 0..n_intervals-1, consecutive
// blocks sharing `overlap` intervals.
std::vector<std::pair<int, int>> make_blocks(int n_intervals,
                                             const BlockSchedule& schedule);

// Restrictions on the block proposal, used to make the configuration space
// finite for exact-enumeration checks. Defaults reproduce the unrestricted
// compound Poisson proposal.
struct ProposalOptions {
  std::vector<double> time_grid;  // empty: continuous uniform times on the span
  int max_jumps = 0;              // 0: unbounded; else Poisson count conditioned <= max
};

struct ChainConfig {
  kalman::ModelSpec model;
  dp::DPHyper dp_hyper;
  dp::GammaParams lambda_prior{1.0, 1.0};
  ThetaPrior theta_prior;
  double theta_init = 0.0;  // 0: draw -theta from the prior
  double theta_prop_scale = 0.5;
  bool adapt_theta = true;  // adapt the proposal scale during burn-in only
  bool sample_theta = true;
  bool sample_measure = true;  // false: hold fixed_measure for the whole run
  std::optional<dp::DiscreteLevyMeasure> fixed_measure;
  sim::AnalyticSubordinator init_subordinator{
      sim::SubordinatorFamily::kTemperedStable, 1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1e-2};
  BlockSchedule schedule;
  ProposalOptions proposal;
  long n_iter = 120000;
  long burn_in = 20000;
  int thin = 100;
};
void validate(const ChainConfig& config);

// Weighted atom picker built once per measure; block proposals draw sizes
// from it without rebuilding the discrete distribution.
class AtomSampler {
 public:
  AtomSampler() = default;
  explicit AtomSampler(const dp::DiscreteMeasure& measure);
  double operator()(Rng& rng) const;

 private:
  std::vector<double> atoms_;
  mutable std::discrete_distribution<int> dist_;
};

struct ChainState {
  sim::JumpSeries series;
  dp::DiscreteLevyMeasure measure;
  double dp_alpha = 1.0;
  double theta = -1.0;

  // Caches, all consistent with (series, theta): per-interval normalized
  // moments and transitions, plus N+1 filter prefix snapshots. prefix[j]
  // depends only on data and jumps up to t_j, which is what makes the blocked
  // updates exact with a partial refilter.
  std::vector<sim::Moments> interval_moments;
  std::vector<Eigen::Matrix2d> transitions;
  std::vector<kalman::MarginalKalmanState> prefix;
  double loglik = 0.0;
  AtomSampler atom_sampler;
};

struct TimeMarginal {
  Eigen::Vector3d location = Eigen::Vector3d::Zero();
  Eigen::Vector3d scale_diag = Eigen::Vector3d::Zero();
  double dof = 0.0;
};

struct RetainedSample {
  long iteration = 0;
  dp::DiscreteLevyMeasure measure;
  double theta = 0.0;
  double dp_alpha = 0.0;
  kalman::SigmaW2Posterior sigma_w2;
  kalman::MuWPosterior mu_w;
  std::vector<TimeMarginal> filtering;  // per observation time
  std::vector<double> path;             // subordinator path on the obs grid
};

class SampleSink {
 public:
  virtual ~SampleSink() = default;
  virtual void on_sample(const RetainedSample& sample) = 0;
};

struct AcceptanceCounters {
  long proposed_blocks = 0;
  long accepted_blocks = 0;
  long proposed_theta = 0;
  long accepted_theta = 0;
  long numerical_rejects = 0;
};

struct PosteriorSummary {
  std::vector<double> obs_times;
  std::vector<RetainedSample> samples;
  std::vector<double> theta_trace;
  std::vector<double> alpha_trace;
  std::vector<double> lambda_trace;
  std::vector<double> loglik_trace;
  AcceptanceCounters counters;
  double theta_prop_scale_final = 0.0;
};

class Sampler {
 public:
  Sampler(std::vector<double> obs_times, std::vector<double> obs_values,
          ChainConfig config);

  ChainState make_initial(Rng& rng) const;

  // One sweep of each Gibbs step. step_series runs the full block schedule.
  void step_measure(ChainState& state, Rng& rng) const;
  void step_series(ChainState& state, Rng& rng);
  void step_theta(ChainState& state, Rng& rng, bool adapt);

  // Compound Poisson proposal restricted to (span_lo, span_hi]: the prior
  // p({Z_i, V_i} | Q) of the blocked MH move.
  std::vector<sim::Jump> propose_block(const dp::DiscreteLevyMeasure& measure,
                                       double span_lo, double span_hi,
                                       Rng& rng) const;

  // Full-data log marginal of a candidate that replaces intervals [start, end).
  // Runs the filter from the cached prefix at `start` to the last observation.
  double candidate_loglik(const ChainState& state, int start, int end,
                          const std::vector<std::vector<sim::Jump>>& new_groups,
                          std::vector<sim::Moments>* new_moments = nullptr,
                          std::vector<kalman::MarginalKalmanState>* suffix =
                              nullptr) const;

  void rebuild_cache(ChainState& state) const;
  double recompute_loglik(const ChainState& state) const;  // from-scratch pass

  RetainedSample make_retained(const ChainState& state, long iteration) const;

  const AcceptanceCounters& counters() const { return counters_; }
  double proposal_scale() const { return prop_scale_; }
  const ChainConfig& config() const { return cfg_; }

 private:
  std::vector<sim::Jump> propose_with(const AtomSampler& atoms, double rate,
                                      double span_lo, double span_hi,
                                      Rng& rng) const;

  std::vector<double> times_;
  std::vector<double> values_;
  ChainConfig cfg_;
  std::vector<std::pair<int, int>> blocks_;
  AcceptanceCounters counters_;
  double prop_scale_;
  long adapt_window_proposed_ = 0;
  long adapt_window_accepted_ = 0;
};

PosteriorSummary run_chain(const std::vector<double>& obs_times,
                           const std::vector<double>& obs_values,
                           const ChainConfig& config, std::uint64_t seed,
                           SampleSink* sink = nullptr);

// Equally weighted Student-t mixture over retained samples for one state
// coordinate at one observation index.
class StateMixture {
 public:
  StateMixture(std::vector<double> locations, std::vector<double> scales,
               std::vector<double> dofs);
  double density(double x) const;
  double mean() const;

 private:
  std::vector<double> locations_, scales_, dofs_;
};

StateMixture posterior_state_mixture(const PosteriorSummary& summary,
                                     std::size_t t_index, int coord = 0);

}  // namespace levyssm::gibbs
