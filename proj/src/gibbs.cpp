#include "levyssm/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "levyssm/special.hpp"

namespace levyssm::gibbs {

namespace {

constexpr long kMaxProposalJumps = 1000000;

double gamma_draw(const dp::GammaParams& p, Rng& rng) {
  std::gamma_distribution<double> g(p.shape, 1.0 / p.rate);
  return g(rng);
}

int distinct_count(std::vector<double> sizes) {
  std::sort(sizes.begin(), sizes.end());
  return static_cast<int>(std::unique(sizes.begin(), sizes.end()) -
                          sizes.begin());
}

}  // namespace

double theta_log_prior_xi(const ThetaPrior& prior, double xi) {
  return special::log_normal_pdf(xi, prior.log_mean, prior.log_sd);
}

double theta_log_accept(double loglik_new, double loglik_old,
                        double log_prior_xi_new, double log_prior_xi_old) {
  return (loglik_new - loglik_old) + (log_prior_xi_new - log_prior_xi_old);
}

void validate(const BlockSchedule& schedule) {
  if (schedule.block_len < 1 || schedule.overlap < 0 ||
      schedule.overlap >= schedule.block_len) {
    throw std::invalid_argument("BlockSchedule: need block_len >= 1 and overlap in [0, block_len)");
  }
}

std::vector<std::pair<int, int>> make_blocks(int n_intervals,
                                             const BlockSchedule& schedule) {
  validate(schedule);
  if (n_intervals < 1) throw std::invalid_argument("make_blocks: no intervals");
  std::vector<std::pair<int, int>> blocks;
  const int stride = schedule.block_len - schedule.overlap;
  for (int s = 0;; s += stride) {
    const int e = std::min(s + schedule.block_len, n_intervals);
    blocks.emplace_back(s, e);
    if (e == n_intervals) break;
  }
  return blocks;
}

void validate(const ChainConfig& config) {
  kalman::validate(config.model);
  dp::validate(config.dp_hyper);
  validate(config.schedule);
  if (config.n_iter <= config.burn_in) {
    throw std::invalid_argument("ChainConfig: n_iter must exceed burn_in (no retained samples)");
  }
  if (config.burn_in < 0 || config.thin < 1) {
    throw std::invalid_argument("ChainConfig: burn_in >= 0 and thin >= 1 required");
  }
  if (!(config.theta_prop_scale > 0.0)) {
    throw std::invalid_argument("ChainConfig: theta_prop_scale must be positive");
  }
  if (!config.sample_measure && !config.fixed_measure) {
    throw std::invalid_argument("ChainConfig: fixed_measure required when sample_measure is off");
  }
  if (config.proposal.max_jumps < 0) {
    throw std::invalid_argument("ChainConfig: max_jumps must be >= 0");
  }
  if (config.theta_init > 0.0) {
    throw std::invalid_argument("ChainConfig: theta_init must be negative (or 0 to draw from the prior)");
  }
}

AtomSampler::AtomSampler(const dp::DiscreteMeasure& measure)
    : atoms_(measure.atoms.data(), measure.atoms.data() + measure.atoms.size()),
      dist_(measure.weights.data(),
            measure.weights.data() + measure.weights.size()) {}

double AtomSampler::operator()(Rng& rng) const {
  return atoms_[static_cast<std::size_t>(dist_(rng))];
}

Sampler::Sampler(std::vector<double> obs_times, std::vector<double> obs_values,
                 ChainConfig config)
    : times_(std::move(obs_times)),
      values_(std::move(obs_values)),
      cfg_(std::move(config)),
      prop_scale_(cfg_.theta_prop_scale) {
  validate(cfg_);
  if (times_.empty() || times_.size() != values_.size()) {
    throw std::invalid_argument("Sampler: observations empty or size mismatch");
  }
  if (!(times_.front() >= 0.0) || !(times_.back() > 0.0)) {
    throw std::invalid_argument("Sampler: observation times must start at or after 0 and span a positive horizon");
  }
  for (std::size_t j = 1; j < times_.size(); ++j) {
    if (!(times_[j] > times_[j - 1])) {
      throw std::invalid_argument("Sampler: observation times must be strictly increasing");
    }
  }
  blocks_ = make_blocks(static_cast<int>(times_.size()), cfg_.schedule);
}

ChainState Sampler::make_initial(Rng& rng) const {
  ChainState state;
  state.series = sim::regroup(
      sim::simulate_subordinator(cfg_.init_subordinator, times_.back(), rng),
      times_);
  if (cfg_.theta_init != 0.0) {
    state.theta = cfg_.theta_init;
  } else {
    std::normal_distribution<double> norm(cfg_.theta_prior.log_mean,
                                          cfg_.theta_prior.log_sd);
    state.theta = -std::exp(norm(rng));
  }
  state.dp_alpha = cfg_.sample_measure
                       ? gamma_draw(cfg_.dp_hyper.alpha_prior, rng)
                       : cfg_.dp_hyper.alpha;
  if (cfg_.fixed_measure) {
    state.measure = *cfg_.fixed_measure;
  } else {
    dp::DPHyper hyper = cfg_.dp_hyper;
    hyper.alpha = state.dp_alpha;
    state.measure = dp::combine_measure(
        gamma_draw(cfg_.lambda_prior, rng),
        dp::sample_posterior_dp({}, hyper, rng));
  }
  state.atom_sampler = AtomSampler(state.measure.measure);
  rebuild_cache(state);
  return state;
}

void Sampler::rebuild_cache(ChainState& state) const {
  const std::size_t n = times_.size();
  state.interval_moments.resize(n);
  state.transitions.resize(n);
  double prev = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    state.interval_moments[j] = sim::transition_moments(
        state.series.groups[j], state.theta, prev, times_[j]);
    state.transitions[j] = sim::transition_matrix(state.theta, times_[j] - prev);
    prev = times_[j];
  }
  state.prefix.clear();
  state.prefix.reserve(n + 1);
  state.prefix.push_back(kalman::initial_state(cfg_.model.prior,
                                               cfg_.model.x0_mean,
                                               cfg_.model.kappa0));
  const Eigen::RowVector3d h = kalman::extended_emission();
  for (std::size_t j = 0; j < n; ++j) {
    kalman::MarginalKalmanState s = kalman::predict(
        state.prefix.back(), state.interval_moments[j], state.transitions[j]);
    s = kalman::update(s, values_[j], h, cfg_.model.obs_noise_norm);
    state.prefix.push_back(s);
  }
  state.loglik = kalman::log_marginal(state.prefix.back(), cfg_.model.prior);
}

double Sampler::recompute_loglik(const ChainState& state) const {
  kalman::ModelSpec model = cfg_.model;
  model.theta = state.theta;
  const kalman::MarginalKalmanState final_state =
      kalman::run_filter(state.series, model, times_, values_);
  return kalman::log_marginal(final_state, model.prior);
}

void Sampler::step_measure(ChainState& state, Rng& rng) const {
  if (!cfg_.sample_measure) return;
  const std::vector<double> sizes = state.series.all_sizes();
  const int m = static_cast<int>(sizes.size());
  dp::DPHyper hyper = cfg_.dp_hyper;
  if (m == 0) {
    state.dp_alpha = gamma_draw(cfg_.dp_hyper.alpha_prior, rng);
    hyper.alpha = state.dp_alpha;
    state.measure = dp::combine_measure(gamma_draw(cfg_.lambda_prior, rng),
                                        dp::sample_posterior_dp({}, hyper, rng));
  } else {
    state.dp_alpha = dp::sample_alpha(distinct_count(sizes), m, state.dp_alpha,
                                      cfg_.dp_hyper.alpha_prior, rng);
    hyper.alpha = state.dp_alpha;
    const dp::GammaParams lambda_post =
        dp::lambda_posterior(state.series, cfg_.lambda_prior);
    state.measure = dp::combine_measure(
        gamma_draw(lambda_post, rng),
        dp::sample_posterior_dp(sizes, hyper, rng));
  }
  state.atom_sampler = AtomSampler(state.measure.measure);
}

std::vector<sim::Jump> Sampler::propose_with(const AtomSampler& atoms,
                                             double rate, double span_lo,
                                             double span_hi, Rng& rng) const {
  const double mean = rate * (span_hi - span_lo);
  if (!(mean >= 0.0) || mean > static_cast<double>(kMaxProposalJumps)) {
    throw kalman::NumericalError("propose_block: invalid expected jump count", -1);
  }
  std::poisson_distribution<long> pois(mean);
  long n = mean > 0.0 ? pois(rng) : 0;
  if (cfg_.proposal.max_jumps > 0) {
    long attempts = 0;
    while (n > cfg_.proposal.max_jumps) {  // conditioned Poisson by rejection
      if (++attempts > 100000) {
        throw kalman::NumericalError(
            "propose_block: Poisson truncation rejection stalled", -1);
      }
      n = pois(rng);
    }
  }
  std::vector<sim::Jump> jumps;
  jumps.reserve(static_cast<std::size_t>(n));
  if (cfg_.proposal.time_grid.empty()) {
    std::uniform_real_distribution<double> unif(span_lo, span_hi);
    for (long i = 0; i < n; ++i) {
      sim::Jump j;
      j.time = unif(rng);
      if (j.time == span_lo) j.time = span_hi;
      j.size = atoms(rng);
      jumps.push_back(j);
    }
  } else {
    std::vector<double> grid;
    for (double t : cfg_.proposal.time_grid) {
      if (t > span_lo && t <= span_hi) grid.push_back(t);
    }
    if (grid.empty() && n > 0) {
      throw std::invalid_argument("propose_block: time grid empty on span");
    }
    std::uniform_int_distribution<std::size_t> pick(0, grid.empty() ? 0 : grid.size() - 1);
    for (long i = 0; i < n; ++i) {
      sim::Jump j;
      j.time = grid[pick(rng)];
      j.size = atoms(rng);
      jumps.push_back(j);
    }
  }
  return jumps;
}

std::vector<sim::Jump> Sampler::propose_block(const dp::DiscreteLevyMeasure& measure,
                                              double span_lo, double span_hi,
                                              Rng& rng) const {
  return propose_with(AtomSampler(measure.measure), measure.rate, span_lo,
                      span_hi, rng);
}

double Sampler::candidate_loglik(
    const ChainState& state, int start, int end,
    const std::vector<std::vector<sim::Jump>>& new_groups,
    std::vector<sim::Moments>* new_moments,
    std::vector<kalman::MarginalKalmanState>* suffix) const {
  const int n = static_cast<int>(times_.size());
  if (start < 0 || end > n || start >= end ||
      static_cast<int>(new_groups.size()) != end - start) {
    throw std::invalid_argument("candidate_loglik: bad block range");
  }
  std::vector<sim::Moments> block_moments(static_cast<std::size_t>(end - start));
  for (int j = start; j < end; ++j) {
    const double lo = j == 0 ? 0.0 : times_[static_cast<std::size_t>(j - 1)];
    block_moments[static_cast<std::size_t>(j - start)] = sim::transition_moments(
        new_groups[static_cast<std::size_t>(j - start)], state.theta, lo,
        times_[static_cast<std::size_t>(j)]);
  }

  kalman::MarginalKalmanState s = state.prefix[static_cast<std::size_t>(start)];
  if (suffix) {
    suffix->clear();
    suffix->reserve(static_cast<std::size_t>(n - start));
  }
  const Eigen::RowVector3d h = kalman::extended_emission();
  for (int j = start; j < n; ++j) {
    const sim::Moments& mom =
        j < end ? block_moments[static_cast<std::size_t>(j - start)]
                : state.interval_moments[static_cast<std::size_t>(j)];
    s = kalman::predict(s, mom, state.transitions[static_cast<std::size_t>(j)]);
    s = kalman::update(s, values_[static_cast<std::size_t>(j)], h,
                       cfg_.model.obs_noise_norm);
    if (suffix) suffix->push_back(s);
  }
  if (new_moments) *new_moments = std::move(block_moments);
  return kalman::log_marginal(s, cfg_.model.prior);
}

void Sampler::step_series(ChainState& state, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<sim::Jump>> new_groups;
  std::vector<sim::Moments> new_moments;
  std::vector<kalman::MarginalKalmanState> suffix;
  for (const auto& [start, end] : blocks_) {
    const double span_lo =
        start == 0 ? 0.0 : times_[static_cast<std::size_t>(start - 1)];
    const double span_hi = times_[static_cast<std::size_t>(end - 1)];
    ++counters_.proposed_blocks;

    double cand_ll = 0.0;
    try {
      const std::vector<sim::Jump> jumps = propose_with(
          state.atom_sampler, state.measure.rate, span_lo, span_hi, rng);
      new_groups.assign(static_cast<std::size_t>(end - start), {});
      for (const auto& j : jumps) {
        const auto it = std::lower_bound(times_.begin(), times_.end(), j.time);
        new_groups[static_cast<std::size_t>(it - times_.begin()) -
                   static_cast<std::size_t>(start)]
            .push_back(j);
      }
      cand_ll = candidate_loglik(state, start, end, new_groups, &new_moments,
                                 &suffix);
    } catch (const kalman::NumericalError&) {
      ++counters_.numerical_rejects;
      continue;
    }

    // Proposal and prior terms cancel: accept on the marginal likelihood ratio.
    if (std::log(unif(rng)) < cand_ll - state.loglik) {
      for (int j = start; j < end; ++j) {
        state.series.groups[static_cast<std::size_t>(j)] =
            std::move(new_groups[static_cast<std::size_t>(j - start)]);
        state.interval_moments[static_cast<std::size_t>(j)] =
            new_moments[static_cast<std::size_t>(j - start)];
      }
      std::copy(suffix.begin(), suffix.end(),
                state.prefix.begin() + start + 1);
      state.loglik = cand_ll;
      ++counters_.accepted_blocks;
    }
  }
}

void Sampler::step_theta(ChainState& state, Rng& rng, bool adapt) {
  if (!cfg_.sample_theta) return;
  ++counters_.proposed_theta;
  std::normal_distribution<double> norm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double xi = std::log(-state.theta);
  const double xi_new = xi + prop_scale_ * norm(rng);
  const double theta_new = -std::exp(xi_new);

  bool accepted = false;
  try {
    ChainState cand = state;
    cand.theta = theta_new;
    rebuild_cache(cand);
    const double log_acc = theta_log_accept(
        cand.loglik, state.loglik, theta_log_prior_xi(cfg_.theta_prior, xi_new),
        theta_log_prior_xi(cfg_.theta_prior, xi));
    if (std::log(unif(rng)) < log_acc) {
      state = std::move(cand);
      accepted = true;
      ++counters_.accepted_theta;
    }
  } catch (const kalman::NumericalError&) {
    ++counters_.numerical_rejects;
  }

  if (adapt && cfg_.adapt_theta) {
    ++adapt_window_proposed_;
    if (accepted) ++adapt_window_accepted_;
    if (adapt_window_proposed_ == 100) {
      const double rate = static_cast<double>(adapt_window_accepted_) / 100.0;
      if (rate > 0.40) prop_scale_ *= 1.4;
      if (rate < 0.25) prop_scale_ /= 1.4;
      prop_scale_ = std::clamp(prop_scale_, 1e-3, 10.0);
      adapt_window_proposed_ = 0;
      adapt_window_accepted_ = 0;
    }
  }
}

RetainedSample Sampler::make_retained(const ChainState& state,
                                      long iteration) const {
  RetainedSample out;
  out.iteration = iteration;
  out.measure = state.measure;
  out.theta = state.theta;
  out.dp_alpha = state.dp_alpha;
  out.sigma_w2 = kalman::sigma_w2_posterior(state.prefix.back(), cfg_.model.prior);
  out.mu_w = kalman::mu_w_posterior(state.prefix.back());
  out.filtering.reserve(times_.size());
  for (std::size_t j = 1; j <= times_.size(); ++j) {
    const kalman::StudentT3 st =
        kalman::student_t_filtering(state.prefix[j], cfg_.model.prior);
    TimeMarginal tm;
    tm.location = st.location;
    tm.scale_diag = st.scale.diagonal();
    tm.dof = st.dof;
    out.filtering.push_back(tm);
  }
  out.path.assign(times_.size(), 0.0);
  double acc = 0.0;
  for (std::size_t j = 0; j < times_.size(); ++j) {
    for (const auto& jump : state.series.groups[j]) acc += jump.size;
    out.path[j] = acc;
  }
  return out;
}

PosteriorSummary run_chain(const std::vector<double>& obs_times,
                           const std::vector<double>& obs_values,
                           const ChainConfig& config, std::uint64_t seed,
                           SampleSink* sink) {
  Sampler sampler(obs_times, obs_values, config);
  Rng rng_init = make_rng(seed, "chain-init");
  Rng rng_measure = make_rng(seed, "measure");
  Rng rng_series = make_rng(seed, "series");
  Rng rng_theta = make_rng(seed, "theta");

  ChainState state = sampler.make_initial(rng_init);
  PosteriorSummary summary;
  summary.obs_times = obs_times;
  const long n_retained_max =
      (config.n_iter - config.burn_in + config.thin - 1) / config.thin;
  summary.samples.reserve(static_cast<std::size_t>(n_retained_max));
  summary.theta_trace.reserve(static_cast<std::size_t>(config.n_iter));

  for (long iter = 0; iter < config.n_iter; ++iter) {
    sampler.step_measure(state, rng_measure);
    sampler.step_series(state, rng_series);
    sampler.step_theta(state, rng_theta, iter < config.burn_in);
    summary.theta_trace.push_back(state.theta);
    summary.alpha_trace.push_back(state.dp_alpha);
    summary.lambda_trace.push_back(state.measure.rate);
    summary.loglik_trace.push_back(state.loglik);
    if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0) {
      RetainedSample sample = sampler.make_retained(state, iter);
      if (sink) sink->on_sample(sample);
      summary.samples.push_back(std::move(sample));
    }
  }
  summary.counters = sampler.counters();
  summary.theta_prop_scale_final = sampler.proposal_scale();
  return summary;
}

StateMixture::StateMixture(std::vector<double> locations,
                           std::vector<double> scales, std::vector<double> dofs)
    : locations_(std::move(locations)),
      scales_(std::move(scales)),
      dofs_(std::move(dofs)) {
  if (locations_.empty() || locations_.size() != scales_.size() ||
      locations_.size() != dofs_.size()) {
    throw std::invalid_argument("StateMixture: component size mismatch");
  }
}

double StateMixture::density(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    acc += special::student_t_pdf(x, locations_[i], scales_[i], dofs_[i]);
  }
  return acc / static_cast<double>(locations_.size());
}

double StateMixture::mean() const {
  double acc = 0.0;
  for (double loc : locations_) acc += loc;
  return acc / static_cast<double>(locations_.size());
}

StateMixture posterior_state_mixture(const PosteriorSummary& summary,
                                     std::size_t t_index, int coord) {
  if (summary.samples.empty()) {
    throw std::invalid_argument("posterior_state_mixture: no retained samples");
  }
  if (coord < 0 || coord > 2) {
    throw std::invalid_argument("posterior_state_mixture: coord in {0, 1, 2}");
  }
  std::vector<double> locs, scales, dofs;
  locs.reserve(summary.samples.size());
  for (const auto& s : summary.samples) {
    const TimeMarginal& tm = s.filtering.at(t_index);
    locs.push_back(tm.location(coord));
    scales.push_back(std::sqrt(std::max(tm.scale_diag(coord), 1e-300)));
    dofs.push_back(tm.dof);
  }
  return StateMixture(std::move(locs), std::move(scales), std::move(dofs));
}

}  // namespace levyssm::gibbs
