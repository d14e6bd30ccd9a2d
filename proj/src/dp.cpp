#include "levyssm/dp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace levyssm::dp {

double base_sample(const BaseMeasure& base, Rng& rng) {
  std::gamma_distribution<double> g(base.shape, 1.0 / base.rate);
  return g(rng);
}

void validate(const DPHyper& hyper) {
  if (!(hyper.alpha > 0.0)) throw std::invalid_argument("DPHyper: alpha must be positive");
  if (!(hyper.base.shape > 0.0) || !(hyper.base.rate > 0.0)) {
    throw std::invalid_argument("DPHyper: base measure parameters must be positive");
  }
  if (hyper.truncation < 0 || hyper.truncation_cap < 1) {
    throw std::invalid_argument("DPHyper: invalid truncation settings");
  }
  if (!(hyper.alpha_prior.shape > 0.0) || !(hyper.alpha_prior.rate > 0.0)) {
    throw std::invalid_argument("DPHyper: alpha prior parameters must be positive");
  }
}

int resolve_truncation(const DPHyper& hyper, std::size_t n_data) {
  if (hyper.truncation > 0) return hyper.truncation;
  constexpr double kLogInvDelta = 9.210340371976184;  // log(1e4)
  const double k = std::ceil(4.0 * (hyper.alpha + static_cast<double>(n_data)) *
                             kLogInvDelta);
  return std::clamp(static_cast<int>(k), 1, hyper.truncation_cap);
}

void validate(const DiscreteMeasure& measure) {
  if (measure.weights.size() != measure.atoms.size() || measure.atoms.size() == 0) {
    throw std::invalid_argument("DiscreteMeasure: weights/atoms size mismatch");
  }
  if ((measure.weights.array() < 0.0).any() || (measure.atoms.array() <= 0.0).any()) {
    throw std::invalid_argument("DiscreteMeasure: weights must be >= 0, atoms > 0");
  }
  if (std::abs(measure.weights.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
  }
}

void validate(const DiscreteLevyMeasure& measure) {
  if (!(measure.rate > 0.0)) {
    throw std::invalid_argument("DiscreteLevyMeasure: rate must be positive");
  }
  validate(measure.measure);
}

double DiscreteLevyMeasure::upper_tail(double x) const {
  double tail = 0.0;
  for (Eigen::Index j = 0; j < measure.atoms.size(); ++j) {
    if (measure.atoms(j) > x) tail += measure.weights(j);
  }
  return rate * tail;
}

DiscreteMeasure merge_duplicates(const DiscreteMeasure& measure) {
  std::map<double, double> merged;
  for (Eigen::Index j = 0; j < measure.atoms.size(); ++j) {
    merged[measure.atoms(j)] += measure.weights(j);
  }
  DiscreteMeasure out;
  out.atoms.resize(static_cast<Eigen::Index>(merged.size()));
  out.weights.resize(out.atoms.size());
  Eigen::Index j = 0;
  for (const auto& [atom, weight] : merged) {
    out.atoms(j) = atom;
    out.weights(j) = weight;
    ++j;
  }
  return out;
}

GammaParams lambda_posterior(const sim::JumpSeries& series, GammaParams prior) {
  const std::size_t m = series.total_jumps();
  if (m == 0) return prior;
  // Consecutive differences of the sorted times are Exp(lambda); their sum
  // telescopes to the largest jump time.
  return {prior.shape + static_cast<double>(m), prior.rate + series.max_time()};
}

Eigen::VectorXd stick_weights(const Eigen::VectorXd& betas) {
  const Eigen::Index k = betas.size();
  if (k < 1 || betas(k - 1) != 1.0) {
    throw std::invalid_argument("stick_weights: last beta must equal 1");
  }
  Eigen::VectorXd w(k);
  double remaining = 1.0;
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    w(i) = betas(i) * remaining;
    remaining *= 1.0 - betas(i);
  }
  w(k - 1) = 0.0;
  // Last stick takes the remainder, corrected until the left-to-right sum is
  // exactly 1. A one-ulp overshoot of the leading weights is shaved off the
  // largest weight, which always absorbs a correction of that size.
  for (int pass = 0; pass < 64; ++pass) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) s += w(i);
    if (s == 1.0) break;
    if (s > 1.0) {
      Eigen::Index jmax = 0;
      w.maxCoeff(&jmax);
      w(jmax) = std::max(0.0, w(jmax) - (s - 1.0));
    } else {
      w(k - 1) += 1.0 - s;
    }
  }
  return w;
}

DiscreteMeasure sample_posterior_dp(std::span<const double> sizes,
                                    const DPHyper& hyper, Rng& rng) {
  validate(hyper);
  const std::size_t m = sizes.size();
  if (m == 0 && !(hyper.alpha > 0.0)) {
    throw std::invalid_argument("sample_posterior_dp: no sizes and alpha = 0");
  }
  const int k = resolve_truncation(hyper, m);
  const double concentration = hyper.alpha + static_cast<double>(m);

  Eigen::VectorXd betas(k);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i + 1 < k; ++i) {
    // Beta(1, c) by inverse CDF.
    betas(i) = -std::expm1(std::log1p(-unif(rng)) / concentration);
  }
  betas(k - 1) = 1.0;

  DiscreteMeasure out;
  out.weights = stick_weights(betas);
  out.atoms.resize(k);
  const double fresh_prob = hyper.alpha / concentration;
  std::uniform_int_distribution<std::size_t> pick(0, m == 0 ? 0 : m - 1);
  for (int i = 0; i < k; ++i) {
    if (m == 0 || unif(rng) < fresh_prob) {
      out.atoms(i) = base_sample(hyper.base, rng);
    } else {
      out.atoms(i) = sizes[pick(rng)];
    }
  }
  return out;
}

double alpha_mixture_weight(double a, double b, double k, double n,
                            double log_phi) {
  const double odds = (a + k - 1.0) / (n * (b - log_phi));
  return odds / (1.0 + odds);
}

double sample_alpha(int k_distinct, int n, double alpha, const GammaParams& prior,
                    Rng& rng) {
  if (k_distinct < 1 || k_distinct > n) {
    throw std::invalid_argument("sample_alpha: need 1 <= k <= n");
  }
  // phi ~ Beta(alpha + 1, n)
  std::gamma_distribution<double> g1(alpha + 1.0, 1.0);
  std::gamma_distribution<double> g2(static_cast<double>(n), 1.0);
  const double u = g1(rng);
  const double v = g2(rng);
  const double log_phi = std::log(u) - std::log(u + v);

  const double rho =
      alpha_mixture_weight(prior.shape, prior.rate, k_distinct, n, log_phi);
  const double rate = prior.rate - log_phi;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double shape = unif(rng) < rho ? prior.shape + k_distinct
                                       : prior.shape + k_distinct - 1.0;
  std::gamma_distribution<double> g(shape, 1.0 / rate);
  return g(rng);
}

DiscreteLevyMeasure combine_measure(double rate, DiscreteMeasure f) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("combine_measure: rate must be positive");
  }
  return {rate, std::move(f)};
}

PosteriorMeanMeasure::PosteriorMeanMeasure(std::vector<DiscreteLevyMeasure> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw std::invalid_argument("posterior_mean_measure: needs at least one sample");
  }
}

double PosteriorMeanMeasure::mean_tail(double x) const {
  double acc = 0.0;
  for (const auto& s : samples_) acc += s.upper_tail(x);
  return acc / static_cast<double>(samples_.size());
}

TailBand PosteriorMeanMeasure::tail_band(double x, double coverage) const {
  std::vector<double> tails;
  tails.reserve(samples_.size());
  for (const auto& s : samples_) tails.push_back(s.upper_tail(x));
  std::sort(tails.begin(), tails.end());
  const double lo_q = 0.5 * (1.0 - coverage);
  const auto quantile = [&tails](double q) {
    const double pos = q * static_cast<double>(tails.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < tails.size() ? tails[i] * (1.0 - frac) + tails[i + 1] * frac
                                : tails.back();
  };
  TailBand band;
  band.mean = mean_tail(x);
  band.lo = quantile(lo_q);
  band.hi = quantile(1.0 - lo_q);
  return band;
}

double PosteriorMeanMeasure::mean_rate() const {
  double acc = 0.0;
  for (const auto& s : samples_) acc += s.rate;
  return acc / static_cast<double>(samples_.size());
}

PosteriorMeanMeasure posterior_mean_measure(std::vector<DiscreteLevyMeasure> samples) {
  return PosteriorMeanMeasure(std::move(samples));
}

}  // namespace levyssm::dp
