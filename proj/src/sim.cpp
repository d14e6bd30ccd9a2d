#include "levyssm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "levyssm/quadrature.hpp"

namespace levyssm::sim {

std::size_t JumpSeries::total_jumps() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

std::vector<double> JumpSeries::all_sizes() const {
  std::vector<double> sizes;
  sizes.reserve(total_jumps());
  for (const auto& g : groups) {
    for (const auto& j : g) sizes.push_back(j.size);
  }
  return sizes;
}

double JumpSeries::max_time() const {
  double m = 0.0;
  for (const auto& g : groups) {
    for (const auto& j : g) m = std::max(m, j.time);
  }
  return m;
}

void validate(const JumpSeries& series) {
  if (!(series.horizon > 0.0)) {
    throw std::invalid_argument("JumpSeries: horizon must be positive");
  }
  if (series.boundaries.size() != series.groups.size()) {
    throw std::invalid_argument("JumpSeries: boundaries/groups size mismatch");
  }
  double prev = 0.0;
  for (std::size_t j = 0; j < series.boundaries.size(); ++j) {
    const double b = series.boundaries[j];
    if (!(b > prev) && !(j == 0 && b == 0.0)) {
      throw std::invalid_argument("JumpSeries: boundaries must be strictly increasing");
    }
    for (const auto& jump : series.groups[j]) {
      if (!(jump.time > prev) || !(jump.time <= b)) {
        throw std::invalid_argument("JumpSeries: jump time outside its interval");
      }
    }
    prev = b;
  }
}

JumpSeries regroup(const JumpSeries& series, std::vector<double> boundaries) {
  if (boundaries.empty()) {
    throw std::invalid_argument("regroup: boundaries must be nonempty");
  }
  JumpSeries out;
  out.horizon = boundaries.back();
  out.groups.assign(boundaries.size(), {});
  out.boundaries = std::move(boundaries);
  for (const auto& g : series.groups) {
    for (const auto& jump : g) {
      auto it = std::lower_bound(out.boundaries.begin(), out.boundaries.end(),
                                 jump.time);
      if (it == out.boundaries.end()) {
        throw std::invalid_argument("regroup: jump time beyond last boundary");
      }
      out.groups[static_cast<std::size_t>(it - out.boundaries.begin())]
          .push_back(jump);
    }
  }
  return out;
}

void validate(const AnalyticSubordinator& spec) {
  if (!(spec.eps > 0.0)) {
    throw std::invalid_argument(
        "AnalyticSubordinator: eps must be positive (infinite expected jump count)");
  }
  switch (spec.family) {
    case SubordinatorFamily::kGamma:
      if (!(spec.shape_c > 0.0) || !(spec.beta > 0.0)) {
        throw std::invalid_argument("gamma subordinator: C and beta must be positive");
      }
      break;
    case SubordinatorFamily::kTemperedStable:
      if (!(spec.shape_c > 0.0) || !(spec.gamma > 0.0) || !(spec.kappa > 0.0) ||
          !(spec.kappa < 1.0)) {
        throw std::invalid_argument(
            "tempered-stable subordinator: need C, gamma > 0 and kappa in (0, 1)");
      }
      break;
    case SubordinatorFamily::kPointMass:
      if (!(spec.lambda0 > 0.0) || !(spec.z0 > 0.0)) {
        throw std::invalid_argument("point-mass subordinator: lambda0, z0 must be positive");
      }
      break;
  }
}

double levy_density(const AnalyticSubordinator& spec, double x) {
  if (!(x > 0.0)) return 0.0;
  switch (spec.family) {
    case SubordinatorFamily::kGamma:
      return spec.shape_c / x * std::exp(-spec.beta * x);
    case SubordinatorFamily::kTemperedStable:
      return spec.shape_c * std::pow(x, -1.0 - spec.kappa) *
             std::exp(-spec.gamma * x);
    case SubordinatorFamily::kPointMass:
      throw std::invalid_argument("levy_density: point-mass family has no density");
  }
  return 0.0;
}

double truncated_activity(const AnalyticSubordinator& spec) {
  validate(spec);
  if (spec.family == SubordinatorFamily::kPointMass) {
    return spec.z0 >= spec.eps ? spec.lambda0 : 0.0;
  }
  auto q = quad::integrate_upper([&spec](double x) { return levy_density(spec, x); },
                                 spec.eps, 1e-10, 1e-12);
  if (!q.converged) {
    throw std::runtime_error("truncated_activity: quadrature did not converge");
  }
  return q.value;
}

double truncated_tail(const AnalyticSubordinator& spec, double x) {
  validate(spec);
  if (spec.family == SubordinatorFamily::kPointMass) {
    return (spec.z0 >= spec.eps && spec.z0 > x) ? spec.lambda0 : 0.0;
  }
  const double lo = std::max(x, spec.eps);
  auto q = quad::integrate_upper([&spec](double z) { return levy_density(spec, z); },
                                 lo, 1e-10, 1e-12);
  if (!q.converged) {
    throw std::runtime_error("truncated_tail: quadrature did not converge");
  }
  return q.value;
}

double sample_truncated_size(const AnalyticSubordinator& spec, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (spec.family) {
    case SubordinatorFamily::kPointMass:
      return spec.z0;
    case SubordinatorFamily::kGamma: {
      // Propose from Exp(beta) shifted to [eps, inf); accept with eps / x.
      std::exponential_distribution<double> expo(spec.beta);
      for (;;) {
        const double x = spec.eps + expo(rng);
        if (unif(rng) * x <= spec.eps) return x;
      }
    }
    case SubordinatorFamily::kTemperedStable: {
      // Propose from the truncated Pareto x = eps U^{-1/kappa}; accept with
      // exp(-gamma (x - eps)).
      for (;;) {
        const double x = spec.eps * std::pow(unif(rng), -1.0 / spec.kappa);
        if (std::log(unif(rng)) <= -spec.gamma * (x - spec.eps)) return x;
      }
    }
  }
  throw std::logic_error("sample_truncated_size: unreachable");
}

void validate(const LangevinParams& params) {
  if (!(params.theta < 0.0)) {
    throw std::invalid_argument("LangevinParams: theta < 0 required for stability");
  }
  if (params.obs_noise_norm < 0.0) {
    throw std::invalid_argument("LangevinParams: obs_noise_norm must be nonnegative");
  }
}

void validate(const NVMParams& params) {
  // sigma_w2 == 0 is admitted as the deterministic limit in simulation.
  if (params.sigma_w2 < 0.0) {
    throw std::invalid_argument("NVMParams: sigma_w2 must be nonnegative");
  }
}

JumpSeries simulate_compound_poisson(double lambda, double horizon,
                                     const SizeSampler& size_sampler, Rng& rng) {
  if (lambda < 0.0 || !(horizon > 0.0)) {
    throw std::invalid_argument("simulate_compound_poisson: need lambda >= 0, horizon > 0");
  }
  JumpSeries series;
  series.horizon = horizon;
  series.boundaries = {horizon};
  series.groups.resize(1);
  if (lambda > 0.0) {
    std::poisson_distribution<long> pois(lambda * horizon);
    const long n = pois(rng);
    std::uniform_real_distribution<double> unif(0.0, horizon);
    series.groups[0].reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      Jump j;
      j.time = unif(rng);
      if (j.time == 0.0) j.time = horizon;  // fold onto (0, horizon]
      j.size = size_sampler(rng);
      series.groups[0].push_back(j);
    }
  }
  return series;
}

JumpSeries simulate_subordinator(const AnalyticSubordinator& spec, double horizon,
                                 Rng& rng) {
  validate(spec);
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("simulate_subordinator: horizon must be positive");
  }
  if (spec.family == SubordinatorFamily::kPointMass) {
    if (spec.z0 < spec.eps) {
      JumpSeries empty;
      empty.horizon = horizon;
      empty.boundaries = {horizon};
      empty.groups.resize(1);
      return empty;
    }
    return simulate_compound_poisson(spec.lambda0, horizon,
                                     [&spec](Rng&) { return spec.z0; }, rng);
  }

  JumpSeries series;
  series.horizon = horizon;
  series.boundaries = {horizon};
  series.groups.resize(1);

  // Shot-noise series: unit-rate epochs scaled by the horizon give a candidate
  // process whose accepted jumps realize T * Q(x) dx on [eps, inf). Candidate
  // sizes decrease in the epoch, so generation stops at the first one < eps.
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double ct = spec.shape_c * horizon;
  double epoch = 0.0;
  for (;;) {
    epoch += expo(rng);
    double x = 0.0;
    double accept_prob = 1.0;
    if (spec.family == SubordinatorFamily::kGamma) {
      x = 1.0 / (spec.beta * std::expm1(epoch / ct));
      accept_prob = (1.0 + spec.beta * x) * std::exp(-spec.beta * x);
    } else {
      x = std::pow(spec.kappa * epoch / ct, -1.0 / spec.kappa);
      accept_prob = std::exp(-spec.gamma * x);
    }
    if (x < spec.eps) break;
    if (unif(rng) <= accept_prob) {
      Jump j;
      j.size = x;
      j.time = unif(rng) * horizon;
      if (j.time == 0.0) j.time = horizon;
      series.groups[0].push_back(j);
    }
  }
  return series;
}

double nvm_jump(double z, double mu_w, double sigma_w, double u) {
  return mu_w * z + sigma_w * std::sqrt(z) * u;
}

JumpSeries subordinate_to_nvm(const JumpSeries& series, const NVMParams& nvm,
                              Rng& rng) {
  validate(nvm);
  const double sigma_w = std::sqrt(nvm.sigma_w2);
  std::normal_distribution<double> norm(0.0, 1.0);
  JumpSeries out = series;
  for (auto& g : out.groups) {
    for (auto& j : g) {
      if (!(j.size > 0.0)) {
        throw std::invalid_argument("subordinate_to_nvm: all sizes must be positive");
      }
      j.size = nvm_jump(j.size, nvm.mu_w, sigma_w, norm(rng));
    }
  }
  return out;
}

Eigen::Matrix2d transition_matrix(double theta, double dt) {
  if (dt < 0.0) throw std::invalid_argument("transition_matrix: dt must be >= 0");
  Eigen::Matrix2d m;
  const Eigen::Vector2d g = transition_response(theta, dt);
  m << 1.0, g(0), 0.0, g(1);
  return m;
}

Eigen::Vector2d transition_response(double theta, double dt) {
  const double x = theta * dt;
  double phi;  // (e^{theta dt} - 1) / theta
  if (std::abs(x) < 1e-8) {
    phi = dt * (1.0 + 0.5 * x + x * x / 6.0);  // series form, avoids 0/0 at theta -> 0
  } else {
    phi = std::expm1(x) / theta;
  }
  return {phi, std::exp(x)};
}

Moments transition_moments(const std::vector<Jump>& block, double theta,
                           double s, double t) {
  Moments mom;
  for (const auto& j : block) {
    if (!(j.time > s) || !(j.time <= t)) {
      throw std::invalid_argument("transition_moments: jump outside (s, t]");
    }
    const Eigen::Vector2d g = transition_response(theta, t - j.time);
    mom.mean += j.size * g;
    mom.cov += j.size * g * g.transpose();
  }
  return mom;
}

SsmPath simulate_ssm(const JumpSeries& series, const LangevinParams& params,
                     const NVMParams& nvm, const std::vector<double>& obs_times,
                     const Eigen::Vector2d& x0, Rng& rng) {
  validate(params);
  validate(nvm);
  for (std::size_t j = 1; j < obs_times.size(); ++j) {
    if (!(obs_times[j] > obs_times[j - 1])) {
      throw std::invalid_argument("simulate_ssm: obs_times must be strictly increasing");
    }
  }
  const JumpSeries grouped = regroup(series, obs_times);
  const double sigma_w = std::sqrt(nvm.sigma_w2);
  std::normal_distribution<double> norm(0.0, 1.0);

  SsmPath path;
  path.states.reserve(obs_times.size());
  path.observations.reserve(obs_times.size());
  Eigen::Vector2d x = x0;
  double prev_t = 0.0;
  for (std::size_t j = 0; j < obs_times.size(); ++j) {
    const double t = obs_times[j];
    const Moments mom = transition_moments(grouped.groups[j], params.theta, prev_t, t);
    x = transition_matrix(params.theta, t - prev_t) * x + nvm.mu_w * mom.mean;
    // C_bar can be singular (0 or 1 jumps); draw through its eigen square root.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(mom.cov);
    const Eigen::Vector2d evals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::Vector2d z{norm(rng), norm(rng)};
    x += sigma_w * (es.eigenvectors() * evals.asDiagonal() * z);
    path.states.push_back(x);
    path.observations.push_back(
        x(0) + sigma_w * std::sqrt(params.obs_noise_norm) * norm(rng));
    prev_t = t;
  }
  return path;
}

}  // namespace levyssm::sim
