#include "levyssm/nvm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "levyssm/special.hpp"

namespace levyssm::nvm {

double StudentTMixture::total_mass() const {
  double acc = 0.0;
  for (const auto& c : components) acc += c.mass;
  return acc;
}

StudentTMixture nvm_mixture(const dp::DiscreteLevyMeasure& measure,
                            const kalman::MuWPosterior& mu_post,
                            const kalman::SigmaW2Posterior& sig_post) {
  if (!(sig_post.shape > 0.0) || !(sig_post.scale > 0.0)) {
    throw std::invalid_argument("nvm_mixture: invalid sigma_w^2 posterior");
  }
  if (mu_post.rel_var < 0.0) {
    throw std::invalid_argument("nvm_mixture: negative mu_w posterior variance");
  }
  StudentTMixture out;
  out.components.reserve(static_cast<std::size_t>(measure.measure.atoms.size()));
  for (Eigen::Index j = 0; j < measure.measure.atoms.size(); ++j) {
    const double z = measure.measure.atoms(j);
    StudentTComponent c;
    c.mass = measure.mass(j);
    c.location = mu_post.mean * z;
    c.scale = std::sqrt(sig_post.scale * (z + z * z * mu_post.rel_var) /
                        sig_post.shape);
    c.dof = 2.0 * sig_post.shape;
    out.components.push_back(c);
  }
  return out;
}

double mixture_density(const StudentTMixture& mixture, double x) {
  double acc = 0.0;
  for (const auto& c : mixture.components) {
    acc += c.mass * special::student_t_pdf(x, c.location, c.scale, c.dof);
  }
  return acc;
}

double mixture_upper_tail(const StudentTMixture& mixture, double x) {
  double acc = 0.0;
  for (const auto& c : mixture.components) {
    acc += c.mass * (1.0 - special::student_t_cdf(x, c.location, c.scale, c.dof));
  }
  return acc;
}

double mixture_lower_tail(const StudentTMixture& mixture, double x) {
  double acc = 0.0;
  for (const auto& c : mixture.components) {
    acc += c.mass * special::student_t_cdf(-x, c.location, c.scale, c.dof);
  }
  return acc;
}

AveragedNvm::AveragedNvm(std::vector<StudentTMixture> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw std::invalid_argument("average_nvm: needs at least one sample");
  }
}

double AveragedNvm::density(double x) const {
  double acc = 0.0;
  for (const auto& s : samples_) acc += mixture_density(s, x);
  return acc / static_cast<double>(samples_.size());
}

double AveragedNvm::upper_tail(double x) const {
  double acc = 0.0;
  for (const auto& s : samples_) acc += mixture_upper_tail(s, x);
  return acc / static_cast<double>(samples_.size());
}

double AveragedNvm::lower_tail(double x) const {
  double acc = 0.0;
  for (const auto& s : samples_) acc += mixture_lower_tail(s, x);
  return acc / static_cast<double>(samples_.size());
}

ValueBand AveragedNvm::band_of(const std::vector<double>& values,
                               double coverage) const {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&sorted](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < sorted.size() ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
                                 : sorted.back();
  };
  ValueBand band;
  double acc = 0.0;
  for (double v : values) acc += v;
  band.mean = acc / static_cast<double>(values.size());
  band.lo = quantile(0.5 * (1.0 - coverage));
  band.hi = quantile(1.0 - 0.5 * (1.0 - coverage));
  return band;
}

ValueBand AveragedNvm::density_band(double x, double coverage) const {
  std::vector<double> vals;
  vals.reserve(samples_.size());
  for (const auto& s : samples_) vals.push_back(mixture_density(s, x));
  return band_of(vals, coverage);
}

ValueBand AveragedNvm::upper_tail_band(double x, double coverage) const {
  std::vector<double> vals;
  vals.reserve(samples_.size());
  for (const auto& s : samples_) vals.push_back(mixture_upper_tail(s, x));
  return band_of(vals, coverage);
}

ValueBand AveragedNvm::lower_tail_band(double x, double coverage) const {
  std::vector<double> vals;
  vals.reserve(samples_.size());
  for (const auto& s : samples_) vals.push_back(mixture_lower_tail(s, x));
  return band_of(vals, coverage);
}

AveragedNvm average_nvm(std::vector<StudentTMixture> samples) {
  return AveragedNvm(std::move(samples));
}

NvmGroundTruth::NvmGroundTruth(double rate, std::vector<double> sizes,
                               sim::NVMParams nvm)
    : rate_(rate), sizes_(std::move(sizes)), nvm_(nvm) {
  if (sizes_.empty()) {
    throw std::invalid_argument("NvmGroundTruth: empty size sample");
  }
}

double NvmGroundTruth::density(double x) const {
  const double sw = std::sqrt(nvm_.sigma_w2);
  double acc = 0.0;
  for (double z : sizes_) {
    acc += special::normal_pdf(x, nvm_.mu_w * z, sw * std::sqrt(z));
  }
  return rate_ * acc / static_cast<double>(sizes_.size());
}

double NvmGroundTruth::density_stderr(double x) const {
  const double sw = std::sqrt(nvm_.sigma_w2);
  const double n = static_cast<double>(sizes_.size());
  double acc = 0.0;
  double acc2 = 0.0;
  for (double z : sizes_) {
    const double v = special::normal_pdf(x, nvm_.mu_w * z, sw * std::sqrt(z));
    acc += v;
    acc2 += v * v;
  }
  const double mean = acc / n;
  const double var = std::max(0.0, acc2 / n - mean * mean);
  return rate_ * std::sqrt(var / n);
}

double NvmGroundTruth::upper_tail(double x) const {
  const double sw = std::sqrt(nvm_.sigma_w2);
  double acc = 0.0;
  for (double z : sizes_) {
    acc += 1.0 - special::normal_cdf(x, nvm_.mu_w * z, sw * std::sqrt(z));
  }
  return rate_ * acc / static_cast<double>(sizes_.size());
}

double NvmGroundTruth::lower_tail(double x) const {
  const double sw = std::sqrt(nvm_.sigma_w2);
  double acc = 0.0;
  for (double z : sizes_) {
    acc += special::normal_cdf(-x, nvm_.mu_w * z, sw * std::sqrt(z));
  }
  return rate_ * acc / static_cast<double>(sizes_.size());
}

NvmGroundTruth nvm_ground_truth(const sim::AnalyticSubordinator& spec,
                                const sim::NVMParams& nvm, int n_mc, Rng& rng) {
  sim::validate(spec);
  sim::validate(nvm);
  if (n_mc < 1) throw std::invalid_argument("nvm_ground_truth: n_mc must be >= 1");
  const double rate = sim::truncated_activity(spec);
  std::vector<double> sizes(static_cast<std::size_t>(n_mc));
  if (spec.family == sim::SubordinatorFamily::kPointMass) {
    // Degenerate size law: the estimator is exact with a single draw.
    sizes.assign(1, spec.z0);
  } else {
    for (auto& z : sizes) z = sim::sample_truncated_size(spec, rng);
  }
  return NvmGroundTruth(rate, std::move(sizes), nvm);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw std::invalid_argument("log_grid: need 0 < lo < hi and n >= 2");
  }
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double step = (std::log(hi) - std::log(lo)) / (n - 1);
  for (int i = 0; i < n; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + step * i);
  }
  return grid;
}

}  // namespace levyssm::nvm
