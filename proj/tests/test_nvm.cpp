#include <doctest.h>

#include <cmath>

#include "levyssm/nvm.hpp"
#include "levyssm/quadrature.hpp"
#include "levyssm/special.hpp"
#include "support/stats.hpp"

using namespace levyssm;

namespace {

dp::DiscreteLevyMeasure measure_of(double rate, std::vector<double> atoms,
                                   std::vector<double> weights) {
  dp::DiscreteLevyMeasure m;
  m.rate = rate;
  m.measure.atoms = Eigen::Map<Eigen::VectorXd>(atoms.data(),
                                                static_cast<Eigen::Index>(atoms.size()));
  m.measure.weights = Eigen::Map<Eigen::VectorXd>(
      weights.data(), static_cast<Eigen::Index>(weights.size()));
  return m;
}

}  // namespace

TEST_CASE("nvm_mixture: unit-parameter substitution and total mass") {
  // Single atom z = 1, mass 1, mu' = 0, k' = 0, IG(1, 1): St(0, 1, 2).
  const auto measure = measure_of(1.0, {1.0}, {1.0});
  const nvm::StudentTMixture mix =
      nvm::nvm_mixture(measure, {0.0, 0.0}, {1.0, 1.0});
  REQUIRE(mix.components.size() == 1);
  CHECK(mix.components[0].mass == doctest::Approx(1.0));
  CHECK(mix.components[0].location == doctest::Approx(0.0));
  CHECK(mix.components[0].scale == doctest::Approx(1.0));
  CHECK(mix.components[0].dof == doctest::Approx(2.0));

  // Total mass equals the measure rate for arbitrary inputs.
  Rng rng = make_rng(83, "mass");
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double w0 = unif(rng);
    const double w1 = unif(rng);
    const auto m = measure_of(unif(rng) * 3.0, {unif(rng), unif(rng)},
                              {w0 / (w0 + w1), w1 / (w0 + w1)});
    const nvm::StudentTMixture mx =
        nvm::nvm_mixture(m, {unif(rng) - 1.0, unif(rng)},
                         {1.0 + unif(rng), unif(rng)});
    CHECK(mx.total_mass() == doctest::Approx(m.rate).epsilon(1e-12));
    // All components share one dof = 2 alpha_w'.
    for (const auto& c : mx.components) CHECK(c.dof == mx.components[0].dof);
  }
}

TEST_CASE("nvm_mixture density equals the nested quadrature of N x N x IG") {
  const auto measure = measure_of(1.4, {0.6, 1.9}, {0.3, 0.7});
  const kalman::MuWPosterior mu_post{0.5, 0.4};
  const kalman::SigmaW2Posterior sig_post{3.0, 2.0};
  const nvm::StudentTMixture mix = nvm::nvm_mixture(measure, mu_post, sig_post);

  for (double x : {-1.0, 0.2, 0.9, 2.2}) {
    // Oracle: sum_j W_j Int Int N(x; mu z_j, s2 z_j) N(mu; mu', s2 k') dmu
    //                        IG(s2; a', b') ds2, integrated numerically.
    double oracle = 0.0;
    for (Eigen::Index j = 0; j < measure.measure.atoms.size(); ++j) {
      const double z = measure.measure.atoms(j);
      const std::function<double(double)> outer = [&](double u) {
        const double s2 = std::exp(u);
        const double log_ig = sig_post.shape * std::log(sig_post.scale) -
                              std::lgamma(sig_post.shape) -
                              (sig_post.shape + 1.0) * std::log(s2) -
                              sig_post.scale / s2;
        // Inner integral over mu_w on a wide, adaptive interval.
        const double mu_sd = std::sqrt(s2 * mu_post.rel_var);
        const std::function<double(double)> inner = [&](double mu) {
          return special::normal_pdf(x, mu * z, std::sqrt(s2 * z)) *
                 special::normal_pdf(mu, mu_post.mean, mu_sd);
        };
        const auto r = quad::integrate(inner, mu_post.mean - 10.0 * mu_sd,
                                       mu_post.mean + 10.0 * mu_sd, 1e-9, 1e-13);
        return r.value * std::exp(log_ig + u);
      };
      const auto res = quad::integrate(outer, -12.0, 8.0, 1e-8, 1e-12, 40);
      oracle += measure.mass(j) * res.value;
    }
    CHECK(std::abs(nvm::mixture_density(mix, x) - oracle) < 1e-4);
  }
}

TEST_CASE("nvm_mixture commutes with measure scaling") {
  const auto m1 = measure_of(1.0, {0.5, 1.5}, {0.4, 0.6});
  auto m2 = m1;
  m2.rate = 2.5;
  const kalman::MuWPosterior mu{0.3, 0.2};
  const kalman::SigmaW2Posterior sig{2.0, 1.0};
  const auto mix1 = nvm::nvm_mixture(m1, mu, sig);
  const auto mix2 = nvm::nvm_mixture(m2, mu, sig);
  for (double x : {-0.7, 0.1, 1.2}) {
    CHECK(nvm::mixture_density(mix2, x) ==
          doctest::Approx(2.5 * nvm::mixture_density(mix1, x)).epsilon(1e-12));
  }
}

TEST_CASE("nvm_mixture Gaussian limit at large alpha'") {
  const auto measure = measure_of(1.0, {1.3}, {1.0});
  const double s2 = 0.8;
  const kalman::MuWPosterior mu{0.5, 0.0};
  const kalman::SigmaW2Posterior sig{1e6, s2 * 1e6};
  const auto mix = nvm::nvm_mixture(measure, mu, sig);
  for (double x : {-0.5, 0.65, 1.8}) {
    const double gauss =
        special::normal_pdf(x, 0.5 * 1.3, std::sqrt(s2 * 1.3));
    CHECK(std::abs(nvm::mixture_density(mix, x) - gauss) < 1e-4);
  }
}

TEST_CASE("average_nvm: identity, tail limits, symmetry") {
  const auto mix = nvm::nvm_mixture(measure_of(2.0, {0.8, 1.4}, {0.5, 0.5}),
                                    {0.0, 0.3}, {2.5, 1.7});
  const nvm::AveragedNvm avg = nvm::average_nvm({mix});
  CHECK(avg.density(0.4) == doctest::Approx(nvm::mixture_density(mix, 0.4)));

  // Total mass recovered as x -> -inf of the upper tail.
  CHECK(avg.upper_tail(-1e8) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(avg.upper_tail(1e12) == doctest::Approx(0.0));

  // mu' = 0 makes upper and lower tails equal.
  for (double x : {0.1, 0.5, 2.0}) {
    CHECK(avg.upper_tail(x) == doctest::Approx(avg.lower_tail(x)).epsilon(1e-10));
  }

  CHECK_THROWS_AS(nvm::average_nvm({}), std::invalid_argument);

  // Band of two distinct samples brackets the mean.
  const auto mix2 = nvm::nvm_mixture(measure_of(4.0, {0.8}, {1.0}),
                                     {0.0, 0.3}, {2.5, 1.7});
  const nvm::AveragedNvm two = nvm::average_nvm({mix, mix2});
  const nvm::ValueBand band = two.upper_tail_band(0.5, 0.9);
  CHECK(band.lo <= band.mean);
  CHECK(band.hi >= band.mean);
}

TEST_CASE("nvm_ground_truth: point mass is exact") {
  Rng rng = make_rng(89, "truth-pm");
  sim::AnalyticSubordinator spec{sim::SubordinatorFamily::kPointMass,
                                 1.0, 1.0, 0.5, 1.0, 2.5, 0.9, 0.1};
  const sim::NVMParams nvm_params{0.7, 1.3};
  const nvm::NvmGroundTruth truth = nvm::nvm_ground_truth(spec, nvm_params, 100, rng);
  CHECK(truth.rate() == doctest::Approx(2.5));
  for (double x : {-0.4, 0.63, 1.5}) {
    const double expected =
        2.5 * special::normal_pdf(x, 0.7 * 0.9, std::sqrt(1.3 * 0.9));
    CHECK(truth.density(x) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("nvm_ground_truth: Monte Carlo self-consistency and mass") {
  sim::AnalyticSubordinator spec;
  spec.family = sim::SubordinatorFamily::kGamma;
  spec.shape_c = 1.5;
  spec.beta = 2.0;
  spec.eps = 0.05;
  const sim::NVMParams nvm_params{0.6, 0.9};

  Rng rng1 = make_rng(97, "truth-a");
  Rng rng2 = make_rng(98, "truth-b");
  const nvm::NvmGroundTruth a = nvm::nvm_ground_truth(spec, nvm_params, 100000, rng1);
  const nvm::NvmGroundTruth b = nvm::nvm_ground_truth(spec, nvm_params, 100000, rng2);

  // Two independent runs agree to 3 combined standard errors.
  for (double x : {-0.3, 0.1, 0.5, 1.5}) {
    const double se = std::sqrt(std::pow(a.density_stderr(x), 2) +
                                std::pow(b.density_stderr(x), 2));
    CHECK(std::abs(a.density(x) - b.density(x)) < 3.0 * se + 1e-12);
  }

  // Total mass of the estimated density equals lambda_eps to 1e-3 relative.
  const auto mass = quad::integrate(
      [&](double x) { return a.density(x); }, -15.0, 20.0, 1e-8, 1e-12, 40);
  CHECK(mass.value == doctest::Approx(a.rate()).epsilon(1e-3));

  // Tails are consistent with the density by quadrature at one point.
  const auto tail = quad::integrate(
      [&](double x) { return a.density(x); }, 0.8, 20.0, 1e-8, 1e-12, 40);
  CHECK(tail.value == doctest::Approx(a.upper_tail(0.8)).epsilon(1e-6));
}

TEST_CASE("log_grid spans the requested decades") {
  const auto grid = nvm::log_grid(0.01, 10.0, 7);
  REQUIRE(grid.size() == 7);
  CHECK(grid.front() == doctest::Approx(0.01));
  CHECK(grid.back() == doctest::Approx(10.0));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid[i] / grid[i - 1] ==
          doctest::Approx(grid[1] / grid[0]).epsilon(1e-10));
  }
  CHECK_THROWS_AS(nvm::log_grid(0.0, 1.0, 5), std::invalid_argument);
}
