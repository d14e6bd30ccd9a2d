#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace levyssm::diag {

// Function-valued MCMC samples on a shared grid: row s holds sample s
// evaluated at every grid point.
struct FunctionSampleSet {
  std::vector<double> grid;
  Eigen::MatrixXd values;  // n_samples x grid.size()
};
void validate(const FunctionSampleSet& set);

struct AutocorrResult {
  std::vector<double> rho;       // rho[t] for t = 0..max_lag
  double integrated_time = 0.0;  // 1 + 2 sum of rho up to the window
  int window = 0;                // last lag included (first-negative rule)
  bool degenerate = false;       // C(0) == 0, rho undefined
};

// Inner-product autocorrelation of function samples: C(t) weighted by the
// grid spacings with 1/(N-t) lag normalization, rho(t) = C(t)/C(0).
AutocorrResult functional_autocorr(const FunctionSampleSet& set, int max_lag);

struct TraceStats {
  double mean = 0.0;
  double variance = 0.0;
  AutocorrResult acf;
};

// Scalar-trace case of the same estimator (used for theta and alpha traces).
TraceStats scalar_trace_stats(std::span<const double> trace, int max_lag);
TraceStats scalar_trace_stats(std::span<const double> trace);  // lag = N/4

}  // namespace levyssm::diag
