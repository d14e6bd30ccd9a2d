#include "levyssm/diag.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levyssm::diag {

void validate(const FunctionSampleSet& set) {
  if (set.grid.size() < 2) {
    throw std::invalid_argument("FunctionSampleSet: grid needs at least 2 points");
  }
  for (std::size_t i = 1; i < set.grid.size(); ++i) {
    if (!(set.grid[i] > set.grid[i - 1])) {
      throw std::invalid_argument("FunctionSampleSet: grid must be strictly increasing");
    }
  }
  if (set.values.cols() != static_cast<Eigen::Index>(set.grid.size()) ||
      set.values.rows() < 2) {
    throw std::invalid_argument("FunctionSampleSet: values shape mismatch");
  }
}

namespace {

// Shared engine: piecewise-constant inner-product autocovariance with weights
// w_i = x_{i+1} - x_i over the first K-1 grid points and 1/(N-t) normalization,
// then rho(t) = C(t)/C(0) and the first-negative integrated-time window.
AutocorrResult autocorr_engine(const Eigen::MatrixXd& centered,
                               const Eigen::VectorXd& weights, int max_lag) {
  const Eigen::Index n = centered.rows();
  if (max_lag < 1 || max_lag >= n) {
    throw std::invalid_argument("autocorr: need 1 <= max_lag < n_samples");
  }
  AutocorrResult out;
  out.rho.resize(static_cast<std::size_t>(max_lag) + 1);
  std::vector<double> c(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int t = 0; t <= max_lag; ++t) {
    const Eigen::Index m = n - t;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      acc += weights(i) * (centered.col(i).head(m).dot(centered.col(i).tail(m)));
    }
    c[static_cast<std::size_t>(t)] = acc / static_cast<double>(m);
  }
  if (c[0] == 0.0) {
    out.degenerate = true;
    out.rho.clear();
    return out;
  }
  for (int t = 0; t <= max_lag; ++t) {
    // Guard: the N-t normalization can push |rho| marginally past 1.
    out.rho[static_cast<std::size_t>(t)] =
        std::clamp(c[static_cast<std::size_t>(t)] / c[0], -1.0, 1.0);
  }
  out.integrated_time = 1.0;
  out.window = 0;
  for (int t = 1; t <= max_lag; ++t) {
    if (out.rho[static_cast<std::size_t>(t)] < 0.0) break;
    out.integrated_time += 2.0 * out.rho[static_cast<std::size_t>(t)];
    out.window = t;
  }
  return out;
}

}  // namespace

AutocorrResult functional_autocorr(const FunctionSampleSet& set, int max_lag) {
  validate(set);
  const Eigen::Index k = static_cast<Eigen::Index>(set.grid.size());
  Eigen::VectorXd weights(k - 1);
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    weights(i) = set.grid[static_cast<std::size_t>(i + 1)] -
                 set.grid[static_cast<std::size_t>(i)];
  }
  // Only the first K-1 grid points enter the simple-function approximation.
  Eigen::MatrixXd centered = set.values.leftCols(k - 1);
  centered.rowwise() -= centered.colwise().mean();
  return autocorr_engine(centered, weights, max_lag);
}

TraceStats scalar_trace_stats(std::span<const double> trace, int max_lag) {
  if (trace.size() < 3) {
    throw std::invalid_argument("scalar_trace_stats: trace too short");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(trace.size());
  Eigen::MatrixXd values(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) values(i, 0) = trace[static_cast<std::size_t>(i)];
  TraceStats out;
  out.mean = values.col(0).mean();
  Eigen::MatrixXd centered = values;
  centered.array() -= out.mean;
  out.variance = centered.col(0).squaredNorm() / static_cast<double>(n);
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(1);
  out.acf = autocorr_engine(centered, weights, max_lag);
  return out;
}

TraceStats scalar_trace_stats(std::span<const double> trace) {
  const int max_lag = std::max(1, static_cast<int>(trace.size()) / 4);
  return scalar_trace_stats(trace, max_lag);
}

}  // namespace levyssm::diag
