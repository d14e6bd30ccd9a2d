#pragma once

#include <functional>

namespace levyssm::quad {

struct Result {
  double value = 0.0;
  double abs_err = 0.0;
  bool converged = true;
  long evals = 0;
};

// Adaptive Simpson on [a, b].
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, double abs_tol = 1e-14,
                 int max_depth = 48);

// Integral over [a, inf) via the substitution x = a + t/(1-t), t in [0, 1).
// Suited to integrands with exponential or power-law decay.
Result integrate_upper(const std::function<double(double)>& f, double a,
                       double rel_tol = 1e-10, double abs_tol = 1e-14,
                       int max_depth = 48);

}  // namespace levyssm::quad
