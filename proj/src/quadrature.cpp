#include "levyssm/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace levyssm::quad {

namespace {

struct Ctx {
  const std::function<double(double)>& f;
  double rel_tol;
  double abs_tol;
  int max_depth;
  long evals = 0;
  double err_sum = 0.0;
  bool converged = true;
};

double eval(Ctx& ctx, double x) {
  ++ctx.evals;
  const double v = ctx.f(x);
  if (!std::isfinite(v)) {
    throw std::runtime_error("quadrature: integrand returned non-finite value");
  }
  return v;
}

// Recursive adaptive Simpson with Richardson correction.
double simpson_rec(Ctx& ctx, double a, double b, double fa, double fm,
                   double fb, double whole, int depth, double scale) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = eval(ctx, lm);
  const double frm = eval(ctx, rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = left + right - whole;
  const double tol = std::max(ctx.abs_tol, ctx.rel_tol * scale);
  if (std::abs(err) <= 15.0 * tol || depth >= ctx.max_depth) {
    if (depth >= ctx.max_depth && std::abs(err) > 15.0 * tol) {
      ctx.converged = false;
    }
    ctx.err_sum += std::abs(err) / 15.0;
    return left + right + err / 15.0;
  }
  return simpson_rec(ctx, a, m, fa, flm, fm, left, depth + 1, 0.5 * scale) +
         simpson_rec(ctx, m, b, fm, frm, fb, right, depth + 1, 0.5 * scale);
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol, int max_depth) {
  if (!(b >= a)) throw std::invalid_argument("quadrature: requires b >= a");
  Ctx ctx{f, rel_tol, abs_tol, max_depth};
  if (a == b) return {0.0, 0.0, true, 0};
  const double fa = eval(ctx, a);
  const double m = 0.5 * (a + b);
  const double fm = eval(ctx, m);
  const double fb = eval(ctx, b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double scale = std::max(std::abs(whole), abs_tol);
  const double value = simpson_rec(ctx, a, b, fa, fm, fb, whole, 0, scale);
  return {value, ctx.err_sum, ctx.converged, ctx.evals};
}

Result integrate_upper(const std::function<double(double)>& f, double a,
                       double rel_tol, double abs_tol, int max_depth) {
  auto g = [&f, a](double t) {
    if (t >= 1.0) return 0.0;
    const double u = 1.0 - t;
    const double x = a + t / u;
    const double v = f(x) / (u * u);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 1.0, rel_tol, abs_tol, max_depth);
}

}  // namespace levyssm::quad
