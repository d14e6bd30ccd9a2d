#include "levyssm/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace levyssm::special {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

// Lentz continued fraction for the incomplete beta function.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to machine precision in practice well before kMaxIter
}

}  // namespace

double log_gamma(double x) { return std::lgamma(x); }

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("reg_inc_beta: a and b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return kInvSqrt2Pi / sd * std::exp(-0.5 * z * z);
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) + std::log(kInvSqrt2Pi);
}

double log_student_t_pdf(double x, double loc, double scale, double dof) {
  if (!(scale > 0.0) || !(dof > 0.0)) {
    throw std::invalid_argument("student_t: scale and dof must be positive");
  }
  const double z = (x - loc) / scale;
  return log_gamma(0.5 * (dof + 1.0)) - log_gamma(0.5 * dof) -
         0.5 * std::log(dof * M_PI) - std::log(scale) -
         0.5 * (dof + 1.0) * std::log1p(z * z / dof);
}

double student_t_pdf(double x, double loc, double scale, double dof) {
  return std::exp(log_student_t_pdf(x, loc, scale, dof));
}

double student_t_cdf(double x, double loc, double scale, double dof) {
  const double t = (x - loc) / scale;
  const double w = dof / (dof + t * t);
  const double half_tail = 0.5 * reg_inc_beta(0.5 * dof, 0.5, w);
  return t <= 0.0 ? half_tail : 1.0 - half_tail;
}

}  // namespace levyssm::special
