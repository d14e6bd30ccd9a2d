#pragma once

namespace levyssm::special {

double log_gamma(double x);

// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1].
// Continued-fraction evaluation, absolute accuracy around 1e-14.
double reg_inc_beta(double a, double b, double x);

double normal_pdf(double x, double mean, double sd);
double normal_cdf(double x, double mean, double sd);
double log_normal_pdf(double x, double mean, double sd);

// Location-scale Student-t with `dof` degrees of freedom.
double student_t_pdf(double x, double loc, double scale, double dof);
double student_t_cdf(double x, double loc, double scale, double dof);
double log_student_t_pdf(double x, double loc, double scale, double dof);

}  // namespace levyssm::special
