#pragma once

namespace geovote::stats {

/// Regularized incomplete beta I_x(a, b), evaluated with a modified-Lentz
/// continued fraction (relative accuracy ~1e-14).
double regularized_incomplete_beta(double a, double b, double x);

/// P(F > f) for F ~ F(d1, d2).
double f_distribution_sf(double f, double d1, double d2);

/// P(|T| > t) for T ~ Student-t(nu).
double student_t_two_sided_sf(double t, double nu);

/// t such that P(T > t) = upper_tail, for upper_tail in (0, 0.5].
double student_t_upper_quantile(double upper_tail, double nu);

}  // namespace geovote::stats
