#pragma once

#include <functional>

namespace steingamma::special {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), without cancellation.
double gamma_q(double a, double x);
double log_gamma_p(double a, double x);
double log_gamma_q(double a, double x);

/// Tail of the Legendre continued fraction for Gamma(a, x):
///   1 / (b_j + a_j / (b_{j+1} + a_{j+1} / ...)),  b_j = x + 2j - 1 - a,  a_j = -j (j - a).
/// With first_index = 1 this is Gamma(a, x) e^x x^-a.  Valid for x >= a + 1 (converges for x > 0).
double gamma_q_continued_fraction(double a, double x, int first_index = 1);

/// E[g(M)] for M ~ Poisson(mean), summed outward from the mode in log space.
/// g must be bounded by a polynomial so the sum converges.
double poisson_expectation(double mean, const std::function<double(int)>& g);

}  // namespace steingamma::special
