#include "steingamma/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace steingamma::special {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

// log P(a, x) through the power series; accurate for x < a + 1.
double log_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return a * std::log(x) - x - std::lgamma(a) + std::log(sum);
}

// log Q(a, x) through the continued fraction; accurate for x >= a + 1.
double log_q_fraction(double a, double x) {
  return a * std::log(x) - x - std::lgamma(a) + std::log(gamma_q_continued_fraction(a, x, 1));
}

void check_args(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("incomplete gamma: shape must be positive");
  if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: argument must be nonnegative");
}

}  // namespace

double gamma_q_continued_fraction(double a, double x, int first_index) {
  // Modified Lentz evaluation.
  double b = x + 2.0 * first_index - 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / (std::abs(b) < kTiny ? kTiny : b);
  double h = d;
  for (int i = first_index; i < first_index + 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete gamma continued fraction did not converge");
}

double log_gamma_p(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (x < a + 1.0) return log_p_series(a, x);
  return std::log1p(-std::exp(log_q_fraction(a, x)));
}

double log_gamma_q(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return std::log1p(-std::exp(log_p_series(a, x)));
  return log_q_fraction(a, x);
}

double gamma_p(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return std::exp(log_p_series(a, x));
  return -std::expm1(log_q_fraction(a, x));
}

double gamma_q(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return -std::expm1(log_p_series(a, x));
  return std::exp(log_q_fraction(a, x));
}

double poisson_expectation(double mean, const std::function<double(int)>& g) {
  if (!(mean >= 0.0)) throw std::domain_error("poisson_expectation: negative mean");
  if (mean == 0.0) return g(0);
  const int mode = static_cast<int>(std::floor(mean));
  const double log_mean = std::log(mean);
  const double log_pmf_mode = mode * log_mean - mean - std::lgamma(mode + 1.0);

  double sum = 0.0, mass = 0.0;
  // Upward from the mode.
  double log_pmf = log_pmf_mode;
  for (int m = mode;; ++m) {
    const double w = std::exp(log_pmf);
    sum += w * g(m);
    mass += w;
    if (m > mode + 10 && w < 1e-18 * mass) break;
    log_pmf += log_mean - std::log(m + 1.0);
  }
  // Downward from mode - 1.
  log_pmf = log_pmf_mode;
  for (int m = mode - 1; m >= 0; --m) {
    log_pmf += std::log(m + 1.0) - log_mean;
    const double w = std::exp(log_pmf);
    sum += w * g(m);
    mass += w;
    if (w < 1e-18 * mass) break;
  }
  return sum;
}

}  // namespace steingamma::special
