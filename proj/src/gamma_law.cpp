#include "steingamma/gamma_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "steingamma/random.hpp"
#include "steingamma/special_functions.hpp"

namespace steingamma {

namespace {

constexpr double kLn2 = 0.693147180559945309417232121458;

// Marsaglia-Tsang squeeze method for Gamma(shape, 1), shape >= 1.
double gamma_marsaglia_tsang(double shape, Rng& rng, std::normal_distribution<double>& normal,
                             std::uniform_real_distribution<double>& uniform) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

GammaNu::GammaNu(double nu) : nu_(nu), shape_(0.5 * nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("GammaNu: nu must be positive and finite");
  log_norm_ = shape_ * kLn2 + std::lgamma(shape_);
}

double log_density_p_offset(const GammaNu& law, double s) {
  if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
  return (law.shape() - 1.0) * std::log(s) - 0.5 * s - law.log_normaliser();
}

double log_density_q_offset(const GammaNu& law, double s) {
  if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
  return (law.shape() - 1.0) * std::log(s) + 0.5 * s - law.log_normaliser();
}

double cdf_offset(const GammaNu& law, double s) {
  if (!(s > 0.0)) return 0.0;
  return special::gamma_p(law.shape(), 0.5 * s);
}

double survival_offset(const GammaNu& law, double s) {
  if (!(s > 0.0)) return 1.0;
  return special::gamma_q(law.shape(), 0.5 * s);
}

double log_density_p(const GammaNu& law, double x) { return log_density_p_offset(law, x + law.nu()); }

double log_density_q(const GammaNu& law, double x) { return log_density_q_offset(law, -(x + law.nu())); }

double density_p(const GammaNu& law, double x) {
  if (!(x > -law.nu())) return 0.0;
  return std::exp(log_density_p(law, x));
}

double density_q(const GammaNu& law, double x) {
  if (!(x < -law.nu())) return 0.0;
  return std::exp(log_density_q(law, x));
}

double cdf_F(const GammaNu& law, double x) {
  if (!(x > -law.nu())) return 0.0;
  return special::gamma_p(law.shape(), 0.5 * (x + law.nu()));
}

double survival(const GammaNu& law, double x) {
  if (!(x > -law.nu())) return 1.0;
  return special::gamma_q(law.shape(), 0.5 * (x + law.nu()));
}

double log_cdf_F(const GammaNu& law, double x) {
  if (!(x > -law.nu())) return -std::numeric_limits<double>::infinity();
  return special::log_gamma_p(law.shape(), 0.5 * (x + law.nu()));
}

double log_survival(const GammaNu& law, double x) {
  if (!(x > -law.nu())) return 0.0;
  return special::log_gamma_q(law.shape(), 0.5 * (x + law.nu()));
}

// With z = -(x + nu)/2 and M ~ Poisson(z):
//   Ftilde(x) = z^k e^z E[1/(k+M)] / Gamma(k),  q(x) = z^(k-1) e^z / (2 Gamma(k)).
double tail_to_q_ratio(const GammaNu& law, double x) {
  if (!(x < -law.nu())) throw std::domain_error("tail_to_q_ratio requires x < -nu");
  const double k = law.shape();
  const double z = -0.5 * (x + law.nu());
  return 2.0 * z * special::poisson_expectation(z, [k](int m) { return 1.0 / (k + m); });
}

double log_tail_Ftilde(const GammaNu& law, double x) {
  if (!(x < -law.nu())) throw std::domain_error("log_tail_Ftilde requires x < -nu");
  const double k = law.shape();
  const double z = -0.5 * (x + law.nu());
  const double e = special::poisson_expectation(z, [k](int m) { return 1.0 / (k + m); });
  return k * std::log(z) + z - std::lgamma(k) + std::log(e);
}

double tail_Ftilde(const GammaNu& law, double x) {
  if (x > -law.nu()) throw std::domain_error("tail_Ftilde requires x <= -nu");
  if (x == -law.nu()) return 0.0;
  return std::exp(log_tail_Ftilde(law, x));
}

// H(x) = x F(x) + 2 (x+nu) p(x). Near -nu both terms nearly cancel, so there
// the positive series 2 z^(k+1) e^-z sum_n (n+1) z^n / Gamma(k+n+2) is used.
double integral_cdf_below(const GammaNu& law, double x) {
  const double s = x + law.nu();
  if (!(s > 0.0)) return 0.0;
  if (x >= 0.0) return x * cdf_F(law, x) + 2.0 * s * density_p(law, x);
  const double k = law.shape();
  const double z = 0.5 * s;
  double ratio = 1.0, sum = 1.0;
  for (int n = 1; n < 100000; ++n) {
    ratio *= z / (k + n + 1.0);
    const double term = (n + 1.0) * ratio;
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::exp(kLn2 + (k + 1.0) * std::log(z) - z - std::lgamma(k + 2.0)) * sum;
}

// G(x)/p(x) with G(x) = 2 (x+nu) p(x) - x (1 - F(x)).
// For z >= k+1 the Legendre fraction gives G/p = 4 z t (1 + (k-1) u) without
// the leading-order cancellation, t and u being the fraction and its tail.
double integral_survival_above_over_p(const GammaNu& law, double x) {
  const double s = x + law.nu();
  if (!(s > 0.0)) throw std::domain_error("integral_survival_above_over_p requires x > -nu");
  const double k = law.shape();
  const double z = 0.5 * s;
  if (z >= k + 1.0) {
    const double t = special::gamma_q_continued_fraction(k, z, 1);
    const double u = special::gamma_q_continued_fraction(k, z, 2);
    return 4.0 * z * t * (1.0 + (k - 1.0) * u);
  }
  const double q_over_p = std::exp(log_survival(law, x) - log_density_p(law, x));
  return 4.0 * z - 2.0 * (z - k) * q_over_p;
}

// T(x)/q(x) = 4 z^2 E[1/((k+M)(k+M+1))], M ~ Poisson(z), z = -(x+nu)/2.
double integral_tail_over_q(const GammaNu& law, double x) {
  if (!(x < -law.nu())) throw std::domain_error("integral_tail_over_q requires x < -nu");
  const double k = law.shape();
  const double z = -0.5 * (x + law.nu());
  return 4.0 * z * z *
         special::poisson_expectation(z, [k](int m) { return 1.0 / ((k + m) * (k + m + 1.0)); });
}

double upper_quantile(const GammaNu& law, double mass) {
  if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("upper_quantile: mass must lie in (0,1)");
  const double target = std::log(mass);
  double lo = -law.nu();
  double hi = std::max(1.0, law.nu());
  while (log_survival(law, hi) > target) {
    lo = hi;
    hi = 2.0 * hi + 1.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (log_survival(law, mid) > target ? lo : hi) = mid;
  }
  return hi;
}

double upper_cutoff(const GammaNu& law, const QuadratureSpec& spec) {
  return upper_quantile(law, spec.tail_mass);
}

double relative_cutoff(const GammaNu& law, double x, double log_drop, const QuadratureSpec& spec) {
  const double floor = upper_cutoff(law, spec);
  const double target = log_survival(law, x) + log_drop;
  double lo = x, step = 1.0, hi = x + step;
  while (log_survival(law, hi) > target) {
    lo = hi;
    step *= 2.0;
    hi = x + step;
  }
  for (int it = 0; it < 100 && hi - lo > 1e-9 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (log_survival(law, mid) > target ? lo : hi) = mid;
  }
  return std::max(hi, floor);
}

double integrate_against_p(const GammaNu& law, const Integrand& g, const QuadratureSpec& spec) {
  const double nu = law.nu();
  const double span = upper_cutoff(law, spec) + nu;
  auto integrand = [&](double s) {
    if (!(s > 0.0)) return 0.0;
    return g(s - nu) * std::exp(log_density_p_offset(law, s));
  };
  return integrate_from_singular_end(integrand, span, law.shape(), spec);
}

double moment(const GammaNu& law, int order, const QuadratureSpec& spec) {
  if (order < 0) throw std::invalid_argument("moment: order must be nonnegative");
  // w^order inflates the truncated tail, so push the cutoff further out.
  QuadratureSpec deep = spec;
  deep.tail_mass = std::min(spec.tail_mass, 1e-25);
  return integrate_against_p(law, [order](double w) { return std::pow(w, order); }, deep);
}

std::vector<double> sample_Z(const GammaNu& law, std::size_t count, std::uint64_t seed,
                             std::uint64_t stream) {
  if (count < 1) throw std::invalid_argument("sample_Z: count must be >= 1");
  Rng rng = make_stream(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double k = law.shape();
  std::vector<double> out(count);
  for (auto& value : out) {
    double g;
    if (k >= 1.0) {
      g = gamma_marsaglia_tsang(k, rng, normal, uniform);
    } else {
      // Boost: Gamma(k) = Gamma(k+1) * U^(1/k).
      double u;
      do u = uniform(rng);
      while (u == 0.0);
      g = gamma_marsaglia_tsang(k + 1.0, rng, normal, uniform) * std::pow(u, 1.0 / k);
    }
    value = 2.0 * g - law.nu();
  }
  return out;
}

double identity_residual(const GammaNu& law, double x, const QuadratureSpec& spec) {
  const double nu = law.nu();
  if (x == -nu) throw std::domain_error("identity_residual is undefined at x = -nu");
  if (x > -nu) {
    const double s = x + nu;
    auto g = [&](double t) { return (t - nu) * std::exp(log_density_p_offset(law, t)); };
    const double integral = integrate_from_singular_end(g, s, law.shape(), spec);
    const double lead = 2.0 * s * density_p(law, x);
    return std::abs(lead + integral) / std::max(1.0, std::abs(lead));
  }
  const double s = -(x + nu);
  auto g = [&](double t) { return (-nu - t) * std::exp(log_density_q_offset(law, t)); };
  const double integral = integrate_from_singular_end(g, s, law.shape(), spec);
  const double lead = 2.0 * s * density_q(law, x);
  return std::abs(lead + integral) / std::max(1.0, lead);
}

}  // namespace steingamma
