#pragma once

#include <cstdint>
#include <vector>

#include "steingamma/quadrature.hpp"

namespace steingamma {

/// Parameter of the centered Gamma law F(nu): law of Y - nu with
/// Y ~ Gamma(shape nu/2, scale 2). Mean 0, variance 2 nu, E[Z^3] = 8 nu.
class GammaNu {
 public:
  explicit GammaNu(double nu);

  double nu() const noexcept { return nu_; }
  /// Gamma shape nu / 2.
  double shape() const noexcept { return shape_; }
  double variance() const noexcept { return 2.0 * nu_; }
  double third_moment() const noexcept { return 8.0 * nu_; }
  /// Left end of the support of p_nu.
  double boundary() const noexcept { return -nu_; }
  double log_normaliser() const noexcept { return log_norm_; }

 private:
  double nu_;
  double shape_;
  double log_norm_;  // k log 2 + lgamma(k)
};

// Densities. Both are total functions: zero outside their open supports.
double density_p(const GammaNu& law, double x);
double density_q(const GammaNu& law, double x);
double log_density_p(const GammaNu& law, double x);  ///< requires x > -nu
double log_density_q(const GammaNu& law, double x);  ///< requires x < -nu

// The same functions parametrised by the distance s > 0 from -nu (s = x + nu on
// the p side, s = -(x + nu) on the q side). Integrands near the boundary use
// these so that s is never rounded away by forming x first.
double log_density_p_offset(const GammaNu& law, double s);
double log_density_q_offset(const GammaNu& law, double s);
double cdf_offset(const GammaNu& law, double s);
double survival_offset(const GammaNu& law, double s);

/// F_nu(x), via the regularized incomplete gamma function.
double cdf_F(const GammaNu& law, double x);
/// 1 - F_nu(x) computed directly (no cancellation in the upper tail).
double survival(const GammaNu& law, double x);
double log_cdf_F(const GammaNu& law, double x);
double log_survival(const GammaNu& law, double x);

/// Integral of q_nu over [x, -nu]. Throws std::domain_error for x > -nu.
double tail_Ftilde(const GammaNu& law, double x);
double log_tail_Ftilde(const GammaNu& law, double x);  ///< requires x < -nu
/// Ftilde(x) / q(x) for x < -nu; finite as x -> -infinity (tends to 2).
double tail_to_q_ratio(const GammaNu& law, double x);

/// Integral of F_nu over [-nu, x] (x > -nu), free of the cancellation near -nu.
double integral_cdf_below(const GammaNu& law, double x);
/// Integral of 1 - F_nu over [x, +inf) divided by p_nu(x); x > -nu.
double integral_survival_above_over_p(const GammaNu& law, double x);
/// Integral of Ftilde over [x, -nu] divided by q_nu(x); x < -nu.
double integral_tail_over_q(const GammaNu& law, double x);

/// Point w with 1 - F_nu(w) = mass (bisection on log_survival).
double upper_quantile(const GammaNu& law, double mass);
/// Finite stand-in for +infinity in integrals against p_nu.
double upper_cutoff(const GammaNu& law, const QuadratureSpec& spec);
/// Smallest point beyond x where the survival function has dropped by the
/// factor exp(log_drop) (log_drop < 0), never below upper_cutoff.
double relative_cutoff(const GammaNu& law, double x, double log_drop, const QuadratureSpec& spec);

/// Integral of g(w) p_nu(w) over (-nu, cutoff], with the endpoint singularity removed.
double integrate_against_p(const GammaNu& law, const Integrand& g, const QuadratureSpec& spec);

/// E[Z^order] by quadrature.
double moment(const GammaNu& law, int order, const QuadratureSpec& spec = {});

/// i.i.d. draws of F(nu); deterministic for a given (seed, stream).
std::vector<double> sample_Z(const GammaNu& law, std::size_t count, std::uint64_t seed,
                             std::uint64_t stream = 0);

/// |2(x+nu) p(x) + int_{-nu}^x u p(u) du| for x > -nu, and the q-branch
/// counterpart |2(x+nu) q(x) - int_x^{-nu} u q(u) du| for x < -nu. Both are divided by
/// max(1, |2(x+nu) density|): q grows exponentially into the left tail.
double identity_residual(const GammaNu& law, double x, const QuadratureSpec& spec = {});

}  // namespace steingamma
