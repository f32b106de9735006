#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace steingamma {

/// Which rule backs an integral. The panel rule is kept as an independent
/// second route for cross-checking adaptive results.
enum class QuadratureScheme { adaptive_gauss_kronrod, gauss_legendre_panels };

struct QuadratureSpec {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_subdivisions = 2000;
  /// Probability mass of F(nu) left beyond the finite stand-in for +infinity.
  double tail_mass = 1e-12;
  QuadratureScheme scheme = QuadratureScheme::adaptive_gauss_kronrod;
  /// Panels used by gauss_legendre_panels (20 nodes each).
  int panels = 96;

  void validate() const;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive bisection on 21-point Gauss-Kronrod panels.
/// Throws QuadratureError when the tolerance is not met within max_subdivisions.
QuadratureResult integrate_adaptive(const Integrand& f, double a, double b,
                                    const QuadratureSpec& spec);

/// Composite 20-point Gauss-Legendre rule on spec.panels equal panels.
double integrate_panels(const Integrand& f, double a, double b, int panels);

/// Dispatches on spec.scheme.
double integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec);

/// Integral of g(s) over [0, s_hi] where g may behave like s^(k-1) at 0.
/// For k < 1 the first unit of the range is mapped through s = t^(1/k), which
/// turns that endpoint behaviour into a smooth integrand.
double integrate_from_singular_end(const Integrand& g, double s_hi, double k,
                                   const QuadratureSpec& spec);

}  // namespace steingamma
