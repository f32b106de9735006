#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "steingamma/gamma_law.hpp"
#include "steingamma/quadrature.hpp"

namespace steingamma {

/// Test function h(x, y) with y in R^arity, together with the partial
/// derivatives the solver needs and their declared sup-norms.
struct TestFunction {
  using Scalar2 = std::function<double(double, const Eigen::VectorXd&)>;
  using Mixed = std::function<double(double, const Eigen::VectorXd&, int)>;

  std::string name;
  int arity = 0;
  Scalar2 h;
  Scalar2 dh_dx;
  Mixed d2h_dxdy;  ///< d^2 h / dx dy_j
  double sup_dh_dx = 0.0;
  std::vector<double> sup_d2h_dxdy;

  /// Throws std::invalid_argument when callables are missing or a declared bound is not finite.
  void validate() const;
};

/// a*f + b*g (same arity).
TestFunction linear_combination(double a, const TestFunction& f, double b, const TestFunction& g);

namespace test_functions {
TestFunction identity();           ///< h = x
TestFunction x_times_y();          ///< h = x y_1, bounds declared on |y_1| <= 2
TestFunction sine();               ///< h = sin x
TestFunction tanh_over_y();        ///< h = tanh(x) / (1 + y_1^2)
TestFunction gaussian_bump();      ///< h = exp(-x^2)
TestFunction constant(double c);   ///< h = c
/// The five functions above (all arity 1, y ignored where h does not depend on it).
std::vector<TestFunction> standard_suite();
}  // namespace test_functions

/// Bounded solution f_h of 2(x+nu) df/dx - x f = h(x,y) - E[h(Z_nu, y)].
///
/// Away from -nu the value comes from the Fubini forms, which only involve
/// dh/dx against F_nu, 1 - F_nu and Ftilde_nu. Inside the window
/// |x + nu| < window_half_width() the limit values at -nu are returned.
///
/// Immutable after construction; the E[h(Z,y)] memo is internally
/// synchronised and computes each key at most once.
class SteinEvaluator {
 public:
  SteinEvaluator(GammaNu law, TestFunction h, QuadratureSpec spec = {});

  const GammaNu& law() const noexcept { return law_; }
  const TestFunction& test_function() const noexcept { return h_; }
  const QuadratureSpec& spec() const noexcept { return spec_; }
  double window_half_width() const noexcept { return window_; }

  double expected_h(const Eigen::VectorXd& y) const;
  double evaluate_fh(double x, const Eigen::VectorXd& y) const;
  /// Algebraic derivative from the Stein equation itself (limit value in the window).
  double evaluate_dfh_dx(double x, const Eigen::VectorXd& y) const;
  /// Derivative obtained by differentiating the Fubini forms; it uses only
  /// dh/dx integrals, so it is independent of h and of E[h].
  double fubini_dfh_dx(double x, const Eigen::VectorXd& y) const;
  /// Limit value (h(-nu,y) - E h) / nu.
  double boundary_value(const Eigen::VectorXd& y) const;
  /// max over grid of |2(x+nu) d_x f - x f - (h - E h)|, with d_x f taken from fubini_dfh_dx.
  /// Grid points must lie outside the limit window.
  double stein_residual(const std::vector<double>& grid, const Eigen::VectorXd& y) const;

  /// Number of distinct y keys evaluated so far.
  std::size_t memo_size() const;

 private:
  struct Moments {
    double expected_h = 0.0;
    double k_integral = 0.0;  // int_{-nu}^inf dh/dx (w,y) (1 - F(w)) dw
  };
  struct MemoSlot {
    std::once_flag once;
    Moments value;
  };
  struct FubiniParts {
    double f = 0.0;
    double derivative = 0.0;
  };

  const Moments& moments(const Eigen::VectorXd& y) const;
  FubiniParts fubini(double x, const Eigen::VectorXd& y) const;
  void check_y(const Eigen::VectorXd& y) const;

  GammaNu law_;
  TestFunction h_;
  QuadratureSpec spec_;
  double window_;
  double cutoff_;
  mutable std::mutex memo_mutex_;
  mutable std::map<std::vector<std::uint64_t>, std::unique_ptr<MemoSlot>> memo_;
};

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
};

/// Sample mean of 2(x+nu) d_x f_h(x, y) - x f_h(x, y) over the pairs (xs[i], ys.row(i)).
/// Near zero when the x and y samples are independent with x ~ F(nu).
MeanEstimate characterization_statistic(const SteinEvaluator& ev, const std::vector<double>& xs,
                                        const Eigen::MatrixXd& ys);

/// Which route computes the bound functions.
enum class BoundRoute { closed_form, quadrature };

/// S_nu(x) for x > -nu.
double bound_S(const GammaNu& law, double x, BoundRoute route = BoundRoute::closed_form,
               const QuadratureSpec& spec = {});
/// R_nu(x) for x < -nu.
double bound_R(const GammaNu& law, double x, BoundRoute route = BoundRoute::closed_form,
               const QuadratureSpec& spec = {});

struct UniformConstantOptions {
  int points_per_branch = 400;
  double min_offset = 1e-6;  ///< closest grid point to -nu
  double max_offset = 1e4;   ///< farthest grid point from -nu
};

struct UniformConstant {
  double value = 1.0;
  double argmax = 0.0;
  enum class Source { one, S, R } source = Source::one;
};

/// Numerical sup of max(S_nu, R_nu, 1) over a log-spaced grid on both
/// branches, refined by golden-section search around the grid maximum.
UniformConstant uniform_constant_detail(const GammaNu& law, const UniformConstantOptions& opts = {});
double uniform_constant(const GammaNu& law, const UniformConstantOptions& opts = {});

}  // namespace steingamma
