#include "steingamma/stein_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "steingamma/special_functions.hpp"

namespace steingamma {

namespace {

// Survival drop used to truncate integrals weighted by (1 - F(w)) / (1 - F(x)).
constexpr double kLogDrop = -40.0;

}  // namespace

void TestFunction::validate() const {
  if (arity < 0) throw std::invalid_argument("TestFunction: negative arity");
  if (!h || !dh_dx) throw std::invalid_argument("TestFunction '" + name + "': h and dh_dx are required");
  if (arity > 0 && !d2h_dxdy)
    throw std::invalid_argument("TestFunction '" + name + "': d2h_dxdy is required when arity > 0");
  if (!std::isfinite(sup_dh_dx) || sup_dh_dx < 0.0)
    throw std::invalid_argument("TestFunction '" + name + "': sup of dh/dx must be finite");
  if (static_cast<int>(sup_d2h_dxdy.size()) != arity)
    throw std::invalid_argument("TestFunction '" + name + "': one mixed-derivative bound per y component");
  for (double b : sup_d2h_dxdy)
    if (!std::isfinite(b) || b < 0.0)
      throw std::invalid_argument("TestFunction '" + name + "': mixed-derivative bounds must be finite");
}

TestFunction linear_combination(double a, const TestFunction& f, double b, const TestFunction& g) {
  f.validate();
  g.validate();
  if (f.arity != g.arity) throw std::invalid_argument("linear_combination: arity mismatch");
  TestFunction out;
  out.name = std::to_string(a) + "*" + f.name + " + " + std::to_string(b) + "*" + g.name;
  out.arity = f.arity;
  out.h = [a, b, fh = f.h, gh = g.h](double x, const Eigen::VectorXd& y) { return a * fh(x, y) + b * gh(x, y); };
  out.dh_dx = [a, b, fd = f.dh_dx, gd = g.dh_dx](double x, const Eigen::VectorXd& y) {
    return a * fd(x, y) + b * gd(x, y);
  };
  if (f.arity > 0) {
    out.d2h_dxdy = [a, b, fm = f.d2h_dxdy, gm = g.d2h_dxdy](double x, const Eigen::VectorXd& y, int j) {
      return a * fm(x, y, j) + b * gm(x, y, j);
    };
  }
  out.sup_dh_dx = std::abs(a) * f.sup_dh_dx + std::abs(b) * g.sup_dh_dx;
  for (int j = 0; j < f.arity; ++j)
    out.sup_d2h_dxdy.push_back(std::abs(a) * f.sup_d2h_dxdy[j] + std::abs(b) * g.sup_d2h_dxdy[j]);
  return out;
}

namespace test_functions {

namespace {
TestFunction::Mixed zero_mixed() {
  return [](double, const Eigen::VectorXd&, int) { return 0.0; };
}
}  // namespace

TestFunction identity() {
  TestFunction t;
  t.name = "x";
  t.arity = 1;
  t.h = [](double x, const Eigen::VectorXd&) { return x; };
  t.dh_dx = [](double, const Eigen::VectorXd&) { return 1.0; };
  t.d2h_dxdy = zero_mixed();
  t.sup_dh_dx = 1.0;
  t.sup_d2h_dxdy = {0.0};
  return t;
}

TestFunction x_times_y() {
  TestFunction t;
  t.name = "x*y1";
  t.arity = 1;
  t.h = [](double x, const Eigen::VectorXd& y) { return x * y(0); };
  t.dh_dx = [](double, const Eigen::VectorXd& y) { return y(0); };
  t.d2h_dxdy = [](double, const Eigen::VectorXd&, int j) { return j == 0 ? 1.0 : 0.0; };
  // Not globally bounded in y; the declared bound holds on |y1| <= 2.
  t.sup_dh_dx = 2.0;
  t.sup_d2h_dxdy = {1.0};
  return t;
}

TestFunction sine() {
  TestFunction t;
  t.name = "sin(x)";
  t.arity = 1;
  t.h = [](double x, const Eigen::VectorXd&) { return std::sin(x); };
  t.dh_dx = [](double x, const Eigen::VectorXd&) { return std::cos(x); };
  t.d2h_dxdy = zero_mixed();
  t.sup_dh_dx = 1.0;
  t.sup_d2h_dxdy = {0.0};
  return t;
}

TestFunction tanh_over_y() {
  TestFunction t;
  t.name = "tanh(x)/(1+y1^2)";
  t.arity = 1;
  t.h = [](double x, const Eigen::VectorXd& y) { return std::tanh(x) / (1.0 + y(0) * y(0)); };
  t.dh_dx = [](double x, const Eigen::VectorXd& y) {
    const double c = std::cosh(x);
    return 1.0 / (c * c * (1.0 + y(0) * y(0)));
  };
  t.d2h_dxdy = [](double x, const Eigen::VectorXd& y, int j) {
    if (j != 0) return 0.0;
    const double c = std::cosh(x);
    const double d = 1.0 + y(0) * y(0);
    return -2.0 * y(0) / (c * c * d * d);
  };
  t.sup_dh_dx = 1.0;
  // max of 2|y| / (1+y^2)^2 is at y^2 = 1/3.
  t.sup_d2h_dxdy = {3.0 * std::sqrt(3.0) / 8.0};
  return t;
}

TestFunction gaussian_bump() {
  TestFunction t;
  t.name = "exp(-x^2)";
  t.arity = 1;
  t.h = [](double x, const Eigen::VectorXd&) { return std::exp(-x * x); };
  t.dh_dx = [](double x, const Eigen::VectorXd&) { return -2.0 * x * std::exp(-x * x); };
  t.d2h_dxdy = zero_mixed();
  t.sup_dh_dx = std::sqrt(2.0 / std::exp(1.0));
  t.sup_d2h_dxdy = {0.0};
  return t;
}

TestFunction constant(double c) {
  TestFunction t;
  t.name = "const";
  t.arity = 1;
  t.h = [c](double, const Eigen::VectorXd&) { return c; };
  t.dh_dx = [](double, const Eigen::VectorXd&) { return 0.0; };
  t.d2h_dxdy = zero_mixed();
  t.sup_dh_dx = 0.0;
  t.sup_d2h_dxdy = {0.0};
  return t;
}

std::vector<TestFunction> standard_suite() {
  return {identity(), x_times_y(), sine(), tanh_over_y(), gaussian_bump()};
}

}  // namespace test_functions

SteinEvaluator::SteinEvaluator(GammaNu law, TestFunction h, QuadratureSpec spec)
    : law_(law), h_(std::move(h)), spec_(spec) {
  h_.validate();
  spec_.validate();
  window_ = 1e-6 * std::max(1.0, law_.nu());
  cutoff_ = upper_cutoff(law_, spec_);
}

void SteinEvaluator::check_y(const Eigen::VectorXd& y) const {
  if (y.size() != h_.arity)
    throw std::invalid_argument("SteinEvaluator: y has length " + std::to_string(y.size()) + ", expected " +
                                std::to_string(h_.arity));
}

const SteinEvaluator::Moments& SteinEvaluator::moments(const Eigen::VectorXd& y) const {
  check_y(y);
  std::vector<std::uint64_t> key(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) std::memcpy(&key[i], &y(i), sizeof(double));

  MemoSlot* slot;
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    auto& entry = memo_[key];
    if (!entry) entry = std::make_unique<MemoSlot>();
    slot = entry.get();
  }
  std::call_once(slot->once, [&] {
    const double nu = law_.nu();
    slot->value.expected_h = integrate_against_p(law_, [&](double w) { return h_.h(w, y); }, spec_);
    auto weighted = [&](double s) { return h_.dh_dx(s - nu, y) * survival_offset(law_, s); };
    slot->value.k_integral = integrate_from_singular_end(weighted, cutoff_ + nu, law_.shape(), spec_);
  });
  return slot->value;
}

std::size_t SteinEvaluator::memo_size() const {
  std::lock_guard<std::mutex> lock(memo_mutex_);
  return memo_.size();
}

double SteinEvaluator::expected_h(const Eigen::VectorXd& y) const { return moments(y).expected_h; }

double SteinEvaluator::boundary_value(const Eigen::VectorXd& y) const {
  return (h_.h(-law_.nu(), y) - expected_h(y)) / law_.nu();
}

SteinEvaluator::FubiniParts SteinEvaluator::fubini(double x, const Eigen::VectorXd& y) const {
  const double nu = law_.nu();
  const double k = law_.shape();
  const Moments& m = moments(y);
  FubiniParts out;

  if (x > -nu) {
    const double s = x + nu;
    const double log_q_x = log_survival(law_, x);
    // I1 = int_{-nu}^x h' F,   I2s = int_x^inf h' (1-F(w)) / (1-F(x)).
    auto g1 = [&](double t) { return h_.dh_dx(t - nu, y) * cdf_offset(law_, t); };
    const double i1 = integrate_from_singular_end(g1, s, k, spec_);
    const double upper = relative_cutoff(law_, x, kLogDrop, spec_);
    auto g2 = [&](double w) { return h_.dh_dx(w, y) * std::exp(log_survival(law_, w) - log_q_x); };
    const double i2s = integrate(g2, x, upper, spec_);
    const double q_over_p = std::exp(log_q_x - log_density_p(law_, x));
    out.f = -q_over_p / (2.0 * s) * (i1 + cdf_F(law_, x) * i2s);
    const double i2 = std::exp(log_q_x) * i2s;
    out.derivative = (i1 - i2 + x * out.f) / (2.0 * s);
    return out;
  }

  const double sp = -(x + nu);
  const double log_q = log_density_q(law_, x);
  const double rho = tail_to_q_ratio(law_, x);
  auto weight = [&](double w) {
    const double tail = w >= -nu ? 0.0 : std::exp(log_tail_Ftilde(law_, w) - log_q);
    return h_.dh_dx(w, y) * (rho - tail);
  };
  const double a = integrate(weight, x, -nu, spec_);
  out.f = -(a + rho * m.k_integral) / (2.0 * sp);
  const double j = integrate([&](double w) { return h_.dh_dx(w, y); }, x, -nu, spec_);
  out.derivative = (x * out.f - j - m.k_integral) / (2.0 * (x + nu));
  return out;
}

double SteinEvaluator::evaluate_fh(double x, const Eigen::VectorXd& y) const {
  check_y(y);
  if (std::abs(x + law_.nu()) < window_) return boundary_value(y);
  return fubini(x, y).f;
}

double SteinEvaluator::evaluate_dfh_dx(double x, const Eigen::VectorXd& y) const {
  check_y(y);
  const double nu = law_.nu();
  const double centred = h_.h(x, y) - expected_h(y);
  if (std::abs(x + nu) < window_) {
    return h_.dh_dx(-nu, y) / (2.0 + nu) + (h_.h(-nu, y) - expected_h(y)) / (nu * (2.0 + nu));
  }
  const double f = fubini(x, y).f;
  return (x * f + centred) / (2.0 * (x + nu));
}

double SteinEvaluator::fubini_dfh_dx(double x, const Eigen::VectorXd& y) const {
  check_y(y);
  if (std::abs(x + law_.nu()) < window_) return evaluate_dfh_dx(x, y);
  return fubini(x, y).derivative;
}

double SteinEvaluator::stein_residual(const std::vector<double>& grid, const Eigen::VectorXd& y) const {
  check_y(y);
  const double nu = law_.nu();
  const double eh = expected_h(y);
  double worst = 0.0;
  for (double x : grid) {
    if (std::abs(x + nu) < window_)
      throw std::invalid_argument("stein_residual: grid point inside the limit window around -nu");
    const FubiniParts parts = fubini(x, y);
    const double r = 2.0 * (x + nu) * parts.derivative - x * parts.f - (h_.h(x, y) - eh);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double bound_S(const GammaNu& law, double x, BoundRoute route, const QuadratureSpec& spec) {
  const double nu = law.nu();
  if (!(x > -nu)) throw std::domain_error("bound_S requires x > -nu");
  const double s = x + nu;
  if (route == BoundRoute::closed_form) {
    return integral_cdf_below(law, x) * integral_survival_above_over_p(law, x) / (s * s);
  }
  const double below = integrate_from_singular_end([&](double t) { return cdf_offset(law, t); }, s,
                                                   law.shape(), spec);
  const double upper = relative_cutoff(law, x, kLogDrop, spec);
  const double log_p = log_density_p(law, x);
  const double above_over_p =
      integrate([&](double w) { return std::exp(log_survival(law, w) - log_p); }, x, upper, spec);
  return below * above_over_p / (s * s);
}

double bound_R(const GammaNu& law, double x, BoundRoute route, const QuadratureSpec& spec) {
  const double nu = law.nu();
  if (!(x < -nu)) throw std::domain_error("bound_R requires x < -nu");
  const double sp = -(x + nu);
  if (route == BoundRoute::closed_form) {
    return -x * integral_tail_over_q(law, x) / (sp * sp);
  }
  const double log_q = log_density_q(law, x);
  auto tail = [&](double u) { return u >= -nu ? 0.0 : std::exp(log_tail_Ftilde(law, u) - log_q); };
  return -x * integrate(tail, x, -nu, spec) / (sp * sp);
}

namespace {

// S at -nu + e^t on the right branch, R at -nu - e^t on the left.
double branch_value(const GammaNu& law, bool right, double log_offset) {
  const double off = std::exp(log_offset);
  return right ? bound_S(law, -law.nu() + off) : bound_R(law, -law.nu() - off);
}

}  // namespace

UniformConstant uniform_constant_detail(const GammaNu& law, const UniformConstantOptions& opts) {
  if (opts.points_per_branch < 3 || !(opts.min_offset > 0.0) || !(opts.max_offset > opts.min_offset))
    throw std::invalid_argument("uniform_constant: bad grid options");
  const double lo = std::log(opts.min_offset);
  const double hi = std::log(opts.max_offset);
  const int n = opts.points_per_branch;
  const double step = (hi - lo) / (n - 1);

  UniformConstant best;
  for (bool right : {true, false}) {
    std::vector<double> values(n);
    int arg = 0;
    for (int i = 0; i < n; ++i) {
      values[i] = branch_value(law, right, lo + i * step);
      if (values[i] > values[arg]) arg = i;
    }
    double t_best = lo + arg * step;
    double v_best = values[arg];
    if (arg > 0 && arg < n - 1) {
      // Golden-section search on the bracketing cell pair.
      constexpr double g = 0.6180339887498949;
      double a = lo + (arg - 1) * step, b = lo + (arg + 1) * step;
      double c = b - g * (b - a), d = a + g * (b - a);
      double fc = branch_value(law, right, c), fd = branch_value(law, right, d);
      for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
        if (fc > fd) {
          b = d, d = c, fd = fc;
          c = b - g * (b - a);
          fc = branch_value(law, right, c);
        } else {
          a = c, c = d, fc = fd;
          d = a + g * (b - a);
          fd = branch_value(law, right, d);
        }
      }
      const double t = 0.5 * (a + b);
      const double v = branch_value(law, right, t);
      if (v > v_best) v_best = v, t_best = t;
    }
    if (v_best > best.value) {
      best.value = v_best;
      best.argmax = right ? -law.nu() + std::exp(t_best) : -law.nu() - std::exp(t_best);
      best.source = right ? UniformConstant::Source::S : UniformConstant::Source::R;
    }
  }
  return best;
}

double uniform_constant(const GammaNu& law, const UniformConstantOptions& opts) {
  return uniform_constant_detail(law, opts).value;
}

MeanEstimate characterization_statistic(const SteinEvaluator& ev, const std::vector<double>& xs,
                                        const Eigen::MatrixXd& ys) {
  if (ys.rows() != static_cast<Eigen::Index>(xs.size()) || ys.cols() != ev.test_function().arity)
    throw std::invalid_argument("characterization_statistic: sample shapes do not match");
  if (xs.size() < 2) throw std::invalid_argument("characterization_statistic: need two samples");
  const double nu = ev.law().nu();
  Eigen::ArrayXd terms(ys.rows());
  Eigen::VectorXd y(ys.cols());
  for (Eigen::Index i = 0; i < ys.rows(); ++i) {
    const double x = xs[static_cast<std::size_t>(i)];
    y = ys.row(i).transpose();
    terms(i) = 2.0 * (x + nu) * ev.evaluate_dfh_dx(x, y) - x * ev.evaluate_fh(x, y);
  }
  MeanEstimate out;
  out.count = xs.size();
  out.mean = terms.mean();
  const double var = (terms - out.mean).square().sum() / static_cast<double>(terms.size() - 1);
  out.standard_error = std::sqrt(var / static_cast<double>(terms.size()));
  return out;
}

}  // namespace steingamma
