#include "steingamma/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace steingamma {

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw std::invalid_argument("quadrature tolerances must be positive");
  if (max_subdivisions < 1) throw std::invalid_argument("max_subdivisions must be >= 1");
  if (!(tail_mass > 0.0 && tail_mass <= 1e-10))
    throw std::invalid_argument("tail_mass must lie in (0, 1e-10]");
  if (panels < 1) throw std::invalid_argument("panels must be >= 1");
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// QUADPACK qk21 abscissae and weights.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208292238940, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a, b, value, error, abs_value;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod21(const Integrand& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double resg = 0.0;
  double resk = kWgk[10] * fc;
  double resabs = std::abs(resk);
  std::array<double, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(centre - dx);
    f2[j] = f(centre + dx);
    const double sum = f1[j] + f2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j)
    resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));

  const double value = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps))
    err = std::max(50.0 * kEps * resabs, err);
  if (!std::isfinite(value)) throw QuadratureError("non-finite integrand value", value, err);
  return {a, b, value, err, resabs};
}

// 20-point Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
struct GaussLegendre20 {
  std::array<double, 20> x{}, w{};
  GaussLegendre20() {
    constexpr int n = 20;
    for (int i = 0; i < n / 2; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = -z;
      x[n - 1 - i] = z;
      w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre20& gauss_legendre20() {
  static const GaussLegendre20 rule;
  return rule;
}

}  // namespace

QuadratureResult integrate_adaptive(const Integrand& f, double a, double b,
                                    const QuadratureSpec& spec) {
  if (a == b) return {};
  if (b < a) {
    auto r = integrate_adaptive(f, b, a, spec);
    r.value = -r.value;
    return r;
  }
  std::priority_queue<Panel> open;
  std::vector<Panel> closed;  // panels too narrow to split further
  Panel first = kronrod21(f, a, b);
  double total = first.value, total_err = first.error, total_abs = first.abs_value;
  open.push(first);
  int intervals = 1;

  auto target = [&] {
    return std::max({spec.abs_tol, spec.rel_tol * std::abs(total), 100.0 * kEps * total_abs});
  };
  while (total_err > target()) {
    if (open.empty()) break;
    if (intervals >= spec.max_subdivisions)
      throw QuadratureError("adaptive quadrature did not reach tolerance", total, total_err);
    Panel p = open.top();
    open.pop();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b) || (p.b - p.a) < 64.0 * kEps * std::max(std::abs(p.a), std::abs(p.b))) {
      closed.push_back(p);
      continue;
    }
    Panel left = kronrod21(f, p.a, mid);
    Panel right = kronrod21(f, mid, p.b);
    total += left.value + right.value - p.value;
    total_err += left.error + right.error - p.error;
    total_abs += left.abs_value + right.abs_value - p.abs_value;
    open.push(left);
    open.push(right);
    ++intervals;
  }
  // Re-sum from scratch to shed the drift of the running updates.
  double value = 0.0, err = 0.0;
  while (!open.empty()) {
    value += open.top().value;
    err += open.top().error;
    open.pop();
  }
  for (const auto& p : closed) {
    value += p.value;
    err += p.error;
  }
  return {value, err, intervals};
}

double integrate_panels(const Integrand& f, double a, double b, int panels) {
  if (a == b) return 0.0;
  const auto& gl = gauss_legendre20();
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double c = lo + 0.5 * h;
    double s = 0.0;
    for (int i = 0; i < 20; ++i) s += gl.w[i] * f(c + 0.5 * h * gl.x[i]);
    sum += 0.5 * h * s;
  }
  return sum;
}

double integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec) {
  switch (spec.scheme) {
    case QuadratureScheme::gauss_legendre_panels:
      return integrate_panels(f, a, b, spec.panels);
    case QuadratureScheme::adaptive_gauss_kronrod:
    default:
      return integrate_adaptive(f, a, b, spec).value;
  }
}

double integrate_from_singular_end(const Integrand& g, double s_hi, double k,
                                   const QuadratureSpec& spec) {
  if (s_hi <= 0.0) return 0.0;
  if (k >= 1.0) return integrate(g, 0.0, s_hi, spec);
  const double s_break = std::min(1.0, s_hi);
  const double inv_k = 1.0 / k;
  // s = t^(1/k), ds = (1/k) t^(1/k - 1) dt
  auto mapped = [&](double t) {
    if (t <= 0.0) return 0.0;
    const double s = std::pow(t, inv_k);
    return g(s) * inv_k * std::pow(t, inv_k - 1.0);
  };
  double value = integrate(mapped, 0.0, std::pow(s_break, k), spec);
  if (s_hi > s_break) value += integrate(g, s_break, s_hi, spec);
  return value;
}

}  // namespace steingamma
