#include "steingamma/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "steingamma/distance_mc.hpp"
#include "steingamma/gamma_law.hpp"
#include "steingamma/random.hpp"
#include "steingamma/stein_solver.hpp"

namespace steingamma {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, count) on a small pool; each index is independent.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double log_slope(const std::vector<double>& n, const std::vector<double>& v, std::size_t count) {
  if (count < 2) return kNaN;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < count; ++i) mx += std::log(n[i]), my += std::log(v[i]);
  mx /= count, my /= count;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double dx = std::log(n[i]) - mx;
    sxy += dx * (std::log(v[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

void fill_running_slopes(std::vector<SweepRow>& rows) {
  std::vector<double> n, v;
  for (auto& r : rows) {
    n.push_back(r.n);
    v.push_back(r.report.total);
    r.slope_running = log_slope(n, v, n.size());
  }
}

// Sorted-coupling distance and the standard error of its mean.
std::pair<double, double> w1_with_se(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  double sum = 0, sum2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::abs(x[i] - y[i]);
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean);
  return {mean, std::sqrt(var / n)};
}

void check_sweep(const std::vector<int>& ns) {
  if (ns.empty()) throw std::invalid_argument("sweep: no n values");
  for (int n : ns)
    if (n < 2) throw std::invalid_argument("sweep: every n must be >= 2");
}

}  // namespace

RateSeries fit_rate(std::vector<double> n, std::vector<double> values) {
  if (n.size() != values.size()) throw std::invalid_argument("fit_rate: n and values differ in length");
  if (n.size() < 4) throw std::invalid_argument("fit_rate: need at least 4 points");
  for (std::size_t i = 0; i < n.size(); ++i)
    if (!(n[i] > 0.0) || !(values[i] > 0.0)) throw std::invalid_argument("fit_rate: values must be positive");
  RateSeries r;
  r.slope = log_slope(n, values, n.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n.size(); ++i) mx += std::log(n[i]), my += std::log(values[i]);
  mx /= n.size(), my /= n.size();
  r.intercept = my - r.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double e = std::log(values[i]) - (r.intercept + r.slope * std::log(n[i]));
    ss += e * e;
  }
  r.residual = std::sqrt(ss / n.size());
  r.n = std::move(n);
  r.values = std::move(values);
  return r;
}

StepFunction<double> example_h(int i) {
  if (i < 1) throw std::invalid_argument("example_h: index starts at 1");
  return StepFunction<double>::indicator(2.0 * i, 2.0 * i + 1.0);
}

StepFunction<double> example_g(int i, double a) {
  if (i < 1) throw std::invalid_argument("example_g: index starts at 1");
  if (!(a > 0.0)) throw std::invalid_argument("example_g: a must be positive");
  return StepFunction<double>::indicator(2.0 * i - 1.0 + 1.0 / i, 2.0 * i + std::pow(i, -a));
}

Eigen::MatrixXd pair_kernel(int n) {
  if (n < 2) throw std::invalid_argument("pair_kernel: n must be >= 2");
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, 1.0 / (n - 1));
  a.diagonal().setZero();
  return a;
}

Example1 build_example1(int n) {
  // {h_1..h_n} is already orthonormal, so generator and frame coordinates coincide.
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
  if (n >= 1) e1(0) = 1.0;
  return {Kernel2<double>(pair_kernel(n)), Kernel2<double>::outer(e1)};
}

double example1_discrepancy_closed_form(int n) {
  const double m = n - 1.0;
  return 8.0 * n * n / (m * m * m) + 4.0 / (m * m);
}

double example1_cross_closed_form(int n) { return 4.0 / (n - 1.0); }

Example2 build_example2(int n, double a) {
  if (n < 2) throw std::invalid_argument("build_example2: n must be >= 2");
  if (!(a > 0.0)) throw std::invalid_argument("build_example2: a must be positive");
  std::vector<StepFunction<double>> gens;
  gens.reserve(2 * n);
  for (int i = 1; i <= n; ++i) gens.push_back(example_h(i));
  for (int i = 1; i <= n; ++i) gens.push_back(example_g(i, a));
  auto frame = orthonormal_frame(std::move(gens));
  const Eigen::MatrixXd ch = frame.coords.leftCols(n);
  const Eigen::MatrixXd cg = frame.coords.rightCols(n);
  // C (J - I) C^T / (n-1) = ((C 1)(C 1)^T - C C^T) / (n-1)
  auto push = [n](const Eigen::MatrixXd& c) {
    const Eigen::VectorXd s = c.rowwise().sum();
    Eigen::MatrixXd k = s * s.transpose();
    k.noalias() -= c * c.transpose();
    return Eigen::MatrixXd(k / (n - 1.0));
  };
  Example2 ex{frame, Kernel2<double>(push(ch)), Kernel2<double>(push(cg)), false};
  ex.rank_deficient = ex.frame.rank < 2 * n;
  return ex;
}

double example2_cross_sum(int n, double a) {
  if (n < 2) throw std::invalid_argument("example2_cross_sum: n must be >= 2");
  double pairs = 0;
  for (int j = 2; j <= n; ++j) {
    double inner = 0;
    for (int i = 1; i < j; ++i) inner += std::pow(static_cast<double>(i) * j, -a);
    pairs += inner;
  }
  const double m = n - 1.0;
  return 4.0 / (m * m) * pairs;
}

std::vector<SweepRow> run_example1(const SweepOptions& opts) {
  check_sweep(opts.n_values);
  const double c = cached_uniform_constant(opts.nu);
  std::vector<SweepRow> rows(opts.n_values.size());
  const GammaNu law(opts.nu);
  parallel_for(rows.size(), opts.threads, [&](std::size_t idx) {
    const int n = opts.n_values[idx];
    const Example1 ex = build_example1(n);
    ChaosVector<double> ys(n, {ex.g});
    SweepRow& row = rows[idx];
    row.n = n;
    row.report = d2_bound_chaos(ex.u, ys, opts.nu, 0.0, c);
    row.covariance = covariance(ex.u, ex.g);
    row.dw_bound = dw_from_d2(1, row.report.total);
    row.empirical_dw = kNaN;
    row.empirical_se = kNaN;
    if (opts.empirical) {
      const auto u = sample_second_chaos_spectral(ex.u, opts.samples, opts.seed, 2 * idx);
      const auto z = sample_Z(law, static_cast<std::size_t>(opts.samples), opts.seed, 2 * idx + 1);
      const auto [w, se] = w1_with_se(std::vector<double>(u.data(), u.data() + u.size()), z);
      row.empirical_dw = w;
      row.empirical_se = se;
    }
  });
  fill_running_slopes(rows);
  return rows;
}

std::vector<SweepRow> run_example2(const SweepOptions& opts) {
  check_sweep(opts.n_values);
  const double c = cached_uniform_constant(1.0);
  const GammaNu law(1.0);
  std::vector<SweepRow> rows(opts.n_values.size());
  parallel_for(rows.size(), opts.threads, [&](std::size_t idx) {
    const int n = opts.n_values[idx];
    const Example2 ex = build_example2(n, opts.a);
    const Eigen::Index d = ex.frame.rank;
    ChaosVector<double> ys(d, {ex.v});
    // The V_n marginal term is the single-variable bound for V_n.
    const double marginal = c * std::sqrt(gamma_discrepancy(ex.v, 1.0));
    SweepRow& row = rows[idx];
    row.n = n;
    row.rank_deficient = ex.rank_deficient;
    row.report = d2_bound_chaos(ex.u, ys, 1.0, marginal, c);
    row.covariance = covariance(ex.u, ex.v);
    row.dw_bound = dw_from_d2(2, row.report.total);
    row.empirical_dw = kNaN;
    row.empirical_se = kNaN;
    if (opts.empirical) {
      const long count = std::min(opts.samples, opts.max_joint_samples);
      ChaosVector<double> joint(d, {ex.u, ex.v});
      const Eigen::MatrixXd cloud = sample_chaos(joint, count, opts.seed, 3 * idx);
      Eigen::MatrixXd reference(count, 2);
      const auto z1 = sample_Z(law, static_cast<std::size_t>(count), opts.seed, 3 * idx + 1);
      const auto z2 = sample_Z(law, static_cast<std::size_t>(count), opts.seed, 3 * idx + 2);
      for (long i = 0; i < count; ++i) reference(i, 0) = z1[i], reference(i, 1) = z2[i];
      row.empirical_dw = w1_empirical_2d(SampleBatch(cloud), SampleBatch(reference), W1Method::exact);
    }
  });
  fill_running_slopes(rows);
  return rows;
}

double independence_gap(const Eigen::MatrixXd& cloud, std::uint64_t seed, std::uint64_t stream) {
  if (cloud.cols() != 2) throw std::invalid_argument("independence_gap: cloud must have two columns");
  Rng rng = make_stream(seed, stream);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(cloud.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd product(cloud.rows(), 2);
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    product(i, 0) = cloud(i, 0);
    product(i, 1) = cloud(perm[static_cast<std::size_t>(i)], 1);
  }
  return w1_empirical_2d(SampleBatch(cloud), SampleBatch(product), W1Method::exact);
}

namespace {

IndependenceSeries summarise(const std::vector<int>& ns, const std::vector<std::vector<double>>& gaps) {
  IndependenceSeries out;
  out.n = ns;
  for (const auto& g : gaps) {
    const double r = static_cast<double>(g.size());
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / r;
    double ss = 0;
    for (double x : g) ss += (x - mean) * (x - mean);
    out.mean_gap.push_back(mean);
    out.standard_error.push_back(g.size() > 1 ? std::sqrt(ss / (r - 1) / r) : kNaN);
  }
  out.strictly_decreasing = true;
  for (std::size_t i = 1; i < out.mean_gap.size(); ++i)
    if (!(out.mean_gap[i] < out.mean_gap[i - 1])) out.strictly_decreasing = false;
  return out;
}

void check_independence(const IndependenceOptions& opts) {
  check_sweep(opts.n_values);
  if (opts.replicates < 1) throw std::invalid_argument("independence: need at least one replicate");
  if (opts.samples < 2 || opts.samples > kExactMatchingCap)
    throw std::invalid_argument("independence: samples must lie in [2, 2000]");
}

}  // namespace

IndependenceSeries independence_example2(const IndependenceOptions& opts) {
  check_independence(opts);
  std::vector<std::vector<double>> gaps;
  for (std::size_t k = 0; k < opts.n_values.size(); ++k) {
    const Example2 ex = build_example2(opts.n_values[k], opts.a);
    ChaosVector<double> joint(ex.frame.rank, {ex.u, ex.v});
    std::vector<double> g;
    for (int r = 0; r < opts.replicates; ++r) {
      const std::uint64_t stream = 1000 * k + r;
      const Eigen::MatrixXd cloud = sample_chaos(joint, opts.samples, opts.seed, stream);
      g.push_back(independence_gap(cloud, opts.seed ^ 0x9e3779b97f4a7c15ull, stream));
    }
    gaps.push_back(std::move(g));
  }
  return summarise(opts.n_values, gaps);
}

IndependenceSeries independence_control(const IndependenceOptions& opts) {
  check_independence(opts);
  if (!(std::abs(opts.rho) < 1.0)) throw std::invalid_argument("independence_control: |rho| must be < 1");
  Eigen::Vector2d e1(1.0, 0.0);
  ChaosVector<double> pair(2, {Kernel2<double>::outer(e1),
                               Kernel1<double>(Eigen::Vector2d(opts.rho, std::sqrt(1.0 - opts.rho * opts.rho)))});
  std::vector<std::vector<double>> gaps;
  for (std::size_t k = 0; k < opts.n_values.size(); ++k) {
    std::vector<double> g;
    for (int r = 0; r < opts.replicates; ++r) {
      const std::uint64_t stream = 500000 + 1000 * k + r;
      const Eigen::MatrixXd cloud = sample_chaos(pair, opts.samples, opts.seed, stream);
      g.push_back(independence_gap(cloud, opts.seed ^ 0x9e3779b97f4a7c15ull, stream));
    }
    gaps.push_back(std::move(g));
  }
  return summarise(opts.n_values, gaps);
}

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto record = [&out](std::string name, bool ok, const std::string& detail) {
    out.push_back({std::move(name), ok, detail});
  };
  auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };
  auto guard = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      record(name, false, std::string("threw: ") + e.what());
    }
  };

  guard("gamma_law: mass, moments, identity", [&] {
    double worst = 0;
    for (double nu : {0.5, 1.0, 2.0, 5.5}) {
      const GammaNu law(nu);
      worst = std::max(worst, std::abs(integrate_against_p(law, [](double) { return 1.0; }, {}) - 1.0));
      worst = std::max(worst, std::abs(moment(law, 1)));
      worst = std::max(worst, std::abs(moment(law, 2) - 2 * nu) / (2 * nu));
      worst = std::max(worst, std::abs(moment(law, 3) - 8 * nu) / (8 * nu));
      for (double off : {1e-3, 0.1, 1.0, 10.0}) {
        worst = std::max(worst, identity_residual(law, -nu + off));
        worst = std::max(worst, identity_residual(law, -nu - off));
      }
    }
    record("gamma_law: mass, moments, identity", worst < 1e-8, "worst " + fmt(worst));
  });

  guard("stein_solver: residual certificate", [&] {
    double worst = 0, flat = 0;
    const GammaNu law(1.0);
    std::vector<double> grid;
    for (double off : {1e-3, 0.05, 0.5, 2.0, 8.0}) grid.push_back(-1.0 + off), grid.push_back(-1.0 - off);
    Eigen::VectorXd y(1);
    y << 0.5;
    for (const auto& h : test_functions::standard_suite()) {
      SteinEvaluator ev(law, h);
      worst = std::max(worst, ev.stein_residual(grid, y));
    }
    SteinEvaluator id(law, test_functions::identity());
    for (double x : grid) flat = std::max(flat, std::abs(id.evaluate_fh(x, y) + 1.0));
    record("stein_solver: residual certificate", worst < 1e-6 && flat < 1e-8,
           "residual " + fmt(worst) + ", |f_x + 1| " + fmt(flat));
  });

  guard("stein_solver: boundary limits", [&] {
    double worst = 0;
    for (double nu : {1.0, 2.0}) {
      const GammaNu law(nu);
      worst = std::max(worst, std::abs(bound_S(law, -nu + 1e-4) - 4 / (2 + nu)));
      worst = std::max(worst, std::abs(bound_R(law, -nu - 1e-4) - 4 / (2 + nu)));
    }
    record("stein_solver: boundary limits", worst < 1e-2, "worst " + fmt(worst));
  });

  guard("hilbert_space: frame reconstruction", [&] {
    const Example2 ex = build_example2(20, 1.0);
    const Eigen::MatrixXd g = gram(ex.frame.generators);
    const double err = (ex.frame.coords.transpose() * ex.frame.coords - g).cwiseAbs().maxCoeff();
    record("hilbert_space: frame reconstruction", err < 1e-12 && ex.frame.rank == 39,
           "error " + fmt(err) + ", rank " + std::to_string(ex.frame.rank));
  });

  guard("chaos: closed forms and isometry", [&] {
    const Example1 ex = build_example1(3);
    const double disc = gamma_discrepancy(ex.u, 1.0);
    const double cross = cross_malliavin(ex.u, ex.g);
    ChaosVector<double> v(3, {ex.u});
    const Eigen::MatrixXd s = sample_chaos(v, 200000, seed, 11);
    const double mean = s.mean();
    const double var = (s.array() - mean).square().mean();
    const double ok_iso = std::abs(var - 3.0) < 4 * std::sqrt(((s.array() - mean).pow(4).mean() - var * var) / s.size());
    record("chaos: closed forms and isometry",
           std::abs(disc - 10.0) < 1e-12 && std::abs(cross - 2.0) < 1e-12 && ok_iso,
           "discrepancy " + fmt(disc) + ", cross " + fmt(cross) + ", variance " + fmt(var));
  });

  guard("bounds: smoothing constants", [&] {
    const double pi = std::acos(-1.0);
    double err = std::max(std::abs(smoothing_In(1) - std::sqrt(2 / pi)), std::abs(smoothing_In(2) - std::sqrt(pi / 2)));
    bool increasing = true;
    for (int n = 1; n < 20; ++n) increasing = increasing && smoothing_In(n + 1) > smoothing_In(n);
    record("bounds: smoothing constants", err < 1e-10 && increasing, "error " + fmt(err));
  });

  guard("distance_mc: matching oracles", [&] {
    Eigen::MatrixXd a(3, 2), b(3, 2);
    a << 0, 0, 1, 0, 0, 1;
    b << 1, 1, 2, 0, 0, 2;
    const double w = w1_empirical_2d(SampleBatch(a), SampleBatch(b));
    const double expected = (std::sqrt(2.0) + 2.0) / 3.0;
    Eigen::VectorXd x(3), y(3);
    x << 1, 2, 3;
    y << 2, 3, 5;
    const double w1 = w1_empirical_1d(SampleBatch::from_vector(x), SampleBatch::from_vector(y));
    record("distance_mc: matching oracles", std::abs(w - expected) < 1e-12 && std::abs(w1 - 4.0 / 3.0) < 1e-15,
           "2d " + fmt(w) + ", 1d " + fmt(w1));
  });

  guard("experiments: example closed forms", [&] {
    double worst = 0;
    for (int n : {5, 17, 50}) {
      const Example1 ex = build_example1(n);
      worst = std::max(worst, std::abs(gamma_discrepancy(ex.u, 1.0) - example1_discrepancy_closed_form(n)));
      worst = std::max(worst, std::abs(cross_malliavin(ex.u, ex.g) - example1_cross_closed_form(n)));
      const Example2 ex2 = build_example2(n, 0.75);
      worst = std::max(worst, std::abs(covariance(ex2.u, ex2.v) - example2_cross_sum(n, 0.75)));
    }
    record("experiments: example closed forms", worst < 1e-12, "worst " + fmt(worst));
  });

  return out;
}

}  // namespace steingamma
