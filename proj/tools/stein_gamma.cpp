// stein-gamma: command-line driver for the example sweeps, rate fits and the
// solver certificate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "steingamma/experiments.hpp"
#include "steingamma/gamma_law.hpp"
#include "steingamma/stein_solver.hpp"

namespace sg = steingamma;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInvariant = 1, kBadArgs = 2 };

struct Options {
  double nu = 1.0;
  std::vector<int> n_sweep{10, 30, 100, 300, 1000};
  double a = 1.0;
  long samples = 100000;
  std::uint64_t seed = 20240601;
  std::string out;
  std::string format = "csv";
  int threads = 0;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// CSV writers print NaN as "nan"; JSON gets null.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

json metadata(const Options& o, const std::string& started) {
  return {{"seed", o.seed}, {"version", sg::kVersion}, {"timestamps", {{"started", started}, {"finished", utc_now()}}}};
}

sg::SweepOptions sweep_options(const Options& o) {
  sg::SweepOptions s;
  s.n_values = o.n_sweep;
  s.nu = o.nu;
  s.a = o.a;
  s.samples = o.samples;
  s.seed = o.seed;
  s.threads = o.threads;
  return s;
}

void write_sweep(const Options& o, const std::vector<sg::SweepRow>& rows, const std::string& name,
                 const std::string& started, json extra) {
  Output out(o.out);
  auto& os = out.stream();
  if (o.format == "csv") {
    os << "n,discrepancy,cross_term,bound_total,empirical_dw,slope_running\n";
    for (const auto& r : rows)
      os << r.n << ',' << num(r.report.discrepancy) << ',' << num(r.report.cross_terms.at(0)) << ','
         << num(r.report.total) << ',' << num(r.empirical_dw) << ',' << num(r.slope_running) << '\n';
    return;
  }
  json j = metadata(o, started);
  j["experiment"] = name;
  j["parameters"] = {{"nu", o.nu}, {"a", o.a}, {"samples", o.samples}, {"n_sweep", o.n_sweep}};
  j["rows"] = json::array();
  for (const auto& r : rows) {
    json row = r.report;
    row["n"] = r.n;
    row["covariance"] = r.covariance;
    row["empirical_dw"] = num_json(r.empirical_dw);
    row["empirical_se"] = num_json(r.empirical_se);
    row["dw_bound"] = r.dw_bound;
    row["slope_running"] = num_json(r.slope_running);
    row["rank_deficient"] = r.rank_deficient;
    j["rows"].push_back(row);
  }
  for (auto& [k, v] : extra.items()) j[k] = v;
  os << j.dump(2) << '\n';
}

int cmd_selftest(const Options& o) {
  const std::string started = utc_now();
  const auto results = sg::run_selftest(o.seed);
  bool ok = true;
  Output out(o.out);
  auto& os = out.stream();
  if (o.format == "csv") {
    os << "check,passed,detail\n";
    for (const auto& r : results) os << '"' << r.name << "\"," << (r.passed ? "true" : "false") << ",\"" << r.detail << "\"\n";
  } else {
    json j = metadata(o, started);
    j["checks"] = json::array();
    for (const auto& r : results) j["checks"].push_back({{"check", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    os << j.dump(2) << '\n';
  }
  for (const auto& r : results) {
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    ok = ok && r.passed;
  }
  return ok ? kOk : kInvariant;
}

int cmd_example1(const Options& o) {
  const std::string started = utc_now();
  const auto rows = sg::run_example1(sweep_options(o));
  bool ok = true;
  for (const auto& r : rows) {
    if (r.empirical_dw > r.dw_bound + 3.0 * r.empirical_se) {
      std::cerr << "n=" << r.n << ": empirical distance " << r.empirical_dw << " exceeds the bound " << r.dw_bound << '\n';
      ok = false;
    }
  }
  json extra;
  extra["cross_term_reference"] = "4/(n-1)";
  write_sweep(o, rows, "example1", started, extra);
  return ok ? kOk : kInvariant;
}

int cmd_example2(const Options& o) {
  const std::string started = utc_now();
  const auto rows = sg::run_example2(sweep_options(o));
  for (const auto& r : rows)
    if (r.rank_deficient) std::cerr << "n=" << r.n << ": generators are linearly dependent (g_1 = h_1 when a = 1)\n";
  json extra;
  extra["a"] = o.a;
  write_sweep(o, rows, "example2", started, extra);
  return kOk;
}

int cmd_stein_solve(const Options& o) {
  const std::string started = utc_now();
  const sg::GammaNu law(o.nu);
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) {
    const double off = std::pow(10.0, -4.0 + 6.0 * i / 99.0);
    grid.push_back(-o.nu + off);
    grid.push_back(-o.nu - off);
  }
  std::sort(grid.begin(), grid.end());
  Eigen::VectorXd y(1);
  y << 0.5;
  const double c = sg::uniform_constant(law);

  bool ok = true;
  json functions = json::array();
  Output out(o.out);
  auto& os = out.stream();
  if (o.format == "csv") os << "function,x,f_h,dfh_dx\n";
  for (const auto& h : sg::test_functions::standard_suite()) {
    const sg::SteinEvaluator ev(law, h);
    const double residual = ev.stein_residual(grid, y);
    ok = ok && residual < 1e-6;
    json pts = json::array();
    for (double x : grid) {
      const double f = ev.evaluate_fh(x, y);
      const double df = ev.evaluate_dfh_dx(x, y);
      if (o.format == "csv") os << '"' << h.name << "\"," << num(x) << ',' << num(f) << ',' << num(df) << '\n';
      pts.push_back({{"x", x}, {"f_h", f}, {"dfh_dx", df}});
    }
    std::cerr << h.name << ": residual " << residual << '\n';
    functions.push_back({{"name", h.name}, {"expected_h", ev.expected_h(y)}, {"residual", residual}, {"points", pts}});
  }
  std::cerr << "uniform constant C(" << o.nu << ") = " << c << '\n';
  if (o.format == "json") {
    json j = metadata(o, started);
    j["nu"] = o.nu;
    j["y"] = {0.5};
    j["uniform_constant"] = c;
    j["functions"] = functions;
    os << j.dump(2) << '\n';
  }
  return ok ? kOk : kInvariant;
}

int cmd_rates(const Options& o) {
  const std::string started = utc_now();
  auto opts = sweep_options(o);
  opts.empirical = false;
  if (o.n_sweep.size() < 4) throw std::invalid_argument("rates needs at least 4 sweep points");
  const auto r1 = sg::run_example1(opts);
  const auto r2 = sg::run_example2(opts);
  std::vector<double> n;
  for (int v : o.n_sweep) n.push_back(v);
  auto column = [](const std::vector<sg::SweepRow>& rows, auto get) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(get(r));
    return v;
  };
  struct Named {
    std::string name;
    sg::RateSeries series;
  };
  const std::vector<Named> fits{
      {"example1.discrepancy", sg::fit_rate(n, column(r1, [](auto& r) { return r.report.discrepancy; }))},
      {"example1.cross_term", sg::fit_rate(n, column(r1, [](auto& r) { return r.report.cross_terms[0]; }))},
      {"example1.bound_total", sg::fit_rate(n, column(r1, [](auto& r) { return r.report.total; }))},
      {"example2.covariance", sg::fit_rate(n, column(r2, [](auto& r) { return r.covariance; }))},
      {"example2.cross_term", sg::fit_rate(n, column(r2, [](auto& r) { return r.report.cross_terms[0]; }))},
      {"example2.bound_total", sg::fit_rate(n, column(r2, [](auto& r) { return r.report.total; }))},
  };
  Output out(o.out);
  auto& os = out.stream();
  if (o.format == "csv") {
    os << "series,slope,intercept,residual\n";
    for (const auto& f : fits)
      os << f.name << ',' << num(f.series.slope) << ',' << num(f.series.intercept) << ',' << num(f.series.residual) << '\n';
  } else {
    json j = metadata(o, started);
    j["parameters"] = {{"nu", o.nu}, {"a", o.a}, {"n_sweep", o.n_sweep}};
    for (const auto& f : fits)
      j["fits"][f.name] = {{"slope", f.series.slope}, {"intercept", f.series.intercept},
                           {"residual", f.series.residual}, {"n", f.series.n}, {"values", f.series.values}};
    os << j.dump(2) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stein's method for centered Gamma approximation: solver, bounds and example sweeps"};
  app.set_version_flag("--version", std::string(sg::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--nu", o.nu, "Gamma parameter nu > 0")->check(CLI::PositiveNumber);
  app.add_option("--n-sweep", o.n_sweep, "comma-separated n values (each >= 2)")->delimiter(',');
  app.add_option("--a", o.a, "decay exponent a > 0 of the second example")->check(CLI::PositiveNumber);
  app.add_option("--samples", o.samples, "Monte Carlo sample count")->check(CLI::Range(2L, 100000000L));
  app.add_option("--seed", o.seed, "base seed");
  app.add_option("--out", o.out, "output path (default stdout)");
  app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", o.threads, "worker threads for sweeps (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* selftest = app.add_subcommand("selftest", "run the invariant suite of every module");
  auto* ex1 = app.add_subcommand("example1", "U_n against G: bound terms and empirical distance");
  auto* ex2 = app.add_subcommand("example2", "(U_n, V_n): bound terms and empirical 2D distance");
  auto* solve = app.add_subcommand("stein-solve", "evaluate the Stein solution for the built-in test functions");
  auto* rates = app.add_subcommand("rates", "log-log rate fits for both examples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadArgs;
  }
  for (int n : o.n_sweep)
    if (n < 2) {
      std::cerr << "--n-sweep: every n must be >= 2\n";
      return kBadArgs;
    }

  try {
    if (selftest->parsed()) return cmd_selftest(o);
    if (ex1->parsed()) return cmd_example1(o);
    if (ex2->parsed()) return cmd_example2(o);
    if (solve->parsed()) return cmd_stein_solve(o);
    if (rates->parsed()) return cmd_rates(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariant;
  }
  return kBadArgs;
}
