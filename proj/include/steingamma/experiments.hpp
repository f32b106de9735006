#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "steingamma/bounds.hpp"
#include "steingamma/chaos.hpp"
#include "steingamma/hilbert_space.hpp"

namespace steingamma {

inline constexpr const char* kVersion = "0.1.0";

/// Least-squares line through (log n, log value).
struct RateSeries {
  std::vector<double> n;
  std::vector<double> values;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< RMS of the log-space residuals
};

/// Needs at least 4 points; throws std::invalid_argument on nonpositive n or values.
RateSeries fit_rate(std::vector<double> n, std::vector<double> values);

/// Indicator of [2i, 2i+1], i >= 1.
StepFunction<double> example_h(int i);
/// Indicator of [2i - 1 + 1/i, 2i + i^-a].
StepFunction<double> example_g(int i, double a);

/// (J - I)/(n - 1): the kernel (2/(n-1)) sum_{i<j} e_i (x)~ e_j in generator coordinates.
Eigen::MatrixXd pair_kernel(int n);

struct Example1 {
  Kernel2<double> u;  ///< U_n over the frame {h_1..h_n}
  Kernel2<double> g;  ///< I_2(h_1 (x) h_1) = xi_1^2 - 1
};
Example1 build_example1(int n);

double example1_discrepancy_closed_form(int n);  ///< 8 n^2/(n-1)^3 + 4/(n-1)^2
double example1_cross_closed_form(int n);        ///< 4/(n-1)

struct Example2 {
  OrthonormalFrame<double> frame;  ///< frame of {h_1..h_n, g_1..g_n}
  Kernel2<double> u;
  Kernel2<double> v;
  bool rank_deficient = false;  ///< true when the 2n generators span fewer dimensions
};
Example2 build_example2(int n, double a);

/// (4/(n-1)^2) sum_{i<j<=n} (ij)^-a by direct summation.
double example2_cross_sum(int n, double a);

struct SweepOptions {
  std::vector<int> n_values{10, 30, 100, 300, 1000};
  double nu = 1.0;
  double a = 1.0;
  long samples = 100000;
  std::uint64_t seed = 20240601;
  int threads = 0;                ///< 0 picks the hardware concurrency
  bool empirical = true;          ///< skip Monte Carlo columns when false
  long max_joint_samples = 2000;  ///< cap for 2D clouds (exact matching)
};

struct SweepRow {
  int n = 0;
  BoundReport report;
  double covariance = 0.0;        ///< E[X Y_1]
  double empirical_dw = 0.0;      ///< NaN when not computed
  double empirical_se = 0.0;
  double dw_bound = 0.0;          ///< dw_from_d2(dimension, report.total)
  double slope_running = 0.0;     ///< slope of report.total over rows so far (NaN for the first)
  bool rank_deficient = false;
};

/// U_n against G: closed-form bound terms, and the 1D distance between U_n and F(nu) samples.
std::vector<SweepRow> run_example1(const SweepOptions& opts);
/// (U_n, V_n): bound with the V_n marginal term, and the 2D distance of the joint
/// cloud to independent F(1) x F(1) samples.
std::vector<SweepRow> run_example2(const SweepOptions& opts);

struct IndependenceOptions {
  std::vector<int> n_values{10, 30, 100, 300};
  double a = 1.0;
  long samples = 2000;
  int replicates = 16;
  std::uint64_t seed = 777;
  double rho = 0.8;
};

struct IndependenceSeries {
  std::vector<int> n;
  std::vector<double> mean_gap;
  std::vector<double> standard_error;
  bool strictly_decreasing = false;
};

/// Exact 2D W1 between a joint cloud and the same cloud with its second
/// coordinate randomly permuted.
double independence_gap(const Eigen::MatrixXd& cloud, std::uint64_t seed, std::uint64_t stream);

IndependenceSeries independence_example2(const IndependenceOptions& opts);
/// X = xi_1^2 - 1, Y = rho xi_1 + sqrt(1 - rho^2) xi_2 at every sweep index.
IndependenceSeries independence_control(const IndependenceOptions& opts);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite over all modules.
std::vector<CheckResult> run_selftest(std::uint64_t seed);

}  // namespace steingamma
