#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace steingamma {

/// Step function on the real line, zero outside [breakpoints.front(), breakpoints.back()).
/// values[i] is the value on [breakpoints[i], breakpoints[i+1]).
template <typename Scalar = double>
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<Scalar> breakpoints, std::vector<Scalar> values)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (breakpoints_.empty() ? !values_.empty() : values_.size() + 1 != breakpoints_.size())
      throw std::invalid_argument("StepFunction: need one value per interval");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
      if (!(breakpoints_[i] > breakpoints_[i - 1]))
        throw std::invalid_argument("StepFunction: breakpoints must be strictly increasing");
  }

  /// c times the indicator of [lo, hi).
  static StepFunction indicator(Scalar lo, Scalar hi, Scalar c = Scalar(1)) { return StepFunction({lo, hi}, {c}); }

  const std::vector<Scalar>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<Scalar>& values() const noexcept { return values_; }
  bool empty() const noexcept { return values_.empty(); }

  Scalar operator()(Scalar t) const {
    if (empty() || t < breakpoints_.front() || !(t < breakpoints_.back())) return Scalar(0);
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
  }

 private:
  std::vector<Scalar> breakpoints_;
  std::vector<Scalar> values_;
};

/// Exact L2 inner product: a merge over both breakpoint lists, summing value products
/// times overlap lengths.
template <typename Scalar>
Scalar inner_product(const StepFunction<Scalar>& f, const StepFunction<Scalar>& g) {
  if (f.empty() || g.empty()) return Scalar(0);
  const auto& bf = f.breakpoints();
  const auto& bg = g.breakpoints();
  const auto& vf = f.values();
  const auto& vg = g.values();
  std::size_t i = 0, j = 0;
  Scalar sum(0);
  while (i < vf.size() && j < vg.size()) {
    const Scalar lo = std::max(bf[i], bg[j]);
    const Scalar hi = std::min(bf[i + 1], bg[j + 1]);
    if (hi > lo) sum += vf[i] * vg[j] * (hi - lo);
    // Advance whichever interval ends first (both on ties).
    if (bf[i + 1] < bg[j + 1]) {
      ++i;
    } else if (bg[j + 1] < bf[i + 1]) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return sum;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram(const std::vector<StepFunction<Scalar>>& fs) {
  const Eigen::Index n = static_cast<Eigen::Index>(fs.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) g(i, j) = g(j, i) = inner_product(fs[i], fs[j]);
  return g;
}

/// Coordinates of a list of generators in an orthonormal basis of their span:
/// column j of coords() holds generator j, so coords()^T coords() equals the Gram matrix.
template <typename Scalar = double>
struct OrthonormalFrame {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<StepFunction<Scalar>> generators;
  Matrix coords;  ///< rank x generators.size()
  Eigen::Index rank = 0;

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(generators.size()); }
  /// Express sum_ij K_ij g_i (x) g_j in frame coordinates: C K C^T.
  Matrix push_forward(const Matrix& k) const { return coords * k * coords.transpose(); }
};

/// Pivoted Cholesky factorisation of a PSD matrix, G = C^T C with C of shape rank x n.
/// Stops when the largest remaining diagonal falls below threshold.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pivoted_cholesky(
    const Eigen::MatrixBase<Derived>& g_in, typename Derived::Scalar threshold = 1e-10) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = g_in.rows();
  if (g_in.cols() != n) throw std::invalid_argument("pivoted_cholesky: matrix must be square");
  Matrix residual = g_in;
  Matrix factor = Matrix::Zero(n, n);  // rows are the factor rows, in original column order
  Eigen::Index rank = 0;
  for (; rank < n; ++rank) {
    Eigen::Index p;
    const Scalar pivot = residual.diagonal().maxCoeff(&p);
    if (!(pivot > threshold)) break;
    const Scalar root = std::sqrt(pivot);
    auto row = factor.row(rank);
    row = residual.row(p) / root;
    // Exact zero in the pivot position keeps later pivots from selecting it again.
    residual.noalias() -= row.transpose() * row;
    residual(p, p) = Scalar(0);
  }
  return factor.topRows(rank);
}

template <typename Scalar>
OrthonormalFrame<Scalar> orthonormal_frame(std::vector<StepFunction<Scalar>> fs, Scalar threshold = 1e-10) {
  OrthonormalFrame<Scalar> frame;
  const auto g = gram(fs);
  frame.coords = pivoted_cholesky(g, threshold);
  frame.rank = frame.coords.rows();
  frame.generators = std::move(fs);
  return frame;
}

}  // namespace steingamma
