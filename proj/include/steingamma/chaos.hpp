#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "steingamma/random.hpp"

namespace steingamma {

/// First chaos element I_1 = a . xi.
template <typename Scalar = double>
class Kernel1 {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit Kernel1(Vector a) : a_(std::move(a)) {}
  const Vector& coeffs() const noexcept { return a_; }
  Eigen::Index dim() const noexcept { return a_.size(); }

 private:
  Vector a_;
};

/// Second chaos element I_2 = xi^T A xi - tr A, with A symmetrised on construction.
template <typename Scalar = double>
class Kernel2 {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit Kernel2(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("Kernel2: matrix must be square");
    a_ = (a + a.transpose()) / Scalar(2);
  }
  static Kernel2 outer(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) { return Kernel2(v * v.transpose()); }

  const Matrix& matrix() const noexcept { return a_; }
  Eigen::Index dim() const noexcept { return a_.rows(); }
  Scalar hs_norm2() const { return a_.squaredNorm(); }
  /// E[I_2^2] = 2 ||A||_HS^2.
  Scalar variance() const { return Scalar(2) * hs_norm2(); }

 private:
  Matrix a_;
};

template <typename Scalar = double>
using ChaosElement = std::variant<Kernel1<Scalar>, Kernel2<Scalar>>;

/// Chaos elements of order 1 or 2 sharing one frame of dimension dim.
template <typename Scalar = double>
class ChaosVector {
 public:
  explicit ChaosVector(Eigen::Index dim) : dim_(dim) {}
  ChaosVector(Eigen::Index dim, std::vector<ChaosElement<Scalar>> elements) : dim_(dim) {
    for (auto& e : elements) push_back(std::move(e));
  }

  void push_back(ChaosElement<Scalar> e) {
    const Eigen::Index d = std::visit([](const auto& k) { return k.dim(); }, e);
    if (d != dim_) throw std::invalid_argument("ChaosVector: element dimension differs from the frame");
    elements_.push_back(std::move(e));
  }
  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const ChaosElement<Scalar>& operator[](std::size_t i) const { return elements_[i]; }
  auto begin() const { return elements_.begin(); }
  auto end() const { return elements_.end(); }

 private:
  Eigen::Index dim_;
  std::vector<ChaosElement<Scalar>> elements_;
};

namespace detail {

template <typename A, typename B>
void check_same_dim(const A& a, const B& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("chaos: kernels live in frames of different dimension");
}

}  // namespace detail

/// Evaluate chaos elements on given Gaussian rows (count x dim). Returns count x elements.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> evaluate_chaos(const ChaosVector<Scalar>& v,
                                                                      const Eigen::MatrixBase<Derived>& xi) {
  if (xi.cols() != v.dim()) throw std::invalid_argument("evaluate_chaos: Gaussian rows have the wrong width");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(xi.rows(), static_cast<Eigen::Index>(v.size()));
  for (std::size_t c = 0; c < v.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    if (const auto* k1 = std::get_if<Kernel1<Scalar>>(&v[c])) {
      out.col(col).noalias() = xi * k1->coeffs();
    } else {
      const auto& a = std::get<Kernel2<Scalar>>(v[c]).matrix();
      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> xa = xi * a;
      out.col(col) = (xa.array() * xi.array()).rowwise().sum() - a.trace();
    }
  }
  return out;
}

/// count draws of the chaos vector, each from one standard Gaussian vector of the frame.
/// Rows are generated in blocks so memory stays bounded for large frames.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sample_chaos(const ChaosVector<Scalar>& v,
                                                                    Eigen::Index count, std::uint64_t seed,
                                                                    std::uint64_t stream = 0) {
  if (count < 1) throw std::invalid_argument("sample_chaos: count must be >= 1");
  Rng rng = make_stream(seed, stream);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(count, static_cast<Eigen::Index>(v.size()));
  const Eigen::Index block = std::max<Eigen::Index>(1, std::min<Eigen::Index>(count, 4'000'000 / (v.dim() + 1)));
  for (Eigen::Index r = 0; r < count; r += block) {
    const Eigen::Index rows = std::min(block, count - r);
    const auto xi = standard_normal_matrix<Scalar>(rows, v.dim(), rng);
    out.middleRows(r, rows) = evaluate_chaos(v, xi);
  }
  return out;
}

/// Draws of a single second-chaos element through its spectrum: xi^T A xi - tr A has the
/// law of sum_i lambda_i (eta_i^2 - 1). Cost per draw is linear in the dimension.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sample_second_chaos_spectral(const Kernel2<Scalar>& k, Eigen::Index count,
                                                                      std::uint64_t seed, std::uint64_t stream = 0) {
  if (count < 1) throw std::invalid_argument("sample_second_chaos_spectral: count must be >= 1");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> es(k.matrix(),
                                                                                          Eigen::EigenvaluesOnly);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambda = es.eigenvalues();
  Rng rng = make_stream(seed, stream);
  std::normal_distribution<Scalar> normal(0, 1);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(count);
  for (Eigen::Index r = 0; r < count; ++r) {
    Scalar sum(0);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      const Scalar e = normal(rng);
      sum += lambda(i) * (e * e - Scalar(1));
    }
    out(r) = sum;
  }
  return out;
}

/// E[I_2(A) I_2(B)] = 2 tr(AB).
template <typename Scalar>
Scalar covariance(const Kernel2<Scalar>& x, const Kernel2<Scalar>& y) {
  detail::check_same_dim(x, y);
  return Scalar(2) * x.matrix().cwiseProduct(y.matrix()).sum();
}

/// r = 1 contraction: the matrix AB, or (AB + BA)/2 when symmetrised.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> contract1(const Kernel2<Scalar>& f, const Kernel2<Scalar>& g,
                                                                 bool symmetrize) {
  detail::check_same_dim(f, g);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ab = f.matrix() * g.matrix();
  if (!symmetrize) return ab;
  return (ab + ab.transpose()) / Scalar(2);
}

/// r = 2 contraction: <f, g> = tr(AB).
template <typename Scalar>
Scalar contract2(const Kernel2<Scalar>& f, const Kernel2<Scalar>& g) {
  detail::check_same_dim(f, g);
  return f.matrix().cwiseProduct(g.matrix()).sum();
}

/// E[(2(X + nu) - <D(-L)^{-1} X, DX>)^2] = 8 ||A - A^2||^2 + 4 (nu - tr A^2)^2.
template <typename Scalar>
Scalar gamma_discrepancy(const Kernel2<Scalar>& x, Scalar nu) {
  const auto& a = x.matrix();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a2 = a * a;
  const Scalar gap = nu - a2.trace();
  return Scalar(8) * (a - a2).squaredNorm() + Scalar(4) * gap * gap;
}

/// E[<D(-L)^{-1} X, DY>^2] = (2 tr AB)^2 + 2 ||AB + BA||^2.
template <typename Scalar>
Scalar cross_malliavin(const Kernel2<Scalar>& x, const Kernel2<Scalar>& y) {
  detail::check_same_dim(x, y);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ab = x.matrix() * y.matrix();
  const Scalar t = Scalar(2) * ab.trace();
  return t * t + Scalar(2) * (ab + ab.transpose()).squaredNorm();
}

/// First-chaos Y = b . xi: <D(-L)^{-1} X, DY> = b^T A xi, so the second moment is ||A b||^2.
template <typename Scalar>
Scalar cross_malliavin(const Kernel2<Scalar>& x, const Kernel1<Scalar>& y) {
  detail::check_same_dim(x, y);
  return (x.matrix() * y.coeffs()).squaredNorm();
}

template <typename Scalar>
Scalar cross_malliavin(const Kernel2<Scalar>& x, const ChaosElement<Scalar>& y) {
  return std::visit([&](const auto& k) { return cross_malliavin(x, k); }, y);
}

template <typename Scalar>
struct NpCriterion {
  Scalar variance_gap = 0;    ///< |E[X^2] - 2 nu|
  Scalar contraction_gap = 0; ///< ||A^2 - A||_HS^2
};

template <typename Scalar>
NpCriterion<Scalar> np_criterion(const Kernel2<Scalar>& x, Scalar nu) {
  const auto& a = x.matrix();
  return {std::abs(x.variance() - Scalar(2) * nu), (a * a - a).squaredNorm()};
}

// Product formula, checked pathwise against Wick-ordered evaluation of the
// higher chaos parts built as dense symmetric tensors.
namespace detail {

// Dense symmetric tensor of order 3 or 4, row-major flat storage.
template <typename Scalar>
struct SymTensor {
  Eigen::Index d = 0;
  int order = 0;
  std::vector<Scalar> data;
  Scalar& at(std::array<Eigen::Index, 4> idx) { return data[flat(idx)]; }
  Scalar at(std::array<Eigen::Index, 4> idx) const { return data[flat(idx)]; }
  std::size_t flat(const std::array<Eigen::Index, 4>& idx) const {
    std::size_t f = 0;
    for (int k = 0; k < order; ++k) f = f * static_cast<std::size_t>(d) + static_cast<std::size_t>(idx[k]);
    return f;
  }
};

template <typename Scalar>
SymTensor<Scalar> symmetrized_product(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& b) {
  const Eigen::Index d = a.size();
  SymTensor<Scalar> t{d, 3, std::vector<Scalar>(static_cast<std::size_t>(d * d * d))};
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        t.at({i, j, k, 0}) = (a(i) * b(j, k) + a(j) * b(i, k) + a(k) * b(i, j)) / Scalar(3);
  return t;
}

template <typename Scalar>
SymTensor<Scalar> symmetrized_product(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& b) {
  const Eigen::Index d = a.rows();
  SymTensor<Scalar> t{d, 4, std::vector<Scalar>(static_cast<std::size_t>(d * d * d * d))};
  // For symmetric a and b the 24 permutations collapse to the 6 ways of choosing
  // which index pair goes to a.
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l)
          t.at({i, j, k, l}) = (a(i, j) * b(k, l) + a(i, k) * b(j, l) + a(i, l) * b(j, k) + a(j, k) * b(i, l) +
                                a(j, l) * b(i, k) + a(k, l) * b(i, j)) /
                               Scalar(6);
  return t;
}

// I_3(T) = sum T xi xi xi - 3 sum_{i,k} T_iik xi_k.
template <typename Scalar, typename Row>
Scalar wick3(const SymTensor<Scalar>& t, const Row& xi) {
  Scalar full(0), trace(0);
  for (Eigen::Index i = 0; i < t.d; ++i)
    for (Eigen::Index j = 0; j < t.d; ++j)
      for (Eigen::Index k = 0; k < t.d; ++k) full += t.at({i, j, k, 0}) * xi(i) * xi(j) * xi(k);
  for (Eigen::Index i = 0; i < t.d; ++i)
    for (Eigen::Index k = 0; k < t.d; ++k) trace += t.at({i, i, k, 0}) * xi(k);
  return full - Scalar(3) * trace;
}

// I_4(T) = sum T xi^4 - 6 sum T_iikl xi_k xi_l + 3 sum T_iikk.
template <typename Scalar, typename Row>
Scalar wick4(const SymTensor<Scalar>& t, const Row& xi) {
  Scalar full(0), single(0), twice(0);
  const Eigen::Index d = t.d;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) full += t.at({i, j, k, l}) * xi(i) * xi(j) * xi(k) * xi(l);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k) {
      for (Eigen::Index l = 0; l < d; ++l) single += t.at({i, i, k, l}) * xi(k) * xi(l);
      twice += t.at({i, i, k, k});
    }
  return full - Scalar(6) * single + Scalar(3) * twice;
}

template <typename Scalar, typename Row>
Scalar eval(const Kernel1<Scalar>& k, const Row& xi) {
  return k.coeffs().dot(xi.transpose());
}
template <typename Scalar, typename Row>
Scalar eval(const Kernel2<Scalar>& k, const Row& xi) {
  return (xi * k.matrix() * xi.transpose())(0, 0) - k.matrix().trace();
}

// Chaos expansion of I(f) I(g) evaluated at xi.
template <typename Scalar, typename Row>
Scalar expansion(const Kernel1<Scalar>& f, const Kernel1<Scalar>& g, const Row& xi) {
  const auto& a = f.coeffs();
  const auto& b = g.coeffs();
  // I_2(a (x) b symmetrised) + <a, b>.
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> s = (a * b.transpose() + b * a.transpose()) / Scalar(2);
  return eval(Kernel2<Scalar>(s), xi) + a.dot(b);
}
template <typename Scalar, typename Row>
Scalar expansion(const Kernel1<Scalar>& f, const Kernel2<Scalar>& g, const Row& xi, const SymTensor<Scalar>& t3) {
  // I_3(a (x) B symmetrised) + 2 I_1(B a).
  return wick3(t3, xi) + Scalar(2) * (g.matrix() * f.coeffs()).dot(xi.transpose());
}
template <typename Scalar, typename Row>
Scalar expansion(const Kernel2<Scalar>& f, const Kernel2<Scalar>& g, const Row& xi, const SymTensor<Scalar>& t4) {
  // I_4(A (x) B symmetrised) + 4 I_2(A (x)_1 B symmetrised) + 2 <A, B>.
  return wick4(t4, xi) + Scalar(4) * eval(Kernel2<Scalar>(contract1(f, g, true)), xi) + Scalar(2) * contract2(f, g);
}

}  // namespace detail

/// Largest pathwise |I(f) I(g) - expansion| over count Gaussian draws; dense
/// tensors of order up to 4 make this practical only for small frames.
template <typename Scalar>
Scalar product_formula_check(const ChaosElement<Scalar>& f, const ChaosElement<Scalar>& g, Eigen::Index count,
                             std::uint64_t seed, std::uint64_t stream = 0) {
  const Eigen::Index d = std::visit([](const auto& k) { return k.dim(); }, f);
  if (d != std::visit([](const auto& k) { return k.dim(); }, g))
    throw std::invalid_argument("product_formula_check: dimension mismatch");
  if (count < 1) throw std::invalid_argument("product_formula_check: count must be >= 1");
  // Order the pair so an order-1 element comes first.
  const bool swap = f.index() == 1 && g.index() == 0;
  const ChaosElement<Scalar>& lo = swap ? g : f;
  const ChaosElement<Scalar>& hi = swap ? f : g;

  detail::SymTensor<Scalar> tensor;
  if (lo.index() == 0 && hi.index() == 1)
    tensor = detail::symmetrized_product(std::get<0>(lo).coeffs(), std::get<1>(hi).matrix());
  else if (lo.index() == 1)
    tensor = detail::symmetrized_product(std::get<1>(lo).matrix(), std::get<1>(hi).matrix());

  Rng rng = make_stream(seed, stream);
  const auto xi = standard_normal_matrix<Scalar>(count, d, rng);
  Scalar worst(0);
  for (Eigen::Index r = 0; r < count; ++r) {
    const auto row = xi.row(r);
    const Scalar direct = std::visit([&](const auto& k) { return detail::eval(k, row); }, lo) *
                          std::visit([&](const auto& k) { return detail::eval(k, row); }, hi);
    Scalar expanded;
    if (lo.index() == 0 && hi.index() == 0)
      expanded = detail::expansion(std::get<0>(lo), std::get<0>(hi), row);
    else if (lo.index() == 0)
      expanded = detail::expansion(std::get<0>(lo), std::get<1>(hi), row, tensor);
    else
      expanded = detail::expansion(std::get<1>(lo), std::get<1>(hi), row, tensor);
    worst = std::max(worst, std::abs(direct - expanded));
  }
  return worst;
}

}  // namespace steingamma
