#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "steingamma/chaos.hpp"

namespace steingamma {

/// Computable right-hand side of the joint d2 estimate for a second-chaos X
/// against components Y_j. Every term is nonnegative.
struct BoundReport {
  double discrepancy = 0.0;         ///< E[(2(X+nu) - <D(-L)^{-1}X, DX>)^2]
  std::vector<double> cross_terms;  ///< E[<D(-L)^{-1}X, DY_j>^2]
  double marginal_d2 = 0.0;         ///< caller-supplied d2 term for the Y marginal
  double constant = 1.0;            ///< C multiplying the square roots
  double total = 0.0;               ///< C (sqrt(discrepancy) + sum_j sqrt(cross_j)) + marginal_d2

  /// Recompute total from the parts.
  double assemble() const;
};

void to_json(nlohmann::json& j, const BoundReport& r);
void from_json(const nlohmann::json& j, BoundReport& r);

/// Build the report with an explicit constant.
template <typename Scalar>
BoundReport d2_bound_chaos(const Kernel2<Scalar>& x, const ChaosVector<Scalar>& ys, double nu, double marginal_d2,
                           double constant) {
  if (ys.dim() != x.dim()) throw std::invalid_argument("d2_bound_chaos: X and Y live in different frames");
  if (!(marginal_d2 >= 0.0)) throw std::invalid_argument("d2_bound_chaos: marginal term must be nonnegative");
  if (!(constant > 0.0)) throw std::invalid_argument("d2_bound_chaos: constant must be positive");
  BoundReport r;
  r.discrepancy = static_cast<double>(gamma_discrepancy(x, static_cast<Scalar>(nu)));
  for (const auto& y : ys) r.cross_terms.push_back(static_cast<double>(cross_malliavin(x, y)));
  r.marginal_d2 = marginal_d2;
  r.constant = constant;
  r.total = r.assemble();
  return r;
}

/// Same, with C = uniform_constant(nu) (cached per nu).
double cached_uniform_constant(double nu);

template <typename Scalar>
BoundReport d2_bound_chaos(const Kernel2<Scalar>& x, const ChaosVector<Scalar>& ys, double nu, double marginal_d2) {
  return d2_bound_chaos(x, ys, nu, marginal_d2, cached_uniform_constant(nu));
}

/// E|N| for N standard Gaussian in R^n: sqrt(2) Gamma((n+1)/2) / Gamma(n/2).
double smoothing_In(int n);

/// Wasserstein bound from a d2 bound in dimension n: sqrt(32 I_n / sqrt(pi)) sqrt(d2).
double dw_from_d2(int n, double d2_value);

}  // namespace steingamma
