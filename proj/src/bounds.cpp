#include "steingamma/bounds.hpp"

#include <map>
#include <mutex>

#include "steingamma/gamma_law.hpp"
#include "steingamma/stein_solver.hpp"

namespace steingamma {

double BoundReport::assemble() const {
  double roots = std::sqrt(discrepancy);
  for (double c : cross_terms) roots += std::sqrt(c);
  return constant * roots + marginal_d2;
}

void to_json(nlohmann::json& j, const BoundReport& r) {
  j = nlohmann::json{{"discrepancy", r.discrepancy},
                     {"cross_terms", r.cross_terms},
                     {"marginal_d2", r.marginal_d2},
                     {"constant", r.constant},
                     {"total", r.total}};
}

void from_json(const nlohmann::json& j, BoundReport& r) {
  j.at("discrepancy").get_to(r.discrepancy);
  j.at("cross_terms").get_to(r.cross_terms);
  j.at("marginal_d2").get_to(r.marginal_d2);
  j.at("constant").get_to(r.constant);
  j.at("total").get_to(r.total);
}

double cached_uniform_constant(double nu) {
  static std::mutex mutex;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(nu); it != cache.end()) return it->second;
  }
  // Computed outside the lock; a racing duplicate computes the same value.
  const double c = uniform_constant(GammaNu(nu));
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(nu, c).first->second;
}

double smoothing_In(int n) {
  if (n < 1) throw std::invalid_argument("smoothing_In: n must be >= 1");
  return std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (n + 1)) - std::lgamma(0.5 * n));
}

double dw_from_d2(int n, double d2_value) {
  if (!(d2_value >= 0.0)) throw std::invalid_argument("dw_from_d2: d2 must be nonnegative");
  const double root_pi = std::sqrt(std::acos(-1.0));
  return std::sqrt(32.0 * smoothing_In(n) / root_pi) * std::sqrt(d2_value);
}

}  // namespace steingamma
