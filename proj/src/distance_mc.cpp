#include "steingamma/distance_mc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "steingamma/assignment.hpp"
#include "steingamma/random.hpp"

namespace steingamma {

namespace {

void check_pair(const SampleBatch& a, const SampleBatch& b, Eigen::Index dim) {
  if (a.dim() != dim || b.dim() != dim)
    throw std::invalid_argument("w1_empirical: expected dimension " + std::to_string(dim));
  if (a.count() != b.count()) throw std::invalid_argument("w1_empirical: sample counts differ");
}

double sorted_distance(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - y[i]);
  return sum / static_cast<double>(x.size());
}

}  // namespace

SampleBatch::SampleBatch(Eigen::MatrixXd s, std::uint64_t seed_) : samples(std::move(s)), seed(seed_) {
  if (samples.rows() < 2) throw std::invalid_argument("SampleBatch: need at least two samples");
  if (samples.cols() != 1 && samples.cols() != 2) throw std::invalid_argument("SampleBatch: dimension must be 1 or 2");
}

SampleBatch SampleBatch::from_vector(const Eigen::VectorXd& v, std::uint64_t seed) {
  return SampleBatch(Eigen::MatrixXd(v), seed);
}

double w1_empirical_1d(const SampleBatch& a, const SampleBatch& b) {
  check_pair(a, b, 1);
  const auto& x = a.samples;
  const auto& y = b.samples;
  return sorted_distance(std::vector<double>(x.data(), x.data() + x.size()),
                         std::vector<double>(y.data(), y.data() + y.size()));
}

double w1_empirical_2d(const SampleBatch& a, const SampleBatch& b, W1Method method, const SlicedOptions& opts) {
  check_pair(a, b, 2);
  const Eigen::Index n = a.count();
  if (method == W1Method::exact) {
    if (n > kExactMatchingCap)
      throw std::invalid_argument("w1_empirical_2d: exact matching is capped at " +
                                  std::to_string(kExactMatchingCap) + " points");
    Eigen::MatrixXd cost(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) cost(i, j) = (a.samples.row(i) - b.samples.row(j)).norm();
    return solve_assignment(cost).cost / static_cast<double>(n);
  }

  if (opts.directions < 1) throw std::invalid_argument("w1_empirical_2d: need at least one direction");
  const double pi = std::acos(-1.0);
  Rng rng = make_stream(opts.seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int k = 0; k < opts.directions; ++k) {
    const double theta = pi * (k + jitter(rng)) / opts.directions;
    const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
    Eigen::Map<Eigen::VectorXd>(x.data(), n) = a.samples * u;
    Eigen::Map<Eigen::VectorXd>(y.data(), n) = b.samples * u;
    total += sorted_distance(x, y);
  }
  return 0.5 * pi * total / opts.directions;
}

}  // namespace steingamma
