#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "steingamma/assignment.hpp"
#include "steingamma/distance_mc.hpp"
#include "steingamma/experiments.hpp"
#include "steingamma/random.hpp"

using namespace steingamma;

namespace {

double brute_force_assignment(const Eigen::MatrixXd& c) {
  std::vector<int> perm(c.rows());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < c.rows(); ++i) s += c(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// O(n^3) Hungarian method with potentials, an independent reference solver.
double hungarian(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1), v(n + 1), minv(n + 1);
  std::vector<int> p(n + 1), way(n + 1);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j)
        if (!used[j]) {
          const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) minv[j] = cur, way[j] = j0;
          if (minv[j] < delta) delta = minv[j], j1 = j;
        }
      for (int j = 0; j <= n; ++j)
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  double cost = 0.0;
  for (int j = 1; j <= n; ++j) cost += a(p[j] - 1, j - 1);
  return cost;
}

Eigen::MatrixXd euclidean_cost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd c(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) c(i, j) = (a.row(i) - b.row(j)).norm();
  return c;
}

SampleBatch gaussian_cloud(Eigen::Index n, Eigen::Index dim, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  return SampleBatch(standard_normal_matrix(n, dim, rng), seed);
}

}  // namespace

TEST(Assignment, SmallKnownProblem) {
  Eigen::MatrixXd c(3, 3);
  c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const auto a = solve_assignment(c);
  EXPECT_DOUBLE_EQ(a.cost, 5.0);
  EXPECT_EQ(a.row_to_col, (std::vector<int>{1, 0, 2}));
}

TEST(Assignment, MatchesBruteForceOnRandomMatrices) {
  Rng rng = make_stream(2024, 0);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 7;
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = trial % 3 == 0 ? std::floor(u(rng)) : u(rng);  // ties on integer costs
    const auto a = solve_assignment(c);
    EXPECT_NEAR(a.cost, brute_force_assignment(c), 1e-9) << trial;
    std::vector<int> cols = a.row_to_col;
    std::sort(cols.begin(), cols.end());
    for (int j = 0; j < n; ++j) EXPECT_EQ(cols[j], j);
  }
}

TEST(Assignment, MatchesHungarianOnLargerEuclideanProblems) {
  Rng rng = make_stream(77, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 8 + 7 * trial;
    const Eigen::MatrixXd a = standard_normal_matrix(n, 2, rng), b = standard_normal_matrix(n, 2, rng);
    Eigen::MatrixXd c = euclidean_cost(a, b);
    if (trial % 2) c = (3.0 * c).array().floor();  // many ties
    EXPECT_NEAR(solve_assignment(c).cost, hungarian(c), 1e-9 * n) << n;
  }
}

TEST(Assignment, RejectsNonSquareOrNonFinite) {
  EXPECT_THROW(solve_assignment(Eigen::MatrixXd(2, 3)), std::invalid_argument);
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(2, 2);
  c(0, 1) = std::nan("");
  EXPECT_THROW(solve_assignment(c), std::invalid_argument);
}

TEST(Wasserstein1D, ReferenceValues) {
  const auto a = SampleBatch::from_vector(Eigen::Vector3d(1, 2, 3));
  const auto b = SampleBatch::from_vector(Eigen::Vector3d(5, 3, 2));
  EXPECT_DOUBLE_EQ(w1_empirical_1d(a, b), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(w1_empirical_1d(a, a), 0.0);
  const auto shifted = SampleBatch::from_vector(Eigen::Vector3d(1, 2, 3).array() - 0.75);
  EXPECT_DOUBLE_EQ(w1_empirical_1d(a, shifted), 0.75);
  EXPECT_THROW(w1_empirical_1d(a, SampleBatch::from_vector(Eigen::Vector4d(1, 2, 3, 4))), std::invalid_argument);
}

TEST(Wasserstein2D, ThreePointMatching) {
  Eigen::MatrixXd a(3, 2), b(3, 2);
  a << 0, 0, 1, 0, 0, 1;
  b << 1, 1, 2, 0, 0, 2;
  const double brute = brute_force_assignment(euclidean_cost(a, b)) / 3.0;
  EXPECT_NEAR(brute, (std::sqrt(2.0) + 2.0) / 3.0, 1e-15);
  EXPECT_NEAR(w1_empirical_2d(SampleBatch(a), SampleBatch(b)), brute, 1e-12);
  EXPECT_EQ(w1_empirical_2d(SampleBatch(a), SampleBatch(a)), 0.0);
}

TEST(Wasserstein2D, SlicedIsExactForTranslations) {
  const auto a = gaussian_cloud(50, 2, 1);
  Eigen::MatrixXd shifted = a.samples;
  shifted.col(0).array() += 0.6;
  shifted.col(1).array() -= 0.8;
  EXPECT_NEAR(w1_empirical_2d(a, SampleBatch(shifted)), 1.0, 1e-9);
  // Exact for translations up to the quadrature error of 64 stratified directions.
  EXPECT_NEAR(w1_empirical_2d(a, SampleBatch(shifted), W1Method::sliced), 1.0, 1e-3);
}

// Unit-mean-shift clouds: the distance is signal, not sampling noise.
TEST(Wasserstein2D, SlicedAgreesWithExactOnShiftedGaussianClouds) {
  for (std::uint64_t s = 10; s < 40; s += 2) {
    const auto a = gaussian_cloud(64, 2, s);
    Eigen::MatrixXd shifted = gaussian_cloud(64, 2, s + 1).samples;
    shifted.col(0).array() += 1.0;
    const SampleBatch b(shifted);
    const double exact = w1_empirical_2d(a, b), sliced = w1_empirical_2d(a, b, W1Method::sliced);
    EXPECT_LT(std::abs(sliced / exact - 1.0), 0.2) << exact << " " << sliced;
  }
}

// Every projection is 1-Lipschitz, so the plain projection average never exceeds the exact value.
TEST(Wasserstein2D, ProjectionAverageIsALowerBound) {
  for (std::uint64_t s = 50; s < 60; s += 2) {
    const auto a = gaussian_cloud(64, 2, s), b = gaussian_cloud(64, 2, s + 1);
    const double kPi = std::acos(-1.0);
    EXPECT_LE(w1_empirical_2d(a, b, W1Method::sliced) * 2.0 / kPi, w1_empirical_2d(a, b) + 1e-12);
  }
}

TEST(Wasserstein2D, RejectsOversizedOrMismatchedClouds) {
  EXPECT_THROW(w1_empirical_2d(gaussian_cloud(kExactMatchingCap + 1, 2, 1), gaussian_cloud(kExactMatchingCap + 1, 2, 2)),
               std::invalid_argument);
  EXPECT_THROW(w1_empirical_2d(gaussian_cloud(5, 2, 1), gaussian_cloud(6, 2, 2)), std::invalid_argument);
  EXPECT_THROW(SampleBatch(Eigen::MatrixXd(1, 2)), std::invalid_argument);
  EXPECT_THROW(SampleBatch(Eigen::MatrixXd(4, 3)), std::invalid_argument);
}

TEST(WassersteinProperty, SymmetryAndTriangleInequality) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto a = gaussian_cloud(40, 2, 3 * t), b = gaussian_cloud(40, 2, 3 * t + 1), c = gaussian_cloud(40, 2, 3 * t + 2);
    const double ab = w1_empirical_2d(a, b), ba = w1_empirical_2d(b, a);
    const double bc = w1_empirical_2d(b, c), ac = w1_empirical_2d(a, c);
    EXPECT_NEAR(ab, ba, 1e-9);
    EXPECT_LE(ac, ab + bc + 1e-9);
  }
}

TEST(WassersteinProperty, SelfDistanceDecaysLikeInverseRootN) {
  std::vector<double> ns, dist;
  for (int n : {100, 400, 1600, 6400, 25600}) {
    double mean = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r)
      mean += w1_empirical_1d(gaussian_cloud(n, 1, 1000 + 2 * r), gaussian_cloud(n, 1, 1001 + 2 * r)) / reps;
    ns.push_back(n);
    dist.push_back(mean);
  }
  EXPECT_NEAR(fit_rate(ns, dist).slope, -0.5, 0.15);
}
