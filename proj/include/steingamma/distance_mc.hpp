#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace steingamma {

/// count x dim sample cloud (dim 1 or 2) and the seed that produced it.
struct SampleBatch {
  Eigen::MatrixXd samples;
  std::uint64_t seed = 0;

  SampleBatch() = default;
  SampleBatch(Eigen::MatrixXd s, std::uint64_t seed_ = 0);
  static SampleBatch from_vector(const Eigen::VectorXd& v, std::uint64_t seed = 0);

  Eigen::Index count() const noexcept { return samples.rows(); }
  Eigen::Index dim() const noexcept { return samples.cols(); }
};

/// Mean absolute difference of the sorted samples: the exact W1 between two
/// equal-size empirical measures on the line.
double w1_empirical_1d(const SampleBatch& a, const SampleBatch& b);

enum class W1Method { exact, sliced };

struct SlicedOptions {
  int directions = 64;
  std::uint64_t seed = 0x51ced;
};

/// Largest cloud accepted by the exact method.
inline constexpr Eigen::Index kExactMatchingCap = 2000;

/// exact: optimal matching under Euclidean cost, divided by count.
/// sliced: (pi/2) times the mean 1D distance over stratified random directions
/// in the half circle; the factor makes it exact for translations.
double w1_empirical_2d(const SampleBatch& a, const SampleBatch& b, W1Method method = W1Method::exact,
                       const SlicedOptions& opts = {});

}  // namespace steingamma
