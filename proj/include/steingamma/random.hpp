#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace steingamma {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream). Streams with different ids never
/// share a state sequence prefix in practice because the seed_seq mixes both.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> standard_normal_matrix(Eigen::Index rows,
                                                                            Eigen::Index cols,
                                                                            Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = static_cast<Scalar>(normal(rng));
  return out;
}

}  // namespace steingamma
