#pragma once

#include <vector>

#include <Eigen/Dense>

namespace steingamma {

struct Assignment {
  std::vector<int> row_to_col;
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a dense square cost matrix (Jonker-Volgenant:
/// column reduction, two rounds of augmenting row reduction, then shortest
/// augmenting paths).
Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace steingamma
