#include "steingamma/assignment.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace steingamma {

namespace {

constexpr double kLarge = std::numeric_limits<double>::max();

class Lapjv {
 public:
  explicit Lapjv(const Eigen::MatrixXd& cost)
      : c_(cost), n_(static_cast<int>(cost.rows())), x_(n_, -1), y_(n_, -1), v_(n_, 0.0), free_(n_) {}

  std::vector<int> run() {
    int n_free = column_reduction();
    for (int round = 0; round < 2 && n_free > 0; ++round) n_free = augmenting_row_reduction(n_free);
    if (n_free > 0) augment(n_free);
    return x_;
  }

 private:
  // Column minima give the initial duals; rows that win a unique column keep it
  // and transfer the reduction to that column.
  int column_reduction() {
    for (int j = 0; j < n_; ++j) {
      v_[j] = kLarge;
      y_[j] = 0;
    }
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (c_(i, j) < v_[j]) {
          v_[j] = c_(i, j);
          y_[j] = i;
        }
    std::vector<char> unique(n_, 1);
    for (int j = n_ - 1; j >= 0; --j) {
      const int i = y_[j];
      if (x_[i] < 0) {
        x_[i] = j;
      } else {
        unique[i] = 0;
        y_[j] = -1;
      }
    }
    int n_free = 0;
    for (int i = 0; i < n_; ++i) {
      if (x_[i] < 0) {
        free_[n_free++] = i;
      } else if (unique[i]) {
        const int j = x_[i];
        double min = kLarge;
        for (int j2 = 0; j2 < n_; ++j2)
          if (j2 != j) min = std::min(min, c_(i, j2) - v_[j2]);
        v_[j] -= min;
      }
    }
    return n_free;
  }

  int augmenting_row_reduction(int n_free) {
    int current = 0, new_free = 0;
    long long rounds = 0;
    while (current < n_free) {
      ++rounds;
      const int free_i = free_[current++];
      int j1 = 0, j2 = -1;
      double v1 = c_(free_i, 0) - v_[0], v2 = kLarge;
      for (int j = 1; j < n_; ++j) {
        const double r = c_(free_i, j) - v_[j];
        if (r < v2) {
          if (r >= v1) {
            v2 = r;
            j2 = j;
          } else {
            v2 = v1;
            v1 = r;
            j2 = j1;
            j1 = j;
          }
        }
      }
      int i0 = y_[j1];
      const double v1_new = v_[j1] - (v2 - v1);
      const bool lowers = v1_new < v_[j1];
      // Near-tied real costs let a row bounce between two columns with tiny dual
      // decrements; past a budget of 4n visits the shortest-path phase is cheaper.
      if (rounds < std::min<long long>(static_cast<long long>(current) * n_, 4LL * n_)) {
        if (lowers) {
          v_[j1] = v1_new;
        } else if (i0 >= 0 && j2 >= 0) {
          j1 = j2;
          i0 = y_[j2];
        }
        if (i0 >= 0) {
          if (lowers)
            free_[--current] = i0;
          else
            free_[new_free++] = i0;
        }
      } else if (i0 >= 0) {
        free_[new_free++] = i0;
      }
      x_[free_i] = j1;
      y_[j1] = free_i;
    }
    return new_free;
  }

  // Move every column of minimal reduced distance to the front of the todo block.
  int find(int lo, std::vector<double>& d, std::vector<int>& cols) const {
    int hi = lo + 1;
    double mind = d[cols[lo]];
    for (int k = hi; k < n_; ++k) {
      const int j = cols[k];
      if (d[j] <= mind) {
        if (d[j] < mind) {
          hi = lo;
          mind = d[j];
        }
        cols[k] = cols[hi];
        cols[hi++] = j;
      }
    }
    return hi;
  }

  int scan(int& lo, int& hi, std::vector<double>& d, std::vector<int>& cols, std::vector<int>& pred) const {
    while (lo != hi) {
      int j = cols[lo++];
      const int i = y_[j];
      const double mind = d[j];
      const double h = c_(i, j) - v_[j] - mind;
      for (int k = hi; k < n_; ++k) {
        j = cols[k];
        const double red = c_(i, j) - v_[j] - h;
        if (red < d[j]) {
          d[j] = red;
          pred[j] = i;
          if (red == mind) {
            if (y_[j] < 0) return j;
            cols[k] = cols[hi];
            cols[hi++] = j;
          }
        }
      }
    }
    return -1;
  }

  // Dijkstra-like search for the shortest augmenting path from start_i.
  int find_path(int start_i, std::vector<int>& pred) {
    std::vector<int> cols(n_);
    std::vector<double> d(n_);
    for (int j = 0; j < n_; ++j) {
      cols[j] = j;
      pred[j] = start_i;
      d[j] = c_(start_i, j) - v_[j];
    }
    int lo = 0, hi = 0, n_ready = 0, final_j = -1;
    double mind = 0.0;
    while (final_j < 0) {
      if (lo == hi) {
        n_ready = lo;
        hi = find(lo, d, cols);
        // Read the block minimum now: once scan empties the block, cols[lo] is a todo column.
        mind = d[cols[lo]];
        for (int k = lo; k < hi; ++k)
          if (y_[cols[k]] < 0) final_j = cols[k];
      }
      if (final_j < 0) final_j = scan(lo, hi, d, cols, pred);
    }
    for (int k = 0; k < n_ready; ++k) v_[cols[k]] += d[cols[k]] - mind;
    return final_j;
  }

  void augment(int n_free) {
    std::vector<int> pred(n_);
    for (int f = 0; f < n_free; ++f) {
      const int start = free_[f];
      int j = find_path(start, pred);
      int i = -1;
      while (i != start) {
        i = pred[j];
        y_[j] = i;
        std::swap(j, x_[i]);
      }
    }
  }

  // Row-major copy: every inner loop walks a row.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c_;
  int n_;
  std::vector<int> x_, y_;
  std::vector<double> v_;
  std::vector<int> free_;
};

}  // namespace

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("solve_assignment: cost matrix must be square");
  if (!cost.allFinite()) throw std::invalid_argument("solve_assignment: costs must be finite");
  Assignment out;
  if (cost.rows() == 0) return out;
  if (cost.rows() == 1) {
    out.row_to_col = {0};
    out.cost = cost(0, 0);
    return out;
  }
  out.row_to_col = Lapjv(cost).run();
  for (int i = 0; i < static_cast<int>(out.row_to_col.size()); ++i) out.cost += cost(i, out.row_to_col[i]);
  return out;
}

}  // namespace steingamma
