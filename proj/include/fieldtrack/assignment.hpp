#pragma once

#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace fieldtrack {

/// Cost-matrix entry marking a pair that must never be matched.
inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

struct Assignment {
    std::vector<std::pair<int, int>> matches;  // (row, col), ascending row
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
};

/// Rectangular Hungarian (Kuhn-Munkres with potentials). Among matchings that use only
/// feasible pairs, returns one with the most pairs and, among those, the least total cost.
/// Entries must be finite or kInfeasible; NaN is rejected with UsageError.
Assignment hungarian_assign(const Eigen::MatrixXd& cost);

/// Sum of the matched entries, in ascending row order.
double assignment_cost(const Eigen::MatrixXd& cost, const Assignment& assignment);

}  // namespace fieldtrack
