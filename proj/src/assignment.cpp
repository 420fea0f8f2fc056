#include "fieldtrack/assignment.hpp"

#include <algorithm>
#include <cmath>

#include "fieldtrack/error.hpp"

namespace fieldtrack {

namespace {

// Minimum-cost perfect matching of every row of `a` (n <= m), e-maxx formulation.
std::vector<int> solve_rows(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace

Assignment hungarian_assign(const Eigen::MatrixXd& cost) {
    Assignment out;
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (rows == 0 || cols == 0) {
        for (int i = 0; i < rows; ++i) out.unmatched_rows.push_back(i);
        for (int j = 0; j < cols; ++j) out.unmatched_cols.push_back(j);
        return out;
    }

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const double c = cost(i, j);
            if (std::isnan(c) || c == -std::numeric_limits<double>::infinity())
                throw UsageError("hungarian_assign: cost entries must be finite or kInfeasible");
            if (c == kInfeasible) continue;
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
    }

    std::vector<int> row_to_col(rows, -1);
    if (lo <= hi) {
        // Shift feasible costs to [0, range] and price sentinels above any trade of one
        // feasible pair for another, so cardinality is maximized before cost.
        const bool transpose = rows > cols;
        const int n = transpose ? cols : rows;
        const double range = hi - lo;
        const double big = (range + 1.0) * (n + 1);
        Eigen::MatrixXd a(n, transpose ? rows : cols);
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) {
                const double c = transpose ? cost(j, i) : cost(i, j);
                a(i, j) = c == kInfeasible ? big : c - lo;
            }
        const auto sol = solve_rows(a);
        for (int i = 0; i < n; ++i) {
            const int r = transpose ? sol[i] : i;
            const int c = transpose ? i : sol[i];
            if (r >= 0 && c >= 0 && cost(r, c) != kInfeasible) row_to_col[r] = c;
        }
    }

    std::vector<char> col_used(cols, 0);
    for (int i = 0; i < rows; ++i) {
        if (row_to_col[i] >= 0) {
            out.matches.emplace_back(i, row_to_col[i]);
            col_used[row_to_col[i]] = 1;
        } else {
            out.unmatched_rows.push_back(i);
        }
    }
    for (int j = 0; j < cols; ++j)
        if (!col_used[j]) out.unmatched_cols.push_back(j);
    return out;
}

double assignment_cost(const Eigen::MatrixXd& cost, const Assignment& assignment) {
    double total = 0;
    for (const auto& [r, c] : assignment.matches) total += cost(r, c);
    return total;
}

}  // namespace fieldtrack
