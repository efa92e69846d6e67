#include "rebasin/hungarian.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace rebasin {

namespace {

struct LapResult {
    std::vector<std::size_t> rowsol;  // row -> col
    double total = 0.0;
    std::vector<double> u, v;  // optimal duals, u_i + v_j <= c_ij
};

// Shortest augmenting path LAP (minimization) with potentials. Ties in the
// path search resolve toward the lowest column index, so the output is
// deterministic.
LapResult lap_min(std::size_t n, const std::function<double(std::size_t, std::size_t)>& cost) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);  // p[j]: row matched to col j (1-based)
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
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
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    LapResult res;
    res.rowsol.assign(n, 0);
    res.u.assign(n, 0.0);
    res.v.assign(n, 0.0);
    for (std::size_t j = 1; j <= n; ++j) res.rowsol[p[j] - 1] = j - 1;
    for (std::size_t i = 1; i <= n; ++i) res.u[i - 1] = u[i];
    for (std::size_t j = 1; j <= n; ++j) res.v[j - 1] = v[j];
    for (std::size_t i = 0; i < n; ++i) res.total += cost(i, res.rowsol[i]);
    return res;
}

}  // namespace

std::vector<std::size_t> hungarian(const Matrix& m, Objective objective) {
    if (m.rows() != m.cols()) throw DimensionError("hungarian: matrix must be square");
    if (!all_finite(m)) throw InvalidInputError("hungarian: entries must be finite");
    const std::size_t n = m.rows();
    const double sign = (objective == Objective::minimize) ? 1.0 : -1.0;
    auto cost = [&](std::size_t i, std::size_t j) { return sign * m(i, j); };

    LapResult full = lap_min(n, cost);
    const double scale = 1.0 + max_abs(m);
    const double arc_tol = 1e-9 * scale;
    const double total_tol = 1e-9 * scale * static_cast<double>(n);

    // Lexicographic refinement. An arc can belong to an optimal assignment
    // only if its reduced cost is zero, so almost all candidate columns are
    // rejected without a solve; the rest are settled by solving the reduced
    // problem and comparing against the optimal total.
    std::vector<char> col_used(n, 0);
    std::vector<std::size_t> result(n);
    std::vector<std::size_t> cur = full.rowsol;  // optimal completion for rows >= i
    double fixed_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t chosen = cur[i];
        for (std::size_t j = 0; j < chosen; ++j) {
            if (col_used[j]) continue;
            if (cost(i, j) - full.u[i] - full.v[j] > arc_tol) continue;
            // Candidate: solve the remainder with (i, j) forced.
            std::vector<std::size_t> rows, cols;
            for (std::size_t r = i + 1; r < n; ++r) rows.push_back(r);
            for (std::size_t c = 0; c < n; ++c)
                if (!col_used[c] && c != j) cols.push_back(c);
            double trial_total = fixed_cost + cost(i, j);
            std::vector<std::size_t> completion;
            if (!rows.empty()) {
                LapResult sub = lap_min(rows.size(), [&](std::size_t a, std::size_t b) {
                    return cost(rows[a], cols[b]);
                });
                trial_total += sub.total;
                completion.assign(n, 0);
                for (std::size_t a = 0; a < rows.size(); ++a)
                    completion[rows[a]] = cols[sub.rowsol[a]];
            }
            if (trial_total <= full.total + total_tol) {
                chosen = j;
                for (std::size_t r = i + 1; r < n; ++r) cur[r] = completion[r];
                break;
            }
        }
        result[i] = chosen;
        col_used[chosen] = 1;
        fixed_cost += cost(i, chosen);
    }
    return result;
}

Matrix permutation_matrix(const std::vector<std::size_t>& assignment) {
    const std::size_t n = assignment.size();
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) p(i, assignment[i]) = 1.0;
    return p;
}

Matrix round_plan(const Matrix& soft) {
    return permutation_matrix(hungarian(soft, Objective::maximize));
}

}  // namespace rebasin
