#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "rebasin/matrix.hpp"
#include "rebasin/rng.hpp"

namespace rebasin::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(lo, hi);
    return m;
}

// Largest relative error (with absolute floor) between an analytic gradient
// and central finite differences of `f` at `x`.
inline double max_fd_error(const Matrix& grad, Matrix x,
                           const std::function<double(const Matrix&)>& f, double step = 1e-6,
                           double abs_floor = 1e-8) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + step;
        const double up = f(x);
        x[i] = saved - step;
        const double down = f(x);
        x[i] = saved;
        const double fd = (up - down) / (2.0 * step);
        const double denom = std::max({std::fabs(fd), std::fabs(grad[i]), abs_floor});
        const double err = std::fabs(grad[i] - fd);
        if (err > abs_floor) worst = std::max(worst, err / denom);
    }
    return worst;
}

// Exhaustive LAP over all n! permutations; tracks the best total and, among
// optimal totals, the lexicographically smallest assignment.
inline double brute_force_lap(const Matrix& m, bool maximize,
                              std::vector<std::size_t>* best_assignment = nullptr) {
    const std::size_t n = m.rows();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    double best = maximize ? -1e300 : 1e300;
    std::vector<std::size_t> best_p;
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += m(i, perm[i]);
        const bool better = maximize ? total > best + 1e-12 : total < best - 1e-12;
        if (better) {
            best = total;
            best_p = perm;
        } else if (std::fabs(total - best) <= 1e-12 && perm < best_p) {
            best_p = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (best_assignment) *best_assignment = best_p;
    return best;
}

}  // namespace rebasin::testing
