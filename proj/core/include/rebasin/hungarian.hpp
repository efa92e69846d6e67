#pragma once

#include <cstddef>
#include <vector>

#include "rebasin/matrix.hpp"

namespace rebasin {

enum class Objective { maximize, minimize };

// Exact linear assignment: returns a(i) = column assigned to row i, optimizing
// the summed objective. Among optimal assignments the result is the
// lexicographically smallest by row order (ties broken toward the lowest
// column index).
std::vector<std::size_t> hungarian(const Matrix& m, Objective objective);

// Hard projection of a soft plan: hungarian(soft, maximize) as a 0/1 matrix.
Matrix round_plan(const Matrix& soft);

// Permutation list -> 0/1 matrix with P(i, a(i)) = 1.
Matrix permutation_matrix(const std::vector<std::size_t>& assignment);

}  // namespace rebasin
