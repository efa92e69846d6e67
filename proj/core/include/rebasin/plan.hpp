#pragma once

#include "rebasin/mlp.hpp"
#include "rebasin/sinkhorn.hpp"

namespace rebasin {

enum class PlanMode { soft_params, hard };

// One square matrix per hidden layer. Hard mode holds 0/1 permutation
// matrices; soft_params mode holds unconstrained parameters that pass through
// the Sinkhorn operator before use. The boundary P_0 = P_h = I is implicit.
struct TransportPlan {
    std::vector<Matrix> mats;
    PlanMode mode = PlanMode::hard;
};

TransportPlan identity_plan(const std::vector<std::size_t>& hidden_widths, PlanMode mode);

bool is_permutation_matrix(const Matrix& m);

void check_plan(const TransportPlan& plan, const Mlp& model);

// Hard: W'_i = P_i W_i P_{i-1}^T, b'_i = P_i b_i. Soft: the same with each
// parameter matrix passed through the Sinkhorn operator first.
Mlp apply_plan(const Mlp& model, const TransportPlan& plan,
               const SinkhornConfig& sk = SinkhornConfig{});

// Transposed matrices; valid for hard plans only.
TransportPlan inverse(const TransportPlan& hard);

// Hard projection of a soft-parameter plan: Sinkhorn then exact rounding.
TransportPlan round_plan(const TransportPlan& soft, const SinkhornConfig& sk);

// Entrywise (1-lambda) a + lambda b over all weights and biases.
Mlp interpolate(const Mlp& a, const Mlp& b, double lambda);

}  // namespace rebasin
