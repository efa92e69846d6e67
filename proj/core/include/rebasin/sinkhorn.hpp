#pragma once

#include <vector>

#include "rebasin/matrix.hpp"

namespace rebasin {

enum class GradMode { unrolled, implicit };

struct SinkhornConfig {
    double tau = 1.0;
    int iters = 20;
    GradMode grad_mode = GradMode::unrolled;
    bool log_domain = true;
};

// Intermediates of one forward pass, enough to replay the chain rule in
// reverse through every iteration.
struct SinkhornTrace {
    struct Step {
        Matrix row_normed;  // iterate after row normalization
        Matrix col_normed;  // iterate after the following column normalization
    };
    std::vector<Step> steps;
    Matrix output;  // == steps.back().col_normed
};

// S_tau^(t)(X): exp(X/tau) followed by t rounds of row normalization then
// column normalization. Column sums of the result are 1 up to roundoff.
Matrix sinkhorn(const Matrix& x, const SinkhornConfig& cfg, SinkhornTrace* trace = nullptr);

// Gradient of <upstream, sinkhorn(X)> with respect to X. Unrolled mode
// differentiates the t-step iterate exactly; implicit mode differentiates the
// fixed point and requires the forward marginal residual to be below
// `implicit_residual_gate` (throws NonConvergenceError otherwise).
Matrix sinkhorn_vjp(const Matrix& x, const SinkhornConfig& cfg, const Matrix& upstream);

// Same, reusing an existing forward trace (unrolled) or output (implicit).
Matrix sinkhorn_vjp_from_trace(const SinkhornTrace& trace, const SinkhornConfig& cfg,
                               const Matrix& upstream);

inline constexpr double implicit_residual_gate = 1e-8;

// Max deviation of row sums from 1 (columns are exact by construction).
double marginal_residual(const Matrix& p);

// h(P) = -sum P log P with 0 log 0 = 0. Diagnostic only.
double entropy(const Matrix& p);

}  // namespace rebasin
