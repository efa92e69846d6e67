#pragma once

#include "rebasin/mlp.hpp"
#include "rebasin/plan.hpp"

namespace rebasin {

// One evaluation of a differentiable alignment cost. plan_grads[i] is the
// gradient with respect to the i-th soft plan parameter matrix; delta_grad is
// filled only by the continual cost.
struct CostEval {
    double value = 0.0;
    std::vector<Matrix> plan_grads;
    Matrix delta_grad;
};

// ||theta_a - pi_P(theta_b)||^2 with the soft (Sinkhorn) re-basing of b.
CostEval eval_c_l2(const std::vector<Matrix>& plan_params, const Mlp& a, const Mlp& b,
                   const SinkhornConfig& sk, bool want_grad = true);

// Task cost of (1-lambda) a + lambda pi_P(b) on a batch; lambda = 0.5 is the
// midpoint cost.
CostEval eval_c_interp(const std::vector<Matrix>& plan_params, const Mlp& a, const Mlp& b,
                       const Dataset& batch, LossKind loss, double lambda,
                       const SinkhornConfig& sk, bool want_grad = true);

// Task cost of (theta + pi_P(theta))/2 + delta on a batch. The squared-norm
// penalty on delta is applied as optimizer weight decay, not here.
CostEval eval_c_cl(const std::vector<Matrix>& plan_params, const Matrix& delta, const Mlp& theta,
                   const Dataset& batch, LossKind loss, const SinkhornConfig& sk,
                   bool want_grad = true);

// Scalar-only conveniences.
double c_l2(const TransportPlan& plan, const Mlp& a, const Mlp& b, const SinkhornConfig& sk);
double c_mid(const TransportPlan& plan, const Mlp& a, const Mlp& b, const Dataset& batch,
             LossKind loss, const SinkhornConfig& sk);
double c_rnd(const TransportPlan& plan, const Mlp& a, const Mlp& b, const Dataset& batch,
             LossKind loss, double lambda, const SinkhornConfig& sk);
double c_cl(const Matrix& delta, const TransportPlan& plan, const Mlp& theta,
            const Dataset& batch, LossKind loss, const SinkhornConfig& sk);

}  // namespace rebasin
