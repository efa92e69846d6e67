#include "rebasin/costs.hpp"

namespace rebasin {

namespace {

struct SoftRebasinGraph {
    std::vector<Tape::NodeId> param_leaves;
    // per layer: (weight node, bias node) of the soft re-based model of b
    std::vector<std::pair<Tape::NodeId, Tape::NodeId>> layers;
};

void check_pair(const std::vector<Matrix>& plan_params, const Mlp& a, const Mlp& b) {
    if (!a.same_architecture(b)) throw DimensionError("alignment cost: architecture mismatch");
    const auto widths = b.hidden_widths();
    if (plan_params.size() != widths.size())
        throw DimensionError("alignment cost: plan size != hidden layer count");
    for (std::size_t i = 0; i < widths.size(); ++i)
        if (plan_params[i].rows() != widths[i] || plan_params[i].cols() != widths[i])
            throw DimensionError("alignment cost: plan matrix width mismatch");
}

// Records S_i = sinkhorn(X_i) and the re-based layers of b on the tape.
SoftRebasinGraph record_soft_rebasin(Tape& tape, const std::vector<Matrix>& plan_params,
                                     const Mlp& b, const SinkhornConfig& sk) {
    SoftRebasinGraph g;
    std::vector<Tape::NodeId> soft;
    for (const Matrix& x : plan_params) {
        g.param_leaves.push_back(tape.leaf(x));
        soft.push_back(tape.sinkhorn_op(g.param_leaves.back(), sk));
    }
    const std::size_t h = b.layers.size();
    for (std::size_t i = 0; i < h; ++i) {
        Tape::NodeId w = tape.constant(b.layers[i].weight);
        Tape::NodeId bias = tape.constant(b.layers[i].bias);
        if (i < soft.size()) {
            w = tape.matmul(soft[i], w);
            bias = tape.matmul(soft[i], bias);
        }
        if (i > 0) w = tape.matmul_nt(w, soft[i - 1]);
        g.layers.emplace_back(w, bias);
    }
    return g;
}

CostEval finish(Tape& tape, Tape::NodeId total, const SoftRebasinGraph& g, bool want_grad,
                Tape::NodeId delta_leaf = static_cast<Tape::NodeId>(-1)) {
    CostEval ev;
    ev.value = tape.value(total)(0, 0);
    if (want_grad) {
        tape.backward(total);
        for (Tape::NodeId leaf : g.param_leaves) ev.plan_grads.push_back(tape.grad(leaf));
        if (delta_leaf != static_cast<Tape::NodeId>(-1)) ev.delta_grad = tape.grad(delta_leaf);
    }
    return ev;
}

}  // namespace

CostEval eval_c_l2(const std::vector<Matrix>& plan_params, const Mlp& a, const Mlp& b,
                   const SinkhornConfig& sk, bool want_grad) {
    check_pair(plan_params, a, b);
    Tape tape;
    SoftRebasinGraph g = record_soft_rebasin(tape, plan_params, b, sk);
    Tape::NodeId total = tape.constant(Matrix(1, 1, 0.0));
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        Tape::NodeId dw = tape.sub(tape.constant(a.layers[i].weight), g.layers[i].first);
        total = tape.add(total, tape.sum_squares_of(dw));
        Tape::NodeId db = tape.sub(tape.constant(a.layers[i].bias), g.layers[i].second);
        total = tape.add(total, tape.sum_squares_of(db));
    }
    return finish(tape, total, g, want_grad);
}

CostEval eval_c_interp(const std::vector<Matrix>& plan_params, const Mlp& a, const Mlp& b,
                       const Dataset& batch, LossKind loss, double lambda,
                       const SinkhornConfig& sk, bool want_grad) {
    if (lambda < 0.0 || lambda > 1.0)
        throw InvalidInputError("c_rnd: lambda must be in [0, 1]");
    check_pair(plan_params, a, b);
    check_loss_task(loss, batch.task);
    if (batch.size() == 0) throw InvalidInputError("alignment cost: empty batch");
    Tape tape;
    SoftRebasinGraph g = record_soft_rebasin(tape, plan_params, b, sk);
    std::vector<std::pair<Tape::NodeId, Tape::NodeId>> mixed;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        Tape::NodeId w = tape.lincomb(1.0 - lambda, tape.constant(a.layers[i].weight), lambda,
                                      g.layers[i].first);
        Tape::NodeId bias = tape.lincomb(1.0 - lambda, tape.constant(a.layers[i].bias), lambda,
                                         g.layers[i].second);
        mixed.emplace_back(w, bias);
    }
    Tape::NodeId out =
        forward_on_tape(tape, mixed, a.hidden_activation, tape.constant(batch.inputs));
    Tape::NodeId total = loss_on_tape(tape, out, batch.targets, loss);
    return finish(tape, total, g, want_grad);
}

CostEval eval_c_cl(const std::vector<Matrix>& plan_params, const Matrix& delta, const Mlp& theta,
                   const Dataset& batch, LossKind loss, const SinkhornConfig& sk,
                   bool want_grad) {
    check_pair(plan_params, theta, theta);
    check_loss_task(loss, batch.task);
    if (delta.cols() != 1 || delta.rows() != theta.param_count())
        throw DimensionError("c_cl: delta must be a d x 1 vector");
    if (batch.size() == 0) throw InvalidInputError("c_cl: empty batch");
    Tape tape;
    SoftRebasinGraph g = record_soft_rebasin(tape, plan_params, theta, sk);
    Tape::NodeId delta_leaf = tape.leaf(delta);
    std::vector<std::pair<Tape::NodeId, Tape::NodeId>> shifted;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < theta.layers.size(); ++i) {
        const auto& l = theta.layers[i];
        Tape::NodeId w =
            tape.lincomb(0.5, tape.constant(l.weight), 0.5, g.layers[i].first);
        Tape::NodeId dw = tape.slice(delta_leaf, offset, l.weight.rows(), l.weight.cols());
        offset += l.weight.size();
        w = tape.add(w, dw);
        Tape::NodeId bias =
            tape.lincomb(0.5, tape.constant(l.bias), 0.5, g.layers[i].second);
        Tape::NodeId db = tape.slice(delta_leaf, offset, l.bias.rows(), 1);
        offset += l.bias.size();
        bias = tape.add(bias, db);
        shifted.emplace_back(w, bias);
    }
    Tape::NodeId out =
        forward_on_tape(tape, shifted, theta.hidden_activation, tape.constant(batch.inputs));
    Tape::NodeId total = loss_on_tape(tape, out, batch.targets, loss);
    return finish(tape, total, g, want_grad, delta_leaf);
}

namespace {
const std::vector<Matrix>& soft_params_of(const TransportPlan& plan) {
    if (plan.mode != PlanMode::soft_params)
        throw ConfigError("alignment cost: plan must be in soft_params mode");
    return plan.mats;
}
}  // namespace

double c_l2(const TransportPlan& plan, const Mlp& a, const Mlp& b, const SinkhornConfig& sk) {
    return eval_c_l2(soft_params_of(plan), a, b, sk, false).value;
}

double c_mid(const TransportPlan& plan, const Mlp& a, const Mlp& b, const Dataset& batch,
             LossKind loss, const SinkhornConfig& sk) {
    return eval_c_interp(soft_params_of(plan), a, b, batch, loss, 0.5, sk, false).value;
}

double c_rnd(const TransportPlan& plan, const Mlp& a, const Mlp& b, const Dataset& batch,
             LossKind loss, double lambda, const SinkhornConfig& sk) {
    return eval_c_interp(soft_params_of(plan), a, b, batch, loss, lambda, sk, false).value;
}

double c_cl(const Matrix& delta, const TransportPlan& plan, const Mlp& theta,
            const Dataset& batch, LossKind loss, const SinkhornConfig& sk) {
    return eval_c_cl(soft_params_of(plan), delta, theta, batch, loss, sk, false).value;
}

}  // namespace rebasin
