#include "rebasin/rebasin.hpp"

#include <cmath>
#include <limits>

#include "rebasin/hungarian.hpp"

namespace rebasin {

OptimizePlanResult optimize_plan(const Mlp& a, const Mlp& b, CostKind kind,
                                 const std::optional<Dataset>& data, const RebasinConfig& cfg) {
    if (!a.same_architecture(b)) throw DimensionError("optimize_plan: architecture mismatch");
    if (kind != CostKind::l2 && !data)
        throw ConfigError("optimize_plan: mid/rnd costs need a dataset");

    const auto widths = a.hidden_widths();
    std::vector<Matrix> params;
    for (std::size_t w : widths) params.push_back(Matrix::identity(w));

    LossKind loss = LossKind::mse;
    if (data) loss = data->task == TaskKind::classification ? LossKind::cross_entropy : LossKind::mse;

    Optimizer opt(cfg.optim);
    Rng rng(cfg.seed);
    OptimizePlanResult res;

    double best = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    for (std::size_t iter = 0; iter < cfg.optim.max_iters; ++iter) {
        CostEval ev;
        if (kind == CostKind::l2) {
            ev = eval_c_l2(params, a, b, cfg.sinkhorn);
        } else {
            const std::size_t bs = std::min(cfg.batch_size, data->size());
            std::vector<std::size_t> order = rng.permutation(data->size());
            order.resize(bs);
            Dataset batch = data->rows(order);
            const double lambda = kind == CostKind::rnd ? rng.uniform(0.0, 1.0) : 0.5;
            ev = eval_c_interp(params, a, b, batch, loss, lambda, cfg.sinkhorn);
        }
        res.history.push_back(ev.value);

        if (ev.value < best - cfg.optim.early_stop.min_improvement) {
            best = ev.value;
            stale = 0;
        } else if (++stale >= cfg.optim.early_stop.patience) {
            break;
        }

        // For the data-free objective, stop as soon as the rounded plan is an
        // exact match; the soft cost keeps shrinking long after recovery.
        if (kind == CostKind::l2) {
            TransportPlan hard;
            hard.mode = PlanMode::hard;
            for (const Matrix& x : params) hard.mats.push_back(round_plan(sinkhorn(x, cfg.sinkhorn)));
            if (sq_l2_distance(a, apply_plan(b, hard)) == 0.0) break;
        }

        std::vector<Matrix*> ps;
        std::vector<const Matrix*> gs;
        for (std::size_t i = 0; i < params.size(); ++i) {
            ps.push_back(&params[i]);
            gs.push_back(&ev.plan_grads[i]);
        }
        opt.step(ps, gs);
    }

    res.soft.mode = PlanMode::soft_params;
    res.soft.mats = params;
    res.hard = round_plan(res.soft, cfg.sinkhorn);
    return res;
}

TransportPlan weight_matching(const Mlp& a, const Mlp& b, std::size_t max_sweeps,
                              std::uint64_t seed) {
    if (!a.same_architecture(b)) throw DimensionError("weight_matching: architecture mismatch");
    const auto widths = a.hidden_widths();
    const std::size_t hidden = widths.size();
    TransportPlan plan = identity_plan(widths, PlanMode::hard);
    if (hidden == 0) return plan;

    Rng rng(seed);
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool changed = false;
        for (std::size_t k : rng.permutation(hidden)) {
            // <P_k, M_k> collects every term of the squared-distance objective
            // that touches P_k: layer k's left side, layer k+1's right side,
            // and layer k's bias.
            const Matrix& wa = a.layers[k].weight;
            const Matrix& wb = b.layers[k].weight;
            Matrix left = (k > 0) ? matmul(wa, plan.mats[k - 1]) : wa;
            Matrix m = matmul_nt(left, wb);

            const Matrix& wa_next = a.layers[k + 1].weight;
            const Matrix& wb_next = b.layers[k + 1].weight;
            const Matrix upper =
                (k + 1 < hidden) ? matmul(plan.mats[k + 1], wb_next) : wb_next;
            m = add(m, matmul_tn(wa_next, upper));

            m = add(m, matmul_nt(a.layers[k].bias, b.layers[k].bias));

            const auto assignment = hungarian(m, Objective::maximize);
            const Matrix candidate = permutation_matrix(assignment);

            double current = 0.0, proposed = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < m.cols(); ++j) {
                    current += plan.mats[k](i, j) * m(i, j);
                    proposed += candidate(i, j) * m(i, j);
                }
            if (proposed > current + 1e-12 * (1.0 + std::fabs(current))) {
                plan.mats[k] = candidate;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return plan;
}

}  // namespace rebasin
