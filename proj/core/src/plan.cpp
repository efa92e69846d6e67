#include "rebasin/plan.hpp"

#include "rebasin/hungarian.hpp"

namespace rebasin {

TransportPlan identity_plan(const std::vector<std::size_t>& hidden_widths, PlanMode mode) {
    TransportPlan p;
    p.mode = mode;
    for (std::size_t w : hidden_widths) p.mats.push_back(Matrix::identity(w));
    return p;
}

bool is_permutation_matrix(const Matrix& m) {
    if (m.rows() != m.cols()) return false;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] != 0.0 && m[i] != 1.0) return false;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double rs = 0.0, cs = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            rs += m(i, j);
            cs += m(j, i);
        }
        if (rs != 1.0 || cs != 1.0) return false;
    }
    return true;
}

void check_plan(const TransportPlan& plan, const Mlp& model) {
    const auto widths = model.hidden_widths();
    if (plan.mats.size() != widths.size())
        throw DimensionError("plan: matrix count != hidden layer count");
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (plan.mats[i].rows() != widths[i] || plan.mats[i].cols() != widths[i])
            throw DimensionError("plan: matrix size does not match hidden layer width");
        if (plan.mode == PlanMode::hard && !is_permutation_matrix(plan.mats[i]))
            throw InvalidInputError("plan: hard plan matrix is not a permutation");
    }
}

Mlp apply_plan(const Mlp& model, const TransportPlan& plan, const SinkhornConfig& sk) {
    check_plan(plan, model);
    std::vector<Matrix> p;  // effective per-hidden-layer mixing matrices
    p.reserve(plan.mats.size());
    for (const Matrix& m : plan.mats)
        p.push_back(plan.mode == PlanMode::hard ? m : sinkhorn(m, sk));

    Mlp out = model;
    const std::size_t h = model.layers.size();
    for (std::size_t i = 0; i < h; ++i) {
        const Matrix* left = (i < p.size()) ? &p[i] : nullptr;        // P_i (identity at output)
        const Matrix* right = (i > 0) ? &p[i - 1] : nullptr;          // P_{i-1} (identity at input)
        Matrix w = model.layers[i].weight;
        if (left) w = matmul(*left, w);
        if (right) w = matmul_nt(w, *right);
        Matrix b = model.layers[i].bias;
        if (left) b = matmul(*left, b);
        out.layers[i].weight = std::move(w);
        out.layers[i].bias = std::move(b);
    }
    return out;
}

TransportPlan inverse(const TransportPlan& hard) {
    if (hard.mode != PlanMode::hard) throw ConfigError("inverse: hard plans only");
    TransportPlan inv;
    inv.mode = PlanMode::hard;
    for (const Matrix& m : hard.mats) inv.mats.push_back(m.transposed());
    return inv;
}

TransportPlan round_plan(const TransportPlan& soft, const SinkhornConfig& sk) {
    TransportPlan hard;
    hard.mode = PlanMode::hard;
    for (const Matrix& m : soft.mats) {
        const Matrix s = (soft.mode == PlanMode::soft_params) ? sinkhorn(m, sk) : m;
        hard.mats.push_back(rebasin::round_plan(s));
    }
    return hard;
}

Mlp interpolate(const Mlp& a, const Mlp& b, double lambda) {
    if (!a.same_architecture(b)) throw DimensionError("interpolate: architecture mismatch");
    Mlp out = a;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        out.layers[i].weight =
            lincomb(1.0 - lambda, a.layers[i].weight, lambda, b.layers[i].weight);
        out.layers[i].bias = lincomb(1.0 - lambda, a.layers[i].bias, lambda, b.layers[i].bias);
    }
    return out;
}

}  // namespace rebasin
