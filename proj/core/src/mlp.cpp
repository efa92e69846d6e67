#include "rebasin/mlp.hpp"

#include <cmath>

namespace rebasin {

Dataset Dataset::rows(const std::vector<std::size_t>& idx) const {
    Matrix in(idx.size(), inputs.cols());
    Matrix out(idx.size(), targets.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t c = 0; c < inputs.cols(); ++c) in(r, c) = inputs(idx[r], c);
        for (std::size_t c = 0; c < targets.cols(); ++c) out(r, c) = targets(idx[r], c);
    }
    return Dataset{std::move(in), std::move(out), task};
}

std::vector<std::size_t> Mlp::dims() const {
    std::vector<std::size_t> d;
    d.push_back(in_dim());
    for (const Layer& l : layers) d.push_back(l.weight.rows());
    return d;
}

std::vector<std::size_t> Mlp::hidden_widths() const {
    std::vector<std::size_t> w;
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) w.push_back(layers[i].weight.rows());
    return w;
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) n += l.weight.size() + l.bias.size();
    return n;
}

bool Mlp::same_architecture(const Mlp& o) const {
    if (layers.size() != o.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (!layers[i].weight.same_shape(o.layers[i].weight)) return false;
    return true;
}

Mlp init_mlp(const std::vector<std::size_t>& dims, Activation activation, InitKind init,
             std::uint64_t seed) {
    if (dims.size() < 3)
        throw ConfigError("init_mlp: need at least [in, hidden, out] layer widths");
    for (std::size_t d : dims)
        if (d == 0) throw ConfigError("init_mlp: layer widths must be >= 1");

    Rng rng(seed);
    Mlp m;
    m.hidden_activation = activation;
    for (std::size_t i = 1; i < dims.size(); ++i) {
        Matrix w(dims[i], dims[i - 1]);
        Matrix b(dims[i], 1);
        if (init == InitKind::standard_normal) {
            for (std::size_t k = 0; k < w.size(); ++k) w[k] = rng.normal(0.0, 1.0);
            for (std::size_t k = 0; k < b.size(); ++k) b[k] = rng.normal(0.0, 1.0);
        } else {
            const double lim = std::sqrt(6.0 / static_cast<double>(dims[i] + dims[i - 1]));
            for (std::size_t k = 0; k < w.size(); ++k) w[k] = rng.uniform(-lim, lim);
            // biases start at zero
        }
        m.layers.push_back({std::move(w), std::move(b)});
    }
    return m;
}

Matrix forward(const Mlp& model, const Matrix& batch) {
    if (batch.cols() != model.in_dim())
        throw DimensionError("forward: batch width != model input width");
    Matrix h = batch;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const auto& l = model.layers[i];
        Matrix z = matmul_nt(h, l.weight);
        for (std::size_t r = 0; r < z.rows(); ++r)
            for (std::size_t c = 0; c < z.cols(); ++c) z(r, c) += l.bias(c, 0);
        if (i + 1 < model.layers.size()) {
            if (model.hidden_activation == Activation::tanh) {
                for (std::size_t k = 0; k < z.size(); ++k) z[k] = std::tanh(z[k]);
            } else {
                for (std::size_t k = 0; k < z.size(); ++k) z[k] = z[k] > 0.0 ? z[k] : 0.0;
            }
        }
        h = std::move(z);
    }
    return h;
}

void check_loss_task(LossKind loss, TaskKind task) {
    if (loss == LossKind::mse && task != TaskKind::regression)
        throw ConfigError("mse loss requires a regression dataset");
    if (loss == LossKind::cross_entropy && task != TaskKind::classification)
        throw ConfigError("cross_entropy loss requires a classification dataset");
}

double cost(const Mlp& model, const Dataset& data, LossKind loss) {
    check_loss_task(loss, data.task);
    const Matrix out = forward(model, data.inputs);
    const std::size_t n = out.rows();
    double total = 0.0;
    if (loss == LossKind::mse) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double d = out[i] - data.targets[i];
            total += d * d;
        }
    } else {
        for (std::size_t r = 0; r < n; ++r) {
            double mx = out(r, 0);
            for (std::size_t c = 1; c < out.cols(); ++c) mx = std::max(mx, out(r, c));
            double s = 0.0;
            for (std::size_t c = 0; c < out.cols(); ++c) s += std::exp(out(r, c) - mx);
            const double lse = mx + std::log(s);
            for (std::size_t c = 0; c < out.cols(); ++c)
                total += data.targets(r, c) * (lse - out(r, c));
        }
    }
    return total / static_cast<double>(n);
}

namespace {
std::size_t argmax_row(const Matrix& m, std::size_t r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < m.cols(); ++c)
        if (m(r, c) > m(r, best)) best = c;
    return best;
}
}  // namespace

double accuracy(const Mlp& model, const Dataset& data) {
    if (data.task != TaskKind::classification)
        throw ConfigError("accuracy: requires a classification dataset");
    const Matrix out = forward(model, data.inputs);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < out.rows(); ++r)
        if (argmax_row(out, r) == argmax_row(data.targets, r)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(out.rows());
}

Matrix flatten(const Mlp& model) {
    Matrix flat(model.param_count(), 1);
    std::size_t k = 0;
    for (const auto& l : model.layers) {
        for (std::size_t i = 0; i < l.weight.size(); ++i) flat[k++] = l.weight[i];
        for (std::size_t i = 0; i < l.bias.size(); ++i) flat[k++] = l.bias[i];
    }
    return flat;
}

Mlp unflatten(const Matrix& flat, const Mlp& reference) {
    if (flat.size() != reference.param_count())
        throw DimensionError("unflatten: parameter count mismatch");
    Mlp m = reference;
    std::size_t k = 0;
    for (auto& l : m.layers) {
        for (std::size_t i = 0; i < l.weight.size(); ++i) l.weight[i] = flat[k++];
        for (std::size_t i = 0; i < l.bias.size(); ++i) l.bias[i] = flat[k++];
    }
    return m;
}

double l1_distance(const Mlp& a, const Mlp& b) {
    if (!a.same_architecture(b)) throw DimensionError("l1_distance: architecture mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        s += l1_diff(a.layers[i].weight, b.layers[i].weight);
        s += l1_diff(a.layers[i].bias, b.layers[i].bias);
    }
    return s;
}

double sq_l2_distance(const Mlp& a, const Mlp& b) {
    if (!a.same_architecture(b)) throw DimensionError("sq_l2_distance: architecture mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        s += sum_squares(sub(a.layers[i].weight, b.layers[i].weight));
        s += sum_squares(sub(a.layers[i].bias, b.layers[i].bias));
    }
    return s;
}

Tape::NodeId forward_on_tape(Tape& tape,
                             const std::vector<std::pair<Tape::NodeId, Tape::NodeId>>& layers,
                             Activation act, Tape::NodeId batch) {
    Tape::NodeId h = batch;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Tape::NodeId z = tape.add_bias_rows(tape.matmul_nt(h, layers[i].first), layers[i].second);
        h = (i + 1 < layers.size()) ? tape.activation(z, act) : z;
    }
    return h;
}

Tape::NodeId loss_on_tape(Tape& tape, Tape::NodeId output, const Matrix& targets, LossKind loss) {
    return loss == LossKind::mse ? tape.mse_loss(output, targets)
                                 : tape.cross_entropy_loss(output, targets);
}

}  // namespace rebasin
