#include "rebasin/optim.hpp"

#include <cmath>

namespace rebasin {

void OptimConfig::validate() const {
    if (learning_rate <= 0.0) throw ConfigError("OptimConfig: learning_rate must be > 0");
    if (weight_decay < 0.0) throw ConfigError("OptimConfig: weight_decay must be >= 0");
    if (early_stop.patience < 1) throw ConfigError("OptimConfig: patience must be >= 1");
}

Optimizer::Optimizer(OptimConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void Optimizer::step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads) {
    if (params.size() != grads.size())
        throw DimensionError("Optimizer::step: params/grads size mismatch");
    if (cfg_.kind == OptimKind::adam && m_.empty()) {
        for (const Matrix* p : params) {
            m_.emplace_back(p->rows(), p->cols());
            v_.emplace_back(p->rows(), p->cols());
        }
    }
    ++t_;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& p = *params[k];
        const Matrix& g = *grads[k];
        if (!p.same_shape(g)) throw DimensionError("Optimizer::step: grad shape mismatch");
        if (cfg_.kind == OptimKind::sgd) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double gi = g[i] + cfg_.weight_decay * p[i];
                p[i] -= cfg_.learning_rate * gi;
            }
        } else {
            Matrix& m = m_[k];
            Matrix& v = v_[k];
            const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
            const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
            for (std::size_t i = 0; i < p.size(); ++i) {
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                p[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
            }
        }
    }
}

std::pair<Mlp, std::vector<double>> train(const Mlp& model, const Dataset& data, LossKind loss,
                                          const OptimConfig& optim, std::size_t epochs,
                                          std::size_t batch_size, std::uint64_t seed) {
    check_loss_task(loss, data.task);
    if (batch_size == 0 || batch_size > data.size())
        throw ConfigError("train: batch_size must be in [1, N]");
    if (data.inputs.cols() != model.in_dim() || data.targets.cols() != model.out_dim())
        throw DimensionError("train: dataset widths do not match the model");

    Mlp trained = model;
    Optimizer opt(optim);
    Rng rng(seed);
    std::vector<double> history;
    history.reserve(epochs);

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        const std::vector<std::size_t> order = rng.permutation(data.size());
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(start + batch_size, order.size());
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
            Dataset batch = data.rows(idx);

            Tape tape;
            std::vector<std::pair<Tape::NodeId, Tape::NodeId>> layer_nodes;
            for (const auto& l : trained.layers)
                layer_nodes.emplace_back(tape.leaf(l.weight), tape.leaf(l.bias));
            Tape::NodeId x = tape.constant(batch.inputs);
            Tape::NodeId out = forward_on_tape(tape, layer_nodes, trained.hidden_activation, x);
            Tape::NodeId l = loss_on_tape(tape, out, batch.targets, loss);
            tape.backward(l);

            epoch_loss += tape.value(l)(0, 0) * static_cast<double>(idx.size());
            seen += idx.size();

            std::vector<Matrix*> params;
            std::vector<const Matrix*> grads;
            for (std::size_t i = 0; i < trained.layers.size(); ++i) {
                params.push_back(&trained.layers[i].weight);
                params.push_back(&trained.layers[i].bias);
                grads.push_back(&tape.grad(layer_nodes[i].first));
                grads.push_back(&tape.grad(layer_nodes[i].second));
            }
            opt.step(params, grads);
        }
        history.push_back(epoch_loss / static_cast<double>(seen));
    }
    return {std::move(trained), std::move(history)};
}

}  // namespace rebasin
