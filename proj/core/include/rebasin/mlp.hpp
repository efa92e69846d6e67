#pragma once

#include <cstdint>
#include <vector>

#include "rebasin/matrix.hpp"
#include "rebasin/rng.hpp"
#include "rebasin/tape.hpp"

namespace rebasin {

enum class LossKind { mse, cross_entropy };
enum class TaskKind { regression, classification };
enum class InitKind { standard_normal, glorot };

struct Dataset {
    Matrix inputs;   // N x in_dim
    Matrix targets;  // N x out_dim, one-hot for classification
    TaskKind task = TaskKind::regression;

    std::size_t size() const { return inputs.rows(); }
    Dataset rows(const std::vector<std::size_t>& idx) const;
};

// Feedforward net: hidden layers apply the activation, the output layer is
// affine. Layer i weight is n_i x n_{i-1}, bias n_i x 1.
struct Mlp {
    struct Layer {
        Matrix weight;
        Matrix bias;
    };
    std::vector<Layer> layers;
    Activation hidden_activation = Activation::tanh;

    std::size_t in_dim() const { return layers.front().weight.cols(); }
    std::size_t out_dim() const { return layers.back().weight.rows(); }
    std::vector<std::size_t> dims() const;
    std::vector<std::size_t> hidden_widths() const;
    std::size_t param_count() const;

    bool same_architecture(const Mlp& o) const;
};

Mlp init_mlp(const std::vector<std::size_t>& dims, Activation activation, InitKind init,
             std::uint64_t seed);

Matrix forward(const Mlp& model, const Matrix& batch);

double cost(const Mlp& model, const Dataset& data, LossKind loss);

// Fraction of rows where argmax(output) == argmax(target); ties go to the
// lowest class index.
double accuracy(const Mlp& model, const Dataset& data);

void check_loss_task(LossKind loss, TaskKind task);

// Flat parameter order: layer by layer, weight entries (row-major) then bias.
Matrix flatten(const Mlp& model);
Mlp unflatten(const Matrix& flat, const Mlp& reference);

double l1_distance(const Mlp& a, const Mlp& b);
double sq_l2_distance(const Mlp& a, const Mlp& b);

// Tape-recorded forward pass through per-layer (weight, bias) nodes; used by
// training and by the differentiable alignment costs.
Tape::NodeId forward_on_tape(Tape& tape, const std::vector<std::pair<Tape::NodeId, Tape::NodeId>>& layers,
                             Activation act, Tape::NodeId batch);

Tape::NodeId loss_on_tape(Tape& tape, Tape::NodeId output, const Matrix& targets, LossKind loss);

}  // namespace rebasin
