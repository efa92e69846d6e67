#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rebasin/mlp.hpp"

namespace rebasin {

enum class OptimKind { adam, sgd };

struct EarlyStop {
    std::size_t patience = 10;
    double min_improvement = 1e-10;
};

struct OptimConfig {
    OptimKind kind = OptimKind::adam;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;  // sgd only
    std::size_t max_iters = 100;
    EarlyStop early_stop;

    void validate() const;
};

// Stateful update rule over a fixed group of parameter matrices.
class Optimizer {
public:
    explicit Optimizer(OptimConfig cfg);

    // params[i] is updated in place with grads[i]; the group's shapes must be
    // identical on every call.
    void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads);

private:
    OptimConfig cfg_;
    std::size_t t_ = 0;
    std::vector<Matrix> m_, v_;  // adam moments
};

// Minibatch training with seeded full-permutation shuffling per epoch.
// Returns the trained model and the per-epoch mean training loss.
std::pair<Mlp, std::vector<double>> train(const Mlp& model, const Dataset& data, LossKind loss,
                                          const OptimConfig& optim, std::size_t epochs,
                                          std::size_t batch_size, std::uint64_t seed);

}  // namespace rebasin
