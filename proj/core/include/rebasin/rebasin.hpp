#pragma once

#include <optional>

#include "rebasin/costs.hpp"
#include "rebasin/optim.hpp"

namespace rebasin {

enum class CostKind { l2, mid, rnd };

struct RebasinConfig {
    SinkhornConfig sinkhorn;
    OptimConfig optim;          // adam lr 0.1, max 100 iters by default
    std::size_t batch_size = 100;  // mid/rnd only
    std::uint64_t seed = 0;

    RebasinConfig() {
        optim.learning_rate = 0.1;
        optim.max_iters = 100;
    }
};

struct OptimizePlanResult {
    TransportPlan soft;  // converged soft parameters
    TransportPlan hard;  // exact rounding of each soft matrix
    std::vector<double> history;  // per-iteration cost
};

// Gradient-based plan search: soft parameters start at the identity and every
// hidden-layer matrix is updated simultaneously on the selected cost. The rnd
// cost resamples lambda from the seeded generator each iteration.
OptimizePlanResult optimize_plan(const Mlp& a, const Mlp& b, CostKind kind,
                                 const std::optional<Dataset>& data, const RebasinConfig& cfg);

// Coordinate-descent baseline: sweeps hidden layers in seeded random order,
// solving one maximize-LAP per layer, until a full sweep changes nothing or
// max_sweeps is reached.
TransportPlan weight_matching(const Mlp& a, const Mlp& b, std::size_t max_sweeps,
                              std::uint64_t seed);

}  // namespace rebasin
