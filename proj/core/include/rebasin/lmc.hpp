#pragma once

#include <optional>
#include <string>

#include "rebasin/plan.hpp"

namespace rebasin {

// Costs (and accuracies, for classification) along the straight segment
// between two models, on an inclusive evenly spaced lambda grid.
struct CurveReport {
    std::vector<double> lambdas;
    std::vector<double> costs;
    std::optional<std::vector<double>> accuracies;
    double endpoint_cost_a = 0.0;
    double endpoint_cost_b = 0.0;

    double chord_at(double lambda) const {
        return (1.0 - lambda) * endpoint_cost_a + lambda * endpoint_cost_b;
    }
};

CurveReport cost_curve(const Mlp& a, const Mlp& b, const Dataset& data, LossKind loss,
                       std::size_t grid_points = 25);

// Largest excess of the path cost over the linear chord; >= 0 on an inclusive
// grid. A grid sup, so a lower bound on the true sup.
double barrier(const CurveReport& curve);

// Trapezoidal integral of (path cost - chord) over lambda. Reported signed:
// the integrand can dip below zero where the path undercuts the chord.
double auc(const CurveReport& curve);

// CSV with columns lambda, cost, chord, deviation[, accuracy].
std::string curve_csv(const CurveReport& curve);

}  // namespace rebasin
