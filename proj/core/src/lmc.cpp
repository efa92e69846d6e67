#include "rebasin/lmc.hpp"

#include <algorithm>
#include <sstream>

namespace rebasin {

CurveReport cost_curve(const Mlp& a, const Mlp& b, const Dataset& data, LossKind loss,
                       std::size_t grid_points) {
    if (grid_points < 2) throw ConfigError("cost_curve: grid needs at least 2 points");
    if (!a.same_architecture(b)) throw DimensionError("cost_curve: architecture mismatch");
    check_loss_task(loss, data.task);

    CurveReport rep;
    const bool classify = data.task == TaskKind::classification;
    if (classify) rep.accuracies.emplace();
    for (std::size_t k = 0; k < grid_points; ++k) {
        const double lambda =
            static_cast<double>(k) / static_cast<double>(grid_points - 1);
        const Mlp mid = interpolate(a, b, lambda);
        rep.lambdas.push_back(lambda);
        rep.costs.push_back(cost(mid, data, loss));
        if (classify) rep.accuracies->push_back(accuracy(mid, data));
    }
    rep.endpoint_cost_a = rep.costs.front();
    rep.endpoint_cost_b = rep.costs.back();
    return rep;
}

double barrier(const CurveReport& curve) {
    if (curve.lambdas.size() < 2) throw InvalidInputError("barrier: need >= 2 points");
    double sup = 0.0;
    for (std::size_t k = 0; k < curve.lambdas.size(); ++k)
        sup = std::max(sup, curve.costs[k] - curve.chord_at(curve.lambdas[k]));
    return sup;
}

double auc(const CurveReport& curve) {
    if (curve.lambdas.size() < 2) throw InvalidInputError("auc: need >= 2 points");
    double area = 0.0;
    for (std::size_t k = 0; k + 1 < curve.lambdas.size(); ++k) {
        const double f0 = curve.costs[k] - curve.chord_at(curve.lambdas[k]);
        const double f1 = curve.costs[k + 1] - curve.chord_at(curve.lambdas[k + 1]);
        area += 0.5 * (f0 + f1) * (curve.lambdas[k + 1] - curve.lambdas[k]);
    }
    return area;
}

std::string curve_csv(const CurveReport& curve) {
    std::ostringstream out;
    out.precision(17);
    out << "lambda,cost,chord,deviation";
    if (curve.accuracies) out << ",accuracy";
    out << "\n";
    for (std::size_t k = 0; k < curve.lambdas.size(); ++k) {
        const double chord = curve.chord_at(curve.lambdas[k]);
        out << curve.lambdas[k] << ',' << curve.costs[k] << ',' << chord << ','
            << curve.costs[k] - chord;
        if (curve.accuracies) out << ',' << (*curve.accuracies)[k];
        out << "\n";
    }
    return out.str();
}

}  // namespace rebasin
