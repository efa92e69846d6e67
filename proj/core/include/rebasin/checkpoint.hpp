#pragma once

#include <string>

#include "rebasin/continual.hpp"
#include "rebasin/plan.hpp"

namespace rebasin {

// JSON model container: dims, activation, row-major weight/bias arrays.
// Doubles are printed with shortest round-trip formatting, so save/load is
// bit-exact.
std::string model_json(const Mlp& model);
Mlp model_from_json(const std::string& text);
void save_model(const Mlp& model, const std::string& path);
Mlp load_model(const std::string& path);

// Plans share the container format: mode, per-layer matrices, and the
// Sinkhorn config they were produced with.
struct PlanCheckpoint {
    TransportPlan plan;
    SinkhornConfig sinkhorn;
};

std::string plan_json(const PlanCheckpoint& ckpt);
PlanCheckpoint plan_from_json(const std::string& text);
void save_plan(const PlanCheckpoint& ckpt, const std::string& path);
PlanCheckpoint load_plan(const std::string& path);

// Continual stream exports: JSON with the full accuracy matrix, config echo,
// and seed; CSV summary rows (episode, avg_accuracy, forgetting).
std::string stream_report_json(const StreamReport& report, const ContinualConfig& cfg);
std::string stream_report_csv(const StreamReport& report);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace rebasin
