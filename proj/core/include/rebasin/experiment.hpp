#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rebasin/checkpoint.hpp"
#include "rebasin/lmc.hpp"
#include "rebasin/rebasin.hpp"

namespace rebasin {

enum class ExperimentKind { train, find_ot, lmc, continual };
enum class AlignMethod { sinkhorn_l2, sinkhorn_mid, sinkhorn_rnd, wm, naive };
enum class ContinualMethod { rebasin_replay, finetune, joint };

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::train;

    // architecture
    std::vector<std::size_t> dims;
    Activation activation = Activation::tanh;
    InitKind init = InitKind::glorot;

    // dataset: pol1 | pol3 | mnist | synthetic | random (find_ot only)
    std::string dataset = "pol1";
    std::string images_path, labels_path;  // IDX pair for dataset=mnist
    std::size_t train_rows = 10000;
    std::size_t test_rows = 2000;
    double noise_sd = 0.05;

    // training (train/lmc endpoint fitting, continual pretrain and baselines)
    OptimConfig optim;
    std::size_t epochs = 10;
    std::size_t batch_size = 100;

    // alignment
    AlignMethod method = AlignMethod::sinkhorn_l2;
    RebasinConfig rebasin;
    std::size_t wm_sweeps = 50;

    // lmc
    std::size_t grid_points = 25;

    // continual
    ContinualMethod cl_method = ContinualMethod::rebasin_replay;
    ContinualConfig continual;
    std::size_t episodes = 5;
    std::size_t episode_train_rows = 2000;
    std::size_t episode_test_rows = 500;

    std::size_t runs = 1;
    std::uint64_t base_seed = 0;
    std::string out_dir = "out";

    void validate() const;
    bool cfg_is_image() const;  // mnist or synthetic
};

// Parses a JSON config document, then applies key=value overrides (dotted
// paths address nested keys; values parse as JSON scalars, falling back to
// strings).
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides = {});

// Fully resolved config back as JSON, embedded in every summary.
std::string config_json(const ExperimentConfig& cfg);

// One trial row: ordered (column, value) pairs; columns are identical across
// the trials of a run.
using TrialRow = std::vector<std::pair<std::string, double>>;

struct ExperimentResult {
    std::vector<TrialRow> trials;
    std::string trials_csv;
    std::string summary_json;  // per-column mean and sd, plus the config echo
};

// Runs cfg.runs seeded trials (trial r uses base_seed + r) and writes
// trials.csv, summary.json, and per-trial artifacts under out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace rebasin
