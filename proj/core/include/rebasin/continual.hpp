#pragma once

#include "rebasin/data.hpp"
#include "rebasin/optim.hpp"
#include "rebasin/rebasin.hpp"

namespace rebasin {

// Stored examples from closed episodes; contents are frozen per episode and
// capped at per_class examples for each class.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t per_class) : per_class_(per_class) {}

    bool empty() const { return chunks_.empty(); }
    std::size_t size() const;
    std::size_t per_class() const { return per_class_; }

    // Subsamples per_class examples per class from a closed episode.
    void absorb(const Dataset& episode_train, std::uint64_t seed);

    // Uniform sample (with replacement) of n rows across the whole buffer.
    Dataset sample(std::size_t n, Rng& rng) const;

private:
    std::size_t per_class_;
    std::vector<Dataset> chunks_;
};

struct ContinualConfig {
    double alpha = 0.8;              // fusion balance
    double delta_weight_decay = 0.1; // beta, realized as weight decay on delta
    double plan_lr = 0.1;            // eta, adam
    double delta_lr = 0.05;          // gamma, sgd
    std::size_t epochs_per_episode = 5;
    std::size_t batch_size = 500;
    std::size_t replay_per_class = 5;
    SinkhornConfig sinkhorn;
    std::uint64_t seed = 0;

    void validate() const;
};

struct StreamReport {
    // acc[k][j]: accuracy of the model after episode k on episode j's test
    // set, j <= k.
    std::vector<std::vector<double>> acc;
    std::vector<double> episode_seconds;
    double final_avg_accuracy = 0.0;
    double final_forgetting = 0.0;  // 0 when only one episode ran
};

struct EpisodeFit {
    TransportPlan soft_plan;
    Matrix delta;
    std::vector<double> history;  // per-step averaged cost
};

// Joint minimization over (plan, delta): plan via Adam at plan_lr, delta via
// SGD at delta_lr with weight decay; each step averages the cost over one
// current-episode batch and one replay batch (current only while the buffer
// is empty).
EpisodeFit learn_episode(const Mlp& theta, const Episode& episode, const ReplayBuffer& replay,
                         const ContinualConfig& cfg);

// theta_next = (1-alpha) theta + alpha pi_P(theta) + delta, hard plan.
Mlp fuse(const Mlp& theta, const TransportPlan& plan, const Matrix& delta, double alpha);

StreamReport run_stream(const Mlp& theta0, const std::vector<Episode>& episodes,
                        const ContinualConfig& cfg);

// Plain sequential training, no replay.
StreamReport run_finetune(const Mlp& theta0, const std::vector<Episode>& episodes,
                          const OptimConfig& optim, std::size_t epochs, std::size_t batch_size,
                          std::uint64_t seed);

// Upper bound: one training run on the union of every episode's train set.
StreamReport run_joint(const Mlp& theta0, const std::vector<Episode>& episodes,
                       const OptimConfig& optim, std::size_t epochs, std::size_t batch_size,
                       std::uint64_t seed);

// Mean over j < episodes_seen of acc[episodes_seen-1][j].
double avg_accuracy(const StreamReport& report, std::size_t episodes_seen);

// Mean over tasks j of max_k (acc[k][j] - acc[last][j]); episodes_seen >= 2.
double forgetting(const StreamReport& report, std::size_t episodes_seen);

}  // namespace rebasin
