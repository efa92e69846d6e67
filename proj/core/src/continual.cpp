#include "rebasin/continual.hpp"

#include <chrono>

#include "rebasin/costs.hpp"
#include "rebasin/errors.hpp"

namespace rebasin {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LossKind loss_for(const Dataset& d) {
    return d.task == TaskKind::classification ? LossKind::cross_entropy : LossKind::mse;
}

Dataset concat(const std::vector<const Dataset*>& parts) {
    std::size_t n = 0;
    for (const Dataset* p : parts) n += p->size();
    const Dataset& first = *parts.front();
    Dataset out;
    out.task = first.task;
    out.inputs = Matrix(n, first.inputs.cols());
    out.targets = Matrix(n, first.targets.cols());
    std::size_t at = 0;
    for (const Dataset* p : parts) {
        for (std::size_t r = 0; r < p->size(); ++r, ++at) {
            for (std::size_t c = 0; c < out.inputs.cols(); ++c)
                out.inputs(at, c) = p->inputs(r, c);
            for (std::size_t c = 0; c < out.targets.cols(); ++c)
                out.targets(at, c) = p->targets(r, c);
        }
    }
    return out;
}

void finish_report(StreamReport& rep) {
    const std::size_t n = rep.acc.size();
    rep.final_avg_accuracy = avg_accuracy(rep, n);
    rep.final_forgetting = (n >= 2) ? forgetting(rep, n) : 0.0;
}

}  // namespace

std::size_t ReplayBuffer::size() const {
    std::size_t n = 0;
    for (const Dataset& c : chunks_) n += c.size();
    return n;
}

void ReplayBuffer::absorb(const Dataset& episode_train, std::uint64_t seed) {
    if (episode_train.size() == 0)
        throw InvalidInputError("replay: cannot absorb an empty episode");
    chunks_.push_back(subsample_per_class(episode_train, per_class_, seed));
}

Dataset ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    if (empty()) throw InvalidInputError("replay: sample from an empty buffer");
    const std::size_t total = size();
    const Dataset& first = chunks_.front();
    Dataset out;
    out.task = first.task;
    out.inputs = Matrix(n, first.inputs.cols());
    out.targets = Matrix(n, first.targets.cols());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t t = rng.index(total);
        std::size_t chunk = 0;
        while (t >= chunks_[chunk].size()) {
            t -= chunks_[chunk].size();
            ++chunk;
        }
        for (std::size_t c = 0; c < out.inputs.cols(); ++c)
            out.inputs(i, c) = chunks_[chunk].inputs(t, c);
        for (std::size_t c = 0; c < out.targets.cols(); ++c)
            out.targets(i, c) = chunks_[chunk].targets(t, c);
    }
    return out;
}

void ContinualConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("continual: alpha must be in [0, 1]");
    if (plan_lr <= 0.0 || delta_lr <= 0.0) throw ConfigError("continual: rates must be positive");
    if (delta_weight_decay < 0.0) throw ConfigError("continual: weight decay must be >= 0");
    if (batch_size == 0) throw ConfigError("continual: batch_size must be >= 1");
}

EpisodeFit learn_episode(const Mlp& theta, const Episode& episode, const ReplayBuffer& replay,
                         const ContinualConfig& cfg) {
    cfg.validate();
    if (episode.train.size() == 0) throw InvalidInputError("learn_episode: empty train set");
    const LossKind loss = loss_for(episode.train);
    check_loss_task(loss, episode.train.task);

    Rng rng(cfg.seed + 0x9e3779b97f4a7c15ULL * (episode.id + 1));

    EpisodeFit fit;
    fit.soft_plan = identity_plan(theta.hidden_widths(), PlanMode::soft_params);
    fit.delta = Matrix(theta.param_count(), 1);
    for (std::size_t i = 0; i < fit.delta.size(); ++i) fit.delta[i] = rng.uniform(0.0, 1e-6);

    OptimConfig plan_cfg;
    plan_cfg.kind = OptimKind::adam;
    plan_cfg.learning_rate = cfg.plan_lr;
    OptimConfig delta_cfg;
    delta_cfg.kind = OptimKind::sgd;
    delta_cfg.learning_rate = cfg.delta_lr;
    delta_cfg.weight_decay = cfg.delta_weight_decay;
    Optimizer plan_opt(plan_cfg), delta_opt(delta_cfg);

    std::vector<Matrix*> plan_params;
    for (Matrix& m : fit.soft_plan.mats) plan_params.push_back(&m);

    const std::size_t n = episode.train.size();
    for (std::size_t epoch = 0; epoch < cfg.epochs_per_episode; ++epoch) {
        const std::vector<std::size_t> perm = rng.permutation(n);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, n);
            const std::vector<std::size_t> idx(perm.begin() + start, perm.begin() + stop);
            const Dataset cur = episode.train.rows(idx);

            CostEval ev =
                eval_c_cl(fit.soft_plan.mats, fit.delta, theta, cur, loss, cfg.sinkhorn);
            if (!replay.empty()) {
                const Dataset past = replay.sample(idx.size(), rng);
                const CostEval er =
                    eval_c_cl(fit.soft_plan.mats, fit.delta, theta, past, loss, cfg.sinkhorn);
                ev.value = 0.5 * (ev.value + er.value);
                for (std::size_t i = 0; i < ev.plan_grads.size(); ++i)
                    ev.plan_grads[i] = scaled(add(ev.plan_grads[i], er.plan_grads[i]), 0.5);
                ev.delta_grad = scaled(add(ev.delta_grad, er.delta_grad), 0.5);
            }

            std::vector<const Matrix*> plan_grads;
            for (const Matrix& g : ev.plan_grads) plan_grads.push_back(&g);
            plan_opt.step(plan_params, plan_grads);
            delta_opt.step({&fit.delta}, {&ev.delta_grad});
            fit.history.push_back(ev.value);
        }
    }
    return fit;
}

Mlp fuse(const Mlp& theta, const TransportPlan& plan, const Matrix& delta, double alpha) {
    if (plan.mode != PlanMode::hard) throw ConfigError("fuse: plan must be hard");
    if (delta.rows() != theta.param_count() || delta.cols() != 1)
        throw DimensionError("fuse: delta length != parameter count");
    const Mlp pi = apply_plan(theta, plan);
    const Mlp mixed = interpolate(theta, pi, alpha);
    return unflatten(add(flatten(mixed), delta), theta);
}

StreamReport run_stream(const Mlp& theta0, const std::vector<Episode>& episodes,
                        const ContinualConfig& cfg) {
    cfg.validate();
    if (episodes.empty()) throw InvalidInputError("run_stream: empty episode list");

    StreamReport rep;
    Mlp theta = theta0;
    ReplayBuffer replay(cfg.replay_per_class);

    rep.acc.push_back({accuracy(theta, episodes[0].test)});
    rep.episode_seconds.push_back(0.0);
    replay.absorb(episodes[0].train, cfg.seed + 7919);

    for (std::size_t e = 1; e < episodes.size(); ++e) {
        const auto t0 = std::chrono::steady_clock::now();
        const EpisodeFit fit = learn_episode(theta, episodes[e], replay, cfg);
        const TransportPlan hard = round_plan(fit.soft_plan, cfg.sinkhorn);
        theta = fuse(theta, hard, fit.delta, cfg.alpha);
        replay.absorb(episodes[e].train, cfg.seed + 7919 * (e + 1));

        std::vector<double> row;
        for (std::size_t j = 0; j <= e; ++j) row.push_back(accuracy(theta, episodes[j].test));
        rep.acc.push_back(std::move(row));
        rep.episode_seconds.push_back(seconds_since(t0));
    }
    finish_report(rep);
    return rep;
}

StreamReport run_finetune(const Mlp& theta0, const std::vector<Episode>& episodes,
                          const OptimConfig& optim, std::size_t epochs, std::size_t batch_size,
                          std::uint64_t seed) {
    if (episodes.empty()) throw InvalidInputError("run_finetune: empty episode list");
    StreamReport rep;
    Mlp theta = theta0;
    rep.acc.push_back({accuracy(theta, episodes[0].test)});
    rep.episode_seconds.push_back(0.0);
    for (std::size_t e = 1; e < episodes.size(); ++e) {
        const auto t0 = std::chrono::steady_clock::now();
        theta = train(theta, episodes[e].train, loss_for(episodes[e].train), optim, epochs,
                      batch_size, seed + e)
                    .first;
        std::vector<double> row;
        for (std::size_t j = 0; j <= e; ++j) row.push_back(accuracy(theta, episodes[j].test));
        rep.acc.push_back(std::move(row));
        rep.episode_seconds.push_back(seconds_since(t0));
    }
    finish_report(rep);
    return rep;
}

StreamReport run_joint(const Mlp& theta0, const std::vector<Episode>& episodes,
                       const OptimConfig& optim, std::size_t epochs, std::size_t batch_size,
                       std::uint64_t seed) {
    if (episodes.empty()) throw InvalidInputError("run_joint: empty episode list");
    std::vector<const Dataset*> parts;
    for (const Episode& e : episodes) parts.push_back(&e.train);
    const Dataset all = concat(parts);

    const auto t0 = std::chrono::steady_clock::now();
    const Mlp theta = train(theta0, all, loss_for(all), optim, epochs, batch_size, seed).first;
    const double elapsed = seconds_since(t0);

    StreamReport rep;
    std::vector<double> per_task;
    for (const Episode& e : episodes) per_task.push_back(accuracy(theta, e.test));
    for (std::size_t k = 0; k < episodes.size(); ++k) {
        rep.acc.emplace_back(per_task.begin(), per_task.begin() + k + 1);
        rep.episode_seconds.push_back(k == 0 ? elapsed : 0.0);
    }
    finish_report(rep);
    return rep;
}

double avg_accuracy(const StreamReport& report, std::size_t episodes_seen) {
    if (episodes_seen < 1 || episodes_seen > report.acc.size())
        throw InvalidInputError("avg_accuracy: episode count out of range");
    const std::vector<double>& last = report.acc[episodes_seen - 1];
    double s = 0.0;
    for (std::size_t j = 0; j < episodes_seen; ++j) s += last[j];
    return s / static_cast<double>(episodes_seen);
}

double forgetting(const StreamReport& report, std::size_t episodes_seen) {
    if (episodes_seen < 2 || episodes_seen > report.acc.size())
        throw InvalidInputError("forgetting: need at least 2 episodes in range");
    const std::vector<double>& last = report.acc[episodes_seen - 1];
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < episodes_seen; ++j) {
        double best = report.acc[j][j] - last[j];
        for (std::size_t k = j; k + 1 < episodes_seen; ++k)
            best = std::max(best, report.acc[k][j] - last[j]);
        s += best;
    }
    return s / static_cast<double>(episodes_seen - 1);
}

}  // namespace rebasin
