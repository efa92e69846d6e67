#include "rebasin/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "rebasin/continual.hpp"
#include "rebasin/data.hpp"
#include "rebasin/errors.hpp"

namespace rebasin {

using nlohmann::json;

namespace {

constexpr std::uint64_t kPairOffset = 0x9e3779b97f4a7c15ULL;

std::string experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::train: return "train";
        case ExperimentKind::find_ot: return "find_ot";
        case ExperimentKind::lmc: return "lmc";
        case ExperimentKind::continual: return "continual";
    }
    throw ConfigError("unknown experiment kind");
}

ExperimentKind experiment_from_name(const std::string& s) {
    if (s == "train") return ExperimentKind::train;
    if (s == "find_ot") return ExperimentKind::find_ot;
    if (s == "lmc") return ExperimentKind::lmc;
    if (s == "continual") return ExperimentKind::continual;
    throw ConfigError("unknown experiment '" + s + "'");
}

std::string method_name(AlignMethod m) {
    switch (m) {
        case AlignMethod::sinkhorn_l2: return "sinkhorn_l2";
        case AlignMethod::sinkhorn_mid: return "sinkhorn_mid";
        case AlignMethod::sinkhorn_rnd: return "sinkhorn_rnd";
        case AlignMethod::wm: return "wm";
        case AlignMethod::naive: return "naive";
    }
    throw ConfigError("unknown method");
}

AlignMethod method_from_name(const std::string& s) {
    if (s == "sinkhorn_l2") return AlignMethod::sinkhorn_l2;
    if (s == "sinkhorn_mid") return AlignMethod::sinkhorn_mid;
    if (s == "sinkhorn_rnd") return AlignMethod::sinkhorn_rnd;
    if (s == "wm") return AlignMethod::wm;
    if (s == "naive") return AlignMethod::naive;
    throw ConfigError("unknown method '" + s + "'");
}

std::string cl_method_name(ContinualMethod m) {
    switch (m) {
        case ContinualMethod::rebasin_replay: return "rebasin_replay";
        case ContinualMethod::finetune: return "finetune";
        case ContinualMethod::joint: return "joint";
    }
    throw ConfigError("unknown continual method");
}

ContinualMethod cl_method_from_name(const std::string& s) {
    if (s == "rebasin_replay") return ContinualMethod::rebasin_replay;
    if (s == "finetune") return ContinualMethod::finetune;
    if (s == "joint") return ContinualMethod::joint;
    throw ConfigError("unknown continual method '" + s + "'");
}

json optim_to_json(const OptimConfig& o) {
    json j;
    j["kind"] = o.kind == OptimKind::adam ? "adam" : "sgd";
    j["learning_rate"] = o.learning_rate;
    j["beta1"] = o.beta1;
    j["beta2"] = o.beta2;
    j["epsilon"] = o.epsilon;
    j["weight_decay"] = o.weight_decay;
    j["max_iters"] = o.max_iters;
    j["patience"] = o.early_stop.patience;
    j["min_improvement"] = o.early_stop.min_improvement;
    return j;
}

void optim_from_json(const json& j, OptimConfig& o) {
    if (j.contains("kind")) {
        const std::string k = j.at("kind").get<std::string>();
        if (k == "adam")
            o.kind = OptimKind::adam;
        else if (k == "sgd")
            o.kind = OptimKind::sgd;
        else
            throw ConfigError("unknown optimizer '" + k + "'");
    }
    if (j.contains("learning_rate")) o.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("beta1")) o.beta1 = j.at("beta1").get<double>();
    if (j.contains("beta2")) o.beta2 = j.at("beta2").get<double>();
    if (j.contains("epsilon")) o.epsilon = j.at("epsilon").get<double>();
    if (j.contains("weight_decay")) o.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("max_iters")) o.max_iters = j.at("max_iters").get<std::size_t>();
    if (j.contains("patience")) o.early_stop.patience = j.at("patience").get<std::size_t>();
    if (j.contains("min_improvement"))
        o.early_stop.min_improvement = j.at("min_improvement").get<double>();
}

json sinkhorn_to_json(const SinkhornConfig& sk) {
    json j;
    j["tau"] = sk.tau;
    j["iters"] = sk.iters;
    j["grad_mode"] = sk.grad_mode == GradMode::unrolled ? "unrolled" : "implicit";
    j["log_domain"] = sk.log_domain;
    return j;
}

void sinkhorn_from_json(const json& j, SinkhornConfig& sk) {
    if (j.contains("tau")) sk.tau = j.at("tau").get<double>();
    if (j.contains("iters")) sk.iters = j.at("iters").get<std::size_t>();
    if (j.contains("grad_mode")) {
        const std::string m = j.at("grad_mode").get<std::string>();
        if (m == "unrolled")
            sk.grad_mode = GradMode::unrolled;
        else if (m == "implicit")
            sk.grad_mode = GradMode::implicit;
        else
            throw ConfigError("unknown grad_mode '" + m + "'");
    }
    if (j.contains("log_domain")) sk.log_domain = j.at("log_domain").get<bool>();
}

json config_to_json_obj(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = experiment_name(cfg.experiment);
    j["dims"] = cfg.dims;
    j["activation"] = cfg.activation == Activation::tanh ? "tanh" : "relu";
    j["init"] = cfg.init == InitKind::glorot ? "glorot" : "standard_normal";
    j["dataset"] = cfg.dataset;
    j["images_path"] = cfg.images_path;
    j["labels_path"] = cfg.labels_path;
    j["train_rows"] = cfg.train_rows;
    j["test_rows"] = cfg.test_rows;
    j["noise_sd"] = cfg.noise_sd;
    j["optim"] = optim_to_json(cfg.optim);
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["method"] = method_name(cfg.method);
    json r;
    r["optim"] = optim_to_json(cfg.rebasin.optim);
    r["batch_size"] = cfg.rebasin.batch_size;
    j["rebasin"] = std::move(r);
    j["sinkhorn"] = sinkhorn_to_json(cfg.rebasin.sinkhorn);
    j["wm_sweeps"] = cfg.wm_sweeps;
    j["grid_points"] = cfg.grid_points;
    j["cl_method"] = cl_method_name(cfg.cl_method);
    json c;
    c["alpha"] = cfg.continual.alpha;
    c["delta_weight_decay"] = cfg.continual.delta_weight_decay;
    c["plan_lr"] = cfg.continual.plan_lr;
    c["delta_lr"] = cfg.continual.delta_lr;
    c["epochs_per_episode"] = cfg.continual.epochs_per_episode;
    c["batch_size"] = cfg.continual.batch_size;
    c["replay_per_class"] = cfg.continual.replay_per_class;
    j["continual"] = std::move(c);
    j["episodes"] = cfg.episodes;
    j["episode_train_rows"] = cfg.episode_train_rows;
    j["episode_test_rows"] = cfg.episode_test_rows;
    j["runs"] = cfg.runs;
    j["seed"] = cfg.base_seed;
    j["out"] = cfg.out_dir;
    return j;
}

ExperimentConfig config_from_json_obj(const json& j) {
    ExperimentConfig cfg;
    try {
        cfg.experiment = experiment_from_name(j.at("experiment").get<std::string>());
        if (j.contains("dims")) cfg.dims = j.at("dims").get<std::vector<std::size_t>>();
        if (j.contains("activation")) {
            const std::string a = j.at("activation").get<std::string>();
            if (a == "tanh")
                cfg.activation = Activation::tanh;
            else if (a == "relu")
                cfg.activation = Activation::relu;
            else
                throw ConfigError("unknown activation '" + a + "'");
        }
        if (j.contains("init")) {
            const std::string i = j.at("init").get<std::string>();
            if (i == "glorot")
                cfg.init = InitKind::glorot;
            else if (i == "standard_normal")
                cfg.init = InitKind::standard_normal;
            else
                throw ConfigError("unknown init '" + i + "'");
        }
        if (j.contains("dataset")) cfg.dataset = j.at("dataset").get<std::string>();
        if (j.contains("images_path")) cfg.images_path = j.at("images_path").get<std::string>();
        if (j.contains("labels_path")) cfg.labels_path = j.at("labels_path").get<std::string>();
        if (j.contains("train_rows")) cfg.train_rows = j.at("train_rows").get<std::size_t>();
        if (j.contains("test_rows")) cfg.test_rows = j.at("test_rows").get<std::size_t>();
        if (j.contains("noise_sd")) cfg.noise_sd = j.at("noise_sd").get<double>();
        if (j.contains("optim")) optim_from_json(j.at("optim"), cfg.optim);
        if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<std::size_t>();
        if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<std::size_t>();
        if (j.contains("method")) cfg.method = method_from_name(j.at("method").get<std::string>());
        if (j.contains("rebasin")) {
            const json& r = j.at("rebasin");
            if (r.contains("optim")) optim_from_json(r.at("optim"), cfg.rebasin.optim);
            if (r.contains("batch_size"))
                cfg.rebasin.batch_size = r.at("batch_size").get<std::size_t>();
        }
        if (j.contains("sinkhorn")) {
            sinkhorn_from_json(j.at("sinkhorn"), cfg.rebasin.sinkhorn);
            cfg.continual.sinkhorn = cfg.rebasin.sinkhorn;
        }
        if (j.contains("wm_sweeps")) cfg.wm_sweeps = j.at("wm_sweeps").get<std::size_t>();
        if (j.contains("grid_points")) cfg.grid_points = j.at("grid_points").get<std::size_t>();
        if (j.contains("cl_method"))
            cfg.cl_method = cl_method_from_name(j.at("cl_method").get<std::string>());
        if (j.contains("continual")) {
            const json& c = j.at("continual");
            if (c.contains("alpha")) cfg.continual.alpha = c.at("alpha").get<double>();
            if (c.contains("delta_weight_decay"))
                cfg.continual.delta_weight_decay = c.at("delta_weight_decay").get<double>();
            if (c.contains("plan_lr")) cfg.continual.plan_lr = c.at("plan_lr").get<double>();
            if (c.contains("delta_lr")) cfg.continual.delta_lr = c.at("delta_lr").get<double>();
            if (c.contains("epochs_per_episode"))
                cfg.continual.epochs_per_episode = c.at("epochs_per_episode").get<std::size_t>();
            if (c.contains("batch_size"))
                cfg.continual.batch_size = c.at("batch_size").get<std::size_t>();
            if (c.contains("replay_per_class"))
                cfg.continual.replay_per_class = c.at("replay_per_class").get<std::size_t>();
        }
        if (j.contains("episodes")) cfg.episodes = j.at("episodes").get<std::size_t>();
        if (j.contains("episode_train_rows"))
            cfg.episode_train_rows = j.at("episode_train_rows").get<std::size_t>();
        if (j.contains("episode_test_rows"))
            cfg.episode_test_rows = j.at("episode_test_rows").get<std::size_t>();
        if (j.contains("runs")) cfg.runs = j.at("runs").get<std::size_t>();
        if (j.contains("seed")) cfg.base_seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

LossKind loss_for(const Dataset& d) {
    return d.task == TaskKind::classification ? LossKind::cross_entropy : LossKind::mse;
}

PolyKind poly_kind(const std::string& name) {
    return name == "pol1" ? PolyKind::pol1 : PolyKind::pol3;
}

bool is_poly(const std::string& name) { return name == "pol1" || name == "pol3"; }

ImageSet image_base(const ExperimentConfig& cfg, std::size_t need, std::uint64_t seed) {
    if (cfg.dataset == "mnist") {
        ImageSet set = load_idx(cfg.images_path, cfg.labels_path);
        if (set.size() < need)
            throw InvalidInputError("experiment: IDX set smaller than requested rows");
        return set;
    }
    return gen_synthetic_images(need, seed);
}

// Seeded disjoint train/test split of a classification image base.
std::pair<Dataset, Dataset> image_split(const ExperimentConfig& cfg, std::uint64_t seed) {
    const std::size_t need = cfg.train_rows + cfg.test_rows;
    const ImageSet base = image_base(cfg, need, seed ^ 0x1337ULL);
    const Dataset full = to_dataset(base);
    Rng rng(seed ^ 0xc0ffeeULL);
    std::vector<std::size_t> perm = rng.permutation(full.size());
    std::vector<std::size_t> tr(perm.begin(), perm.begin() + cfg.train_rows);
    std::vector<std::size_t> te(perm.begin() + cfg.train_rows, perm.begin() + need);
    return {full.rows(tr), full.rows(te)};
}

std::pair<Dataset, Dataset> make_split(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (is_poly(cfg.dataset)) {
        return {gen_poly(poly_kind(cfg.dataset), cfg.train_rows, cfg.noise_sd, seed),
                gen_poly(poly_kind(cfg.dataset), cfg.test_rows, cfg.noise_sd, seed + 1)};
    }
    return image_split(cfg, seed);
}

Mlp fit_model(const ExperimentConfig& cfg, const Dataset& data, std::uint64_t seed) {
    const Mlp m0 = init_mlp(cfg.dims, cfg.activation, cfg.init, seed);
    return train(m0, data, loss_for(data), cfg.optim, cfg.epochs, cfg.batch_size, seed).first;
}

TransportPlan align(const ExperimentConfig& cfg, const Mlp& a, const Mlp& b,
                    const std::optional<Dataset>& data, std::uint64_t seed) {
    switch (cfg.method) {
        case AlignMethod::naive:
            return identity_plan(a.hidden_widths(), PlanMode::hard);
        case AlignMethod::wm:
            return weight_matching(a, b, cfg.wm_sweeps, seed);
        default: {
            RebasinConfig rc = cfg.rebasin;
            rc.seed = seed;
            const CostKind kind = cfg.method == AlignMethod::sinkhorn_l2 ? CostKind::l2
                                  : cfg.method == AlignMethod::sinkhorn_mid ? CostKind::mid
                                                                            : CostKind::rnd;
            return optimize_plan(a, b, kind,
                                 kind == CostKind::l2 ? std::optional<Dataset>{} : data, rc)
                .hard;
        }
    }
}

TrialRow train_trial(const ExperimentConfig& cfg, std::size_t r, std::uint64_t seed) {
    const auto [train_set, test_set] = make_split(cfg, seed);
    const Mlp model = fit_model(cfg, train_set, seed);
    save_model(model,
               (std::filesystem::path(cfg.out_dir) / ("model_" + std::to_string(r) + ".json"))
                   .string());
    const LossKind loss = loss_for(train_set);
    TrialRow row{{"train_cost", cost(model, train_set, loss)},
                 {"test_cost", cost(model, test_set, loss)}};
    if (train_set.task == TaskKind::classification)
        row.emplace_back("test_accuracy", accuracy(model, test_set));
    return row;
}

TrialRow find_ot_trial(const ExperimentConfig& cfg, std::size_t, std::uint64_t seed) {
    Mlp a;
    std::optional<Dataset> data;
    if (cfg.dataset == "random") {
        a = init_mlp(cfg.dims, cfg.activation, InitKind::standard_normal, seed);
    } else {
        data = gen_poly(poly_kind(cfg.dataset), cfg.train_rows, cfg.noise_sd, seed);
        a = fit_model(cfg, *data, seed);
    }
    const TransportPlan truth = sample_plan(a.hidden_widths(), seed + kPairOffset);
    const Mlp b = apply_plan(a, truth);
    const TransportPlan expected = inverse(truth);

    const TransportPlan est = align(cfg, a, b, data, seed);
    const double l1 = l1_distance(a, apply_plan(b, est));
    double exact = 1.0;
    for (std::size_t i = 0; i < est.mats.size(); ++i)
        if (!(est.mats[i] == expected.mats[i])) exact = 0.0;
    return {{"l1", l1}, {"l1_x1000", l1 * 1000.0}, {"exact_recovery", exact}};
}

TrialRow lmc_trial(const ExperimentConfig& cfg, std::size_t r, std::uint64_t seed) {
    const auto [train_set, test_set] = make_split(cfg, seed);
    const Mlp a = fit_model(cfg, train_set, seed);
    const Mlp b = fit_model(cfg, train_set, seed + kPairOffset);

    const TransportPlan plan = align(cfg, a, b, train_set, seed);
    const Mlp b2 = apply_plan(b, plan);

    const LossKind loss = loss_for(train_set);
    const CurveReport curve = cost_curve(a, b2, train_set, loss, cfg.grid_points);
    write_text_file(
        (std::filesystem::path(cfg.out_dir) / ("curve_" + std::to_string(r) + ".csv")).string(),
        curve_csv(curve));
    return {{"barrier", barrier(curve)},
            {"auc", auc(curve)},
            {"cost_a", curve.endpoint_cost_a},
            {"cost_b", curve.endpoint_cost_b},
            {"l1", l1_distance(a, b2)}};
}

TrialRow continual_trial(const ExperimentConfig& cfg, std::size_t r, std::uint64_t seed) {
    const std::size_t per_ep = cfg.episode_train_rows + cfg.episode_test_rows;
    const ImageSet base = image_base(cfg, cfg.episodes * per_ep, seed ^ 0x1337ULL);
    const std::vector<Episode> stream = make_rotated_stream(
        base, cfg.episodes, cfg.episode_train_rows, cfg.episode_test_rows, seed);

    const Mlp m0 = init_mlp(cfg.dims, cfg.activation, cfg.init, seed);
    const Mlp theta0 = train(m0, stream[0].train, LossKind::cross_entropy, cfg.optim, cfg.epochs,
                             cfg.batch_size, seed)
                           .first;

    ContinualConfig cc = cfg.continual;
    cc.seed = seed;
    StreamReport rep;
    switch (cfg.cl_method) {
        case ContinualMethod::rebasin_replay:
            rep = run_stream(theta0, stream, cc);
            break;
        case ContinualMethod::finetune:
            rep = run_finetune(theta0, stream, cfg.optim, cfg.epochs, cfg.batch_size, seed);
            break;
        case ContinualMethod::joint:
            rep = run_joint(theta0, stream, cfg.optim, cfg.epochs, cfg.batch_size, seed);
            break;
    }
    write_text_file(
        (std::filesystem::path(cfg.out_dir) / ("stream_" + std::to_string(r) + ".json")).string(),
        stream_report_json(rep, cc));
    return {{"avg_accuracy", rep.final_avg_accuracy}, {"forgetting", rep.final_forgetting}};
}

void set_path(json& root, const std::string& key, const json& value) {
    json* at = &root;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (part.empty()) throw ConfigError("override: empty key segment in '" + key + "'");
        if (dot == std::string::npos) {
            (*at)[part] = value;
            return;
        }
        at = &(*at)[part];
        start = dot + 1;
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    if (runs < 1) throw ConfigError("config: runs must be >= 1");
    optim.validate();
    rebasin.optim.validate();
    continual.validate();
    if (dims.size() < 3) throw ConfigError("config: dims needs input, hidden, output");

    const bool image_set = cfg_is_image();
    switch (experiment) {
        case ExperimentKind::find_ot:
            if (dataset != "random" && !is_poly(dataset))
                throw ConfigError("config: find_ot dataset must be random, pol1, or pol3");
            if (dataset == "random" &&
                (method == AlignMethod::sinkhorn_mid || method == AlignMethod::sinkhorn_rnd))
                throw ConfigError("config: data-driven costs need a trained-dataset regime");
            break;
        case ExperimentKind::continual:
            if (!image_set)
                throw ConfigError("config: continual needs an image dataset (mnist/synthetic)");
            if (episodes < 1) throw ConfigError("config: episodes must be >= 1");
            break;
        default:
            if (!is_poly(dataset) && !image_set)
                throw ConfigError("config: dataset must be pol1, pol3, mnist, or synthetic");
            break;
    }
    if (dataset == "mnist" && (images_path.empty() || labels_path.empty()))
        throw ConfigError("config: mnist dataset needs images_path and labels_path");
    if (train_rows == 0 || batch_size == 0) throw ConfigError("config: counts must be positive");
}

bool ExperimentConfig::cfg_is_image() const {
    return dataset == "mnist" || dataset == "synthetic";
}

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config: malformed JSON");
    for (const std::string& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must look like key=value: '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string raw = kv.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;  // plain string
        set_path(j, key, value);
    }
    return config_from_json_obj(j);
}

std::string config_json(const ExperimentConfig& cfg) {
    return config_to_json_obj(cfg).dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);

    ExperimentResult res;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        const std::uint64_t seed = cfg.base_seed + r;
        TrialRow row;
        switch (cfg.experiment) {
            case ExperimentKind::train: row = train_trial(cfg, r, seed); break;
            case ExperimentKind::find_ot: row = find_ot_trial(cfg, r, seed); break;
            case ExperimentKind::lmc: row = lmc_trial(cfg, r, seed); break;
            case ExperimentKind::continual: row = continual_trial(cfg, r, seed); break;
        }
        res.trials.push_back(std::move(row));
    }

    std::ostringstream csv;
    csv.precision(17);
    csv << "trial,seed";
    for (const auto& [name, _] : res.trials.front()) csv << ',' << name;
    csv << "\n";
    for (std::size_t r = 0; r < res.trials.size(); ++r) {
        csv << r << ',' << (cfg.base_seed + r);
        for (const auto& [_, value] : res.trials[r]) csv << ',' << value;
        csv << "\n";
    }
    res.trials_csv = csv.str();

    json metrics;
    for (std::size_t c = 0; c < res.trials.front().size(); ++c) {
        const std::string& name = res.trials.front()[c].first;
        double mean = 0.0;
        for (const TrialRow& row : res.trials) mean += row[c].second;
        mean /= static_cast<double>(res.trials.size());
        double sd = 0.0;
        if (res.trials.size() > 1) {
            for (const TrialRow& row : res.trials) {
                const double d = row[c].second - mean;
                sd += d * d;
            }
            sd = std::sqrt(sd / static_cast<double>(res.trials.size() - 1));
        }
        metrics[name] = {{"mean", mean}, {"sd", sd}};
    }
    json summary;
    summary["config"] = config_to_json_obj(cfg);
    summary["runs"] = cfg.runs;
    summary["metrics"] = std::move(metrics);
    res.summary_json = summary.dump(2) + "\n";

    const std::filesystem::path out(cfg.out_dir);
    write_text_file((out / "trials.csv").string(), res.trials_csv);
    write_text_file((out / "summary.json").string(), res.summary_json);
    return res;
}

}  // namespace rebasin
