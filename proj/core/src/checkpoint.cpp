#include "rebasin/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rebasin/errors.hpp"

namespace rebasin {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> data(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) data[i] = m[i];
    j["data"] = std::move(data);
    return j;
}

Matrix matrix_from_json(const json& j) {
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols)
        throw FormatError("checkpoint: matrix data length != rows*cols");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = data[i];
    return m;
}

std::string activation_name(Activation a) {
    return a == Activation::tanh ? "tanh" : "relu";
}

Activation activation_from_name(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "relu") return Activation::relu;
    throw FormatError("checkpoint: unknown activation '" + s + "'");
}

json sinkhorn_to_json(const SinkhornConfig& sk) {
    json j;
    j["tau"] = sk.tau;
    j["iters"] = sk.iters;
    j["grad_mode"] = sk.grad_mode == GradMode::unrolled ? "unrolled" : "implicit";
    j["log_domain"] = sk.log_domain;
    return j;
}

SinkhornConfig sinkhorn_from_json(const json& j) {
    SinkhornConfig sk;
    sk.tau = j.at("tau").get<double>();
    sk.iters = j.at("iters").get<std::size_t>();
    const std::string mode = j.at("grad_mode").get<std::string>();
    if (mode == "unrolled")
        sk.grad_mode = GradMode::unrolled;
    else if (mode == "implicit")
        sk.grad_mode = GradMode::implicit;
    else
        throw FormatError("checkpoint: unknown grad_mode '" + mode + "'");
    sk.log_domain = j.at("log_domain").get<bool>();
    return sk;
}

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw FormatError("checkpoint: malformed JSON");
    return j;
}

}  // namespace

std::string model_json(const Mlp& model) {
    json j;
    j["kind"] = "mlp";
    j["activation"] = activation_name(model.hidden_activation);
    j["dims"] = model.dims();
    json layers = json::array();
    for (const Mlp::Layer& l : model.layers) {
        json lj;
        lj["weight"] = matrix_to_json(l.weight);
        lj["bias"] = matrix_to_json(l.bias);
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    return j.dump(2) + "\n";
}

Mlp model_from_json(const std::string& text) {
    const json j = parse(text);
    try {
        if (j.at("kind").get<std::string>() != "mlp")
            throw FormatError("checkpoint: not a model container");
        Mlp model;
        model.hidden_activation = activation_from_name(j.at("activation").get<std::string>());
        for (const json& lj : j.at("layers")) {
            Mlp::Layer l;
            l.weight = matrix_from_json(lj.at("weight"));
            l.bias = matrix_from_json(lj.at("bias"));
            if (l.bias.cols() != 1 || l.bias.rows() != l.weight.rows())
                throw FormatError("checkpoint: layer bias shape mismatch");
            model.layers.push_back(std::move(l));
        }
        if (model.layers.empty()) throw FormatError("checkpoint: model has no layers");
        const auto dims = j.at("dims").get<std::vector<std::size_t>>();
        if (dims != model.dims()) throw FormatError("checkpoint: dims do not match layers");
        return model;
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
}

void save_model(const Mlp& model, const std::string& path) {
    write_text_file(path, model_json(model));
}

Mlp load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

std::string plan_json(const PlanCheckpoint& ckpt) {
    json j;
    j["kind"] = "plan";
    j["mode"] = ckpt.plan.mode == PlanMode::hard ? "hard" : "soft_params";
    json mats = json::array();
    for (const Matrix& m : ckpt.plan.mats) mats.push_back(matrix_to_json(m));
    j["mats"] = std::move(mats);
    j["sinkhorn"] = sinkhorn_to_json(ckpt.sinkhorn);
    return j.dump(2) + "\n";
}

PlanCheckpoint plan_from_json(const std::string& text) {
    const json j = parse(text);
    try {
        if (j.at("kind").get<std::string>() != "plan")
            throw FormatError("checkpoint: not a plan container");
        PlanCheckpoint ckpt;
        const std::string mode = j.at("mode").get<std::string>();
        if (mode == "hard")
            ckpt.plan.mode = PlanMode::hard;
        else if (mode == "soft_params")
            ckpt.plan.mode = PlanMode::soft_params;
        else
            throw FormatError("checkpoint: unknown plan mode '" + mode + "'");
        for (const json& mj : j.at("mats")) ckpt.plan.mats.push_back(matrix_from_json(mj));
        ckpt.sinkhorn = sinkhorn_from_json(j.at("sinkhorn"));
        if (ckpt.plan.mode == PlanMode::hard)
            for (const Matrix& m : ckpt.plan.mats)
                if (!is_permutation_matrix(m))
                    throw FormatError("checkpoint: hard plan matrix is not a permutation");
        return ckpt;
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
}

void save_plan(const PlanCheckpoint& ckpt, const std::string& path) {
    write_text_file(path, plan_json(ckpt));
}

PlanCheckpoint load_plan(const std::string& path) { return plan_from_json(read_text_file(path)); }

std::string stream_report_json(const StreamReport& report, const ContinualConfig& cfg) {
    json j;
    j["kind"] = "stream_report";
    j["acc"] = report.acc;
    j["episode_seconds"] = report.episode_seconds;
    j["avg_accuracy"] = report.final_avg_accuracy;
    j["forgetting"] = report.final_forgetting;
    json c;
    c["alpha"] = cfg.alpha;
    c["delta_weight_decay"] = cfg.delta_weight_decay;
    c["plan_lr"] = cfg.plan_lr;
    c["delta_lr"] = cfg.delta_lr;
    c["epochs_per_episode"] = cfg.epochs_per_episode;
    c["batch_size"] = cfg.batch_size;
    c["replay_per_class"] = cfg.replay_per_class;
    c["sinkhorn"] = sinkhorn_to_json(cfg.sinkhorn);
    c["seed"] = cfg.seed;
    j["config"] = std::move(c);
    return j.dump(2) + "\n";
}

std::string stream_report_csv(const StreamReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "episode,avg_accuracy,forgetting\n";
    for (std::size_t e = 0; e < report.acc.size(); ++e) {
        out << e << ',' << avg_accuracy(report, e + 1) << ','
            << (e >= 1 ? forgetting(report, e + 1) : 0.0) << "\n";
    }
    return out.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write file: " + path);
    out << text;
}

}  // namespace rebasin
