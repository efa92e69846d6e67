#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "rebasin/checkpoint.hpp"
#include "rebasin/data.hpp"

using namespace rebasin;

TEST_CASE("model json round trip is bit exact") {
    const Mlp m = init_mlp({3, 7, 7, 2}, Activation::relu, InitKind::standard_normal, 99);
    const std::string text = model_json(m);
    const Mlp back = model_from_json(text);
    CHECK(back.hidden_activation == m.hidden_activation);
    REQUIRE(back.layers.size() == m.layers.size());
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        CHECK(back.layers[i].weight == m.layers[i].weight);
        CHECK(back.layers[i].bias == m.layers[i].bias);
    }
    // serialize-parse-serialize is a fixed point
    CHECK(model_json(back) == text);
}

TEST_CASE("model file save/load") {
    const auto dir = std::filesystem::temp_directory_path() / "rebasin_ckpt";
    std::filesystem::create_directories(dir);
    const Mlp m = init_mlp({1, 4, 1}, Activation::tanh, InitKind::glorot, 5);
    const std::string path = (dir / "m.json").string();
    save_model(m, path);
    const Mlp back = load_model(path);
    CHECK(l1_distance(m, back) == 0.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed model documents are rejected") {
    CHECK_THROWS_AS(model_from_json("not json"), FormatError);
    CHECK_THROWS_AS(model_from_json("{}"), FormatError);
    CHECK_THROWS_AS(model_from_json(R"({"kind":"plan"})"), FormatError);
    CHECK_THROWS_AS(
        model_from_json(
            R"({"kind":"mlp","activation":"sigmoid","dims":[1,2,1],"layers":[]})"),
        FormatError);
}

TEST_CASE("plan json round trip preserves mode, matrices, and sinkhorn config") {
    PlanCheckpoint ckpt;
    ckpt.plan = sample_plan({4, 4}, 7);
    ckpt.sinkhorn.tau = 0.5;
    ckpt.sinkhorn.iters = 35;
    ckpt.sinkhorn.grad_mode = GradMode::implicit;
    ckpt.sinkhorn.log_domain = false;
    const std::string text = plan_json(ckpt);
    const PlanCheckpoint back = plan_from_json(text);
    CHECK(back.plan.mode == PlanMode::hard);
    CHECK(back.plan.mats[0] == ckpt.plan.mats[0]);
    CHECK(back.plan.mats[1] == ckpt.plan.mats[1]);
    CHECK(back.sinkhorn.tau == 0.5);
    CHECK(back.sinkhorn.iters == 35);
    CHECK(back.sinkhorn.grad_mode == GradMode::implicit);
    CHECK(back.sinkhorn.log_domain == false);
    CHECK(plan_json(back) == text);
}

TEST_CASE("hard plan containers must hold permutations") {
    PlanCheckpoint ckpt;
    ckpt.plan.mode = PlanMode::hard;
    ckpt.plan.mats.push_back(Matrix(2, 2, 0.5));
    CHECK_THROWS_AS(plan_from_json(plan_json(ckpt)), FormatError);
}

TEST_CASE("stream report exports") {
    StreamReport rep;
    rep.acc = {{0.5}, {0.4, 0.8}};
    rep.episode_seconds = {0.0, 1.5};
    rep.final_avg_accuracy = avg_accuracy(rep, 2);
    rep.final_forgetting = forgetting(rep, 2);
    ContinualConfig cfg;
    const std::string js = stream_report_json(rep, cfg);
    CHECK(js.find("\"acc\"") != std::string::npos);
    CHECK(js.find("\"alpha\"") != std::string::npos);
    CHECK(js.find("\"seed\"") != std::string::npos);

    const std::string csv = stream_report_csv(rep);
    CHECK(csv.rfind("episode,avg_accuracy,forgetting\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
