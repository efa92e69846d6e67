#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "rebasin/data.hpp"
#include "rebasin/optim.hpp"

using namespace rebasin;

TEST_CASE("config validation") {
    OptimConfig c;
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.learning_rate = 0.1;
    c.early_stop.patience = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("sgd step is p -= lr * (g + wd * p)") {
    OptimConfig c;
    c.kind = OptimKind::sgd;
    c.learning_rate = 0.5;
    c.weight_decay = 0.2;
    Optimizer opt(c);
    Matrix p(1, 2, {1.0, -2.0});
    Matrix g(1, 2, {0.4, 0.0});
    opt.step({&p}, {&g});
    CHECK(p[0] == doctest::Approx(1.0 - 0.5 * (0.4 + 0.2 * 1.0)));
    CHECK(p[1] == doctest::Approx(-2.0 - 0.5 * (0.0 + 0.2 * -2.0)));
}

TEST_CASE("adam first step moves by lr in the gradient sign direction") {
    OptimConfig c;
    c.kind = OptimKind::adam;
    c.learning_rate = 0.1;
    Optimizer opt(c);
    Matrix p(1, 3, {0.0, 1.0, -1.0});
    Matrix g(1, 3, {0.3, -2.0, 0.0});
    opt.step({&p}, {&g});
    // bias-corrected m/v make the first update exactly lr * sign(g) up to eps
    CHECK(p[0] == doctest::Approx(-0.1).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(1.1).epsilon(1e-4));
    CHECK(p[2] == doctest::Approx(-1.0));
}

TEST_CASE("train: 0 epochs is a no-op") {
    const Dataset d = gen_poly(PolyKind::pol1, 50, 0.05, 1);
    const Mlp m = init_mlp({1, 10, 10, 1}, Activation::tanh, InitKind::glorot, 1);
    OptimConfig c;
    auto [out, hist] = train(m, d, LossKind::mse, c, 0, 10, 3);
    CHECK(hist.empty());
    for (std::size_t i = 0; i < m.layers.size(); ++i) CHECK(out.layers[i].weight == m.layers[i].weight);
}

TEST_CASE("train reaches a small mse on the affine task") {
    const Dataset d = gen_poly(PolyKind::pol1, 100, 0.0, 42);
    const Mlp m = init_mlp({1, 10, 10, 1}, Activation::tanh, InitKind::glorot, 9);
    OptimConfig c;
    c.kind = OptimKind::adam;
    c.learning_rate = 0.01;
    auto [trained, hist] = train(m, d, LossKind::mse, c, 500, 100, 5);
    CHECK(hist.size() == 500);
    CHECK(cost(trained, d, LossKind::mse) < 0.01);
    CHECK(hist.back() <= hist.front());
}

TEST_CASE("train is deterministic per seed") {
    const Dataset d = gen_poly(PolyKind::pol3, 80, 0.05, 2);
    const Mlp m = init_mlp({1, 8, 1}, Activation::tanh, InitKind::glorot, 4);
    OptimConfig c;
    c.learning_rate = 0.01;
    auto [a, ha] = train(m, d, LossKind::mse, c, 20, 16, 11);
    auto [b, hb] = train(m, d, LossKind::mse, c, 20, 16, 11);
    CHECK(ha == hb);
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        CHECK(a.layers[i].weight == b.layers[i].weight);
        CHECK(a.layers[i].bias == b.layers[i].bias);
    }
}

TEST_CASE("train rejects oversized batches") {
    const Dataset d = gen_poly(PolyKind::pol1, 10, 0.0, 1);
    const Mlp m = init_mlp({1, 4, 1}, Activation::tanh, InitKind::glorot, 1);
    OptimConfig c;
    CHECK_THROWS_AS(train(m, d, LossKind::mse, c, 1, 11, 0), ConfigError);
}
