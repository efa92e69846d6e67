#include "doctest.h"
#include "helpers.hpp"
#include "rebasin/data.hpp"
#include "rebasin/plan.hpp"

using namespace rebasin;
using rebasin::testing::random_matrix;

TEST_CASE("identity hard plan leaves the model bitwise unchanged") {
    const Mlp m = init_mlp({2, 5, 5, 1}, Activation::tanh, InitKind::glorot, 1);
    const TransportPlan p = identity_plan(m.hidden_widths(), PlanMode::hard);
    const Mlp out = apply_plan(m, p);
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        CHECK(out.layers[i].weight == m.layers[i].weight);
        CHECK(out.layers[i].bias == m.layers[i].bias);
    }
}

TEST_CASE("swap plan on a 1-hidden model matches the hand permutation") {
    Mlp m;
    m.layers.push_back({Matrix(2, 2, {1, 2, 3, 4}), Matrix(2, 1, {5, 6})});
    m.layers.push_back({Matrix(1, 2, {7, 8}), Matrix(1, 1, {9})});
    TransportPlan p;
    p.mode = PlanMode::hard;
    p.mats.push_back(Matrix(2, 2, {0, 1, 1, 0}));
    const Mlp out = apply_plan(m, p);
    CHECK(out.layers[0].weight == Matrix(2, 2, {3, 4, 1, 2}));  // rows swapped
    CHECK(out.layers[0].bias == Matrix(2, 1, {6, 5}));
    CHECK(out.layers[1].weight == Matrix(1, 2, {8, 7}));  // columns swapped
    CHECK(out.layers[1].bias == Matrix(1, 1, {9}));
}

TEST_CASE("hard plans preserve the function") {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Mlp m = init_mlp({3, 7, 7, 7, 2}, Activation::tanh, InitKind::standard_normal,
                               100 + trial);
        const TransportPlan p = sample_plan(m.hidden_widths(), 200 + trial);
        const Mlp re = apply_plan(m, p);
        const Matrix x = random_matrix(100, 3, rng, -2.0, 2.0);
        CHECK(max_abs_diff(forward(m, x), forward(re, x)) < 1e-9);
    }
}

TEST_CASE("inverse plan restores the model bitwise") {
    const Mlp m = init_mlp({1, 6, 6, 1}, Activation::relu, InitKind::standard_normal, 3);
    const TransportPlan p = sample_plan(m.hidden_widths(), 17);
    const Mlp back = apply_plan(apply_plan(m, p), inverse(p));
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        CHECK(back.layers[i].weight == m.layers[i].weight);
        CHECK(back.layers[i].bias == m.layers[i].bias);
    }
    TransportPlan soft = identity_plan(m.hidden_widths(), PlanMode::soft_params);
    CHECK_THROWS_AS(inverse(soft), ConfigError);
}

TEST_CASE("plan validation") {
    const Mlp m = init_mlp({1, 4, 1}, Activation::tanh, InitKind::glorot, 5);
    TransportPlan wrong_count = identity_plan({4, 4}, PlanMode::hard);
    CHECK_THROWS_AS(check_plan(wrong_count, m), DimensionError);
    TransportPlan wrong_size = identity_plan({3}, PlanMode::hard);
    CHECK_THROWS_AS(check_plan(wrong_size, m), DimensionError);
    TransportPlan not_perm;
    not_perm.mode = PlanMode::hard;
    not_perm.mats.push_back(Matrix(4, 4, 0.25));
    CHECK_THROWS_AS(check_plan(not_perm, m), InvalidInputError);
}

TEST_CASE("is_permutation_matrix") {
    CHECK(is_permutation_matrix(Matrix::identity(3)));
    CHECK(is_permutation_matrix(Matrix(2, 2, {0, 1, 1, 0})));
    CHECK_FALSE(is_permutation_matrix(Matrix(2, 2, {1, 0, 1, 0})));
    CHECK_FALSE(is_permutation_matrix(Matrix(2, 2, {0.5, 0.5, 0.5, 0.5})));
    CHECK_FALSE(is_permutation_matrix(Matrix(2, 3)));
}

TEST_CASE("soft plan application uses the sinkhorn image") {
    const Mlp m = init_mlp({1, 3, 1}, Activation::tanh, InitKind::glorot, 8);
    TransportPlan soft = identity_plan(m.hidden_widths(), PlanMode::soft_params);
    SinkhornConfig sk;
    const Mlp out = apply_plan(m, soft, sk);
    const Matrix s = sinkhorn(soft.mats[0], sk);
    CHECK(max_abs_diff(out.layers[0].weight, matmul(s, m.layers[0].weight)) < 1e-15);
    CHECK(max_abs_diff(out.layers[1].weight, matmul_nt(m.layers[1].weight, s)) < 1e-15);
}

TEST_CASE("round_plan projects a soft plan to permutations") {
    Rng rng(21);
    TransportPlan soft;
    soft.mode = PlanMode::soft_params;
    soft.mats.push_back(random_matrix(5, 5, rng, -2.0, 2.0));
    soft.mats.push_back(random_matrix(5, 5, rng, -2.0, 2.0));
    SinkhornConfig sk;
    const TransportPlan hard = round_plan(soft, sk);
    CHECK(hard.mode == PlanMode::hard);
    for (const Matrix& p : hard.mats) CHECK(is_permutation_matrix(p));
}

TEST_CASE("interpolate endpoints and midpoint") {
    const Mlp a = init_mlp({1, 4, 1}, Activation::tanh, InitKind::glorot, 1);
    const Mlp b = init_mlp({1, 4, 1}, Activation::tanh, InitKind::glorot, 2);
    const Mlp at0 = interpolate(a, b, 0.0);
    const Mlp at1 = interpolate(a, b, 1.0);
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        CHECK(at0.layers[i].weight == a.layers[i].weight);
        CHECK(at1.layers[i].weight == b.layers[i].weight);
    }
    const Mlp mid = interpolate(a, b, 0.5);
    CHECK(mid.layers[0].weight[0] ==
          doctest::Approx(0.5 * (a.layers[0].weight[0] + b.layers[0].weight[0])));
    const Mlp same = interpolate(a, a, 0.37);
    CHECK(l1_distance(same, a) < 1e-12);  // (1-l)x + l x only up to roundoff
}
