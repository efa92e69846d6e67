#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "rebasin/hungarian.hpp"

using namespace rebasin;
using rebasin::testing::brute_force_lap;
using rebasin::testing::random_matrix;

TEST_CASE("identity matrix, maximize -> diagonal assignment") {
    const auto a = hungarian(Matrix::identity(4), Objective::maximize);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] == i);
}

TEST_CASE("1x1") {
    CHECK(hungarian(Matrix(1, 1, {3.0}), Objective::minimize) == std::vector<std::size_t>{0});
}

TEST_CASE("objective equals brute force on random 5x5 matrices") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix m = random_matrix(5, 5, rng, -10.0, 10.0);
        for (Objective obj : {Objective::maximize, Objective::minimize}) {
            const auto a = hungarian(m, obj);
            double total = 0.0;
            for (std::size_t i = 0; i < 5; ++i) total += m(i, a[i]);
            const double best = brute_force_lap(m, obj == Objective::maximize);
            CHECK(total == doctest::Approx(best).epsilon(1e-12));
        }
    }
}

TEST_CASE("assignment matches the lexicographic brute-force choice on ties") {
    // uniform matrix: every assignment ties; lexicographic smallest is i -> i
    const auto a = hungarian(Matrix(3, 3, 1.0), Objective::maximize);
    CHECK(a == std::vector<std::size_t>({0, 1, 2}));

    // constructed two-optimum instance: rows 0/1 can swap columns 0/1 freely
    Matrix m(3, 3, {5.0, 5.0, 0.0, 5.0, 5.0, 0.0, 0.0, 0.0, 7.0});
    const auto b = hungarian(m, Objective::maximize);
    CHECK(b == std::vector<std::size_t>({0, 1, 2}));

    // block ties across several sizes, checked against brute force
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix t = random_matrix(4, 4, rng, 0.0, 3.0);
        // quantize to force ties
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::round(t[i]);
        std::vector<std::size_t> expect;
        brute_force_lap(t, true, &expect);
        CHECK(hungarian(t, Objective::maximize) == expect);
    }
}

TEST_CASE("maximize on M equals minimize on -M") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = random_matrix(6, 6, rng, -4.0, 4.0);
        CHECK(hungarian(m, Objective::maximize) == hungarian(scaled(m, -1.0), Objective::minimize));
    }
}

TEST_CASE("round_plan basics") {
    CHECK(round_plan(Matrix::identity(3)) == Matrix::identity(3));
    Matrix soft(2, 2, {0.9, 0.1, 0.1, 0.9});
    CHECK(round_plan(soft) == Matrix::identity(2));
    CHECK(round_plan(Matrix(3, 3, 1.0 / 3.0)) == Matrix::identity(3));
}

TEST_CASE("round_plan output is orthogonal (P^T P = I)") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix p = round_plan(random_matrix(5, 5, rng, 0.0, 1.0));
        CHECK(max_abs_diff(matmul_tn(p, p), Matrix::identity(5)) == 0.0);
    }
}

TEST_CASE("non-square or non-finite inputs are rejected") {
    CHECK_THROWS_AS(hungarian(Matrix(2, 3), Objective::maximize), DimensionError);
    Matrix bad(2, 2, {1.0, 2.0, std::numeric_limits<double>::infinity(), 0.0});
    CHECK_THROWS_AS(hungarian(bad, Objective::minimize), InvalidInputError);
}
