#include "doctest.h"
#include "helpers.hpp"
#include "rebasin/tape.hpp"

using namespace rebasin;
using rebasin::testing::max_fd_error;
using rebasin::testing::random_matrix;

TEST_CASE("sum of squares gradient is 2W") {
    Rng rng(1);
    Matrix w = random_matrix(3, 2, rng);
    Tape t;
    auto leaf = t.leaf(w);
    t.backward(t.sum_squares_of(leaf));
    CHECK(max_abs_diff(t.grad(leaf), scaled(w, 2.0)) < 1e-14);
}

TEST_CASE("untouched leaf has a zero gradient") {
    Tape t;
    auto used = t.leaf(Matrix(2, 2, 1.0));
    auto unused = t.leaf(Matrix(3, 1, 5.0));
    t.backward(t.sum_squares_of(used));
    CHECK(max_abs(t.grad(unused)) == 0.0);
    CHECK(t.grad(unused).rows() == 3);
}

TEST_CASE("constant nodes refuse grad reads") {
    Tape t;
    auto c = t.constant(Matrix(2, 2, 1.0));
    auto l = t.leaf(Matrix(2, 2, 1.0));
    t.backward(t.sum_squares_of(t.add(l, c)));
    CHECK_THROWS_AS(t.grad(c), ConfigError);
}

TEST_CASE("primitive gradients match finite differences") {
    Rng rng(7);
    const Matrix x = random_matrix(3, 3, rng);
    const Matrix other = random_matrix(3, 3, rng);
    const Matrix bias = random_matrix(3, 1, rng);

    auto check = [&](const std::function<Tape::NodeId(Tape&, Tape::NodeId)>& build) {
        Tape t;
        auto leaf = t.leaf(x);
        t.backward(build(t, leaf));
        const Matrix grad = t.grad(leaf);
        const double err = max_fd_error(grad, x, [&](const Matrix& v) {
            Tape tt;
            auto node = build(tt, tt.leaf(v));
            return tt.value(node)(0, 0);
        });
        CHECK(err < 1e-4);
    };

    check([&](Tape& t, Tape::NodeId l) {
        return t.sum_squares_of(t.matmul(l, t.constant(other)));
    });
    check([&](Tape& t, Tape::NodeId l) {
        return t.sum_squares_of(t.matmul_nt(t.constant(other), l));
    });
    check([&](Tape& t, Tape::NodeId l) { return t.sum_squares_of(t.transpose(l)); });
    check([&](Tape& t, Tape::NodeId l) {
        return t.sum_squares_of(t.sub(t.scale(l, 1.7), t.constant(other)));
    });
    check([&](Tape& t, Tape::NodeId l) {
        return t.sum_squares_of(t.lincomb(0.3, l, -2.0, t.constant(other)));
    });
    check([&](Tape& t, Tape::NodeId l) {
        return t.sum_squares_of(t.add_bias_rows(l, t.constant(bias)));
    });
    check([&](Tape& t, Tape::NodeId l) {
        return t.sum_squares_of(t.activation(l, Activation::tanh));
    });
    check([&](Tape& t, Tape::NodeId l) {
        return t.sum_squares_of(t.activation(t.scale(l, 3.0), Activation::relu));
    });
}

TEST_CASE("slice reshapes a flat vector and routes gradients back") {
    Rng rng(9);
    const Matrix flat = random_matrix(10, 1, rng);
    Tape t;
    auto leaf = t.leaf(flat);
    auto m = t.slice(leaf, 2, 2, 3);  // entries 2..7 as 2x3
    CHECK(t.value(m)(0, 0) == flat[2]);
    CHECK(t.value(m)(1, 2) == flat[7]);
    t.backward(t.sum_squares_of(m));
    const Matrix g = t.grad(leaf);
    CHECK(g[0] == 0.0);
    CHECK(g[9] == 0.0);
    CHECK(g[3] == doctest::Approx(2.0 * flat[3]));
}

TEST_CASE("mse loss value and gradient") {
    Matrix pred(2, 2, {1, 2, 3, 4});
    Matrix targ(2, 2, {0, 2, 3, 2});
    Tape t;
    auto leaf = t.leaf(pred);
    auto loss = t.mse_loss(leaf, targ);
    // row errors: 1^2+0, 0+2^2 -> mean (1+4)/2
    CHECK(t.value(loss)(0, 0) == doctest::Approx(2.5));
    t.backward(loss);
    const double err = max_fd_error(t.grad(leaf), pred, [&](const Matrix& v) {
        Tape tt;
        return tt.value(tt.mse_loss(tt.leaf(v), targ))(0, 0);
    });
    CHECK(err < 1e-4);
}

TEST_CASE("cross entropy of uniform logits is ln(k), gradient matches FD") {
    Matrix logits(3, 10, 0.0);
    Matrix onehot(3, 10, 0.0);
    onehot(0, 4) = onehot(1, 0) = onehot(2, 9) = 1.0;
    Tape t;
    auto leaf = t.leaf(logits);
    auto loss = t.cross_entropy_loss(leaf, onehot);
    CHECK(t.value(loss)(0, 0) == doctest::Approx(std::log(10.0)));
    t.backward(loss);
    Rng rng(4);
    const Matrix jitter = random_matrix(3, 10, rng, -2.0, 2.0);
    Tape t2;
    auto leaf2 = t2.leaf(jitter);
    t2.backward(t2.cross_entropy_loss(leaf2, onehot));
    const double err = max_fd_error(t2.grad(leaf2), jitter, [&](const Matrix& v) {
        Tape tt;
        return tt.value(tt.cross_entropy_loss(tt.leaf(v), onehot))(0, 0);
    });
    CHECK(err < 1e-4);
}

TEST_CASE("cross entropy is stable for huge logits") {
    Matrix logits(1, 3, {1000.0, 0.0, -1000.0});
    Matrix onehot(1, 3, {1.0, 0.0, 0.0});
    Tape t;
    auto loss = t.cross_entropy_loss(t.leaf(logits), onehot);
    CHECK(t.value(loss)(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("sinkhorn_op gradient on the tape matches finite differences") {
    SinkhornConfig cfg;
    cfg.iters = 5;
    Rng rng(21);
    const Matrix x = random_matrix(3, 3, rng);
    const Matrix w = random_matrix(3, 3, rng);
    Tape t;
    auto leaf = t.leaf(x);
    auto p = t.sinkhorn_op(leaf, cfg);
    t.backward(t.sum_squares_of(t.sub(p, t.constant(w))));
    const double err = max_fd_error(t.grad(leaf), x, [&](const Matrix& v) {
        Tape tt;
        auto pp = tt.sinkhorn_op(tt.leaf(v), cfg);
        return tt.value(tt.sum_squares_of(tt.sub(pp, tt.constant(w))))(0, 0);
    });
    CHECK(err < 1e-4);
}

TEST_CASE("backward can only run once") {
    Tape t;
    auto l = t.leaf(Matrix(1, 1, 2.0));
    auto s = t.sum_squares_of(l);
    t.backward(s);
    CHECK_THROWS_AS(t.backward(s), ConfigError);
}
