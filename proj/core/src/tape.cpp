#include "rebasin/tape.hpp"

#include <cmath>

namespace rebasin {

Tape::NodeId Tape::push(Matrix value, bool requires_grad,
                        std::function<void(Tape&, NodeId)> back) {
    nodes_.push_back(Node{std::move(value), Matrix{}, requires_grad, std::move(back)});
    return nodes_.size() - 1;
}

void Tape::accumulate(NodeId id, const Matrix& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.empty()) {
        n.grad = g;
    } else {
        for (std::size_t i = 0; i < n.grad.size(); ++i) n.grad[i] += g[i];
    }
}

Tape::NodeId Tape::leaf(Matrix v) { return push(std::move(v), true); }
Tape::NodeId Tape::constant(Matrix v) { return push(std::move(v), false); }

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
    Matrix y = rebasin::matmul(value(a), value(b));
    return push(std::move(y), needs_grad(a) || needs_grad(b), [a, b](Tape& t, NodeId self) {
        const Matrix& g = t.nodes_[self].grad;
        if (t.needs_grad(a)) t.accumulate(a, rebasin::matmul_nt(g, t.value(b)));
        if (t.needs_grad(b)) t.accumulate(b, rebasin::matmul(t.value(a).transposed(), g));
    });
}

Tape::NodeId Tape::matmul_nt(NodeId a, NodeId b) {
    Matrix y = rebasin::matmul_nt(value(a), value(b));
    return push(std::move(y), needs_grad(a) || needs_grad(b), [a, b](Tape& t, NodeId self) {
        const Matrix& g = t.nodes_[self].grad;
        if (t.needs_grad(a)) t.accumulate(a, rebasin::matmul(g, t.value(b)));
        if (t.needs_grad(b)) t.accumulate(b, rebasin::matmul(g.transposed(), t.value(a)));
    });
}

Tape::NodeId Tape::transpose(NodeId a) {
    return push(value(a).transposed(), needs_grad(a), [a](Tape& t, NodeId self) {
        t.accumulate(a, t.nodes_[self].grad.transposed());
    });
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    return push(rebasin::add(value(a), value(b)), needs_grad(a) || needs_grad(b),
                [a, b](Tape& t, NodeId self) {
                    const Matrix& g = t.nodes_[self].grad;
                    t.accumulate(a, g);
                    t.accumulate(b, g);
                });
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
    return push(rebasin::sub(value(a), value(b)), needs_grad(a) || needs_grad(b),
                [a, b](Tape& t, NodeId self) {
                    const Matrix& g = t.nodes_[self].grad;
                    t.accumulate(a, g);
                    if (t.needs_grad(b)) t.accumulate(b, scaled(g, -1.0));
                });
}

Tape::NodeId Tape::scale(NodeId a, double s) {
    return push(scaled(value(a), s), needs_grad(a), [a, s](Tape& t, NodeId self) {
        t.accumulate(a, scaled(t.nodes_[self].grad, s));
    });
}

Tape::NodeId Tape::lincomb(double ca, NodeId a, double cb, NodeId b) {
    return push(rebasin::lincomb(ca, value(a), cb, value(b)), needs_grad(a) || needs_grad(b),
                [ca, a, cb, b](Tape& t, NodeId self) {
                    const Matrix& g = t.nodes_[self].grad;
                    if (t.needs_grad(a)) t.accumulate(a, scaled(g, ca));
                    if (t.needs_grad(b)) t.accumulate(b, scaled(g, cb));
                });
}

Tape::NodeId Tape::add_bias_rows(NodeId x, NodeId bias) {
    const Matrix& xm = value(x);
    const Matrix& bm = value(bias);
    if (bm.cols() != 1 || bm.rows() != xm.cols())
        throw DimensionError("add_bias_rows: bias must be cols(x) x 1");
    Matrix y = xm;
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += bm(j, 0);
    return push(std::move(y), needs_grad(x) || needs_grad(bias), [x, bias](Tape& t, NodeId self) {
        const Matrix& g = t.nodes_[self].grad;
        t.accumulate(x, g);
        if (t.needs_grad(bias)) {
            Matrix gb(g.cols(), 1);
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) gb(j, 0) += g(i, j);
            t.accumulate(bias, gb);
        }
    });
}

Tape::NodeId Tape::activation(NodeId a, Activation act) {
    Matrix y = value(a);
    if (act == Activation::tanh) {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i]);
    } else {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
    }
    return push(std::move(y), needs_grad(a), [a, act](Tape& t, NodeId self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& y = t.value(self);
        Matrix ga(g.rows(), g.cols());
        if (act == Activation::tanh) {
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * (1.0 - y[i] * y[i]);
        } else {
            const Matrix& x = t.value(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] = x[i] > 0.0 ? g[i] : 0.0;
        }
        t.accumulate(a, ga);
    });
}

Tape::NodeId Tape::slice(NodeId flat, std::size_t offset, std::size_t rows, std::size_t cols) {
    const Matrix& f = value(flat);
    if (f.cols() != 1) throw DimensionError("slice: source must be a column vector");
    if (offset + rows * cols > f.size()) throw DimensionError("slice: out of range");
    Matrix y(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) y[i] = f[offset + i];
    return push(std::move(y), needs_grad(flat), [flat, offset](Tape& t, NodeId self) {
        const Matrix& g = t.nodes_[self].grad;
        Matrix gf(t.value(flat).rows(), 1);
        for (std::size_t i = 0; i < g.size(); ++i) gf[offset + i] = g[i];
        t.accumulate(flat, gf);
    });
}

Tape::NodeId Tape::sinkhorn_op(NodeId x, const SinkhornConfig& cfg) {
    auto trace = std::make_shared<SinkhornTrace>();
    Matrix y = sinkhorn(value(x), cfg, trace.get());
    return push(std::move(y), needs_grad(x), [x, cfg, trace](Tape& t, NodeId self) {
        t.accumulate(x, sinkhorn_vjp_from_trace(*trace, cfg, t.nodes_[self].grad));
    });
}

Tape::NodeId Tape::sum_squares_of(NodeId a) {
    Matrix y(1, 1);
    y(0, 0) = sum_squares(value(a));
    return push(std::move(y), needs_grad(a), [a](Tape& t, NodeId self) {
        const double g = t.nodes_[self].grad(0, 0);
        t.accumulate(a, scaled(t.value(a), 2.0 * g));
    });
}

Tape::NodeId Tape::mse_loss(NodeId pred, const Matrix& targets) {
    const Matrix& p = value(pred);
    if (!p.same_shape(targets)) throw DimensionError("mse_loss: target shape mismatch");
    Matrix y(1, 1);
    y(0, 0) = sum_squares(rebasin::sub(p, targets)) / static_cast<double>(p.rows());
    return push(std::move(y), needs_grad(pred), [pred, targets](Tape& t, NodeId self) {
        const double g = t.nodes_[self].grad(0, 0);
        Matrix gp = rebasin::sub(t.value(pred), targets);
        t.accumulate(pred, scaled(gp, 2.0 * g / static_cast<double>(gp.rows())));
    });
}

Tape::NodeId Tape::cross_entropy_loss(NodeId logits, const Matrix& onehot) {
    const Matrix& z = value(logits);
    if (!z.same_shape(onehot)) throw DimensionError("cross_entropy_loss: target shape mismatch");
    const std::size_t b = z.rows(), k = z.cols();
    auto softmax = std::make_shared<Matrix>(b, k);
    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        double mx = z(i, 0);
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, z(i, j));
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += std::exp(z(i, j) - mx);
        const double lse = mx + std::log(s);
        for (std::size_t j = 0; j < k; ++j) {
            (*softmax)(i, j) = std::exp(z(i, j) - lse);
            total += onehot(i, j) * (lse - z(i, j));
        }
    }
    Matrix y(1, 1);
    y(0, 0) = total / static_cast<double>(b);
    return push(std::move(y), needs_grad(logits), [logits, onehot, softmax](Tape& t, NodeId self) {
        const double g = t.nodes_[self].grad(0, 0);
        Matrix gz = rebasin::sub(*softmax, onehot);
        t.accumulate(logits, scaled(gz, g / static_cast<double>(gz.rows())));
    });
}

void Tape::backward(NodeId scalar_node) {
    if (ran_backward_) throw ConfigError("Tape: backward may run only once");
    ran_backward_ = true;
    const Matrix& v = value(scalar_node);
    if (v.rows() != 1 || v.cols() != 1)
        throw DimensionError("Tape::backward: node must be scalar (1x1)");
    nodes_[scalar_node].grad = Matrix(1, 1, 1.0);
    for (std::size_t id = scalar_node + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (n.back && !n.grad.empty() && n.requires_grad) n.back(*this, id);
    }
}

const Matrix& Tape::grad(NodeId leaf) const {
    const Node& n = nodes_[leaf];
    if (!n.requires_grad)
        throw ConfigError("Tape::grad: node was not marked differentiable");
    static const Matrix empty;
    if (n.grad.empty()) {
        // Constant w.r.t. the recorded cost: zero gradient of the leaf's shape.
        const_cast<Node&>(n).grad = Matrix(n.value.rows(), n.value.cols(), 0.0);
    }
    return n.grad;
}

}  // namespace rebasin
