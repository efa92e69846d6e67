#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "rebasin/matrix.hpp"
#include "rebasin/sinkhorn.hpp"

namespace rebasin {

enum class Activation { tanh, relu };

// Single-use reverse-mode tape over Matrix values. Record a scalar expression,
// call backward once, read gradients off the leaves. Nodes are identified by
// creation index; every node's inputs precede it in the record.
class Tape {
public:
    using NodeId = std::size_t;

    NodeId leaf(Matrix v);      // differentiable
    NodeId constant(Matrix v);  // gradient is never tracked

    const Matrix& value(NodeId id) const { return nodes_[id].value; }

    // y = a b
    NodeId matmul(NodeId a, NodeId b);
    // y = a b^T
    NodeId matmul_nt(NodeId a, NodeId b);
    NodeId transpose(NodeId a);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId scale(NodeId a, double s);
    // ca*a + cb*b
    NodeId lincomb(double ca, NodeId a, double cb, NodeId b);
    // x: B x n, bias: n x 1; adds bias to every row of x
    NodeId add_bias_rows(NodeId x, NodeId bias);
    NodeId activation(NodeId a, Activation act);
    // Reinterprets `count` consecutive entries of a flat column vector as a
    // rows x cols matrix (row-major).
    NodeId slice(NodeId flat, std::size_t offset, std::size_t rows, std::size_t cols);
    NodeId sinkhorn_op(NodeId x, const SinkhornConfig& cfg);

    // scalar (1x1) reductions
    NodeId sum_squares_of(NodeId a);
    // mean over rows of the squared row error
    NodeId mse_loss(NodeId pred, const Matrix& targets);
    // mean over rows of logsumexp(z) - z . y, softmax applied internally
    NodeId cross_entropy_loss(NodeId logits, const Matrix& onehot);

    void backward(NodeId scalar_node);
    const Matrix& grad(NodeId leaf) const;

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        std::function<void(Tape&, NodeId)> back;
    };

    NodeId push(Matrix value, bool requires_grad, std::function<void(Tape&, NodeId)> back = {});
    void accumulate(NodeId id, const Matrix& g);
    bool needs_grad(NodeId id) const { return nodes_[id].requires_grad; }

    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

}  // namespace rebasin
