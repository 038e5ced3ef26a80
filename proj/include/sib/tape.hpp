#pragma once

#include <vector>

#include "sib/matrix.hpp"

namespace sib {

// Handle to a node on a Tape.
struct Var {
    int id = -1;
};

// Reverse-mode tape. A forward pass appends primitive nodes; backward()
// replays them in exact reverse order, accumulating gradients. Tapes are
// rebuilt from scratch for every forward pass.
class Tape {
public:
    // Leaf with a gradient buffer (a trainable parameter view).
    Var leaf(const Matrix& value);
    // Leaf without gradient (data: features, adjacency, noise, targets).
    Var constant(const Matrix& value);
    Var constant_scalar(double v);

    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var add(Var a, Var b);
    // a: r x c, bias: 1 x c, broadcast over rows
    Var add_rowvec(Var a, Var bias);
    Var sub(Var a, Var b);
    Var hadamard(Var a, Var b);
    Var scale(Var a, double s);
    Var relu(Var a);
    Var tanh_act(Var a);
    // Elementwise sqrt; d/dx at x == 0 is taken as 0.
    Var sqrt_elem(Var a);
    // Row-stochastic softmax with per-row max subtraction.
    Var rowwise_softmax(Var a);
    // Divide each row by its sum; rows with sum < eps become uniform (1/cols)
    // and propagate zero gradient.
    Var row_normalize(Var a, double eps);
    // r x c -> r x 1, log(sum_j exp(x_ij)) with per-row max shift.
    Var log_sum_exp_rows(Var a);
    Var sum_all(Var a);
    Var row_slice(Var a, int row);
    Var concat_cols(const std::vector<Var>& xs);

    // loss must be 1x1. Fills gradient buffers of every node that
    // (transitively) requires grad.
    void backward(Var loss);

    const Matrix& value(Var v) const { return nodes_[v.id].value; }
    // Zero matrix when backward has not touched the node.
    const Matrix& grad(Var v) const;
    double scalar(Var v) const;

    int size() const { return static_cast<int>(nodes_.size()); }

private:
    enum class Op {
        Leaf,
        Constant,
        MatMul,
        Transpose,
        Add,
        AddRowVec,
        Sub,
        Hadamard,
        Scale,
        Relu,
        Tanh,
        Sqrt,
        RowSoftmax,
        RowNormalize,
        LogSumExpRows,
        SumAll,
        RowSlice,
        ConcatCols,
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        std::vector<int> many;
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        bool grad_alloc = false;
        int iarg = 0;
        double darg = 0.0;
    };

    Var push(Node n);
    Matrix& grad_buf(int id);
    void backprop(const Node& n);

    std::vector<Node> nodes_;
    Matrix zero_;
};

// Composite losses built from tape primitives.

// sqrt(sum_ij m_ij^2) -> 1x1
Var frobenius_norm(Tape& t, Var m);
// Squared error (pred - target)^2 for a 1x1 prediction -> 1x1
Var mean_squared_error(Tape& t, Var pred, double target);
// Cross entropy -log softmax(logits)[label] for a 1xC logits row -> 1x1.
// Throws DomainError when label is out of range.
Var cross_entropy(Tape& t, Var logits, int label);
// Arithmetic mean of 1x1 scalars -> 1x1
Var mean_of(Tape& t, const std::vector<Var>& xs);

}  // namespace sib
