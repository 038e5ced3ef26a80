#include "sib/tape.hpp"

#include <algorithm>
#include <cmath>

#include "sib/kernels.hpp"

namespace sib {

namespace {
const kern::KernelTable& K() { return kern::kernels(); }
}  // namespace

Var Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Matrix& Tape::grad_buf(int id) {
    Node& n = nodes_[id];
    if (!n.grad_alloc) {
        n.grad = Matrix::zeros(n.value.rows, n.value.cols);
        n.grad_alloc = true;
    }
    return n.grad;
}

const Matrix& Tape::grad(Var v) const {
    const Node& n = nodes_[v.id];
    if (n.grad_alloc) return n.grad;
    if (zero_.rows != n.value.rows || zero_.cols != n.value.cols)
        const_cast<Tape*>(this)->zero_ = Matrix::zeros(n.value.rows, n.value.cols);
    return zero_;
}

double Tape::scalar(Var v) const {
    const Matrix& m = value(v);
    if (m.rows != 1 || m.cols != 1)
        throw ShapeError("scalar: node is " + shape_str(m.rows, m.cols) + ", expected 1x1");
    return m.data[0];
}

Var Tape::leaf(const Matrix& value) {
    Node n;
    n.op = Op::Leaf;
    n.value = value;
    n.requires_grad = true;
    return push(std::move(n));
}

Var Tape::constant(const Matrix& value) {
    Node n;
    n.op = Op::Constant;
    n.value = value;
    n.requires_grad = false;
    return push(std::move(n));
}

Var Tape::constant_scalar(double v) { return constant(Matrix(1, 1, {v})); }

Var Tape::matmul(Var a, Var b) {
    const Matrix& A = nodes_[a.id].value;
    const Matrix& B = nodes_[b.id].value;
    if (A.cols != B.rows)
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(A.rows, A.cols) +
                         " x " + shape_str(B.rows, B.cols));
    Node n;
    n.op = Op::MatMul;
    n.a = a.id;
    n.b = b.id;
    n.value = Matrix(A.rows, B.cols);
    K().matmul(A.data.data(), B.data.data(), n.value.data.data(), A.rows, A.cols, B.cols);
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    return push(std::move(n));
}

Var Tape::transpose(Var a) {
    Node n;
    n.op = Op::Transpose;
    n.a = a.id;
    n.value = sib::transpose(nodes_[a.id].value);
    n.requires_grad = nodes_[a.id].requires_grad;
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    const Matrix& A = nodes_[a.id].value;
    const Matrix& B = nodes_[b.id].value;
    require_same_shape(A, B, "add");
    Node n;
    n.op = Op::Add;
    n.a = a.id;
    n.b = b.id;
    n.value = Matrix(A.rows, A.cols);
    K().add(A.data.data(), B.data.data(), n.value.data.data(), A.size());
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    return push(std::move(n));
}

Var Tape::add_rowvec(Var a, Var bias) {
    const Matrix& A = nodes_[a.id].value;
    const Matrix& B = nodes_[bias.id].value;
    if (B.rows != 1 || B.cols != A.cols)
        throw ShapeError("add_rowvec: bias " + shape_str(B.rows, B.cols) +
                         " does not broadcast over " + shape_str(A.rows, A.cols));
    Node n;
    n.op = Op::AddRowVec;
    n.a = a.id;
    n.b = bias.id;
    n.value = A;
    for (int i = 0; i < A.rows; ++i)
        K().add(A.data.data() + static_cast<std::size_t>(i) * A.cols, B.data.data(),
                n.value.data.data() + static_cast<std::size_t>(i) * A.cols,
                static_cast<std::size_t>(A.cols));
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[bias.id].requires_grad;
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    const Matrix& A = nodes_[a.id].value;
    const Matrix& B = nodes_[b.id].value;
    require_same_shape(A, B, "sub");
    Node n;
    n.op = Op::Sub;
    n.a = a.id;
    n.b = b.id;
    n.value = Matrix(A.rows, A.cols);
    K().sub(A.data.data(), B.data.data(), n.value.data.data(), A.size());
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    return push(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
    const Matrix& A = nodes_[a.id].value;
    const Matrix& B = nodes_[b.id].value;
    require_same_shape(A, B, "hadamard");
    Node n;
    n.op = Op::Hadamard;
    n.a = a.id;
    n.b = b.id;
    n.value = Matrix(A.rows, A.cols);
    K().mul(A.data.data(), B.data.data(), n.value.data.data(), A.size());
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
    const Matrix& A = nodes_[a.id].value;
    Node n;
    n.op = Op::Scale;
    n.a = a.id;
    n.darg = s;
    n.value = Matrix(A.rows, A.cols);
    K().scale(A.data.data(), s, n.value.data.data(), A.size());
    n.requires_grad = nodes_[a.id].requires_grad;
    return push(std::move(n));
}

Var Tape::relu(Var a) {
    const Matrix& A = nodes_[a.id].value;
    Node n;
    n.op = Op::Relu;
    n.a = a.id;
    n.value = Matrix(A.rows, A.cols);
    K().relu(A.data.data(), n.value.data.data(), A.size());
    n.requires_grad = nodes_[a.id].requires_grad;
    return push(std::move(n));
}

Var Tape::tanh_act(Var a) {
    const Matrix& A = nodes_[a.id].value;
    Node n;
    n.op = Op::Tanh;
    n.a = a.id;
    n.value = Matrix(A.rows, A.cols);
    for (std::size_t i = 0; i < A.size(); ++i) n.value.data[i] = std::tanh(A.data[i]);
    n.requires_grad = nodes_[a.id].requires_grad;
    return push(std::move(n));
}

Var Tape::sqrt_elem(Var a) {
    const Matrix& A = nodes_[a.id].value;
    Node n;
    n.op = Op::Sqrt;
    n.a = a.id;
    n.value = Matrix(A.rows, A.cols);
    for (std::size_t i = 0; i < A.size(); ++i) n.value.data[i] = std::sqrt(A.data[i]);
    n.requires_grad = nodes_[a.id].requires_grad;
    return push(std::move(n));
}

Var Tape::rowwise_softmax(Var a) {
    const Matrix& A = nodes_[a.id].value;
    if (A.empty()) throw DomainError("rowwise_softmax: empty input");
    Node n;
    n.op = Op::RowSoftmax;
    n.a = a.id;
    n.value = Matrix(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        double mx = A.at(i, 0);
        for (int j = 1; j < A.cols; ++j) mx = std::max(mx, A.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < A.cols; ++j) {
            double e = std::exp(A.at(i, j) - mx);
            n.value.at(i, j) = e;
            sum += e;
        }
        for (int j = 0; j < A.cols; ++j) n.value.at(i, j) /= sum;
    }
    n.requires_grad = nodes_[a.id].requires_grad;
    return push(std::move(n));
}

Var Tape::row_normalize(Var a, double eps) {
    const Matrix& A = nodes_[a.id].value;
    Node n;
    n.op = Op::RowNormalize;
    n.a = a.id;
    n.darg = eps;
    n.value = Matrix(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        double sum = 0.0;
        for (int j = 0; j < A.cols; ++j) sum += A.at(i, j);
        if (sum < eps) {
            for (int j = 0; j < A.cols; ++j) n.value.at(i, j) = 1.0 / A.cols;
        } else {
            for (int j = 0; j < A.cols; ++j) n.value.at(i, j) = A.at(i, j) / sum;
        }
    }
    n.requires_grad = nodes_[a.id].requires_grad;
    return push(std::move(n));
}

Var Tape::log_sum_exp_rows(Var a) {
    const Matrix& A = nodes_[a.id].value;
    if (A.empty()) throw DomainError("log_sum_exp_rows: empty input");
    Node n;
    n.op = Op::LogSumExpRows;
    n.a = a.id;
    n.value = Matrix(A.rows, 1);
    for (int i = 0; i < A.rows; ++i) {
        double mx = A.at(i, 0);
        for (int j = 1; j < A.cols; ++j) mx = std::max(mx, A.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < A.cols; ++j) sum += std::exp(A.at(i, j) - mx);
        n.value.at(i, 0) = mx + std::log(sum);
    }
    n.requires_grad = nodes_[a.id].requires_grad;
    return push(std::move(n));
}

Var Tape::sum_all(Var a) {
    const Matrix& A = nodes_[a.id].value;
    Node n;
    n.op = Op::SumAll;
    n.a = a.id;
    double s = 0.0;
    for (double v : A.data) s += v;
    n.value = Matrix(1, 1, {s});
    n.requires_grad = nodes_[a.id].requires_grad;
    return push(std::move(n));
}

Var Tape::row_slice(Var a, int row) {
    const Matrix& A = nodes_[a.id].value;
    if (row < 0 || row >= A.rows)
        throw DomainError("row_slice: row " + std::to_string(row) + " out of range for " +
                          shape_str(A.rows, A.cols));
    Node n;
    n.op = Op::RowSlice;
    n.a = a.id;
    n.iarg = row;
    n.value = Matrix(1, A.cols);
    for (int j = 0; j < A.cols; ++j) n.value.at(0, j) = A.at(row, j);
    n.requires_grad = nodes_[a.id].requires_grad;
    return push(std::move(n));
}

Var Tape::concat_cols(const std::vector<Var>& xs) {
    if (xs.empty()) throw DomainError("concat_cols: no inputs");
    int rows = nodes_[xs[0].id].value.rows;
    int cols = 0;
    bool rg = false;
    for (Var x : xs) {
        const Matrix& M = nodes_[x.id].value;
        if (M.rows != rows)
            throw ShapeError("concat_cols: row count mismatch " + std::to_string(rows) +
                             " vs " + std::to_string(M.rows));
        cols += M.cols;
        rg = rg || nodes_[x.id].requires_grad;
    }
    Node n;
    n.op = Op::ConcatCols;
    n.many.reserve(xs.size());
    for (Var x : xs) n.many.push_back(x.id);
    n.value = Matrix(rows, cols);
    int off = 0;
    for (Var x : xs) {
        const Matrix& M = nodes_[x.id].value;
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < M.cols; ++j) n.value.at(i, off + j) = M.at(i, j);
        off += M.cols;
    }
    n.requires_grad = rg;
    return push(std::move(n));
}

void Tape::backward(Var loss) {
    const Node& ln = nodes_[loss.id];
    if (ln.value.rows != 1 || ln.value.cols != 1)
        throw DomainError("backward: loss must be 1x1, got " +
                          shape_str(ln.value.rows, ln.value.cols));
    grad_buf(loss.id).data[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
        const Node& n = nodes_[id];
        if (!n.requires_grad || !n.grad_alloc) continue;
        backprop(n);
    }
}

void Tape::backprop(const Node& n) {
    const Matrix& gy = n.grad;
    switch (n.op) {
        case Op::Leaf:
        case Op::Constant:
            break;
        case Op::MatMul: {
            const Node& na = nodes_[n.a];
            const Node& nb = nodes_[n.b];
            if (na.requires_grad) {
                Matrix bt = sib::transpose(nb.value);
                Matrix& ga = grad_buf(n.a);
                K().matmul_acc(gy.data.data(), bt.data.data(), ga.data.data(), gy.rows,
                               gy.cols, bt.cols);
            }
            if (nb.requires_grad) {
                Matrix at = sib::transpose(na.value);
                Matrix& gb = grad_buf(n.b);
                K().matmul_acc(at.data.data(), gy.data.data(), gb.data.data(), at.rows,
                               at.cols, gy.cols);
            }
            break;
        }
        case Op::Transpose: {
            if (nodes_[n.a].requires_grad) {
                Matrix gt = sib::transpose(gy);
                K().axpy(1.0, gt.data.data(), grad_buf(n.a).data.data(), gt.size());
            }
            break;
        }
        case Op::Add: {
            if (nodes_[n.a].requires_grad)
                K().axpy(1.0, gy.data.data(), grad_buf(n.a).data.data(), gy.size());
            if (nodes_[n.b].requires_grad)
                K().axpy(1.0, gy.data.data(), grad_buf(n.b).data.data(), gy.size());
            break;
        }
        case Op::AddRowVec: {
            if (nodes_[n.a].requires_grad)
                K().axpy(1.0, gy.data.data(), grad_buf(n.a).data.data(), gy.size());
            if (nodes_[n.b].requires_grad) {
                Matrix& gb = grad_buf(n.b);
                for (int i = 0; i < gy.rows; ++i)
                    K().axpy(1.0, gy.data.data() + static_cast<std::size_t>(i) * gy.cols,
                             gb.data.data(), static_cast<std::size_t>(gy.cols));
            }
            break;
        }
        case Op::Sub: {
            if (nodes_[n.a].requires_grad)
                K().axpy(1.0, gy.data.data(), grad_buf(n.a).data.data(), gy.size());
            if (nodes_[n.b].requires_grad)
                K().axpy(-1.0, gy.data.data(), grad_buf(n.b).data.data(), gy.size());
            break;
        }
        case Op::Hadamard: {
            const Node& na = nodes_[n.a];
            const Node& nb = nodes_[n.b];
            if (na.requires_grad) {
                Matrix tmp(gy.rows, gy.cols);
                K().mul(gy.data.data(), nb.value.data.data(), tmp.data.data(), gy.size());
                K().axpy(1.0, tmp.data.data(), grad_buf(n.a).data.data(), tmp.size());
            }
            if (nb.requires_grad) {
                Matrix tmp(gy.rows, gy.cols);
                K().mul(gy.data.data(), na.value.data.data(), tmp.data.data(), gy.size());
                K().axpy(1.0, tmp.data.data(), grad_buf(n.b).data.data(), tmp.size());
            }
            break;
        }
        case Op::Scale: {
            if (nodes_[n.a].requires_grad)
                K().axpy(n.darg, gy.data.data(), grad_buf(n.a).data.data(), gy.size());
            break;
        }
        case Op::Relu: {
            if (nodes_[n.a].requires_grad)
                K().relu_bwd_acc(nodes_[n.a].value.data.data(), gy.data.data(),
                                 grad_buf(n.a).data.data(), gy.size());
            break;
        }
        case Op::Tanh: {
            if (nodes_[n.a].requires_grad) {
                Matrix& ga = grad_buf(n.a);
                for (std::size_t i = 0; i < gy.size(); ++i) {
                    double y = n.value.data[i];
                    ga.data[i] += gy.data[i] * (1.0 - y * y);
                }
            }
            break;
        }
        case Op::Sqrt: {
            if (nodes_[n.a].requires_grad) {
                Matrix& ga = grad_buf(n.a);
                for (std::size_t i = 0; i < gy.size(); ++i) {
                    double y = n.value.data[i];
                    ga.data[i] += y > 0.0 ? gy.data[i] * 0.5 / y : 0.0;
                }
            }
            break;
        }
        case Op::RowSoftmax: {
            if (nodes_[n.a].requires_grad) {
                Matrix& ga = grad_buf(n.a);
                for (int i = 0; i < gy.rows; ++i) {
                    double dot = 0.0;
                    for (int j = 0; j < gy.cols; ++j) dot += gy.at(i, j) * n.value.at(i, j);
                    for (int j = 0; j < gy.cols; ++j)
                        ga.at(i, j) += n.value.at(i, j) * (gy.at(i, j) - dot);
                }
            }
            break;
        }
        case Op::RowNormalize: {
            if (nodes_[n.a].requires_grad) {
                const Matrix& X = nodes_[n.a].value;
                Matrix& ga = grad_buf(n.a);
                for (int i = 0; i < gy.rows; ++i) {
                    double sum = 0.0;
                    for (int j = 0; j < gy.cols; ++j) sum += X.at(i, j);
                    if (sum < n.darg) continue;  // guarded row: zero gradient
                    double dot = 0.0;
                    for (int j = 0; j < gy.cols; ++j) dot += gy.at(i, j) * n.value.at(i, j);
                    for (int j = 0; j < gy.cols; ++j)
                        ga.at(i, j) += (gy.at(i, j) - dot) / sum;
                }
            }
            break;
        }
        case Op::LogSumExpRows: {
            if (nodes_[n.a].requires_grad) {
                const Matrix& X = nodes_[n.a].value;
                Matrix& ga = grad_buf(n.a);
                for (int i = 0; i < X.rows; ++i) {
                    double lse = n.value.at(i, 0);
                    double g = gy.at(i, 0);
                    for (int j = 0; j < X.cols; ++j)
                        ga.at(i, j) += g * std::exp(X.at(i, j) - lse);
                }
            }
            break;
        }
        case Op::SumAll: {
            if (nodes_[n.a].requires_grad) {
                Matrix& ga = grad_buf(n.a);
                double g = gy.data[0];
                for (double& v : ga.data) v += g;
            }
            break;
        }
        case Op::RowSlice: {
            if (nodes_[n.a].requires_grad) {
                Matrix& ga = grad_buf(n.a);
                for (int j = 0; j < gy.cols; ++j) ga.at(n.iarg, j) += gy.at(0, j);
            }
            break;
        }
        case Op::ConcatCols: {
            int off = 0;
            for (int src : n.many) {
                const Node& ns = nodes_[src];
                int c = ns.value.cols;
                if (ns.requires_grad) {
                    Matrix& gs = grad_buf(src);
                    for (int i = 0; i < gy.rows; ++i)
                        for (int j = 0; j < c; ++j) gs.at(i, j) += gy.at(i, off + j);
                }
                off += c;
            }
            break;
        }
    }
}

Var frobenius_norm(Tape& t, Var m) { return t.sqrt_elem(t.sum_all(t.hadamard(m, m))); }

Var mean_squared_error(Tape& t, Var pred, double target) {
    const Matrix& P = t.value(pred);
    if (P.rows != 1 || P.cols != 1)
        throw ShapeError("mean_squared_error: prediction is " + shape_str(P.rows, P.cols) +
                         ", expected 1x1");
    Var d = t.sub(pred, t.constant_scalar(target));
    return t.hadamard(d, d);
}

Var cross_entropy(Tape& t, Var logits, int label) {
    const Matrix& L = t.value(logits);
    if (L.rows != 1)
        throw ShapeError("cross_entropy: logits must be a single row, got " +
                         shape_str(L.rows, L.cols));
    if (label < 0 || label >= L.cols)
        throw DomainError("cross_entropy: label " + std::to_string(label) +
                          " out of range for " + std::to_string(L.cols) + " classes");
    Matrix onehot(L.cols, 1);
    onehot.at(label, 0) = 1.0;
    Var picked = t.matmul(logits, t.constant(onehot));
    return t.sub(t.log_sum_exp_rows(logits), picked);
}

Var mean_of(Tape& t, const std::vector<Var>& xs) {
    if (xs.empty()) throw DomainError("mean_of: no inputs");
    if (xs.size() == 1) return xs[0];
    return t.scale(t.sum_all(t.concat_cols(xs)), 1.0 / static_cast<double>(xs.size()));
}

}  // namespace sib
