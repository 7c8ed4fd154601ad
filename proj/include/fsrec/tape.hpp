#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fsrec/errors.hpp"
#include "fsrec/rng.hpp"
#include "fsrec/tensor.hpp"

namespace fsrec::num {

/// Handle to a value recorded on a Tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Reverse-mode automatic differentiation over a fixed primitive set:
/// matrix multiply, add and elementwise multiply (with broadcasting of a
/// trailing row vector over the leading dimension, or of a scalar),
/// tanh, sigmoid, relu, exp, log, softmax, concatenation, row lookup and
/// sum/mean reductions.  Everything else in the model composes from these.
///
/// A Tape records one forward pass.  Values are immutable once written;
/// backward() replays the record in reverse creation order, which is a
/// reverse topological order because operations only reference earlier
/// nodes.
class Tape {
public:
    Var leaf(Tensor value, bool requires_grad = false) {
        return push(Op::Leaf, std::move(value), {-1, -1}, requires_grad);
    }

    Var constant(Tensor value) { return leaf(std::move(value), false); }

    const Tensor& value(Var v) const { return nodes_[check(v)].value; }

    /// Gradient of the last backward() loss w.r.t. v.  Zero tensor if v did
    /// not participate.
    const Tensor& grad(Var v) const { return nodes_[check(v)].grad; }

    std::size_t size() const { return nodes_.size(); }

    // ---- primitives -------------------------------------------------------

    Var matmul(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        Tensor out;
        if (A.ndim() == 2 && B.ndim() == 2) {
            require(A.shape()[1] == B.shape()[0], "matmul: inner dimensions differ", A, B);
            out = Tensor({A.shape()[0], B.shape()[1]});
            out.mat().noalias() = A.mat() * B.mat();
        } else if (A.ndim() == 2 && B.ndim() == 1) {
            require(A.shape()[1] == B.size(), "matmul: matrix/vector dimensions differ", A, B);
            out = Tensor({A.shape()[0]});
            out.mat().transpose().noalias() = A.mat() * B.mat().transpose();
        } else if (A.ndim() == 1 && B.ndim() == 2) {
            require(A.size() == B.shape()[0], "matmul: vector/matrix dimensions differ", A, B);
            out = Tensor({B.shape()[1]});
            out.mat().noalias() = A.mat() * B.mat();
        } else {
            throw std::invalid_argument("matmul: unsupported ranks " + A.shape_str() + " x " + B.shape_str());
        }
        return push(Op::MatMul, std::move(out), {a.id, b.id});
    }

    Var add(Var a, Var b) { return binary(Op::Add, a, b); }
    Var mul(Var a, Var b) { return binary(Op::Mul, a, b); }

    Var tanh(Var a) { return unary(Op::Tanh, a, [](double x) { return std::tanh(x); }); }
    Var sigmoid(Var a) {
        return unary(Op::Sigmoid, a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    }
    Var relu(Var a) { return unary(Op::Relu, a, [](double x) { return x > 0.0 ? x : 0.0; }); }
    Var exp(Var a) { return unary(Op::Exp, a, [](double x) { return std::exp(x); }); }
    Var log(Var a) { return unary(Op::Log, a, [](double x) { return std::log(x); }); }

    /// Row-wise softmax (a rank-1 tensor is one row).  Max-subtracted for
    /// stability; non-finite input is rejected.
    Var softmax(Var a) {
        const Tensor& X = value(a);
        if (!X.all_finite()) throw NumericError("softmax: non-finite input");
        Tensor out(X.shape());
        std::size_t r = X.rows(), c = X.cols();
        for (std::size_t i = 0; i < r; ++i) {
            double m = X[i * c];
            for (std::size_t j = 1; j < c; ++j) m = std::max(m, X[i * c + j]);
            double z = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                double e = std::exp(X[i * c + j] - m);
                out[i * c + j] = e;
                z += e;
            }
            for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= z;
        }
        return push(Op::Softmax, std::move(out), {a.id, -1});
    }

    /// Concatenation of two rank-1 tensors.
    Var concat(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        if (A.ndim() != 1 || B.ndim() != 1) {
            throw std::invalid_argument("concat: expects rank-1 operands");
        }
        Tensor out({A.size() + B.size()});
        std::copy(A.values().begin(), A.values().end(), out.values().begin());
        std::copy(B.values().begin(), B.values().end(), out.values().begin() + A.size());
        return push(Op::Concat, std::move(out), {a.id, b.id});
    }

    /// Row lookup: one row of a rank-2 tensor (embedding lookup and frame
    /// selection).
    Var row(Var m, std::size_t index) {
        const Tensor& M = value(m);
        if (M.ndim() != 2) throw std::invalid_argument("row: expects a rank-2 tensor");
        if (index >= M.shape()[0]) throw std::invalid_argument("row: index out of range");
        Tensor out({M.shape()[1]});
        for (std::size_t j = 0; j < M.shape()[1]; ++j) out[j] = M.at(index, j);
        Var v = push(Op::Row, std::move(out), {m.id, -1});
        nodes_[v.id].aux = static_cast<int>(index);
        return v;
    }

    Var sum(Var a) {
        const Tensor& A = value(a);
        double s = 0.0;
        for (double x : A.values()) s += x;
        return push(Op::Sum, Tensor::scalar(s), {a.id, -1});
    }

    Var mean(Var a) {
        const Tensor& A = value(a);
        double s = 0.0;
        for (double x : A.values()) s += x;
        return push(Op::Mean, Tensor::scalar(s / static_cast<double>(A.size())), {a.id, -1});
    }

    // ---- compositions -----------------------------------------------------

    Var scale(Var a, double c) { return mul(a, constant(Tensor::scalar(c))); }
    Var shift(Var a, double c) { return add(a, constant(Tensor::scalar(c))); }
    Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

    Var affine(Var x, Var w, Var b) { return add(matmul(x, w), b); }

    /// Hard clamp to [lo, hi] built from relu:
    /// clamp(x) = hi - relu((hi - lo) - relu(x - lo)).
    Var clamp(Var a, double lo, double hi) {
        Var inner = relu(shift(a, -lo));
        Var outer = relu(add(scale(inner, -1.0), constant(Tensor::scalar(hi - lo))));
        return add(scale(outer, -1.0), constant(Tensor::scalar(hi)));
    }

    /// log softmax of a rank-1 tensor, shifted by the detached maximum
    /// (exact by shift invariance).
    Var log_softmax(Var a) {
        const Tensor& A = value(a);
        if (A.ndim() != 1) throw std::invalid_argument("log_softmax: expects rank-1");
        if (!A.all_finite()) throw NumericError("log_softmax: non-finite input");
        double m = *std::max_element(A.values().begin(), A.values().end());
        Var s = shift(a, -m);
        Var logz = log(sum(exp(s)));
        return add(s, scale(logz, -1.0));
    }

    /// Negative log probability of one entry of a rank-1 log-probability
    /// vector, via a one-hot mask.
    Var nll_pick(Var log_probs, std::size_t index) {
        const Tensor& L = value(log_probs);
        if (L.ndim() != 1) throw std::invalid_argument("nll_pick: expects rank-1");
        if (index >= L.size()) throw std::invalid_argument("nll_pick: index out of range");
        Tensor onehot({L.size()});
        onehot[index] = 1.0;
        return scale(sum(mul(log_probs, constant(std::move(onehot)))), -1.0);
    }

    /// Inverted dropout: each entry kept with probability retain_p and scaled
    /// by 1/retain_p while training; identity at inference.
    Var dropout(Var a, double retain_p, Rng& rng, bool training) {
        if (retain_p <= 0.0 || retain_p > 1.0) {
            throw std::invalid_argument("dropout: retain probability must be in (0, 1]");
        }
        if (!training || retain_p == 1.0) return a;
        const Tensor& A = value(a);
        Tensor mask(A.shape());
        double inv = 1.0 / retain_p;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            mask[i] = rng.uniform() < retain_p ? inv : 0.0;
        }
        return mul(a, constant(std::move(mask)));
    }

    /// Sum of squared differences.
    Var squared_error(Var a, Var b) {
        Var d = sub(a, b);
        return sum(mul(d, d));
    }

    // ---- backward ---------------------------------------------------------

    /// Backpropagates from a scalar loss.  Every node reachable from the loss
    /// receives its gradient; leaves that did not participate keep zeros.
    void backward(Var loss) {
        if (value(loss).size() != 1) {
            throw std::invalid_argument("backward: loss must be scalar");
        }
        for (Node& n : nodes_) n.grad = Tensor::zeros(n.value.shape());
        nodes_[loss.id].grad[0] = 1.0;

        for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
            Node& n = nodes_[i];
            switch (n.op) {
                case Op::Leaf:
                    break;
                case Op::MatMul:
                    backward_matmul(n);
                    break;
                case Op::Add:
                case Op::Mul:
                    backward_binary(n);
                    break;
                case Op::Tanh:
                    backward_unary(n, [](double y, double) { return 1.0 - y * y; });
                    break;
                case Op::Sigmoid:
                    backward_unary(n, [](double y, double) { return y * (1.0 - y); });
                    break;
                case Op::Relu:
                    backward_unary(n, [](double, double x) { return x > 0.0 ? 1.0 : 0.0; });
                    break;
                case Op::Exp:
                    backward_unary(n, [](double y, double) { return y; });
                    break;
                case Op::Log:
                    backward_unary(n, [](double, double x) { return 1.0 / x; });
                    break;
                case Op::Softmax:
                    backward_softmax(n);
                    break;
                case Op::Concat: {
                    Tensor& ga = nodes_[n.parents[0]].grad;
                    Tensor& gb = nodes_[n.parents[1]].grad;
                    for (std::size_t j = 0; j < ga.size(); ++j) ga[j] += n.grad[j];
                    for (std::size_t j = 0; j < gb.size(); ++j) gb[j] += n.grad[ga.size() + j];
                    break;
                }
                case Op::Row: {
                    Tensor& gm = nodes_[n.parents[0]].grad;
                    auto r = static_cast<std::size_t>(n.aux);
                    for (std::size_t j = 0; j < n.grad.size(); ++j) gm.at(r, j) += n.grad[j];
                    break;
                }
                case Op::Sum: {
                    Tensor& ga = nodes_[n.parents[0]].grad;
                    double g = n.grad[0];
                    for (std::size_t j = 0; j < ga.size(); ++j) ga[j] += g;
                    break;
                }
                case Op::Mean: {
                    Tensor& ga = nodes_[n.parents[0]].grad;
                    double g = n.grad[0] / static_cast<double>(ga.size());
                    for (std::size_t j = 0; j < ga.size(); ++j) ga[j] += g;
                    break;
                }
            }
        }
    }

private:
    enum class Op { Leaf, MatMul, Add, Mul, Tanh, Sigmoid, Relu, Exp, Log, Softmax, Concat, Row, Sum, Mean };

    struct Node {
        Op op;
        Tensor value;
        Tensor grad;
        std::array<int, 2> parents{-1, -1};
        int aux = 0;
        bool requires_grad = false;
    };

    int check(Var v) const {
        if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
            throw std::invalid_argument("Tape: variable does not belong to this tape");
        }
        return v.id;
    }

    Var push(Op op, Tensor value, std::array<int, 2> parents, bool requires_grad = false) {
        Node n;
        n.op = op;
        n.value = std::move(value);
        n.parents = parents;
        n.requires_grad = requires_grad;
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    static void require(bool ok, const char* msg, const Tensor& a, const Tensor& b) {
        if (!ok) {
            throw std::invalid_argument(std::string(msg) + " " + a.shape_str() + " vs " + b.shape_str());
        }
    }

    // Broadcast classification for add/mul: operands of equal shape, a scalar
    // second operand, or a rank-1 second operand spread over the leading
    // dimension of a rank-2 first operand.
    enum class Bcast { Same, ScalarB, RowsB };

    static Bcast classify(const Tensor& a, const Tensor& b, const char* opname) {
        if (a.same_shape(b)) return Bcast::Same;
        if (b.size() == 1) return Bcast::ScalarB;
        if (a.ndim() == 2 && b.ndim() == 1 && b.size() == a.shape()[1]) return Bcast::RowsB;
        throw std::invalid_argument(std::string(opname) + ": incompatible shapes " + a.shape_str() +
                                    " vs " + b.shape_str());
    }

    Var binary(Op op, Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        Bcast bc = classify(A, B, op == Op::Add ? "add" : "mul");
        Tensor out(A.shape());
        std::size_t n = A.size(), c = A.cols();
        for (std::size_t i = 0; i < n; ++i) {
            double bv = bc == Bcast::Same ? B[i] : bc == Bcast::ScalarB ? B[0] : B[i % c];
            out[i] = op == Op::Add ? A[i] + bv : A[i] * bv;
        }
        return push(op, std::move(out), {a.id, b.id});
    }

    template <typename F>
    Var unary(Op op, Var a, F f) {
        const Tensor& A = value(a);
        Tensor out(A.shape());
        for (std::size_t i = 0; i < A.size(); ++i) out[i] = f(A[i]);
        return push(op, std::move(out), {a.id, -1});
    }

    template <typename DF>
    void backward_unary(Node& n, DF df) {
        Node& p = nodes_[n.parents[0]];
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
            p.grad[i] += n.grad[i] * df(n.value[i], p.value[i]);
        }
    }

    void backward_binary(Node& n) {
        const Tensor& A = nodes_[n.parents[0]].value;
        const Tensor& B = nodes_[n.parents[1]].value;
        Tensor& ga = nodes_[n.parents[0]].grad;
        Tensor& gb = nodes_[n.parents[1]].grad;
        Bcast bc = classify(A, B, "binary");
        std::size_t c = A.cols();
        bool is_mul = n.op == Op::Mul;
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
            std::size_t bi = bc == Bcast::Same ? i : bc == Bcast::ScalarB ? 0 : i % c;
            double g = n.grad[i];
            ga[i] += is_mul ? g * B[bi] : g;
            gb[bi] += is_mul ? g * A[i] : g;
        }
    }

    void backward_matmul(Node& n) {
        Node& pa = nodes_[n.parents[0]];
        Node& pb = nodes_[n.parents[1]];
        const Tensor& A = pa.value;
        const Tensor& B = pb.value;
        // Shapes were validated forward; view rank-1 operands as the row or
        // column they stood in for.
        auto Ar = static_cast<Eigen::Index>(A.ndim() == 2 ? A.shape()[0] : 1);
        auto Ac = static_cast<Eigen::Index>(A.ndim() == 2 ? A.shape()[1] : A.size());
        auto Bc = static_cast<Eigen::Index>(B.ndim() == 2 ? B.shape()[1] : 1);
        using Map = Eigen::Map<Tensor::EigenMatrix>;
        using CMap = Eigen::Map<const Tensor::EigenMatrix>;
        CMap a(A.values().data(), Ar, Ac);
        CMap b(B.values().data(), Ac, Bc);
        CMap g(n.grad.values().data(), Ar, Bc);
        Map ga(pa.grad.values().data(), Ar, Ac);
        Map gb(pb.grad.values().data(), Ac, Bc);
        ga.noalias() += g * b.transpose();
        gb.noalias() += a.transpose() * g;
    }

    void backward_softmax(Node& n) {
        Node& p = nodes_[n.parents[0]];
        std::size_t r = n.value.rows(), c = n.value.cols();
        for (std::size_t i = 0; i < r; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < c; ++j) dot += n.grad[i * c + j] * n.value[i * c + j];
            for (std::size_t j = 0; j < c; ++j) {
                p.grad[i * c + j] += n.value[i * c + j] * (n.grad[i * c + j] - dot);
            }
        }
    }

    std::deque<Node> nodes_;  // deque: references stay valid while the tape grows
};

}  // namespace fsrec::num
