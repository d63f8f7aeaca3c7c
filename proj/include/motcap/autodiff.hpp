#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "motcap/tensor.hpp"

namespace motcap {

class Tape;
struct Node;
using Var = std::shared_ptr<Node>;

// One value in the computation graph. Interior nodes carry a backprop
// closure that scatters this node's grad into its parents' grads.
struct Node {
    Tensor value;
    Tensor grad;  // same shape as value when needs_grad, else empty
    bool needs_grad = false;
    std::vector<Var> parents;
    std::function<void(Node&)> backprop;  // may be empty (leaves)
    Tape* tape = nullptr;
    std::string name;  // set for parameters, useful in diagnostics

    void accumulate(const Tensor& g) {
        if (!needs_grad) return;
        double* dst = grad.data();
        const double* src = g.data();
        const int n = grad.numel();
        for (int i = 0; i < n; ++i) dst[i] += src[i];
    }
};

// Records interior ops in creation order, which is a valid topological
// order; backward() replays it in reverse so every node's grad is complete
// before its own backprop fires, and shared inputs accumulate exactly once
// per use.
class Tape {
public:
    Var record(Tensor value, bool needs_grad, std::vector<Var> parents,
               std::function<void(Node&)> backprop) {
        auto node = std::make_shared<Node>();
        if (needs_grad) node->grad = Tensor(value.rows(), value.cols(), 0.0);
        node->value = std::move(value);
        node->needs_grad = needs_grad;
        node->parents = std::move(parents);
        node->backprop = std::move(backprop);
        node->tape = this;
        nodes_.push_back(node);
        return node;
    }

    // Leaves live outside the replay list: parameters persist across clear(),
    // constants never need replay.
    Var leaf(Tensor value, bool needs_grad = false, std::string name = "") {
        auto node = std::make_shared<Node>();
        if (needs_grad) node->grad = Tensor(value.rows(), value.cols(), 0.0);
        node->value = std::move(value);
        node->needs_grad = needs_grad;
        node->tape = this;
        node->name = std::move(name);
        return node;
    }

    void backward(const Var& loss) {
        if (loss->value.numel() != 1) {
            throw std::invalid_argument("Tape::backward: loss must be scalar, got " +
                                        loss->value.shape_str());
        }
        if (!loss->needs_grad) {
            throw std::invalid_argument("Tape::backward: loss does not require gradients");
        }
        loss->grad[0] += 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            Node& n = **it;
            if (n.needs_grad && n.backprop) n.backprop(n);
        }
    }

    void clear() { nodes_.clear(); }
    size_t size() const { return nodes_.size(); }

private:
    std::vector<Var> nodes_;
};

inline Var constant(Tape& tape, Tensor value) { return tape.leaf(std::move(value), false); }
inline Var parameter(Tape& tape, Tensor value, std::string name) {
    return tape.leaf(std::move(value), true, std::move(name));
}

namespace detail {

inline Tape* tape_of(const Var& a) {
    if (!a || !a->tape) throw std::invalid_argument("op on detached Var");
    return a->tape;
}

inline bool any_grad(const std::vector<Var>& vs) {
    for (const auto& v : vs) {
        if (v->needs_grad) return true;
    }
    return false;
}

// 2-D broadcasting: each extent must match or be 1 on one side.
inline std::pair<int, int> broadcast_shape(const Tensor& a, const Tensor& b, const char* op) {
    auto merge = [&](int x, int y) {
        if (x == y) return x;
        if (x == 1) return y;
        if (y == 1) return x;
        throw std::invalid_argument(std::string(op) + ": incompatible shapes " + a.shape_str() +
                                    " and " + b.shape_str());
    };
    return {merge(a.rows(), b.rows()), merge(a.cols(), b.cols())};
}

// Sum g over the axes that were broadcast to reach g's shape from `shape`.
inline Tensor reduce_to_shape(const Tensor& g, int rows, int cols) {
    if (g.rows() == rows && g.cols() == cols) return g;
    Tensor out(rows, cols, 0.0);
    for (int r = 0; r < g.rows(); ++r) {
        const int rr = rows == 1 ? 0 : r;
        for (int c = 0; c < g.cols(); ++c) {
            out(rr, cols == 1 ? 0 : c) += g(r, c);
        }
    }
    return out;
}

template <class Fwd, class DfA, class DfB>
Var binary_broadcast(const Var& a, const Var& b, const char* opname, Fwd fwd, DfA dfa, DfB dfb) {
    Tape* tape = tape_of(a);
    auto [rows, cols] = broadcast_shape(a->value, b->value, opname);
    Tensor out(rows, cols);
    const Tensor& av = a->value;
    const Tensor& bv = b->value;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            out(r, c) = fwd(av(av.rows() == 1 ? 0 : r, av.cols() == 1 ? 0 : c),
                            bv(bv.rows() == 1 ? 0 : r, bv.cols() == 1 ? 0 : c));
        }
    }
    const bool ng = a->needs_grad || b->needs_grad;
    return tape->record(std::move(out), ng, {a, b}, [dfa, dfb](Node& n) {
        const Var& pa = n.parents[0];
        const Var& pb = n.parents[1];
        const Tensor& av = pa->value;
        const Tensor& bv = pb->value;
        const int rows = n.value.rows(), cols = n.value.cols();
        if (pa->needs_grad) {
            Tensor ga(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    ga(r, c) = n.grad(r, c) * dfa(av(av.rows() == 1 ? 0 : r, av.cols() == 1 ? 0 : c),
                                                  bv(bv.rows() == 1 ? 0 : r, bv.cols() == 1 ? 0 : c));
            pa->accumulate(reduce_to_shape(ga, av.rows(), av.cols()));
        }
        if (pb->needs_grad) {
            Tensor gb(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    gb(r, c) = n.grad(r, c) * dfb(av(av.rows() == 1 ? 0 : r, av.cols() == 1 ? 0 : c),
                                                  bv(bv.rows() == 1 ? 0 : r, bv.cols() == 1 ? 0 : c));
            pb->accumulate(reduce_to_shape(gb, bv.rows(), bv.cols()));
        }
    });
}

template <class Fwd, class Df>
Var unary_elementwise(const Var& a, const char* /*opname*/, Fwd fwd, Df df) {
    Tape* tape = tape_of(a);
    Tensor out(a->value.rows(), a->value.cols());
    const int n = out.numel();
    for (int i = 0; i < n; ++i) out[i] = fwd(a->value[i]);
    return tape->record(std::move(out), a->needs_grad, {a}, [df](Node& nd) {
        const Var& p = nd.parents[0];
        if (!p->needs_grad) return;
        Tensor g(p->value.rows(), p->value.cols());
        const int m = g.numel();
        for (int i = 0; i < m; ++i) g[i] = nd.grad[i] * df(p->value[i], nd.value[i]);
        p->accumulate(g);
    });
}

}  // namespace detail

// --------------------------------------------------------------------------
// primitives
// --------------------------------------------------------------------------

inline Var matmul(const Var& a, const Var& b) {
    Tape* tape = detail::tape_of(a);
    const Tensor& A = a->value;
    const Tensor& B = b->value;
    if (A.cols() != B.rows()) {
        throw std::invalid_argument("matmul: inner dimensions disagree, " + A.shape_str() + " * " +
                                    B.shape_str());
    }
    const int m = A.rows(), k = A.cols(), n = B.cols();
    Tensor out(m, n, 0.0);
    for (int i = 0; i < m; ++i) {
        const double* arow = A.data() + static_cast<size_t>(i) * k;
        double* orow = out.data() + static_cast<size_t>(i) * n;
        for (int l = 0; l < k; ++l) {
            const double av = arow[l];
            if (av == 0.0) continue;
            const double* brow = B.data() + static_cast<size_t>(l) * n;
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    const bool ng = a->needs_grad || b->needs_grad;
    return tape->record(std::move(out), ng, {a, b}, [m, k, n](Node& nd) {
        const Var& pa = nd.parents[0];
        const Var& pb = nd.parents[1];
        const Tensor& G = nd.grad;
        if (pa->needs_grad) {
            // dA = G * B^T
            Tensor ga(m, k, 0.0);
            for (int i = 0; i < m; ++i) {
                const double* grow = G.data() + static_cast<size_t>(i) * n;
                double* garow = ga.data() + static_cast<size_t>(i) * k;
                for (int l = 0; l < k; ++l) {
                    const double* brow = pb->value.data() + static_cast<size_t>(l) * n;
                    double s = 0.0;
                    for (int j = 0; j < n; ++j) s += grow[j] * brow[j];
                    garow[l] = s;
                }
            }
            pa->accumulate(ga);
        }
        if (pb->needs_grad) {
            // dB = A^T * G
            Tensor gb(k, n, 0.0);
            for (int l = 0; l < k; ++l) {
                double* gbrow = gb.data() + static_cast<size_t>(l) * n;
                for (int i = 0; i < m; ++i) {
                    const double av = pa->value(i, l);
                    if (av == 0.0) continue;
                    const double* grow = G.data() + static_cast<size_t>(i) * n;
                    for (int j = 0; j < n; ++j) gbrow[j] += av * grow[j];
                }
            }
            pb->accumulate(gb);
        }
    });
}

inline Var add(const Var& a, const Var& b) {
    return detail::binary_broadcast(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

inline Var sub(const Var& a, const Var& b) {
    return detail::binary_broadcast(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

inline Var mul(const Var& a, const Var& b) {
    return detail::binary_broadcast(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double, double y) { return y; }, [](double x, double) { return x; });
}

inline Var div(const Var& a, const Var& b) {
    return detail::binary_broadcast(
        a, b, "div", [](double x, double y) { return x / y; },
        [](double, double y) { return 1.0 / y; },
        [](double x, double y) { return -x / (y * y); });
}

inline Var neg(const Var& a) {
    return detail::unary_elementwise(
        a, "neg", [](double x) { return -x; }, [](double, double) { return -1.0; });
}

inline Var tanh(const Var& a) {
    return detail::unary_elementwise(
        a, "tanh", [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

inline Var sigmoid(const Var& a) {
    return detail::unary_elementwise(
        a, "sigmoid",
        [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                       : std::exp(x) / (1.0 + std::exp(x)); },
        [](double, double y) { return y * (1.0 - y); });
}

inline Var exp(const Var& a) {
    return detail::unary_elementwise(
        a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

inline Var log(const Var& a) {
    for (int i = 0; i < a->value.numel(); ++i) {
        if (!(a->value[i] > 0.0)) {
            throw std::domain_error("log: non-positive input " + std::to_string(a->value[i]));
        }
    }
    return detail::unary_elementwise(
        a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

// d/dx sqrt at 0 is unbounded; the guard keeps 0-gradient paths (for example a
// value later clamped away) from turning into NaN via 0 * inf.
inline Var sqrt(const Var& a) {
    return detail::unary_elementwise(
        a, "sqrt", [](double x) { return std::sqrt(x); },
        [](double, double y) { return 0.5 / std::max(y, 1e-150); });
}

// max(x, floor); subgradient 0 on the clamped side.
inline Var clamp_min(const Var& a, double floor) {
    return detail::unary_elementwise(
        a, "clamp_min", [floor](double x) { return x < floor ? floor : x; },
        [floor](double x, double) { return x < floor ? 0.0 : 1.0; });
}

inline Var clamp_max(const Var& a, double ceil) {
    return detail::unary_elementwise(
        a, "clamp_max", [ceil](double x) { return x > ceil ? ceil : x; },
        [ceil](double x, double) { return x > ceil ? 0.0 : 1.0; });
}

inline Var add_scalar(const Var& a, double s) {
    return detail::unary_elementwise(
        a, "add_scalar", [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

inline Var mul_scalar(const Var& a, double s) {
    return detail::unary_elementwise(
        a, "mul_scalar", [s](double x) { return x * s; }, [s](double, double) { return s; });
}

// Stabilised softmax along `axis` (0 = down columns, 1 = across rows).
inline Var softmax(const Var& a, int axis) {
    if (axis != 0 && axis != 1) throw std::invalid_argument("softmax: axis must be 0 or 1");
    Tape* tape = detail::tape_of(a);
    const Tensor& x = a->value;
    Tensor out(x.rows(), x.cols());
    const int nslices = axis == 0 ? x.cols() : x.rows();
    const int slice_len = axis == 0 ? x.rows() : x.cols();
    auto idx = [&](int s, int i) { return axis == 0 ? std::make_pair(i, s) : std::make_pair(s, i); };
    for (int s = 0; s < nslices; ++s) {
        double mx = -1e300;
        for (int i = 0; i < slice_len; ++i) {
            auto [r, c] = idx(s, i);
            mx = std::max(mx, x(r, c));
        }
        double z = 0.0;
        for (int i = 0; i < slice_len; ++i) {
            auto [r, c] = idx(s, i);
            const double e = std::exp(x(r, c) - mx);
            out(r, c) = e;
            z += e;
        }
        for (int i = 0; i < slice_len; ++i) {
            auto [r, c] = idx(s, i);
            out(r, c) /= z;
        }
    }
    return tape->record(std::move(out), a->needs_grad, {a}, [axis, nslices, slice_len](Node& nd) {
        const Var& p = nd.parents[0];
        if (!p->needs_grad) return;
        auto idx = [&](int s, int i) {
            return axis == 0 ? std::make_pair(i, s) : std::make_pair(s, i);
        };
        Tensor g(p->value.rows(), p->value.cols());
        for (int s = 0; s < nslices; ++s) {
            double dot = 0.0;
            for (int i = 0; i < slice_len; ++i) {
                auto [r, c] = idx(s, i);
                dot += nd.grad(r, c) * nd.value(r, c);
            }
            for (int i = 0; i < slice_len; ++i) {
                auto [r, c] = idx(s, i);
                g(r, c) = nd.value(r, c) * (nd.grad(r, c) - dot);
            }
        }
        p->accumulate(g);
    });
}

// axis -1 sums everything to 1x1; axis 0 sums down columns to 1 x cols; axis 1 to rows x 1.
inline Var reduce_sum(const Var& a, int axis = -1) {
    Tape* tape = detail::tape_of(a);
    const Tensor& x = a->value;
    Tensor out;
    if (axis == -1) {
        double s = 0.0;
        for (int i = 0; i < x.numel(); ++i) s += x[i];
        out = Tensor::scalar(s);
    } else if (axis == 0) {
        out = Tensor(1, x.cols(), 0.0);
        for (int r = 0; r < x.rows(); ++r)
            for (int c = 0; c < x.cols(); ++c) out(0, c) += x(r, c);
    } else if (axis == 1) {
        out = Tensor(x.rows(), 1, 0.0);
        for (int r = 0; r < x.rows(); ++r)
            for (int c = 0; c < x.cols(); ++c) out(r, 0) += x(r, c);
    } else {
        throw std::invalid_argument("reduce_sum: axis must be -1, 0 or 1");
    }
    return tape->record(std::move(out), a->needs_grad, {a}, [axis](Node& nd) {
        const Var& p = nd.parents[0];
        if (!p->needs_grad) return;
        Tensor g(p->value.rows(), p->value.cols());
        for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c)
                g(r, c) = axis == -1 ? nd.grad[0] : (axis == 0 ? nd.grad(0, c) : nd.grad(r, 0));
        p->accumulate(g);
    });
}

inline Var reduce_mean(const Var& a, int axis = -1) {
    const Tensor& x = a->value;
    const int denom = axis == -1 ? x.numel() : (axis == 0 ? x.rows() : x.cols());
    return mul_scalar(reduce_sum(a, axis), 1.0 / denom);
}

inline Var transpose(const Var& a) {
    Tape* tape = detail::tape_of(a);
    const Tensor& x = a->value;
    Tensor out(x.cols(), x.rows());
    for (int r = 0; r < x.rows(); ++r)
        for (int c = 0; c < x.cols(); ++c) out(c, r) = x(r, c);
    return tape->record(std::move(out), a->needs_grad, {a}, [](Node& nd) {
        const Var& p = nd.parents[0];
        if (!p->needs_grad) return;
        Tensor g(p->value.rows(), p->value.cols());
        for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) g(r, c) = nd.grad(c, r);
        p->accumulate(g);
    });
}

// Row-major reinterpretation; data order is unchanged.
inline Var reshape(const Var& a, int rows, int cols) {
    Tape* tape = detail::tape_of(a);
    const Tensor& x = a->value;
    if (rows * cols != x.numel()) {
        throw std::invalid_argument("reshape: cannot view " + x.shape_str() + " as " +
                                    std::to_string(rows) + "x" + std::to_string(cols));
    }
    Tensor out(rows, cols, x.values());
    return tape->record(std::move(out), a->needs_grad, {a}, [](Node& nd) {
        const Var& p = nd.parents[0];
        if (!p->needs_grad) return;
        Tensor g(p->value.rows(), p->value.cols(), nd.grad.values());
        p->accumulate(g);
    });
}

inline Var concat(const std::vector<Var>& parts, int axis) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    if (axis != 0 && axis != 1) throw std::invalid_argument("concat: axis must be 0 or 1");
    Tape* tape = detail::tape_of(parts[0]);
    int rows = parts[0]->value.rows(), cols = parts[0]->value.cols();
    for (size_t i = 1; i < parts.size(); ++i) {
        const Tensor& t = parts[i]->value;
        if (axis == 0) {
            if (t.cols() != cols) throw std::invalid_argument("concat: column mismatch");
            rows += t.rows();
        } else {
            if (t.rows() != rows) throw std::invalid_argument("concat: row mismatch");
            cols += t.cols();
        }
    }
    Tensor out(rows, cols);
    int off = 0;
    for (const auto& p : parts) {
        const Tensor& t = p->value;
        for (int r = 0; r < t.rows(); ++r)
            for (int c = 0; c < t.cols(); ++c)
                (axis == 0 ? out(off + r, c) : out(r, off + c)) = t(r, c);
        off += axis == 0 ? t.rows() : t.cols();
    }
    return tape->record(std::move(out), detail::any_grad(parts), parts, [axis](Node& nd) {
        int off = 0;
        for (const auto& p : nd.parents) {
            const Tensor& t = p->value;
            if (p->needs_grad) {
                Tensor g(t.rows(), t.cols());
                for (int r = 0; r < t.rows(); ++r)
                    for (int c = 0; c < t.cols(); ++c)
                        g(r, c) = axis == 0 ? nd.grad(off + r, c) : nd.grad(r, off + c);
                p->accumulate(g);
            }
            off += axis == 0 ? t.rows() : t.cols();
        }
    });
}

inline Var concat(const Var& a, const Var& b, int axis) { return concat(std::vector<Var>{a, b}, axis); }

// Rows [r0, r1) as a view-copy; backward scatters into the slice.
inline Var slice_rows(const Var& a, int r0, int r1) {
    Tape* tape = detail::tape_of(a);
    const Tensor& x = a->value;
    if (r0 < 0 || r1 > x.rows() || r0 >= r1) {
        throw std::invalid_argument("slice_rows: bad range [" + std::to_string(r0) + "," +
                                    std::to_string(r1) + ") for " + x.shape_str());
    }
    Tensor out(r1 - r0, x.cols());
    for (int r = r0; r < r1; ++r)
        for (int c = 0; c < x.cols(); ++c) out(r - r0, c) = x(r, c);
    return tape->record(std::move(out), a->needs_grad, {a}, [r0](Node& nd) {
        const Var& p = nd.parents[0];
        if (!p->needs_grad) return;
        Tensor g(p->value.rows(), p->value.cols(), 0.0);
        for (int r = 0; r < nd.value.rows(); ++r)
            for (int c = 0; c < nd.value.cols(); ++c) g(r0 + r, c) = nd.grad(r, c);
        p->accumulate(g);
    });
}

// Column j as a column vector; used for embedding-matrix lookups.
inline Var select_column(const Var& a, int j) {
    Tape* tape = detail::tape_of(a);
    const Tensor& x = a->value;
    if (j < 0 || j >= x.cols()) {
        throw std::invalid_argument("select_column: column " + std::to_string(j) +
                                    " out of range for " + x.shape_str());
    }
    Tensor out(x.rows(), 1);
    for (int r = 0; r < x.rows(); ++r) out(r, 0) = x(r, j);
    return tape->record(std::move(out), a->needs_grad, {a}, [j](Node& nd) {
        const Var& p = nd.parents[0];
        if (!p->needs_grad) return;
        Tensor g(p->value.rows(), p->value.cols(), 0.0);
        for (int r = 0; r < g.rows(); ++r) g(r, j) = nd.grad(r, 0);
        p->accumulate(g);
    });
}

// Fused attention scores: v^T tanh(pre + q 1^T) as one node. pre is d x c,
// q and v are d x 1, the result is 1 x c. Only the tanh grid is retained for
// backward; the equivalent add/tanh/matmul chain would keep three grid-sized
// buffers plus their gradients.
inline Var fused_scores(const Var& pre, const Var& q, const Var& v) {
    Tape* tape = detail::tape_of(pre);
    const Tensor& A = pre->value;
    const int d = A.rows(), cols = A.cols();
    if (q->value.rows() != d || q->value.cols() != 1 || v->value.rows() != d ||
        v->value.cols() != 1) {
        throw std::invalid_argument("fused_scores: expected d x c, d x 1, d x 1, got " +
                                    A.shape_str() + ", " + q->value.shape_str() + ", " +
                                    v->value.shape_str());
    }
    auto grid = std::make_shared<Tensor>(d, cols);
    Tensor out(1, cols, 0.0);
    for (int r = 0; r < d; ++r) {
        const double qr = q->value[r];
        const double vr = v->value[r];
        const double* arow = A.data() + static_cast<size_t>(r) * cols;
        double* grow = grid->data() + static_cast<size_t>(r) * cols;
        double* orow = out.data();
        for (int c = 0; c < cols; ++c) {
            const double t = std::tanh(arow[c] + qr);
            grow[c] = t;
            orow[c] += vr * t;
        }
    }
    const bool ng = pre->needs_grad || q->needs_grad || v->needs_grad;
    return tape->record(std::move(out), ng, {pre, q, v}, [grid, d, cols](Node& nd) {
        const Var& pa = nd.parents[0];
        const Var& pq = nd.parents[1];
        const Var& pv = nd.parents[2];
        const double* g = nd.grad.data();
        for (int r = 0; r < d; ++r) {
            const double vr = pv->value[r];
            const double* grow = grid->data() + static_cast<size_t>(r) * cols;
            double acc_q = 0.0, acc_v = 0.0;
            double* pg = pa->needs_grad ? pa->grad.data() + static_cast<size_t>(r) * cols : nullptr;
            for (int c = 0; c < cols; ++c) {
                const double t = grow[c];
                const double common = g[c] * (1.0 - t * t) * vr;
                if (pg != nullptr) pg[c] += common;
                acc_q += common;
                acc_v += g[c] * t;
            }
            if (pq->needs_grad) pq->grad[r] += acc_q;
            if (pv->needs_grad) pv->grad[r] += acc_v;
        }
    });
}

// --------------------------------------------------------------------------
// finite-difference gradient checking
// --------------------------------------------------------------------------

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    int worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    bool pass = true;
    std::string worst_param;
    double worst_rel_err = 0.0;
};

// Central finite differences against tape gradients for every element of
// every named parameter. `build_loss` must rebuild the graph from the same
// parameter leaves on each call and return a scalar.
inline GradCheckReport grad_check(const std::function<Var()>& build_loss,
                                  const std::vector<std::pair<std::string, Var>>& params,
                                  double step = 1e-5, double tol = 1e-5) {
    if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");
    GradCheckReport report;

    for (auto& [name, p] : params) p->grad.fill(0.0);
    Var loss = build_loss();
    if (!loss->value.all_finite()) throw std::runtime_error("grad_check: non-finite loss");
    loss->tape->backward(loss);
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (auto& [name, p] : params) analytic.push_back(p->grad);
    loss->tape->clear();

    auto eval = [&]() {
        Var l = build_loss();
        const double v = l->value.item();
        l->tape->clear();
        if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite loss");
        return v;
    };

    for (size_t pi = 0; pi < params.size(); ++pi) {
        const auto& [name, p] = params[pi];
        GradCheckEntry entry;
        entry.name = name;
        for (int i = 0; i < p->value.numel(); ++i) {
            const double saved = p->value[i];
            p->value[i] = saved + step;
            const double fplus = eval();
            p->value[i] = saved - step;
            const double fminus = eval();
            p->value[i] = saved;
            const double numeric = (fplus - fminus) / (2.0 * step);
            const double a = analytic[pi][i];
            const double diff = std::abs(a - numeric);
            // Absolute-error fallback below the FD noise floor.
            const double rel =
                diff < 1e-9 ? 0.0 : diff / std::max({std::abs(a), std::abs(numeric), 1e-6});
            if (rel > entry.max_rel_err) {
                entry.max_rel_err = rel;
                entry.worst_index = i;
                entry.analytic = a;
                entry.numeric = numeric;
            }
        }
        entry.pass = entry.max_rel_err < tol;
        if (!entry.pass) report.pass = false;
        if (entry.max_rel_err > report.worst_rel_err) {
            report.worst_rel_err = entry.max_rel_err;
            report.worst_param = name;
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace motcap
