#include "gvg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "gvg/common.hpp"

namespace gvg {

namespace {

void check_shape(const Shape& shape, size_t data_size) {
    require(!shape.empty(), "tensor shape must have at least one dimension");
    int64_t n = 1;
    for (int64_t d : shape) {
        require(d > 0, "tensor dimensions must be positive, got " + shape_str(shape));
        n *= d;
    }
    require(static_cast<size_t>(n) == data_size,
            "shape " + shape_str(shape) + " does not match buffer of " + std::to_string(data_size));
}

Tensor make(Shape shape, std::vector<double> data, const char* op,
            std::vector<std::shared_ptr<Node>> parents, std::function<void(Node&)> bwd) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->op = op;
    bool rg = false;
    for (const auto& p : parents) rg = rg || p->requires_grad;
    n->requires_grad = rg;
    if (rg) {
        n->parents = std::move(parents);
        n->backward_fn = std::move(bwd);
    }
    return Tensor(std::move(n));
}

// Trailing-suffix broadcast: returns true if small repeats along the leading
// axes of big.
bool is_suffix(const Shape& small, const Shape& big) {
    if (small.size() > big.size()) return false;
    for (size_t i = 0; i < small.size(); i++) {
        if (small[small.size() - 1 - i] != big[big.size() - 1 - i]) return false;
    }
    return true;
}

struct EwPlan {
    bool swap;        // operand order swapped so that a is the big one
    int64_t n_big;
    int64_t n_small;  // small tiles over big: index i maps to i % n_small
};

EwPlan ew_plan(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() == b.shape()) return {false, a.numel(), a.numel()};
    if (is_suffix(b.shape(), a.shape())) return {false, a.numel(), b.numel()};
    if (is_suffix(a.shape(), b.shape())) return {true, b.numel(), a.numel()};
    require(false, std::string(op) + ": shapes not broadcastable: " + shape_str(a.shape()) +
                       " vs " + shape_str(b.shape()));
    return {};
}

}  // namespace

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return from(shape, std::vector<double>(static_cast<size_t>(n), 0.0), requires_grad);
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
    Tensor t = zeros(shape, requires_grad);
    std::fill(t.node()->data.begin(), t.node()->data.end(), value);
    return t;
}

Tensor Tensor::from(const Shape& shape, std::vector<double> data, bool requires_grad) {
    check_shape(shape, data.size());
    auto n = std::make_shared<Node>();
    n->shape = shape;
    n->data = std::move(data);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    return Tensor(std::move(n));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from({1}, {value}, requires_grad);
}

Tensor Tensor::randn(const Shape& shape, Rng& rng, double stddev, bool requires_grad) {
    Tensor t = zeros(shape, requires_grad);
    for (double& x : t.node()->data) x = stddev * rng.gaussian();
    return t;
}

double Tensor::item() const {
    require(numel() == 1, "item() requires a scalar tensor, got " + shape_str(shape()));
    return node_->data[0];
}

const std::vector<double>& Tensor::grad() const {
    node_->ensure_grad();
    return node_->grad;
}

void Tensor::zero_grad() {
    node_->ensure_grad();
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

// ---- elementwise ------------------------------------------------------------

namespace {

template <typename Fwd>
Tensor ew_binary(const char* op, const Tensor& a, const Tensor& b, Fwd fwd,
                 void (*bwd)(Node&, const EwPlan&)) {
    EwPlan plan = ew_plan(op, a, b);
    const Tensor& big = plan.swap ? b : a;
    const Tensor& small = plan.swap ? a : b;
    std::vector<double> out(plan.n_big);
    const auto& xb = big.data();
    const auto& xs = small.data();
    for (int64_t i = 0; i < plan.n_big; i++) {
        double lhs = plan.swap ? xs[i % plan.n_small] : xb[i];
        double rhs = plan.swap ? xb[i] : xs[i % plan.n_small];
        out[i] = fwd(lhs, rhs);
    }
    return make(big.shape(), std::move(out), op, {a.shared_node(), b.shared_node()},
                [plan, bwd](Node& n) { bwd(n, plan); });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return ew_binary(
        "add", a, b, [](double x, double y) { return x + y; },
        [](Node& n, const EwPlan& plan) {
            Node* pa = n.parents[0].get();
            Node* pb = n.parents[1].get();
            Node* big = plan.swap ? pb : pa;
            Node* small = plan.swap ? pa : pb;
            if (big->requires_grad) {
                big->ensure_grad();
                for (int64_t i = 0; i < plan.n_big; i++) big->grad[i] += n.grad[i];
            }
            if (small->requires_grad) {
                small->ensure_grad();
                for (int64_t i = 0; i < plan.n_big; i++) small->grad[i % plan.n_small] += n.grad[i];
            }
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return ew_binary(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](Node& n, const EwPlan& plan) {
            Node* pa = n.parents[0].get();
            Node* pb = n.parents[1].get();
            if (pa->requires_grad) {
                pa->ensure_grad();
                for (int64_t i = 0; i < plan.n_big; i++) {
                    int64_t ia = plan.swap ? i % plan.n_small : i;
                    pa->grad[ia] += n.grad[i];
                }
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (int64_t i = 0; i < plan.n_big; i++) {
                    int64_t ib = plan.swap ? i : i % plan.n_small;
                    pb->grad[ib] -= n.grad[i];
                }
            }
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return ew_binary(
        "mul", a, b, [](double x, double y) { return x * y; },
        [](Node& n, const EwPlan& plan) {
            Node* pa = n.parents[0].get();
            Node* pb = n.parents[1].get();
            const auto& xa = pa->data;
            const auto& xb = pb->data;
            if (pa->requires_grad) pa->ensure_grad();
            if (pb->requires_grad) pb->ensure_grad();
            for (int64_t i = 0; i < plan.n_big; i++) {
                int64_t ia = plan.swap ? i % plan.n_small : i;
                int64_t ib = plan.swap ? i : i % plan.n_small;
                if (pa->requires_grad) pa->grad[ia] += n.grad[i] * xb[ib];
                if (pb->requires_grad) pb->grad[ib] += n.grad[i] * xa[ia];
            }
        });
}

Tensor scalar_mul(const Tensor& a, double s) {
    std::vector<double> out(a.numel());
    for (int64_t i = 0; i < a.numel(); i++) out[i] = s * a.data()[i];
    return make(a.shape(), std::move(out), "scalar_mul", {a.shared_node()}, [s](Node& n) {
        Node* p = n.parents[0].get();
        p->ensure_grad();
        for (size_t i = 0; i < n.grad.size(); i++) p->grad[i] += s * n.grad[i];
    });
}

// ---- linear algebra ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2,
            "matmul: both operands must be 2-D, got " + shape_str(a.shape()) + " and " +
                shape_str(b.shape()));
    require(a.dim(1) == b.dim(0), "matmul: inner dimensions differ: " + shape_str(a.shape()) +
                                      " vs " + shape_str(b.shape()));
    const int64_t M = a.dim(0), K = a.dim(1), N = b.dim(1);
    std::vector<double> out(M * N, 0.0);
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    for (int64_t m = 0; m < M; m++) {
        double* orow = out.data() + m * N;
        const double* arow = pa + m * K;
        for (int64_t k = 0; k < K; k++) {
            double av = arow[k];
            const double* brow = pb + k * N;
            for (int64_t n = 0; n < N; n++) orow[n] += av * brow[n];
        }
    }
    return make({M, N}, std::move(out), "matmul", {a.shared_node(), b.shared_node()},
                [M, K, N](Node& n) {
                    Node* pa = n.parents[0].get();
                    Node* pb = n.parents[1].get();
                    const double* g = n.grad.data();
                    if (pa->requires_grad) {
                        pa->ensure_grad();
                        const double* b = pb->data.data();
                        for (int64_t m = 0; m < M; m++) {
                            const double* grow = g + m * N;
                            double* garow = pa->grad.data() + m * K;
                            for (int64_t k = 0; k < K; k++) {
                                const double* brow = b + k * N;
                                double acc = 0.0;
                                for (int64_t x = 0; x < N; x++) acc += grow[x] * brow[x];
                                garow[k] += acc;
                            }
                        }
                    }
                    if (pb->requires_grad) {
                        pb->ensure_grad();
                        const double* adat = pa->data.data();
                        for (int64_t m = 0; m < M; m++) {
                            const double* arow = adat + m * K;
                            const double* grow = g + m * N;
                            for (int64_t k = 0; k < K; k++) {
                                double av = arow[k];
                                double* gbrow = pb->grad.data() + k * N;
                                for (int64_t x = 0; x < N; x++) gbrow[x] += av * grow[x];
                            }
                        }
                    }
                });
}

Tensor transpose(const Tensor& a) {
    require(a.rank() == 2, "transpose: operand must be 2-D, got " + shape_str(a.shape()));
    const int64_t R = a.dim(0), C = a.dim(1);
    std::vector<double> out(R * C);
    for (int64_t r = 0; r < R; r++)
        for (int64_t c = 0; c < C; c++) out[c * R + r] = a.data()[r * C + c];
    return make({C, R}, std::move(out), "transpose", {a.shared_node()}, [R, C](Node& n) {
        Node* p = n.parents[0].get();
        p->ensure_grad();
        for (int64_t r = 0; r < R; r++)
            for (int64_t c = 0; c < C; c++) p->grad[r * C + c] += n.grad[c * R + r];
    });
}

// ---- nonlinearities ---------------------------------------------------------

Tensor softmax_rows(const Tensor& a) {
    require(a.rank() == 2, "softmax_rows: operand must be 2-D, got " + shape_str(a.shape()));
    const int64_t R = a.dim(0), C = a.dim(1);
    std::vector<double> out(R * C);
    for (int64_t r = 0; r < R; r++) {
        const double* x = a.data().data() + r * C;
        double* y = out.data() + r * C;
        double mx = x[0];
        for (int64_t c = 1; c < C; c++) mx = std::max(mx, x[c]);
        double s = 0.0;
        for (int64_t c = 0; c < C; c++) {
            y[c] = std::exp(x[c] - mx);
            s += y[c];
        }
        for (int64_t c = 0; c < C; c++) y[c] /= s;
    }
    return make({R, C}, std::move(out), "softmax_rows", {a.shared_node()}, [R, C](Node& n) {
        Node* p = n.parents[0].get();
        p->ensure_grad();
        for (int64_t r = 0; r < R; r++) {
            const double* y = n.data.data() + r * C;
            const double* g = n.grad.data() + r * C;
            double dot = 0.0;
            for (int64_t c = 0; c < C; c++) dot += g[c] * y[c];
            double* gx = p->grad.data() + r * C;
            for (int64_t c = 0; c < C; c++) gx[c] += y[c] * (g[c] - dot);
        }
    });
}

namespace {

template <typename Fwd, typename Bwd>
Tensor ew_unary(const char* op, const Tensor& a, Fwd fwd, Bwd bwd) {
    std::vector<double> out(a.numel());
    for (int64_t i = 0; i < a.numel(); i++) out[i] = fwd(a.data()[i]);
    return make(a.shape(), std::move(out), op, {a.shared_node()}, [bwd](Node& n) {
        Node* p = n.parents[0].get();
        p->ensure_grad();
        for (size_t i = 0; i < n.grad.size(); i++) p->grad[i] += n.grad[i] * bwd(p->data[i], n.data[i]);
    });
}

}  // namespace

Tensor log(const Tensor& a) {
    return ew_unary(
        "log", a, [](double x) { return std::log(x); },
        [](double x, double) { return 1.0 / x; });
}

Tensor exp(const Tensor& a) {
    return ew_unary(
        "exp", a, [](double x) { return std::exp(x); },
        [](double, double y) { return y; });
}

Tensor sigmoid(const Tensor& a) {
    return ew_unary(
        "sigmoid", a,
        [](double x) {
            if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
            double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor gelu(const Tensor& a) {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    constexpr double inv_sqrt2pi = 0.3989422804014326779;
    return ew_unary(
        "gelu", a,
        [=](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
        [=](double x, double) {
            double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
            double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
            return cdf + x * pdf;
        });
}

// ---- reductions -------------------------------------------------------------

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double x : a.data()) s += x;
    return make({1}, {s}, "sum", {a.shared_node()}, [](Node& n) {
        Node* p = n.parents[0].get();
        p->ensure_grad();
        for (double& g : p->grad) g += n.grad[0];
    });
}

Tensor mean(const Tensor& a) {
    const double inv = 1.0 / static_cast<double>(a.numel());
    double s = 0.0;
    for (double x : a.data()) s += x;
    return make({1}, {s * inv}, "mean", {a.shared_node()}, [inv](Node& n) {
        Node* p = n.parents[0].get();
        p->ensure_grad();
        for (double& g : p->grad) g += n.grad[0] * inv;
    });
}

// ---- row normalizations -----------------------------------------------------

Tensor l2_normalize_rows(const Tensor& a) {
    require(a.rank() == 2, "l2_normalize_rows: operand must be 2-D, got " + shape_str(a.shape()));
    const int64_t R = a.dim(0), C = a.dim(1);
    std::vector<double> out(R * C);
    std::vector<double> norms(R);
    for (int64_t r = 0; r < R; r++) {
        const double* x = a.data().data() + r * C;
        double s = 0.0;
        for (int64_t c = 0; c < C; c++) s += x[c] * x[c];
        double norm = std::sqrt(s);
        require(norm > 0.0, "l2_normalize_rows: zero-norm row " + std::to_string(r));
        norms[r] = norm;
        for (int64_t c = 0; c < C; c++) out[r * C + c] = x[c] / norm;
    }
    return make({R, C}, std::move(out), "l2_normalize_rows", {a.shared_node()},
                [R, C, norms = std::move(norms)](Node& n) {
                    Node* p = n.parents[0].get();
                    p->ensure_grad();
                    for (int64_t r = 0; r < R; r++) {
                        const double* y = n.data.data() + r * C;
                        const double* g = n.grad.data() + r * C;
                        double dot = 0.0;
                        for (int64_t c = 0; c < C; c++) dot += g[c] * y[c];
                        double* gx = p->grad.data() + r * C;
                        for (int64_t c = 0; c < C; c++) gx[c] += (g[c] - y[c] * dot) / norms[r];
                    }
                });
}

Tensor layer_norm_rows(const Tensor& a, double eps) {
    require(a.rank() == 2, "layer_norm_rows: operand must be 2-D, got " + shape_str(a.shape()));
    const int64_t R = a.dim(0), C = a.dim(1);
    std::vector<double> out(R * C);
    std::vector<double> inv_std(R);
    for (int64_t r = 0; r < R; r++) {
        const double* x = a.data().data() + r * C;
        double mu = 0.0;
        for (int64_t c = 0; c < C; c++) mu += x[c];
        mu /= C;
        double var = 0.0;
        for (int64_t c = 0; c < C; c++) var += (x[c] - mu) * (x[c] - mu);
        var /= C;
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[r] = is;
        for (int64_t c = 0; c < C; c++) out[r * C + c] = (x[c] - mu) * is;
    }
    return make({R, C}, std::move(out), "layer_norm_rows", {a.shared_node()},
                [R, C, inv_std = std::move(inv_std)](Node& n) {
                    Node* p = n.parents[0].get();
                    p->ensure_grad();
                    for (int64_t r = 0; r < R; r++) {
                        const double* y = n.data.data() + r * C;
                        const double* g = n.grad.data() + r * C;
                        double gmean = 0.0, gydot = 0.0;
                        for (int64_t c = 0; c < C; c++) {
                            gmean += g[c];
                            gydot += g[c] * y[c];
                        }
                        gmean /= C;
                        gydot /= C;
                        double* gx = p->grad.data() + r * C;
                        for (int64_t c = 0; c < C; c++)
                            gx[c] += inv_std[r] * (g[c] - gmean - y[c] * gydot);
                    }
                });
}

// ---- shape ops ----------------------------------------------------------------

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    require(!parts.empty(), "concat: empty part list");
    require(axis == 0 || axis == 1, "concat: axis must be 0 or 1");
    for (const auto& p : parts)
        require(p.rank() == 2, "concat: all parts must be 2-D, got " + shape_str(p.shape()));
    const int other = 1 - axis;
    int64_t total = 0;
    for (const auto& p : parts) {
        require(p.dim(other) == parts[0].dim(other),
                "concat: mismatched shapes " + shape_str(parts[0].shape()) + " vs " +
                    shape_str(p.shape()));
        total += p.dim(axis);
    }
    Shape out_shape = parts[0].shape();
    out_shape[axis] = total;
    const int64_t R = out_shape[0], C = out_shape[1];
    std::vector<double> out(R * C);
    std::vector<int64_t> offsets(parts.size());
    int64_t off = 0;
    for (size_t i = 0; i < parts.size(); i++) {
        offsets[i] = off;
        const auto& p = parts[i];
        if (axis == 0) {
            std::copy(p.data().begin(), p.data().end(), out.begin() + off * C);
        } else {
            for (int64_t r = 0; r < R; r++)
                std::copy(p.data().begin() + r * p.dim(1), p.data().begin() + (r + 1) * p.dim(1),
                          out.begin() + r * C + off);
        }
        off += p.dim(axis);
    }
    std::vector<std::shared_ptr<Node>> parents;
    for (const auto& p : parts) parents.push_back(p.shared_node());
    return make(out_shape, std::move(out), "concat", std::move(parents),
                [axis, C, R, offsets = std::move(offsets)](Node& n) {
                    for (size_t i = 0; i < n.parents.size(); i++) {
                        Node* p = n.parents[i].get();
                        if (!p->requires_grad) continue;
                        p->ensure_grad();
                        if (axis == 0) {
                            int64_t base = offsets[i] * C;
                            for (size_t j = 0; j < p->grad.size(); j++) p->grad[j] += n.grad[base + j];
                        } else {
                            int64_t pc = p->shape[1];
                            for (int64_t r = 0; r < R; r++)
                                for (int64_t c = 0; c < pc; c++)
                                    p->grad[r * pc + c] += n.grad[r * C + offsets[i] + c];
                        }
                    }
                });
}

Tensor slice(const Tensor& a, int axis, int64_t begin, int64_t end) {
    require(a.rank() == 2, "slice: operand must be 2-D, got " + shape_str(a.shape()));
    require(axis == 0 || axis == 1, "slice: axis must be 0 or 1");
    require(begin >= 0 && end > begin && end <= a.dim(axis),
            "slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                ") out of bounds for " + shape_str(a.shape()));
    const int64_t R = a.dim(0), C = a.dim(1);
    Shape out_shape = a.shape();
    out_shape[axis] = end - begin;
    std::vector<double> out(out_shape[0] * out_shape[1]);
    if (axis == 0) {
        std::copy(a.data().begin() + begin * C, a.data().begin() + end * C, out.begin());
    } else {
        for (int64_t r = 0; r < R; r++)
            std::copy(a.data().begin() + r * C + begin, a.data().begin() + r * C + end,
                      out.begin() + r * (end - begin));
    }
    return make(out_shape, std::move(out), "slice", {a.shared_node()},
                [axis, begin, R, C, W = end - begin](Node& n) {
                    Node* p = n.parents[0].get();
                    p->ensure_grad();
                    if (axis == 0) {
                        for (size_t j = 0; j < n.grad.size(); j++) p->grad[begin * C + j] += n.grad[j];
                    } else {
                        for (int64_t r = 0; r < R; r++)
                            for (int64_t c = 0; c < W; c++)
                                p->grad[r * C + begin + c] += n.grad[r * W + c];
                    }
                });
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int64_t>& ids) {
    require(table.rank() == 2, "embedding_lookup: table must be 2-D, got " + shape_str(table.shape()));
    require(!ids.empty(), "embedding_lookup: empty id list");
    const int64_t V = table.dim(0), D = table.dim(1);
    for (int64_t id : ids)
        require(id >= 0 && id < V,
                "embedding_lookup: id " + std::to_string(id) + " out of range [0," +
                    std::to_string(V) + ")");
    const int64_t L = static_cast<int64_t>(ids.size());
    std::vector<double> out(L * D);
    for (int64_t l = 0; l < L; l++)
        std::copy(table.data().begin() + ids[l] * D, table.data().begin() + (ids[l] + 1) * D,
                  out.begin() + l * D);
    return make({L, D}, std::move(out), "embedding_lookup", {table.shared_node()},
                [D, ids](Node& n) {
                    Node* p = n.parents[0].get();
                    p->ensure_grad();
                    for (size_t l = 0; l < ids.size(); l++)
                        for (int64_t d = 0; d < D; d++)
                            p->grad[ids[l] * D + d] += n.grad[l * D + d];
                });
}

Tensor stop_gradient(const Tensor& a) {
    auto n = std::make_shared<Node>();
    n->shape = a.shape();
    n->data = a.data();
    n->op = "stop_gradient";
    n->requires_grad = false;
    return Tensor(std::move(n));
}

// ---- backward ---------------------------------------------------------------

std::vector<Node*> tape_of(const Tensor& root) {
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    // Iterative post-order DFS over parents.
    struct Frame {
        Node* node;
        size_t next_parent;
    };
    std::vector<Frame> stack;
    Node* r = root.node();
    if (!r) return order;
    stack.push_back({r, 0});
    visited.insert(r);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            Node* p = f.node->parents[f.next_parent++].get();
            if (visited.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    return order;
}

void backward(const Tensor& loss) {
    require(loss.defined(), "backward: undefined loss tensor");
    require(loss.numel() == 1, "backward: loss must be scalar, got " + shape_str(loss.shape()));
    require(loss.requires_grad(), "backward: loss is not connected to any recorded operation");
    std::vector<Node*> order = tape_of(loss);
    loss.node()->ensure_grad();
    loss.node()->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (!n->backward_fn) continue;
        n->ensure_grad();
        for (const auto& p : n->parents)
            if (p->requires_grad) p->ensure_grad();
        n->backward_fn(*n);
    }
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point, double eps) {
    require(eps > 0.0, "grad_check: eps must be positive");
    const int64_t n = point.numel();
    Tensor x = Tensor::from(point.shape(), point.data(), true);
    Tensor y = f(x);
    require(y.numel() == 1, "grad_check: function must return a scalar");
    require(std::isfinite(y.item()), "grad_check: non-finite function value at the base point");
    std::vector<double> analytic(n, 0.0);
    if (y.requires_grad()) {
        backward(y);
        analytic = x.grad();
    }
    double max_err = 0.0;
    for (int64_t i = 0; i < n; i++) {
        std::vector<double> dp = point.data(), dm = point.data();
        dp[i] += eps;
        dm[i] -= eps;
        double fp = f(Tensor::from(point.shape(), std::move(dp))).item();
        double fm = f(Tensor::from(point.shape(), std::move(dm))).item();
        require(std::isfinite(fp) && std::isfinite(fm),
                "grad_check: non-finite function value near coordinate " + std::to_string(i));
        double numeric = (fp - fm) / (2.0 * eps);
        double denom = std::max({1.0, std::fabs(analytic[i]), std::fabs(numeric)});
        max_err = std::max(max_err, std::fabs(analytic[i] - numeric) / denom);
    }
    return max_err;
}

// ---- optimizer ----------------------------------------------------------------

void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, int64_t t,
                 const AdamConfig& cfg) {
    require(param.size() == grad.size(),
            "adam_update: param/grad size mismatch: " + std::to_string(param.size()) + " vs " +
                std::to_string(grad.size()));
    require(t >= 1, "adam_update: step count must be >= 1");
    if (m.size() != param.size()) m.assign(param.size(), 0.0);
    if (v.size() != param.size()) v.assign(param.size(), 0.0);
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (size_t i = 0; i < param.size(); i++) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        param[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), m_(params_.size()), v_(params_.size()), cfg_(cfg) {
    for (const auto& p : params_)
        require(p.requires_grad(), "Adam: all parameters must require gradients");
}

void Adam::step() {
    t_++;
    for (size_t i = 0; i < params_.size(); i++) {
        Node* n = params_[i].node();
        n->ensure_grad();
        adam_update(n->data, n->grad, m_[i], v_[i], t_, cfg_);
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

}  // namespace gvg
