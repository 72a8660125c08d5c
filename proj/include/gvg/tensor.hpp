#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gvg/rng.hpp"

namespace gvg {

using Shape = std::vector<int64_t>;

// One recorded operation. Nodes form the computation tape: parents always
// precede their consumers (creation order is topological by construction),
// and backward() visits each contributing node exactly once.
struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // allocated lazily, zero-filled
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    int64_t numel() const {
        int64_t n = 1;
        for (int64_t d : shape) n *= d;
        return n;
    }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
};

// Dense row-major 64-bit float tensor. Value type over a shared node; copies
// alias the same storage. Tensors without requires_grad are immutable by
// convention once produced by an op.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(const Shape& shape, bool requires_grad = false);
    static Tensor full(const Shape& shape, double value, bool requires_grad = false);
    static Tensor from(const Shape& shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    // Gaussian init, stddev * N(0,1) per element.
    static Tensor randn(const Shape& shape, Rng& rng, double stddev, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return node_->shape; }
    int64_t numel() const { return node_->numel(); }
    int64_t dim(int i) const { return node_->shape[i]; }
    int rank() const { return static_cast<int>(node_->shape.size()); }
    bool requires_grad() const { return node_->requires_grad; }

    const std::vector<double>& data() const { return node_->data; }
    std::vector<double>& mutable_data() { return node_->data; }
    double item() const;
    double at(int64_t i) const { return node_->data[i]; }
    double at(int64_t r, int64_t c) const { return node_->data[r * node_->shape[1] + c]; }

    const std::vector<double>& grad() const;
    void zero_grad();

    Node* node() const { return node_.get(); }
    std::shared_ptr<Node> shared_node() const { return node_; }

    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

private:
    std::shared_ptr<Node> node_;
};

// ---- primitives -----------------------------------------------------------
// Elementwise ops accept equal shapes or a trailing-suffix broadcast (the
// smaller operand's shape must be a suffix of the larger's, e.g. [D] against
// [N,D]). Shape mismatches throw with both shapes named.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scalar_mul(const Tensor& a, double s);
Tensor matmul(const Tensor& a, const Tensor& b);  // 2-D only
Tensor transpose(const Tensor& a);                // 2-D only
Tensor softmax_rows(const Tensor& a);             // numerically safe, per row
Tensor log(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor gelu(const Tensor& a);  // exact erf form
Tensor sum(const Tensor& a);   // full reduction -> shape [1]
Tensor mean(const Tensor& a);
Tensor l2_normalize_rows(const Tensor& a);
Tensor layer_norm_rows(const Tensor& a, double eps = 1e-5);
Tensor concat(const std::vector<Tensor>& parts, int axis);  // 2-D, axis 0 or 1
Tensor slice(const Tensor& a, int axis, int64_t begin, int64_t end);
// Gathers rows of `table` (also used as plain row-gather); grads scatter-add.
Tensor embedding_lookup(const Tensor& table, const std::vector<int64_t>& ids);
// Identity forward, no gradient flows into `a`.
Tensor stop_gradient(const Tensor& a);

// ---- tape -----------------------------------------------------------------

// Ancestors of `root` in topological order (parents before consumers).
std::vector<Node*> tape_of(const Tensor& root);

// Reverse-mode sweep from a scalar loss. Accumulates into .grad of every
// requires_grad ancestor; leaves off the path keep their existing (zero)
// grads. Call zero_grad on parameters between steps.
void backward(const Tensor& loss);

// Max over coordinates of |analytic - central difference| scaled by
// max(1, |analytic|, |numeric|). `f` must be deterministic and finite.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point, double eps);

// ---- optimizer ------------------------------------------------------------

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One bias-corrected Adam update on raw buffers, step count t >= 1.
void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, int64_t t,
                 const AdamConfig& cfg);

class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig cfg = {});
    void step();
    void zero_grad();
    void set_lr(double lr) { cfg_.lr = lr; }
    double lr() const { return cfg_.lr; }
    int64_t steps_taken() const { return t_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    int64_t t_ = 0;
    AdamConfig cfg_;
};

}  // namespace gvg
