#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace samiqa {

namespace detail {

struct TensorNode {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;  // same length as data when requires_grad

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
};

}  // namespace detail

// Dense row-major tensor of 64-bit reals. Value-semantic handle to a shared
// node so autodiff closures can reference inputs and outputs cheaply.
class Tensor {
public:
    Tensor() : node_(std::make_shared<detail::TensorNode>()) {}
    Tensor(std::vector<std::size_t> shape, std::vector<double> data,
           bool requires_grad = false);
    static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<std::size_t> shape, double value,
                       bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    const std::vector<std::size_t>& shape() const { return node_->shape; }
    std::size_t size() const { return node_->data.size(); }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t extent(std::size_t axis) const { return node_->shape.at(axis); }

    const std::vector<double>& data() const { return node_->data; }
    std::vector<double>& data() { return node_->data; }
    double item() const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool flag);
    const std::vector<double>& grad() const;
    std::vector<double>& grad_mut();
    void zero_grad();

    // identity of the underlying storage (siamese sharing assertions)
    const void* id() const { return node_.get(); }
    detail::TensorNode* node() const { return node_.get(); }
    std::shared_ptr<detail::TensorNode> node_ptr() const { return node_; }

private:
    std::shared_ptr<detail::TensorNode> node_;
};

// Ordered record of operations for reverse-mode differentiation. Ops are
// appended in forward (topological) order; backward() replays the closures
// in reverse. One tape per training step; single writer.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active();
    void record(std::function<void()> backward_rule);
    std::size_t size() const { return ops_.size(); }

    // Seeds d(out)/d(out) = 1 and replays every recorded backward rule in
    // reverse order, accumulating into .grad of all requires_grad tensors.
    void backward(const Tensor& scalar_output);

private:
    std::vector<std::function<void()>> ops_;
    Tape* previous_ = nullptr;
};

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b);
std::string shape_str(const std::vector<std::size_t>& shape);

// Elementwise ops. add/mul/sub accept either identical shapes or a second
// argument whose shape equals the first's with the leading axis dropped
// (broadcast over the leading batch axis only).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor relu(const Tensor& a);
Tensor abs(const Tensor& a);  // subgradient 0 at 0
Tensor sigmoid(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k]x[k,n] or [m,k]x[k]
Tensor reshape(const Tensor& a, std::vector<std::size_t> shape);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);

Tensor sum(const Tensor& a);   // -> scalar
Tensor mean(const Tensor& a);  // -> scalar

// Cross-correlation (no kernel flip). x: C_in x H x W, w: C_out x C_in x k x k,
// b: C_out. padding is the zero-fill width on each side.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b,
              std::size_t stride = 1, std::size_t padding = 0);

// Output cell (i,j) averages input rows [floor(i*H/oh), ceil((i+1)*H/oh)).
Tensor adaptive_avg_pool2d(const Tensor& x, std::size_t out_h, std::size_t out_w);

// Per-channel mean of |a-b| over the spatial extent; length-C vector.
Tensor mean_abs_per_channel(const Tensor& a, const Tensor& b);

}  // namespace samiqa
