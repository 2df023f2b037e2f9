#include "samiqa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace samiqa {

namespace {

thread_local Tape* g_active_tape = nullptr;

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
}

using NodePtr = std::shared_ptr<detail::TensorNode>;

NodePtr node_of(const Tensor& t) { return t.node_ptr(); }

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data,
               bool requires_grad)
    : node_(std::make_shared<detail::TensorNode>()) {
    if (shape_product(shape) != data.size()) {
        throw std::invalid_argument("tensor: shape " + shape_str(shape) +
                                    " does not match data length " +
                                    std::to_string(data.size()));
    }
    for (std::size_t e : shape) {
        if (e == 0) throw std::invalid_argument("tensor: zero extent in shape");
    }
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    set_requires_grad(requires_grad);
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    std::size_t n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
    std::size_t n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor({1}, {value}, requires_grad);
}

double Tensor::item() const {
    if (node_->data.size() != 1) {
        throw std::invalid_argument("item: tensor has " +
                                    std::to_string(node_->data.size()) +
                                    " elements, expected 1");
    }
    return node_->data[0];
}

void Tensor::set_requires_grad(bool flag) {
    node_->requires_grad = flag;
    if (flag) {
        node_->ensure_grad();
    } else {
        node_->grad.clear();
    }
}

const std::vector<double>& Tensor::grad() const {
    if (!node_->requires_grad) {
        throw std::logic_error("grad: tensor does not require grad");
    }
    return node_->grad;
}

std::vector<double>& Tensor::grad_mut() {
    if (!node_->requires_grad) {
        throw std::logic_error("grad: tensor does not require grad");
    }
    return node_->grad;
}

void Tensor::zero_grad() {
    if (node_->requires_grad) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tape::Tape() {
    previous_ = g_active_tape;
    g_active_tape = this;
}

Tape::~Tape() { g_active_tape = previous_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::function<void()> backward_rule) {
    ops_.push_back(std::move(backward_rule));
}

void Tape::backward(const Tensor& scalar_output) {
    if (scalar_output.size() != 1) {
        throw std::invalid_argument("backward: output has " +
                                    std::to_string(scalar_output.size()) +
                                    " elements, expected a scalar");
    }
    if (!scalar_output.requires_grad()) {
        throw std::logic_error("backward: output does not require grad");
    }
    scalar_output.node()->grad[0] += 1.0;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(op + ": incompatible shapes " + shape_str(a.shape()) +
                                " and " + shape_str(b.shape()));
}

namespace {

// Marks the output differentiable and records the rule when a tape is live.
void track(Tensor& out, bool any_input_grad, std::function<void()> rule) {
    if (any_input_grad && Tape::active() != nullptr) {
        out.set_requires_grad(true);
        Tape::active()->record(std::move(rule));
    }
}

bool broadcasts_over_batch(const Tensor& a, const Tensor& b) {
    // b's shape equals a's with the leading axis dropped
    if (a.rank() != b.rank() + 1 || a.rank() < 2) return false;
    for (std::size_t i = 0; i < b.rank(); ++i) {
        if (a.extent(i + 1) != b.extent(i)) return false;
    }
    return true;
}

template <typename Fwd, typename BwdA, typename BwdB>
Tensor binary_elementwise(const char* name, const Tensor& a, const Tensor& b,
                          Fwd fwd, BwdA dfa, BwdB dfb) {
    const bool same = a.shape() == b.shape();
    const bool bc = !same && broadcasts_over_batch(a, b);
    if (!same && !bc) shape_error(name, a, b);

    std::vector<double> out(a.size());
    const std::size_t bn = b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = fwd(a.data()[i], b.data()[i % bn]);
    }
    Tensor result(a.shape(), std::move(out));
    auto an = node_of(a), bn_ = node_of(b), on = node_of(result);
    track(result, a.requires_grad() || b.requires_grad(), [an, bn_, on, dfa, dfb]() {
        const std::size_t bs = bn_->data.size();
        if (an->requires_grad) {
            for (std::size_t i = 0; i < an->data.size(); ++i) {
                an->grad[i] += on->grad[i] * dfa(an->data[i], bn_->data[i % bs]);
            }
        }
        if (bn_->requires_grad) {
            bn_->ensure_grad();
            for (std::size_t i = 0; i < an->data.size(); ++i) {
                bn_->grad[i % bs] += on->grad[i] * dfb(an->data[i], bn_->data[i % bs]);
            }
        }
    });
    return result;
}

template <typename Fwd, typename Bwd>
Tensor unary_elementwise(const Tensor& a, Fwd fwd, Bwd dfa) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fwd(a.data()[i]);
    Tensor result(a.shape(), std::move(out));
    auto an = node_of(a), on = node_of(result);
    track(result, a.requires_grad(), [an, on, dfa]() {
        for (std::size_t i = 0; i < an->data.size(); ++i) {
            an->grad[i] += on->grad[i] * dfa(an->data[i], on->data[i]);
        }
    });
    return result;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        "add", a, b, [](double x, double y) { return x + y; },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        "mul", a, b, [](double x, double y) { return x * y; },
        [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor scale(const Tensor& a, double c) {
    return unary_elementwise(
        a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor relu(const Tensor& a) {
    return unary_elementwise(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor abs(const Tensor& a) {
    return unary_elementwise(
        a, [](double x) { return std::fabs(x); },
        [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor sigmoid(const Tensor& a) {
    return unary_elementwise(
        a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2) shape_error("matmul", a, b);
    const bool vec = b.rank() == 1;
    if (!vec && b.rank() != 2) shape_error("matmul", a, b);
    const std::size_t m = a.extent(0), k = a.extent(1);
    const std::size_t n = vec ? 1 : b.extent(1);
    if (b.extent(0) != k) shape_error("matmul", a, b);

    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a.data()[i * k + p];
            for (std::size_t j = 0; j < n; ++j) {
                out[i * n + j] += av * b.data()[p * n + j];
            }
        }
    }
    Tensor result(vec ? std::vector<std::size_t>{m} : std::vector<std::size_t>{m, n},
                  std::move(out));
    auto an = node_of(a), bn = node_of(b), on = node_of(result);
    track(result, a.requires_grad() || b.requires_grad(), [an, bn, on, m, k, n]() {
        if (an->requires_grad) {
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        acc += on->grad[i * n + j] * bn->data[p * n + j];
                    }
                    an->grad[i * k + p] += acc;
                }
            }
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t p = 0; p < k; ++p) {
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < m; ++i) {
                        acc += an->data[i * k + p] * on->grad[i * n + j];
                    }
                    bn->grad[p * n + j] += acc;
                }
            }
        }
    });
    return result;
}

Tensor reshape(const Tensor& a, std::vector<std::size_t> shape) {
    std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                    std::multiplies<>());
    if (n != a.size()) {
        throw std::invalid_argument("reshape: cannot view " + shape_str(a.shape()) +
                                    " as " + shape_str(shape));
    }
    Tensor result(std::move(shape), a.data());
    auto an = node_of(a), on = node_of(result);
    track(result, a.requires_grad(), [an, on]() {
        for (std::size_t i = 0; i < an->data.size(); ++i) an->grad[i] += on->grad[i];
    });
    return result;
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw std::invalid_argument("concat: empty input list");
    const auto& first = parts.front().shape();
    if (axis >= first.size()) throw std::invalid_argument("concat: axis out of range");

    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
    for (std::size_t i = axis + 1; i < first.size(); ++i) inner *= first[i];

    std::size_t total_axis = 0;
    for (const auto& p : parts) {
        if (p.rank() != first.size()) shape_error("concat", parts.front(), p);
        for (std::size_t i = 0; i < first.size(); ++i) {
            if (i != axis && p.extent(i) != first[i]) {
                shape_error("concat", parts.front(), p);
            }
        }
        total_axis += p.extent(axis);
    }

    std::vector<std::size_t> out_shape = first;
    out_shape[axis] = total_axis;
    std::vector<double> out(outer * total_axis * inner);
    std::size_t offset = 0;
    for (const auto& p : parts) {
        const std::size_t pa = p.extent(axis);
        for (std::size_t o = 0; o < outer; ++o) {
            std::copy_n(p.data().begin() + o * pa * inner, pa * inner,
                        out.begin() + (o * total_axis + offset) * inner);
        }
        offset += pa;
    }
    Tensor result(std::move(out_shape), std::move(out));

    bool any = false;
    std::vector<NodePtr> part_nodes;
    std::vector<std::size_t> part_axis;
    for (const auto& p : parts) {
        any = any || p.requires_grad();
        part_nodes.push_back(node_of(p));
        part_axis.push_back(p.extent(axis));
    }
    auto on = node_of(result);
    track(result, any, [on, part_nodes, part_axis, outer, inner, total_axis]() {
        std::size_t offset = 0;
        for (std::size_t pi = 0; pi < part_nodes.size(); ++pi) {
            const auto& pn = part_nodes[pi];
            const std::size_t pa = part_axis[pi];
            if (pn->requires_grad) {
                for (std::size_t o = 0; o < outer; ++o) {
                    const double* src = on->grad.data() + (o * total_axis + offset) * inner;
                    double* dst = pn->grad.data() + o * pa * inner;
                    for (std::size_t i = 0; i < pa * inner; ++i) dst[i] += src[i];
                }
            }
            offset += pa;
        }
    });
    return result;
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;  // fixed left-to-right order
    Tensor result = Tensor::scalar(acc);
    auto an = node_of(a), on = node_of(result);
    track(result, a.requires_grad(), [an, on]() {
        for (std::size_t i = 0; i < an->data.size(); ++i) an->grad[i] += on->grad[0];
    });
    return result;
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / double(a.size())); }

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b,
              std::size_t stride, std::size_t padding) {
    if (x.rank() != 3 || w.rank() != 4) shape_error("conv2d", x, w);
    const std::size_t ci = x.extent(0), h = x.extent(1), wd = x.extent(2);
    const std::size_t co = w.extent(0), k = w.extent(2);
    if (w.extent(1) != ci) {
        throw std::invalid_argument("conv2d: input has " + std::to_string(ci) +
                                    " channels but kernel expects " +
                                    std::to_string(w.extent(1)));
    }
    if (w.extent(3) != k) shape_error("conv2d", x, w);
    if (b.rank() != 1 || b.extent(0) != co) shape_error("conv2d", w, b);
    if (stride == 0) throw std::invalid_argument("conv2d: zero stride");
    if (h + 2 * padding < k || wd + 2 * padding < k) {
        throw std::invalid_argument("conv2d: input " + shape_str(x.shape()) +
                                    " smaller than kernel after padding");
    }
    const std::size_t oh = (h + 2 * padding - k) / stride + 1;
    const std::size_t ow = (wd + 2 * padding - k) / stride + 1;

    // precomputed in-bounds kernel ranges per output row/column; iterating
    // only valid taps skips terms that contribute nothing, so results match
    // the fully guarded loop bit for bit
    auto tap_range = [&](std::size_t o, std::size_t extent) {
        const long base = long(o * stride) - long(padding);
        const std::size_t k0 = base < 0 ? std::size_t(-base) : 0;
        const long room = long(extent) - base;  // taps before running off the end
        const std::size_t k1 = room >= long(k) ? k : (room > 0 ? std::size_t(room) : 0);
        return std::pair<std::size_t, std::size_t>{k0, k1};
    };
    std::vector<std::size_t> ky0(oh), ky1(oh), kx0(ow), kx1(ow);
    for (std::size_t oy = 0; oy < oh; ++oy) std::tie(ky0[oy], ky1[oy]) = tap_range(oy, h);
    for (std::size_t ox = 0; ox < ow; ++ox) std::tie(kx0[ox], kx1[ox]) = tap_range(ox, wd);

    std::vector<double> out(co * oh * ow);
    const double* xd = x.data().data();
    const double* wdta = w.data().data();
    for (std::size_t oc = 0; oc < co; ++oc) {
        const double bias = b.data()[oc];
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = bias;
                const bool interior = ky0[oy] == 0 && ky1[oy] == k &&
                                      kx0[ox] == 0 && kx1[ox] == k && k == 3;
                for (std::size_t ic = 0; ic < ci; ++ic) {
                    const std::size_t xoff = ic * h * wd + ox * stride - padding;
                    const double* wc = wdta + ((oc * ci + ic) * k) * k;
                    if (interior) {
                        // fully in-bounds 3x3 tap, unrolled in the same
                        // row-major order as the generic loop
                        const double* x0 = xd + xoff + (oy * stride - padding) * wd;
                        const double* x1 = x0 + wd;
                        const double* x2 = x1 + wd;
                        acc += x0[0] * wc[0];
                        acc += x0[1] * wc[1];
                        acc += x0[2] * wc[2];
                        acc += x1[0] * wc[3];
                        acc += x1[1] * wc[4];
                        acc += x1[2] * wc[5];
                        acc += x2[0] * wc[6];
                        acc += x2[1] * wc[7];
                        acc += x2[2] * wc[8];
                        continue;
                    }
                    for (std::size_t ky = ky0[oy]; ky < ky1[oy]; ++ky) {
                        const std::size_t xrow =
                            xoff + (oy * stride + ky - padding) * wd;
                        const double* wrow = wc + ky * k;
                        for (std::size_t kx = kx0[ox]; kx < kx1[ox]; ++kx) {
                            acc += xd[xrow + kx] * wrow[kx];
                        }
                    }
                }
                out[(oc * oh + oy) * ow + ox] = acc;
            }
        }
    }
    Tensor result({co, oh, ow}, std::move(out));
    auto xn = node_of(x), wn = node_of(w), bn = node_of(b), on = node_of(result);
    track(result, x.requires_grad() || w.requires_grad() || b.requires_grad(),
          [xn, wn, bn, on, ci, h, wd, co, k, oh, ow, stride, padding,
           ky0 = std::move(ky0), ky1 = std::move(ky1), kx0 = std::move(kx0),
           kx1 = std::move(kx1)]() {
        const bool want_x = xn->requires_grad;
        const bool want_w = wn->requires_grad;
        const bool want_b = bn->requires_grad;
        for (std::size_t oc = 0; oc < co; ++oc) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    const double g = on->grad[(oc * oh + oy) * ow + ox];
                    if (g == 0.0) continue;
                    if (want_b) bn->grad[oc] += g;
                    if (!want_x && !want_w) continue;
                    const bool interior = ky0[oy] == 0 && ky1[oy] == k &&
                                          kx0[ox] == 0 && kx1[ox] == k && k == 3;
                    for (std::size_t ic = 0; ic < ci; ++ic) {
                        const std::size_t xoff =
                            ic * h * wd + ox * stride - padding;
                        const std::size_t woff = ((oc * ci + ic) * k) * k;
                        if (interior && want_x && want_w) {
                            double* xg = xn->grad.data() + xoff +
                                         (oy * stride - padding) * wd;
                            const double* xv = xn->data.data() + xoff +
                                               (oy * stride - padding) * wd;
                            double* wg = wn->grad.data() + woff;
                            const double* wv = wn->data.data() + woff;
                            for (std::size_t r = 0; r < 3; ++r) {
                                xg[0] += g * wv[0]; wg[0] += g * xv[0];
                                xg[1] += g * wv[1]; wg[1] += g * xv[1];
                                xg[2] += g * wv[2]; wg[2] += g * xv[2];
                                xg += wd; xv += wd; wg += 3; wv += 3;
                            }
                            continue;
                        }
                        if (interior && want_w) {
                            const double* xv = xn->data.data() + xoff +
                                               (oy * stride - padding) * wd;
                            double* wg = wn->grad.data() + woff;
                            for (std::size_t r = 0; r < 3; ++r) {
                                wg[0] += g * xv[0];
                                wg[1] += g * xv[1];
                                wg[2] += g * xv[2];
                                xv += wd; wg += 3;
                            }
                            continue;
                        }
                        for (std::size_t ky = ky0[oy]; ky < ky1[oy]; ++ky) {
                            const std::size_t xrow =
                                xoff + (oy * stride + ky - padding) * wd;
                            const std::size_t wrow = woff + ky * k;
                            if (want_x && want_w) {
                                for (std::size_t kx = kx0[ox]; kx < kx1[ox]; ++kx) {
                                    xn->grad[xrow + kx] += g * wn->data[wrow + kx];
                                    wn->grad[wrow + kx] += g * xn->data[xrow + kx];
                                }
                            } else if (want_w) {
                                for (std::size_t kx = kx0[ox]; kx < kx1[ox]; ++kx) {
                                    wn->grad[wrow + kx] += g * xn->data[xrow + kx];
                                }
                            } else {
                                for (std::size_t kx = kx0[ox]; kx < kx1[ox]; ++kx) {
                                    xn->grad[xrow + kx] += g * wn->data[wrow + kx];
                                }
                            }
                        }
                    }
                }
            }
        }
    });
    return result;
}

Tensor adaptive_avg_pool2d(const Tensor& x, std::size_t out_h, std::size_t out_w) {
    if (x.rank() != 3) {
        throw std::invalid_argument("adaptive_avg_pool2d: expected CxHxW, got " +
                                    shape_str(x.shape()));
    }
    if (out_h == 0 || out_w == 0) {
        throw std::invalid_argument("adaptive_avg_pool2d: zero output extent");
    }
    const std::size_t c = x.extent(0), h = x.extent(1), w = x.extent(2);
    if (out_h > h || out_w > w) {
        throw std::invalid_argument("adaptive_avg_pool2d: output " +
                                    std::to_string(out_h) + "x" + std::to_string(out_w) +
                                    " exceeds input " + shape_str(x.shape()));
    }
    auto lo = [](std::size_t i, std::size_t n, std::size_t on) { return i * n / on; };
    auto hi = [](std::size_t i, std::size_t n, std::size_t on) {
        return ((i + 1) * n + on - 1) / on;
    };
    std::vector<double> out(c * out_h * out_w);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t i = 0; i < out_h; ++i) {
            const std::size_t y0 = lo(i, h, out_h), y1 = hi(i, h, out_h);
            for (std::size_t j = 0; j < out_w; ++j) {
                const std::size_t x0 = lo(j, w, out_w), x1 = hi(j, w, out_w);
                double acc = 0.0;
                for (std::size_t y = y0; y < y1; ++y) {
                    for (std::size_t xx = x0; xx < x1; ++xx) {
                        acc += x.data()[(ch * h + y) * w + xx];
                    }
                }
                out[(ch * out_h + i) * out_w + j] =
                    acc / double((y1 - y0) * (x1 - x0));
            }
        }
    }
    Tensor result({c, out_h, out_w}, std::move(out));
    auto xn = node_of(x), on = node_of(result);
    track(result, x.requires_grad(), [xn, on, c, h, w, out_h, out_w, lo, hi]() {
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t i = 0; i < out_h; ++i) {
                const std::size_t y0 = lo(i, h, out_h), y1 = hi(i, h, out_h);
                for (std::size_t j = 0; j < out_w; ++j) {
                    const std::size_t x0 = lo(j, w, out_w), x1 = hi(j, w, out_w);
                    const double g = on->grad[(ch * out_h + i) * out_w + j] /
                                     double((y1 - y0) * (x1 - x0));
                    for (std::size_t y = y0; y < y1; ++y) {
                        for (std::size_t xx = x0; xx < x1; ++xx) {
                            xn->grad[(ch * h + y) * w + xx] += g;
                        }
                    }
                }
            }
        }
    });
    return result;
}

Tensor mean_abs_per_channel(const Tensor& a, const Tensor& b) {
    if (a.rank() != 3 || a.shape() != b.shape()) shape_error("mean_abs_per_channel", a, b);
    const std::size_t c = a.extent(0), hw = a.extent(1) * a.extent(2);
    std::vector<double> out(c, 0.0);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (std::size_t i = 0; i < hw; ++i) {
            acc += std::fabs(a.data()[ch * hw + i] - b.data()[ch * hw + i]);
        }
        out[ch] = acc / double(hw);
    }
    Tensor result({c}, std::move(out));
    auto an = node_of(a), bn = node_of(b), on = node_of(result);
    track(result, a.requires_grad() || b.requires_grad(), [an, bn, on, c, hw]() {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double g = on->grad[ch] / double(hw);
            for (std::size_t i = 0; i < hw; ++i) {
                const double d = an->data[ch * hw + i] - bn->data[ch * hw + i];
                const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                if (an->requires_grad) an->grad[ch * hw + i] += g * s;
                if (bn->requires_grad) {
                    bn->ensure_grad();
                    bn->grad[ch * hw + i] -= g * s;
                }
            }
        }
    });
    return result;
}

}  // namespace samiqa
