#include "samiqa/distance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace samiqa {

namespace {

constexpr double kNormFloor = 1e-12;

void check_pair(const char* op, const Tensor& a, const Tensor& b) {
    if (a.rank() != 3 || a.shape() != b.shape()) shape_error(op, a, b);
}

void track_pair(Tensor& out, const Tensor& a, const Tensor& b,
                std::function<void()> rule) {
    if ((a.requires_grad() || b.requires_grad()) && Tape::active() != nullptr) {
        out.set_requires_grad(true);
        Tape::active()->record(std::move(rule));
    }
}

}  // namespace

DistanceMetric parse_distance_metric(const std::string& name) {
    if (name == "sub") return DistanceMetric::Sub;
    if (name == "l1") return DistanceMetric::L1;
    if (name == "l2") return DistanceMetric::L2;
    if (name == "cos") return DistanceMetric::Cos;
    if (name == "kld") return DistanceMetric::Kld;
    throw std::invalid_argument("unknown distance metric '" + name + "'");
}

std::string distance_metric_name(DistanceMetric metric) {
    switch (metric) {
        case DistanceMetric::Sub: return "sub";
        case DistanceMetric::L1: return "l1";
        case DistanceMetric::L2: return "l2";
        case DistanceMetric::Cos: return "cos";
        case DistanceMetric::Kld: return "kld";
    }
    throw std::logic_error("unreachable");
}

Tensor dist_l1(const Tensor& a, const Tensor& b) {
    check_pair("dist_l1", a, b);
    return mean_abs_per_channel(a, b);
}

Tensor dist_sub(const Tensor& a, const Tensor& b) {
    check_pair("dist_sub", a, b);
    return reshape(sub(a, b), {a.size()});
}

Tensor dist_l2(const Tensor& a, const Tensor& b) {
    check_pair("dist_l2", a, b);
    const std::size_t c = a.extent(0), hw = a.extent(1) * a.extent(2);
    std::vector<double> out(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (std::size_t i = 0; i < hw; ++i) {
            const double d = a.data()[ch * hw + i] - b.data()[ch * hw + i];
            acc += d * d;
        }
        out[ch] = std::sqrt(acc / double(hw));
    }
    Tensor result({c}, std::move(out));
    auto an = a.node_ptr(), bn = b.node_ptr(), on = result.node_ptr();
    track_pair(result, a, b, [an, bn, on, c, hw]() {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double d = on->data[ch];
            if (d <= 0.0) continue;  // subgradient 0 at the kink
            const double g = on->grad[ch] / (double(hw) * d);
            for (std::size_t i = 0; i < hw; ++i) {
                const double diff = an->data[ch * hw + i] - bn->data[ch * hw + i];
                if (an->requires_grad) an->grad[ch * hw + i] += g * diff;
                if (bn->requires_grad) bn->grad[ch * hw + i] -= g * diff;
            }
        }
    });
    return result;
}

Tensor dist_cos(const Tensor& a, const Tensor& b) {
    check_pair("dist_cos", a, b);
    const std::size_t c = a.extent(0), hw = a.extent(1) * a.extent(2);
    std::vector<double> out(c);
    std::vector<char> degenerate(c, 0);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < hw; ++i) {
            const double x = a.data()[ch * hw + i], y = b.data()[ch * hw + i];
            dot += x * y;
            na += x * x;
            nb += y * y;
        }
        na = std::sqrt(na);
        nb = std::sqrt(nb);
        if (na < kNormFloor || nb < kNormFloor) {
            degenerate[ch] = 1;
            out[ch] = (na < kNormFloor && nb < kNormFloor) ? 0.0 : 1.0;
        } else {
            out[ch] = 1.0 - dot / (na * nb);
        }
    }
    Tensor result({c}, std::move(out));
    auto an = a.node_ptr(), bn = b.node_ptr(), on = result.node_ptr();
    track_pair(result, a, b, [an, bn, on, c, hw, degenerate]() {
        for (std::size_t ch = 0; ch < c; ++ch) {
            if (degenerate[ch]) continue;
            double dot = 0.0, na2 = 0.0, nb2 = 0.0;
            for (std::size_t i = 0; i < hw; ++i) {
                const double x = an->data[ch * hw + i], y = bn->data[ch * hw + i];
                dot += x * y;
                na2 += x * x;
                nb2 += y * y;
            }
            const double na = std::sqrt(na2), nb = std::sqrt(nb2);
            const double g = on->grad[ch];
            for (std::size_t i = 0; i < hw; ++i) {
                const double x = an->data[ch * hw + i], y = bn->data[ch * hw + i];
                if (an->requires_grad) {
                    an->grad[ch * hw + i] -= g * (y / (na * nb) - dot * x / (na2 * na * nb));
                }
                if (bn->requires_grad) {
                    bn->grad[ch * hw + i] -= g * (x / (na * nb) - dot * y / (nb2 * nb * na));
                }
            }
        }
    });
    return result;
}

Tensor dist_kld(const Tensor& a, const Tensor& b) {
    check_pair("dist_kld", a, b);
    const std::size_t c = a.extent(0), hw = a.extent(1) * a.extent(2);

    // softmax over the spatial positions of one channel
    auto softmax = [hw](const double* src, std::vector<double>& dst) {
        const double mx = *std::max_element(src, src + hw);
        double z = 0.0;
        for (std::size_t i = 0; i < hw; ++i) {
            dst[i] = std::exp(src[i] - mx);
            z += dst[i];
        }
        for (std::size_t i = 0; i < hw; ++i) dst[i] /= z;
    };

    std::vector<double> out(c);
    std::vector<double> p(hw), q(hw);
    for (std::size_t ch = 0; ch < c; ++ch) {
        softmax(a.data().data() + ch * hw, p);
        softmax(b.data().data() + ch * hw, q);
        double kl = 0.0;
        for (std::size_t i = 0; i < hw; ++i) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
        out[ch] = std::max(kl, 0.0);
    }
    Tensor result({c}, std::move(out));
    auto an = a.node_ptr(), bn = b.node_ptr(), on = result.node_ptr();
    track_pair(result, a, b, [an, bn, on, c, hw, softmax]() {
        std::vector<double> p(hw), q(hw);
        for (std::size_t ch = 0; ch < c; ++ch) {
            softmax(an->data.data() + ch * hw, p);
            softmax(bn->data.data() + ch * hw, q);
            const double kl = on->data[ch];
            const double g = on->grad[ch];
            for (std::size_t i = 0; i < hw; ++i) {
                const double li = std::log(p[i]) - std::log(q[i]);
                if (an->requires_grad) an->grad[ch * hw + i] += g * p[i] * (li - kl);
                if (bn->requires_grad) bn->grad[ch * hw + i] += g * (q[i] - p[i]);
            }
        }
    });
    return result;
}

Tensor feature_distance(DistanceMetric metric, const Tensor& a, const Tensor& b) {
    switch (metric) {
        case DistanceMetric::Sub: return dist_sub(a, b);
        case DistanceMetric::L1: return dist_l1(a, b);
        case DistanceMetric::L2: return dist_l2(a, b);
        case DistanceMetric::Cos: return dist_cos(a, b);
        case DistanceMetric::Kld: return dist_kld(a, b);
    }
    throw std::logic_error("unreachable");
}

std::size_t distance_width(DistanceMetric metric, std::size_t channels,
                           std::size_t spatial) {
    return metric == DistanceMetric::Sub ? channels * spatial : channels;
}

}  // namespace samiqa
