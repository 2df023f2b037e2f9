#include "samiqa/sfem.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "samiqa/spectral.hpp"

namespace samiqa {

BranchMask parse_branch_mask(const std::string& text) {
    if (text == "b") return {true, false};
    if (text == "f") return {false, true};
    if (text == "bf" || text == "fb") return {true, true};
    throw std::invalid_argument("branch mask must be b, f or bf, got '" + text + "'");
}

std::string branch_mask_name(const BranchMask& mask) {
    std::string s;
    if (mask.spatial) s += "b";
    if (mask.frequency) s += "f";
    return s;
}

void SfemParams::visit(const std::function<void(const std::string&, Tensor&)>& fn) {
    for (std::size_t i = 0; i < per_scale.size(); ++i) {
        const std::string prefix = "sfem.scale" + std::to_string(i) + ".";
        auto& p = per_scale[i];
        fn(prefix + "conv1.w", p.conv1_w);
        fn(prefix + "conv1.b", p.conv1_b);
        fn(prefix + "conv2.w", p.conv2_w);
        fn(prefix + "conv2.b", p.conv2_b);
        fn(prefix + "fft.w", p.fft_w);
        fn(prefix + "fft.b", p.fft_b);
    }
}

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    std::vector<double> data(n);
    for (double& v : data) v = dist(rng);
    return Tensor(std::move(shape), std::move(data), true);
}

}  // namespace

SfemParams init_sfem_params(const SfemConfig& cfg, std::uint64_t seed) {
    if (cfg.scales == 0) throw std::invalid_argument("sfem: scales must be >= 1");
    if (cfg.kernel_size % 2 == 0) {
        throw std::invalid_argument("sfem: kernel size must be odd");
    }
    std::mt19937_64 rng(seed);
    const std::size_t c = cfg.channels, k = cfg.kernel_size;
    const double conv_std = std::sqrt(2.0 / double(c * k * k));
    const double fft_std = std::sqrt(2.0 / double(2 * c));
    SfemParams params;
    for (std::size_t i = 0; i < cfg.scales; ++i) {
        SfemScaleParams p;
        p.conv1_w = random_tensor({c, c, k, k}, conv_std, rng);
        p.conv1_b = Tensor::zeros({c}, true);
        p.conv2_w = random_tensor({c, c, k, k}, conv_std, rng);
        p.conv2_b = Tensor::zeros({c}, true);
        p.fft_w = random_tensor({2 * c, 2 * c, 1, 1}, fft_std, rng);
        p.fft_b = Tensor::zeros({2 * c}, true);
        params.per_scale.push_back(std::move(p));
    }
    return params;
}

std::vector<Tensor> build_pyramid(const Tensor& f, std::size_t scales) {
    if (scales == 0) throw std::invalid_argument("build_pyramid: scales must be >= 1");
    std::vector<Tensor> out{f};
    for (std::size_t i = 1; i < scales; ++i) {
        const Tensor& prev = out.back();
        const std::size_t h = prev.extent(1), w = prev.extent(2);
        if (h < 2 || w < 2) {
            throw std::invalid_argument("build_pyramid: extent underflow at scale " +
                                        std::to_string(i) + " from " +
                                        shape_str(prev.shape()));
        }
        out.push_back(adaptive_avg_pool2d(prev, h / 2, w / 2));
    }
    return out;
}

Tensor spatial_branch(const Tensor& f, const SfemScaleParams& params) {
    const std::size_t pad = params.conv1_w.extent(2) / 2;
    Tensor h = relu(conv2d(f, params.conv1_w, params.conv1_b, 1, pad));
    return relu(conv2d(h, params.conv2_w, params.conv2_b, 1, pad));
}

Tensor frequency_branch(const Tensor& f, const SfemScaleParams& params) {
    return fourier_conv(f, params.fft_w, params.fft_b);
}

SfemOutput sfem_forward(const Tensor& f, SfemParams& params, const SfemConfig& cfg,
                        const BranchMask& mask) {
    if (params.per_scale.size() != cfg.scales) {
        throw std::invalid_argument("sfem_forward: params hold " +
                                    std::to_string(params.per_scale.size()) +
                                    " scales, config wants " + std::to_string(cfg.scales));
    }
    if (!mask.spatial && !mask.frequency) {
        throw std::invalid_argument("sfem_forward: empty branch mask");
    }
    auto pyramid = build_pyramid(f, cfg.scales);
    const std::size_t out = cfg.pooled_extent;
    if (out > pyramid.back().extent(1) || out > pyramid.back().extent(2)) {
        throw std::invalid_argument("sfem_forward: pooled extent " + std::to_string(out) +
                                    " exceeds smallest scale " +
                                    shape_str(pyramid.back().shape()));
    }
    std::vector<Tensor> spatial_parts, frequency_parts;
    for (std::size_t i = 0; i < cfg.scales; ++i) {
        if (mask.spatial) {
            spatial_parts.push_back(
                adaptive_avg_pool2d(spatial_branch(pyramid[i], params.per_scale[i]), out, out));
        }
        if (mask.frequency) {
            frequency_parts.push_back(
                adaptive_avg_pool2d(frequency_branch(pyramid[i], params.per_scale[i]), out, out));
        }
    }
    SfemOutput result;
    if (mask.spatial) result.spatial = concat(spatial_parts, 0);
    if (mask.frequency) result.frequency = concat(frequency_parts, 0);
    return result;
}

}  // namespace samiqa
