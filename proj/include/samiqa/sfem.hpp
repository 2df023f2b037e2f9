#pragma once

#include <functional>
#include <optional>
#include <string>

#include "samiqa/encoder.hpp"
#include "samiqa/tensor.hpp"

namespace samiqa {

struct SfemConfig {
    std::size_t scales = 3;
    std::size_t channels = 16;
    std::size_t kernel_size = 3;
    std::size_t pooled_extent = 4;
};

// B = spatial (classical conv) branch, F = frequency (Fourier conv) branch.
struct BranchMask {
    bool spatial = true;
    bool frequency = true;
};

BranchMask parse_branch_mask(const std::string& text);  // "b" | "f" | "bf"
std::string branch_mask_name(const BranchMask& mask);

// One parameter set shared between the LQ and HQ passes (siamese).
struct SfemScaleParams {
    Tensor conv1_w, conv1_b;
    Tensor conv2_w, conv2_b;
    Tensor fft_w, fft_b;
};

struct SfemParams {
    std::vector<SfemScaleParams> per_scale;

    void visit(const std::function<void(const std::string&, Tensor&)>& fn);
};

SfemParams init_sfem_params(const SfemConfig& cfg, std::uint64_t seed);

struct SfemOutput {
    std::optional<Tensor> spatial;    // (scales*C) x out x out
    std::optional<Tensor> frequency;  // same shape
};

std::vector<Tensor> build_pyramid(const Tensor& f, std::size_t scales);
Tensor spatial_branch(const Tensor& f, const SfemScaleParams& params);
Tensor frequency_branch(const Tensor& f, const SfemScaleParams& params);

SfemOutput sfem_forward(const Tensor& f, SfemParams& params, const SfemConfig& cfg,
                        const BranchMask& mask = {});

}  // namespace samiqa
