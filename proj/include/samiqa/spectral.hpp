#pragma once

#include <cstddef>
#include <vector>

#include "samiqa/tensor.hpp"

namespace samiqa {

// Half spectrum of a real CxHxW signal: H x (W/2+1) bins per channel.
struct Spectrum {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width_bins = 0;  // W/2+1
    std::vector<double> re;
    std::vector<double> im;

    std::size_t bins() const { return channels * height * width_bins; }
};

bool is_power_of_two(std::size_t n);

// Unnormalized forward transform of a real CxHxW tensor (H, W powers of two).
Spectrum rfft2(const Tensor& x);

// Inverse with Hermitian completion from the stored half spectrum, scaled by
// 1/(H*W). Returns a real CxHxW tensor.
Tensor irfft2(const Spectrum& s, std::size_t height, std::size_t width);

Spectrum spectral_pointwise_mul(const Spectrum& a, const Spectrum& b);

// Differentiable transform pair. rfft2_stack lays out the half spectrum as a
// real tensor with real parts in channels [0,C) and imaginary parts in
// [C,2C); irfft2_unstack inverts that layout back to CxHxW.
Tensor rfft2_stack(const Tensor& x);
Tensor irfft2_unstack(const Tensor& z, std::size_t width);

// Spectral mixing layer: rfft2 -> 1x1 conv (w: 2Cx2Cx1x1, b: 2C) -> ReLU ->
// irfft2. linear_mode skips the ReLU.
Tensor fourier_conv(const Tensor& x, const Tensor& w, const Tensor& b,
                    bool linear_mode = false);

}  // namespace samiqa
