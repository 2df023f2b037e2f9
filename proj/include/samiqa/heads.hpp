#pragma once

#include <functional>
#include <optional>
#include <string>

#include "samiqa/tensor.hpp"

namespace samiqa {

// Alternating affine+ReLU layers; the final layer is affine only.
struct MlpParams {
    std::vector<Tensor> weights;  // layer i: [out_i, in_i]
    std::vector<Tensor> biases;   // layer i: [out_i]

    std::size_t input_width() const { return weights.front().extent(1); }
    std::size_t output_width() const { return weights.back().extent(0); }
};

MlpParams init_mlp(const std::vector<std::size_t>& widths, std::uint64_t seed);
Tensor mlp_forward(const Tensor& x, const MlpParams& p);

// FRRB: score = sigmoid(phi([f(D_s), g(D_f)])). Branch-disabled configs omit
// the corresponding mapping and narrow phi.
struct FrrbParams {
    std::optional<MlpParams> f;  // spatial-distance mapping
    std::optional<MlpParams> g;  // frequency-distance mapping
    MlpParams phi;

    void visit(const std::function<void(const std::string&, Tensor&)>& fn);
};

// NRRB: score = sigmoid(phi([eta_s(gap(F_s)), eta_f(gap(F_f))])), where gap
// is global average pooling to a per-channel vector.
struct NrrbParams {
    std::optional<MlpParams> eta_s;
    std::optional<MlpParams> eta_f;
    MlpParams phi;

    void visit(const std::function<void(const std::string&, Tensor&)>& fn);
};

constexpr std::size_t kHeadHiddenWidth = 64;

FrrbParams init_frrb(std::optional<std::size_t> spatial_width,
                     std::optional<std::size_t> frequency_width, std::uint64_t seed);
NrrbParams init_nrrb(std::optional<std::size_t> spatial_channels,
                     std::optional<std::size_t> frequency_channels, std::uint64_t seed);

Tensor frrb_forward(const std::optional<Tensor>& d_s, const std::optional<Tensor>& d_f,
                    const FrrbParams& p);
Tensor nrrb_forward(const std::optional<Tensor>& f_s, const std::optional<Tensor>& f_f,
                    const NrrbParams& p);

}  // namespace samiqa
