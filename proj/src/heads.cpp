#include "samiqa/heads.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace samiqa {

namespace {

void visit_mlp(const std::string& prefix, MlpParams& p,
               const std::function<void(const std::string&, Tensor&)>& fn) {
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        fn(prefix + ".layer" + std::to_string(i) + ".w", p.weights[i]);
        fn(prefix + ".layer" + std::to_string(i) + ".b", p.biases[i]);
    }
}

Tensor global_avg_pool(const Tensor& f) {
    return reshape(adaptive_avg_pool2d(f, 1, 1), {f.extent(0)});
}

}  // namespace

MlpParams init_mlp(const std::vector<std::size_t>& widths, std::uint64_t seed) {
    if (widths.size() < 2) throw std::invalid_argument("init_mlp: need >= 2 widths");
    std::mt19937_64 rng(seed);
    MlpParams p;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const std::size_t in = widths[i], out = widths[i + 1];
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / double(in)));
        std::vector<double> w(out * in);
        for (double& v : w) v = dist(rng);
        p.weights.emplace_back(std::vector<std::size_t>{out, in}, std::move(w), true);
        p.biases.push_back(Tensor::zeros({out}, true));
    }
    return p;
}

Tensor mlp_forward(const Tensor& x, const MlpParams& p) {
    if (x.rank() != 1 || x.extent(0) != p.input_width()) {
        throw std::invalid_argument("mlp_forward: input width " + shape_str(x.shape()) +
                                    " does not match first layer " +
                                    shape_str(p.weights.front().shape()));
    }
    Tensor h = x;
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        h = add(matmul(p.weights[i], h), p.biases[i]);
        if (i + 1 < p.weights.size()) h = relu(h);
    }
    return h;
}

void FrrbParams::visit(const std::function<void(const std::string&, Tensor&)>& fn) {
    if (f) visit_mlp("frrb.f", *f, fn);
    if (g) visit_mlp("frrb.g", *g, fn);
    visit_mlp("frrb.phi", phi, fn);
}

void NrrbParams::visit(const std::function<void(const std::string&, Tensor&)>& fn) {
    if (eta_s) visit_mlp("nrrb.eta_s", *eta_s, fn);
    if (eta_f) visit_mlp("nrrb.eta_f", *eta_f, fn);
    visit_mlp("nrrb.phi", phi, fn);
}

FrrbParams init_frrb(std::optional<std::size_t> spatial_width,
                     std::optional<std::size_t> frequency_width, std::uint64_t seed) {
    if (!spatial_width && !frequency_width) {
        throw std::invalid_argument("init_frrb: both branches disabled");
    }
    FrrbParams p;
    std::size_t phi_in = 0;
    if (spatial_width) {
        p.f = init_mlp({*spatial_width, kHeadHiddenWidth, kHeadHiddenWidth}, seed + 1);
        phi_in += kHeadHiddenWidth;
    }
    if (frequency_width) {
        p.g = init_mlp({*frequency_width, kHeadHiddenWidth, kHeadHiddenWidth}, seed + 2);
        phi_in += kHeadHiddenWidth;
    }
    p.phi = init_mlp({phi_in, kHeadHiddenWidth, 1}, seed + 3);
    return p;
}

NrrbParams init_nrrb(std::optional<std::size_t> spatial_channels,
                     std::optional<std::size_t> frequency_channels, std::uint64_t seed) {
    if (!spatial_channels && !frequency_channels) {
        throw std::invalid_argument("init_nrrb: both branches disabled");
    }
    NrrbParams p;
    std::size_t phi_in = 0;
    if (spatial_channels) {
        p.eta_s = init_mlp({*spatial_channels, kHeadHiddenWidth, kHeadHiddenWidth}, seed + 1);
        phi_in += kHeadHiddenWidth;
    }
    if (frequency_channels) {
        p.eta_f = init_mlp({*frequency_channels, kHeadHiddenWidth, kHeadHiddenWidth}, seed + 2);
        phi_in += kHeadHiddenWidth;
    }
    p.phi = init_mlp({phi_in, kHeadHiddenWidth, 1}, seed + 3);
    return p;
}

Tensor frrb_forward(const std::optional<Tensor>& d_s, const std::optional<Tensor>& d_f,
                    const FrrbParams& p) {
    if (d_s.has_value() != p.f.has_value() || d_f.has_value() != p.g.has_value()) {
        throw std::invalid_argument("frrb_forward: branch inputs do not match params");
    }
    std::vector<Tensor> parts;
    if (d_s) parts.push_back(mlp_forward(*d_s, *p.f));
    if (d_f) parts.push_back(mlp_forward(*d_f, *p.g));
    Tensor joint = parts.size() == 1 ? parts.front() : concat(parts, 0);
    return sigmoid(mlp_forward(joint, p.phi));
}

Tensor nrrb_forward(const std::optional<Tensor>& f_s, const std::optional<Tensor>& f_f,
                    const NrrbParams& p) {
    if (f_s.has_value() != p.eta_s.has_value() || f_f.has_value() != p.eta_f.has_value()) {
        throw std::invalid_argument("nrrb_forward: branch inputs do not match params");
    }
    std::vector<Tensor> parts;
    if (f_s) parts.push_back(mlp_forward(global_avg_pool(*f_s), *p.eta_s));
    if (f_f) parts.push_back(mlp_forward(global_avg_pool(*f_f), *p.eta_f));
    Tensor joint = parts.size() == 1 ? parts.front() : concat(parts, 0);
    return sigmoid(mlp_forward(joint, p.phi));
}

}  // namespace samiqa
