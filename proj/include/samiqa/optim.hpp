#pragma once

#include <cstdint>
#include <vector>

#include "samiqa/model.hpp"
#include "samiqa/tensor.hpp"

namespace samiqa {

Tensor l1_loss(const Tensor& pred, double label);

struct AdamConfig {
    double lr = 2e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard bias-corrected Adam over a fixed parameter list. Gradients are
// consumed and zeroed by step().
class AdamOptimizer {
public:
    AdamOptimizer(std::vector<Tensor> params, const AdamConfig& cfg = {});

    void step();
    std::uint64_t step_count() const { return t_; }

    AdamSnapshot snapshot() const;
    void restore(const AdamSnapshot& snap);

private:
    std::vector<Tensor> params_;
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace samiqa
