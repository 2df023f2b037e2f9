#include "samiqa/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace samiqa {

Tensor l1_loss(const Tensor& pred, double label) {
    if (pred.size() != 1) {
        throw std::invalid_argument("l1_loss: prediction has " +
                                    std::to_string(pred.size()) +
                                    " elements, expected a scalar");
    }
    return abs(sub(pred, Tensor::scalar(label)));
}

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, const AdamConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
    for (const Tensor& p : params_) {
        if (!p.requires_grad()) {
            throw std::invalid_argument("adam: parameter without gradient storage");
        }
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void AdamOptimizer::step() {
    t_ += 1;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = params_[pi];
        const std::vector<double>& g = p.grad();
        for (std::size_t i = 0; i < p.size(); ++i) {
            m_[pi][i] = cfg_.beta1 * m_[pi][i] + (1.0 - cfg_.beta1) * g[i];
            v_[pi][i] = cfg_.beta2 * v_[pi][i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m_[pi][i] / bc1;
            const double vhat = v_[pi][i] / bc2;
            p.data()[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
        p.zero_grad();
    }
}

AdamSnapshot AdamOptimizer::snapshot() const {
    AdamSnapshot snap;
    snap.step = t_;
    snap.m = m_;
    snap.v = v_;
    return snap;
}

void AdamOptimizer::restore(const AdamSnapshot& snap) {
    if (snap.m.size() != params_.size() || snap.v.size() != params_.size()) {
        throw std::invalid_argument("adam: snapshot does not match parameter list");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (snap.m[i].size() != params_[i].size() ||
            snap.v[i].size() != params_[i].size()) {
            throw std::invalid_argument("adam: snapshot accumulator size mismatch for "
                                        "parameter " + std::to_string(i));
        }
    }
    t_ = snap.step;
    m_ = snap.m;
    v_ = snap.v;
}

}  // namespace samiqa
