#include "vsa/train/optimizer.hpp"

#include <cmath>

#include "vsa/core/error.hpp"

namespace vsa::train {

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::vector<std::size_t> block_sizes)
    : kind_(kind), lr_(learning_rate) {
    for (auto size : block_sizes) {
        m_.emplace_back(size, 0.0);
        if (kind_ == OptimizerKind::adam) v_.emplace_back(size, 0.0);
    }
}

void Optimizer::step(std::span<const std::span<double>> params, const std::vector<std::vector<double>>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw Error(ErrorKind::shape_mismatch, "optimizer was built for a different parameter layout");
    }
    ++steps_;
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    for (std::size_t b = 0; b < params.size(); ++b) {
        const auto& g = grads[b];
        if (g.empty()) continue;
        if (g.size() != params[b].size() || g.size() != m_[b].size()) {
            throw Error(ErrorKind::shape_mismatch, "gradient block size differs from its parameters");
        }
        auto p = params[b];
        auto& m = m_[b];
        if (kind_ == OptimizerKind::adam) {
            auto& v = v_[b];
            for (std::size_t i = 0; i < g.size(); ++i) {
                m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
                v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
                p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEpsilon);
            }
        } else {
            for (std::size_t i = 0; i < g.size(); ++i) {
                m[i] = kMomentum * m[i] + g[i];
                p[i] -= lr_ * m[i];
            }
        }
    }
}

}  // namespace vsa::train
