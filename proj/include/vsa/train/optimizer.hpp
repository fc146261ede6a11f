#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsa/train/config.hpp"

namespace vsa::train {

/// First-order optimizer over a fixed list of parameter blocks. Blocks whose
/// gradient buffer is empty are skipped (frozen) for that step.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double learning_rate, std::vector<std::size_t> block_sizes);

    void step(std::span<const std::span<double>> params, const std::vector<std::vector<double>>& grads);

    std::size_t steps() const noexcept { return steps_; }

    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;
    static constexpr double kMomentum = 0.9;

private:
    OptimizerKind kind_;
    double lr_;
    std::size_t steps_ = 0;
    std::vector<std::vector<double>> m_;  // first moment / momentum
    std::vector<std::vector<double>> v_;  // second moment (adam)
};

}  // namespace vsa::train
