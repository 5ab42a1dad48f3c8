#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gclab/tensor.hpp"

namespace gclab::ad {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // L2 term added to the gradient
};

/// Moment estimates for a list of parameters.
struct AdamState {
    AdamConfig config;
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    std::size_t step = 0;
};

/// One bias-corrected Adam update with the weight-decay term folded into the
/// gradient (g + wd * theta) before the moment update. Moments are created on
/// the first call. Throws ShapeError when shapes disagree.
void adam_step(AdamState& state, std::span<Matrix* const> params, std::span<const Matrix* const> grads);

/// Adam over a fixed list of parameter tensors.
class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig config);

    /// Applies one update from the accumulated gradients. Parameters that
    /// received no gradient are treated as having a zero gradient.
    void step();
    void zero_grad();

    const AdamState& state() const { return state_; }

private:
    std::vector<Tensor> params_;
    AdamState state_;
};

}  // namespace gclab::ad
