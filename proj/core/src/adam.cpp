#include "gclab/adam.hpp"

#include <cmath>

namespace gclab::ad {

void adam_step(AdamState& state, std::span<Matrix* const> params, std::span<const Matrix* const> grads) {
    if (params.size() != grads.size()) throw ShapeError("adam_step: parameter and gradient counts differ");
    if (state.m.empty()) {
        for (Matrix* p : params) {
            state.m.push_back(Matrix::zeros_like(*p));
            state.v.push_back(Matrix::zeros_like(*p));
        }
    }
    if (state.m.size() != params.size()) throw ShapeError("adam_step: state does not match parameter list");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->same_shape(*grads[i]) || !params[i]->same_shape(state.m[i])) {
            throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(i));
        }
    }

    const auto& cfg = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& theta = params[i]->data;
        const auto& g = grads[i]->data;
        auto& m = state.m[i].data;
        auto& v = state.v[i].data;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double grad = g[j] + cfg.weight_decay * theta[j];
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * grad;
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * grad * grad;
            const double m_hat = m[j] / correction1;
            const double v_hat = v[j] / correction2;
            theta[j] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
    }
}

Adam::Adam(std::vector<Tensor> params, AdamConfig config) : params_(std::move(params)) { state_.config = config; }

void Adam::step() {
    std::vector<Matrix*> values;
    std::vector<const Matrix*> grads;
    std::vector<Matrix> zeros;
    zeros.reserve(params_.size());
    for (Tensor& p : params_) {
        values.push_back(&p.mutable_value());
        if (p.has_grad()) {
            grads.push_back(&p.grad());
        } else {
            zeros.push_back(Matrix::zeros_like(p.value()));
            grads.push_back(&zeros.back());
        }
    }
    adam_step(state_, values, grads);
}

void Adam::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

}  // namespace gclab::ad
