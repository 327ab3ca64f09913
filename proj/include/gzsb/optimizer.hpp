#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gzsb/error.hpp"

namespace gzsb {

struct SgdState {
    double lr = 0.1;
    double momentum = 0.0;
    std::vector<double> velocity; // allocated on first use when momentum > 0
};

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<double> m;
    std::vector<double> v;
};

using OptimizerState = std::variant<SgdState, AdamState>;

namespace detail {
inline void check_grad(std::span<const double> params, std::span<const double> grad) {
    if (params.size() != grad.size()) {
        throw DataError("optimizer: gradient length " + std::to_string(grad.size()) +
                        " does not match parameter length " + std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            throw NumericError("optimizer: non-finite gradient entry at index " +
                               std::to_string(i));
        }
    }
}
}  // namespace detail

inline void sgd_step(std::span<double> params, std::span<const double> grad, SgdState& state) {
    detail::check_grad(params, grad);
    if (state.momentum == 0.0) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= state.lr * grad[i];
        return;
    }
    if (state.velocity.empty()) state.velocity.assign(params.size(), 0.0);
    if (state.velocity.size() != params.size()) {
        throw DataError("sgd_step: momentum buffer length mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.velocity[i] = state.momentum * state.velocity[i] + grad[i];
        params[i] -= state.lr * state.velocity[i];
    }
}

// standard Adam with bias correction
inline void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state) {
    detail::check_grad(params, grad);
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) throw DataError("adam_step: moment length mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

inline void optimizer_step(std::span<double> params, std::span<const double> grad,
                           OptimizerState& state) {
    if (auto* sgd = std::get_if<SgdState>(&state)) {
        sgd_step(params, grad, *sgd);
    } else {
        adam_step(params, grad, std::get<AdamState>(state));
    }
}

}  // namespace gzsb
