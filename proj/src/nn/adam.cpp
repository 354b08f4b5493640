#include "ssoct/nn/adam.hpp"

#include <cmath>
#include <string>

#include "ssoct/error.hpp"

namespace ssoct::nn {

template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state) {
    if (state.first_moment.empty() && state.second_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.numel(), T{0});
            state.second_moment.emplace_back(p.numel(), T{0});
        }
    }
    if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
        throw DimensionError("Adam state tracks " + std::to_string(state.first_moment.size()) +
                             " parameters, got " + std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (state.first_moment[i].size() != params[i].numel() || state.second_moment[i].size() != params[i].numel()) {
            throw DimensionError("Adam moment " + std::to_string(i) + " does not match parameter shape " +
                                 shape_string(params[i].shape()));
        }
    }

    const auto& o = state.options;
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(o.beta1, t);
    const double bc2 = 1.0 - std::pow(o.beta2, t);
    // update = lr/bc1 * m / (sqrt(v)/sqrt(bc2) + eps), evaluated in T so the loop vectorizes.
    const T b1 = static_cast<T>(o.beta1);
    const T b2 = static_cast<T>(o.beta2);
    const T one_minus_b1 = static_cast<T>(1.0 - o.beta1);
    const T one_minus_b2 = static_cast<T>(1.0 - o.beta2);
    const T step_size = static_cast<T>(o.lr / bc1);
    const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
    const T eps = static_cast<T>(o.eps);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        const auto values = p.data();
        const auto grad = p.grad();
        T* __restrict w = values.data();
        T* __restrict m = state.first_moment[i].data();
        T* __restrict v = state.second_moment[i].data();
        const T* __restrict g = grad.empty() ? nullptr : grad.data();
        const std::size_t n = values.size();
        if (g == nullptr) {
            for (std::size_t e = 0; e < n; ++e) {
                m[e] = b1 * m[e];
                v[e] = b2 * v[e];
                w[e] -= step_size * m[e] / (std::sqrt(v[e]) * inv_sqrt_bc2 + eps);
            }
            continue;
        }
        for (std::size_t e = 0; e < n; ++e) {
            m[e] = b1 * m[e] + one_minus_b1 * g[e];
            v[e] = b2 * v[e] + one_minus_b2 * g[e] * g[e];
            w[e] -= step_size * m[e] / (std::sqrt(v[e]) * inv_sqrt_bc2 + eps);
        }
    }
}

template void adam_step(std::span<Tensor<float>>, AdamState<float>&);
template void adam_step(std::span<Tensor<double>>, AdamState<double>&);

}  // namespace ssoct::nn
