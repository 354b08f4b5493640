#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssoct/nn/tensor.hpp"

namespace ssoct::nn {

struct AdamOptions {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename T>
struct AdamState {
    AdamOptions options;
    std::vector<std::vector<T>> first_moment;
    std::vector<std::vector<T>> second_moment;
    std::int64_t step_count = 0;
};

/// One bias-corrected Adam update of every parameter from its accumulated
/// gradient (a parameter without a gradient is treated as having zero
/// gradient). Moments are allocated on the first call.
template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state);

extern template void adam_step(std::span<Tensor<float>>, AdamState<float>&);
extern template void adam_step(std::span<Tensor<double>>, AdamState<double>&);

}  // namespace ssoct::nn
