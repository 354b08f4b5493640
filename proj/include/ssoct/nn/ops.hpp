#pragma once

// Differentiable layers. Image tensors are batch x channels x height x width.

#include <vector>

#include "ssoct/nn/tensor.hpp"

namespace ssoct::nn {

enum class Mode { train, eval };

struct Conv2dOptions {
    std::size_t stride = 1;
    std::size_t padding = 0;
};

/// Cross-correlation (no kernel flip). `bias` may be undefined.
/// Output extent (H + 2*padding - kh) / stride + 1.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, Conv2dOptions opts = {});

template <typename T>
struct BatchNormState {
    Tensor<T> gamma;
    Tensor<T> beta;
    std::vector<T> running_mean;
    std::vector<T> running_var;
    double momentum = 0.1;
    double eps = 1e-5;

    static BatchNormState create(std::size_t channels);
};

/// Train mode normalizes with batch statistics over N*H*W and updates the
/// running estimates (unbiased variance); eval mode uses the running estimates.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, BatchNormState<T>& state, Mode mode);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

/// Max over window x window patches; gradient goes to the first maximum in
/// row-major window order. Extents must tile exactly.
template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& x, std::size_t window = 2, std::size_t stride = 2);

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& x, std::size_t factor = 2);

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

/// x (N x C x H x W) scaled per pixel by map (N x 1 x H x W), shared across channels.
template <typename T>
Tensor<T> mul_channel_map(const Tensor<T>& x, const Tensor<T>& map);

/// (1/n) * sum (target - pred)^2 over all n elements.
template <typename T>
Tensor<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

}  // namespace ssoct::nn
