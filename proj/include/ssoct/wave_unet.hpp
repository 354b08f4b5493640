#pragma once

// Residual attention UNET: `levels` encoder blocks (residual block + 2x2 max
// pool), a bottleneck residual block, and `levels` decoder blocks that each
// upsample, gate the matching encoder skip with an additive attention map,
// concatenate and refine with a residual block. A final 1x1 convolution maps
// to the output channel.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssoct/nn/ops.hpp"

namespace ssoct {

struct ModelConfig {
    std::size_t levels = 4;
    std::size_t base_channels = 16;
    std::size_t input_channels = 2;
    std::size_t output_channels = 1;
    std::size_t patch_height = 288;
    std::size_t patch_width = 512;

    /// Throws ConfigError unless patch extents are divisible by 2^levels.
    void validate() const;
    std::size_t channels_at(std::size_t level) const { return base_channels << level; }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <typename T>
struct ConvLayer {
    nn::Tensor<T> weight;
    nn::Tensor<T> bias;  // may be undefined
    nn::Conv2dOptions options;

    nn::Tensor<T> operator()(const nn::Tensor<T>& x) const { return nn::conv2d(x, weight, bias, options); }
};

template <typename T>
struct ResidualBlockParams {
    ConvLayer<T> conv1;
    nn::BatchNormState<T> bn1;
    ConvLayer<T> conv2;
    nn::BatchNormState<T> bn2;
    std::optional<ConvLayer<T>> shortcut;  // 1x1 projection when channel counts differ
};

template <typename T>
struct AttentionGateParams {
    ConvLayer<T> skip_proj;  // 2x2 stride 2, no bias
    ConvLayer<T> gate_proj;  // 1x1 with bias
    ConvLayer<T> psi;        // 1x1 to one channel with bias
};

/// relu(bn2(conv2(relu(bn1(conv1(x))))) + shortcut(x)), 3x3 same-padded convolutions.
template <typename T>
nn::Tensor<T> residual_block(const nn::Tensor<T>& x, ResidualBlockParams<T>& params, nn::Mode mode);

/// skip * upsample(sigmoid(psi(relu(skip_proj(skip) + gate_proj(gate))))).
/// `gate` must have half the spatial extent of `skip`.
template <typename T>
nn::Tensor<T> attention_gate(const nn::Tensor<T>& skip, const nn::Tensor<T>& gate, const AttentionGateParams<T>& params);

/// Attention coefficients alone (1 channel, skip resolution); used by tests and tooling.
template <typename T>
nn::Tensor<T> attention_map(const nn::Tensor<T>& skip, const nn::Tensor<T>& gate, const AttentionGateParams<T>& params);

template <typename T>
ResidualBlockParams<T> make_residual_block(std::size_t in_channels, std::size_t out_channels);

template <typename T>
AttentionGateParams<T> make_attention_gate(std::size_t skip_channels, std::size_t gate_channels);

template <typename T>
class WaveUnet {
public:
    using NamedTensor = std::pair<std::string, nn::Tensor<T>>;
    using NamedBuffer = std::pair<std::string, std::vector<T>*>;

    /// Builds the topology and draws the initial weights from `seed`
    /// (zero-mean normal, std sqrt(2/fan_in); zero biases; unit BN scale).
    WaveUnet(const ModelConfig& cfg, std::uint64_t seed);

    WaveUnet(const WaveUnet&) = delete;
    WaveUnet& operator=(const WaveUnet&) = delete;
    WaveUnet(WaveUnet&&) = default;
    WaveUnet& operator=(WaveUnet&&) = default;

    const ModelConfig& config() const { return cfg_; }

    /// batch x input_channels x H x W -> batch x output_channels x H x W.
    nn::Tensor<T> forward(const nn::Tensor<T>& input, nn::Mode mode);

    /// Trainable tensors in a fixed order; the names are a function of the config.
    const std::vector<NamedTensor>& named_parameters() const { return params_; }
    std::vector<nn::Tensor<T>> parameters() const;
    std::size_t parameter_count() const;

    /// Batch-norm running statistics.
    std::vector<NamedBuffer> named_buffers();

    void zero_grad();

    ResidualBlockParams<T>& encoder_block(std::size_t level) { return encoders_.at(level); }
    ResidualBlockParams<T>& bottleneck() { return bottleneck_; }
    ConvLayer<T>& output_layer() { return output_; }

private:
    void register_params();

    ModelConfig cfg_;
    std::vector<ResidualBlockParams<T>> encoders_;
    ResidualBlockParams<T> bottleneck_;
    std::vector<ConvLayer<T>> up_convs_;
    std::vector<AttentionGateParams<T>> gates_;
    std::vector<ResidualBlockParams<T>> decoders_;
    ConvLayer<T> output_;
    std::vector<NamedTensor> params_;
};

extern template class WaveUnet<float>;
extern template class WaveUnet<double>;

}  // namespace ssoct
