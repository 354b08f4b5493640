#include "ssoct/wave_unet.hpp"

#include <cmath>
#include <random>

#include "ssoct/error.hpp"

namespace ssoct {

using nn::Tensor;

void ModelConfig::validate() const {
    if (levels < 1) throw ConfigError("model.levels must be >= 1");
    if (base_channels < 1) throw ConfigError("model.base_channels must be >= 1");
    if (input_channels != 2) throw ConfigError("model.input_channels must be 2 (image + wavenumber)");
    if (output_channels != 1) throw ConfigError("model.output_channels must be 1");
    const std::size_t step = std::size_t{1} << levels;
    if (patch_height == 0 || patch_width == 0 || patch_height % step != 0 || patch_width % step != 0) {
        throw ConfigError("patch extents " + std::to_string(patch_height) + "x" + std::to_string(patch_width) +
                          " must be divisible by 2^levels = " + std::to_string(step));
    }
}

namespace {

template <typename T>
ConvLayer<T> make_conv(std::size_t in, std::size_t out, std::size_t kernel, bool with_bias, nn::Conv2dOptions opts) {
    ConvLayer<T> layer;
    layer.weight = Tensor<T>({out, in, kernel, kernel}, true);
    if (with_bias) layer.bias = Tensor<T>({out}, true);
    layer.options = opts;
    return layer;
}

template <typename T>
void push_conv(std::vector<std::pair<std::string, Tensor<T>>>& list, const std::string& prefix, const ConvLayer<T>& c) {
    list.emplace_back(prefix + ".weight", c.weight);
    if (c.bias.defined()) list.emplace_back(prefix + ".bias", c.bias);
}

template <typename T>
void push_bn(std::vector<std::pair<std::string, Tensor<T>>>& list, const std::string& prefix,
             const nn::BatchNormState<T>& bn) {
    list.emplace_back(prefix + ".gamma", bn.gamma);
    list.emplace_back(prefix + ".beta", bn.beta);
}

template <typename T>
void push_block(std::vector<std::pair<std::string, Tensor<T>>>& list, const std::string& prefix,
                const ResidualBlockParams<T>& b) {
    push_conv(list, prefix + ".conv1", b.conv1);
    push_bn(list, prefix + ".bn1", b.bn1);
    push_conv(list, prefix + ".conv2", b.conv2);
    push_bn(list, prefix + ".bn2", b.bn2);
    if (b.shortcut) push_conv(list, prefix + ".shortcut", *b.shortcut);
}

}  // namespace

template <typename T>
ResidualBlockParams<T> make_residual_block(std::size_t in_channels, std::size_t out_channels) {
    ResidualBlockParams<T> b;
    b.conv1 = make_conv<T>(in_channels, out_channels, 3, false, {1, 1});
    b.bn1 = nn::BatchNormState<T>::create(out_channels);
    b.conv2 = make_conv<T>(out_channels, out_channels, 3, false, {1, 1});
    b.bn2 = nn::BatchNormState<T>::create(out_channels);
    if (in_channels != out_channels) b.shortcut = make_conv<T>(in_channels, out_channels, 1, true, {1, 0});
    return b;
}

template <typename T>
AttentionGateParams<T> make_attention_gate(std::size_t skip_channels, std::size_t gate_channels) {
    const std::size_t inter = std::max<std::size_t>(1, skip_channels / 2);
    AttentionGateParams<T> g;
    g.skip_proj = make_conv<T>(skip_channels, inter, 2, false, {2, 0});
    g.gate_proj = make_conv<T>(gate_channels, inter, 1, true, {1, 0});
    g.psi = make_conv<T>(inter, 1, 1, true, {1, 0});
    return g;
}

template <typename T>
Tensor<T> residual_block(const Tensor<T>& x, ResidualBlockParams<T>& p, nn::Mode mode) {
    auto h = nn::relu(nn::batch_norm(p.conv1(x), p.bn1, mode));
    h = nn::batch_norm(p.conv2(h), p.bn2, mode);
    const Tensor<T> shortcut = p.shortcut ? (*p.shortcut)(x) : x;
    return nn::relu(nn::add(h, shortcut));
}

template <typename T>
Tensor<T> attention_map(const Tensor<T>& skip, const Tensor<T>& gate, const AttentionGateParams<T>& p) {
    if (skip.rank() != 4 || gate.rank() != 4 || skip.dim(0) != gate.dim(0) || skip.dim(2) != 2 * gate.dim(2) ||
        skip.dim(3) != 2 * gate.dim(3)) {
        throw DimensionError("attention gate needs a gate at half the skip resolution, got skip " +
                             nn::shape_string(skip.shape()) + " gate " + nn::shape_string(gate.shape()));
    }
    const auto q = nn::relu(nn::add(p.skip_proj(skip), p.gate_proj(gate)));
    return nn::upsample_nearest(nn::sigmoid(p.psi(q)), 2);
}

template <typename T>
Tensor<T> attention_gate(const Tensor<T>& skip, const Tensor<T>& gate, const AttentionGateParams<T>& p) {
    return nn::mul_channel_map(skip, attention_map(skip, gate, p));
}

template <typename T>
WaveUnet<T>::WaveUnet(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t levels = cfg_.levels;
    for (std::size_t l = 0; l < levels; ++l) {
        const std::size_t in = l == 0 ? cfg_.input_channels : cfg_.channels_at(l - 1);
        encoders_.push_back(make_residual_block<T>(in, cfg_.channels_at(l)));
    }
    bottleneck_ = make_residual_block<T>(cfg_.channels_at(levels - 1), cfg_.channels_at(levels));
    for (std::size_t l = 0; l < levels; ++l) {
        const std::size_t c = cfg_.channels_at(l);
        const std::size_t below = cfg_.channels_at(l + 1);
        up_convs_.push_back(make_conv<T>(below, c, 3, true, {1, 1}));
        gates_.push_back(make_attention_gate<T>(c, below));
        decoders_.push_back(make_residual_block<T>(2 * c, c));
    }
    output_ = make_conv<T>(cfg_.channels_at(0), cfg_.output_channels, 1, true, {1, 0});
    register_params();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& [name, t] : params_) {
        if (t.rank() != 4) continue;
        const double fan_in = static_cast<double>(t.dim(1) * t.dim(2) * t.dim(3));
        const double sd = std::sqrt(2.0 / fan_in);
        for (auto& v : t.data()) v = static_cast<T>(sd * normal(rng));
    }
}

template <typename T>
void WaveUnet<T>::register_params() {
    params_.clear();
    for (std::size_t l = 0; l < encoders_.size(); ++l) push_block(params_, "enc" + std::to_string(l), encoders_[l]);
    push_block(params_, std::string("bottleneck"), bottleneck_);
    for (std::size_t l = 0; l < decoders_.size(); ++l) {
        const std::string prefix = "dec" + std::to_string(l);
        push_conv(params_, prefix + ".up", up_convs_[l]);
        push_conv(params_, prefix + ".att.skip_proj", gates_[l].skip_proj);
        push_conv(params_, prefix + ".att.gate_proj", gates_[l].gate_proj);
        push_conv(params_, prefix + ".att.psi", gates_[l].psi);
        push_block(params_, prefix + ".block", decoders_[l]);
    }
    push_conv(params_, std::string("head"), output_);
}

template <typename T>
Tensor<T> WaveUnet<T>::forward(const Tensor<T>& input, nn::Mode mode) {
    if (input.rank() != 4 || input.dim(1) != cfg_.input_channels) {
        throw DimensionError("model input must be batch x " + std::to_string(cfg_.input_channels) +
                             " x H x W, got " + nn::shape_string(input.shape()));
    }
    const std::size_t step = std::size_t{1} << cfg_.levels;
    if (input.dim(2) % step != 0 || input.dim(3) % step != 0) {
        throw DimensionError("model input extents must be divisible by " + std::to_string(step) + ", got " +
                             nn::shape_string(input.shape()));
    }
    std::vector<Tensor<T>> skips;
    Tensor<T> h = input;
    for (auto& block : encoders_) {
        h = residual_block(h, block, mode);
        skips.push_back(h);
        h = nn::max_pool2d(h, 2, 2);
    }
    h = residual_block(h, bottleneck_, mode);
    for (std::size_t l = cfg_.levels; l-- > 0;) {
        const auto up = up_convs_[l](nn::upsample_nearest(h, 2));
        const auto gated = attention_gate(skips[l], h, gates_[l]);
        h = residual_block(nn::concat_channels(up, gated), decoders_[l], mode);
    }
    return output_(h);
}

template <typename T>
std::vector<Tensor<T>> WaveUnet<T>::parameters() const {
    std::vector<Tensor<T>> out;
    out.reserve(params_.size());
    for (const auto& [name, t] : params_) out.push_back(t);
    return out;
}

template <typename T>
std::size_t WaveUnet<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : params_) n += t.numel();
    return n;
}

template <typename T>
std::vector<typename WaveUnet<T>::NamedBuffer> WaveUnet<T>::named_buffers() {
    std::vector<NamedBuffer> out;
    auto add_block = [&out](const std::string& prefix, ResidualBlockParams<T>& b) {
        out.emplace_back(prefix + ".bn1.running_mean", &b.bn1.running_mean);
        out.emplace_back(prefix + ".bn1.running_var", &b.bn1.running_var);
        out.emplace_back(prefix + ".bn2.running_mean", &b.bn2.running_mean);
        out.emplace_back(prefix + ".bn2.running_var", &b.bn2.running_var);
    };
    for (std::size_t l = 0; l < encoders_.size(); ++l) add_block("enc" + std::to_string(l), encoders_[l]);
    add_block("bottleneck", bottleneck_);
    for (std::size_t l = 0; l < decoders_.size(); ++l) add_block("dec" + std::to_string(l) + ".block", decoders_[l]);
    return out;
}

template <typename T>
void WaveUnet<T>::zero_grad() {
    for (auto& [name, t] : params_) t.zero_grad();
}

#define SSOCT_INSTANTIATE_MODEL(T)                                                                        \
    template class WaveUnet<T>;                                                                           \
    template ResidualBlockParams<T> make_residual_block<T>(std::size_t, std::size_t);                     \
    template AttentionGateParams<T> make_attention_gate<T>(std::size_t, std::size_t);                     \
    template Tensor<T> residual_block(const Tensor<T>&, ResidualBlockParams<T>&, nn::Mode);               \
    template Tensor<T> attention_map(const Tensor<T>&, const Tensor<T>&, const AttentionGateParams<T>&);  \
    template Tensor<T> attention_gate(const Tensor<T>&, const Tensor<T>&, const AttentionGateParams<T>&);

SSOCT_INSTANTIATE_MODEL(float)
SSOCT_INSTANTIATE_MODEL(double)

#undef SSOCT_INSTANTIATE_MODEL

}  // namespace ssoct
