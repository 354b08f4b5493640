#pragma once

// WUN1 checkpoints:
//   "WUN1" | version u16 | json length u32 | json | tensor count u32 |
//   per tensor: name length u16 | name | rank u8 | extents u32... | float32 data
// The JSON carries the model config, epoch, best validation loss and Adam
// options/step; tensors are parameters, batch-norm buffers and Adam moments
// ("adam.m/<name>", "adam.v/<name>").

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "ssoct/io/binary.hpp"
#include "ssoct/nn/adam.hpp"
#include "ssoct/wave_unet.hpp"

namespace ssoct {

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct NamedArray {
    std::string name;
    nn::Shape shape;
    std::vector<float> values;

    friend bool operator==(const NamedArray&, const NamedArray&) = default;
};

struct Checkpoint {
    ModelConfig config;
    std::int64_t epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    nn::AdamOptions adam_options;
    std::int64_t adam_step = 0;
    std::vector<NamedArray> tensors;
};

Checkpoint capture_checkpoint(WaveUnet<float>& model, const nn::AdamState<float>* adam, std::int64_t epoch,
                              double best_val_loss);

/// Copies parameters and buffers into `model` (and Adam moments into `adam`
/// when given). Throws naming the first tensor whose name or
/// shape does not match (DimensionError).
void restore_checkpoint(const Checkpoint& ckpt, WaveUnet<float>& model, nn::AdamState<float>* adam = nullptr);

io::Bytes encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& what);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ssoct
