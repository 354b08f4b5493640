#include <gtest/gtest.h>

#include <cstring>

#include "temp_dir.hpp"
#include "toy_pairs.hpp"
#include "ssoct/checkpoint.hpp"
#include "ssoct/error.hpp"
#include "ssoct/io/binary.hpp"

using namespace ssoct;
using oracle::TempDir;

namespace {

ModelConfig config(std::size_t base) {
    ModelConfig cfg;
    cfg.base_channels = base;
    cfg.patch_height = 16;
    cfg.patch_width = 16;
    return cfg;
}

// A few optimizer steps so moments, BN buffers and the step count are non-trivial.
void train_a_little(WaveUnet<float>& model, nn::AdamState<float>& adam) {
    const auto toy = oracle::make_toy_pairs(2, 16, 16, 3);
    auto params = model.parameters();
    for (int i = 0; i < 3; ++i) {
        model.zero_grad();
        nn::mse_loss(model.forward(toy.input, nn::Mode::train), toy.target).backward();
        nn::adam_step(std::span(params), adam);
    }
}

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Checkpoint, SaveLoadIsBitExact) {
    WaveUnet<float> model(config(4), 5);
    nn::AdamState<float> adam;
    train_a_little(model, adam);
    const auto ckpt = capture_checkpoint(model, &adam, 3, 0.125);
    TempDir dir("ckpt");
    save_checkpoint(dir / "m.wun1", ckpt);
    const auto loaded = load_checkpoint(dir / "m.wun1");
    EXPECT_EQ(loaded.config, ckpt.config);
    EXPECT_EQ(loaded.epoch, 3);
    EXPECT_EQ(loaded.best_val_loss, 0.125);
    EXPECT_EQ(loaded.adam_step, 3);
    EXPECT_EQ(loaded.tensors, ckpt.tensors);

    WaveUnet<float> other(config(4), 99);
    nn::AdamState<float> other_adam;
    restore_checkpoint(loaded, other, &other_adam);
    const auto again = capture_checkpoint(other, &other_adam, 3, 0.125);
    EXPECT_EQ(encode_checkpoint(again), encode_checkpoint(ckpt));

    const auto toy = oracle::make_toy_pairs(1, 16, 16, 4);
    nn::NoGradGuard no_grad;
    const auto a = model.forward(toy.input, nn::Mode::eval);
    const auto b = other.forward(toy.input, nn::Mode::eval);
    ASSERT_EQ(a.numel(), b.numel());
    EXPECT_EQ(std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(float)), 0);
}

TEST(Checkpoint, InfiniteBestLossSurvives) {
    WaveUnet<float> model(config(2), 1);
    const auto ckpt = capture_checkpoint(model, nullptr, 0, std::numeric_limits<double>::infinity());
    const auto back = decode_checkpoint(encode_checkpoint(ckpt), "c");
    EXPECT_TRUE(std::isinf(back.best_val_loss));
}

TEST(Checkpoint, LayoutStartsWithMagicAndVersion) {
    WaveUnet<float> model(config(2), 1);
    const auto bytes = encode_checkpoint(capture_checkpoint(model, nullptr, 0, 1.0));
    EXPECT_EQ(std::memcmp(bytes.data(), "WUN1", 4), 0);
    EXPECT_EQ(bytes[4] | (bytes[5] << 8), kCheckpointVersion);
}

TEST(Checkpoint, CorruptInputsRejected) {
    WaveUnet<float> model(config(2), 1);
    const auto bytes = encode_checkpoint(capture_checkpoint(model, nullptr, 0, 1.0));
    for (const std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
        const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(keep));
        EXPECT_THROW(decode_checkpoint(cut, "c"), FormatError) << keep;
    }
    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_THROW(decode_checkpoint(magic, "c"), FormatError);
    auto version = bytes;
    version[4] = 2;
    EXPECT_THROW(decode_checkpoint(version, "c"), FormatError);
    TempDir dir("ckpt_bad");
    io::write_file(dir / "t.wun1", std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 40));
    EXPECT_THROW(load_checkpoint(dir / "t.wun1"), FormatError);
    EXPECT_THROW(load_checkpoint(dir / "missing.wun1"), IoError);
}

TEST(Checkpoint, BaseFourIntoBaseEightNamesFirstTensor) {
    WaveUnet<float> small(config(4), 1);
    WaveUnet<float> big(config(8), 1);
    const auto ckpt = capture_checkpoint(small, nullptr, 0, 1.0);
    const auto before = capture_checkpoint(big, nullptr, 0, 1.0);
    const auto msg = error_of([&] { restore_checkpoint(ckpt, big); });
    EXPECT_NE(msg.find("enc0.conv1.weight"), std::string::npos) << msg;
    EXPECT_THROW(restore_checkpoint(ckpt, big), DimensionError);
    // Validation precedes any copy.
    EXPECT_EQ(capture_checkpoint(big, nullptr, 0, 1.0).tensors, before.tensors);
}
