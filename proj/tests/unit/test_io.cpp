#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "temp_dir.hpp"
#include "ssoct/error.hpp"
#include "ssoct/io/binary.hpp"
#include "ssoct/io/config.hpp"
#include "ssoct/io/frg1.hpp"
#include "ssoct/io/manifest.hpp"
#include "ssoct/io/pgm.hpp"

using namespace ssoct;
using oracle::TempDir;

namespace {

Matrix<double> sample_matrix(std::size_t rows, std::size_t cols) {
    Matrix<double> m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = 0.25 * static_cast<double>(i) - 3.0;
    return m;
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

TEST(Binary, LittleEndianLayout) {
    io::ByteWriter w;
    w.u16(0x0102);
    w.u32(0x03040506);
    w.f32(1.0f);
    const auto bytes = w.take();
    const std::vector<std::uint8_t> want{0x02, 0x01, 0x06, 0x05, 0x04, 0x03, 0x00, 0x00, 0x80, 0x3f};
    EXPECT_EQ(bytes, want);
    io::ByteReader r(bytes, "buf");
    EXPECT_EQ(r.u16(), 0x0102);
    EXPECT_EQ(r.u32(), 0x03040506u);
    EXPECT_EQ(r.f32(), 1.0f);
    EXPECT_EQ(r.remaining(), 0u);
    const auto msg = error_of([&] { r.u8(); });
    EXPECT_NE(msg.find("buf"), std::string::npos);
    EXPECT_NE(msg.find("offset 10"), std::string::npos);
}

TEST(Frg1, HeaderAndRoundTrip) {
    const auto m = sample_matrix(3, 5);
    const auto bytes = io::encode_frg1(m, GridTag::k_linear);
    ASSERT_EQ(bytes.size(), io::kFrg1HeaderBytes + 4 * 15);
    EXPECT_EQ(std::memcmp(bytes.data(), "FRG1", 4), 0);
    EXPECT_EQ(bytes[4], 1);  // version
    EXPECT_EQ(bytes[6], 0);  // float32
    EXPECT_EQ(bytes[7], 1);  // k-linear
    EXPECT_EQ(bytes[8], 3);
    EXPECT_EQ(bytes[12], 5);
    const auto back = io::decode_frg1(bytes, "m");
    EXPECT_EQ(back.grid_tag, GridTag::k_linear);
    ASSERT_TRUE(back.values.same_shape(m));
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(back.values.values()[i], m.values()[i]);
}

TEST(Frg1, MalformedInputsRejectedWithOffset) {
    const auto good = io::encode_frg1(sample_matrix(2, 2), GridTag::lambda_linear);
    auto bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_THROW(io::decode_frg1(bad_magic, "f"), FormatError);
    auto bad_dtype = good;
    bad_dtype[6] = 1;
    EXPECT_THROW(io::decode_frg1(bad_dtype, "f"), FormatError);
    auto bad_tag = good;
    bad_tag[7] = 2;
    EXPECT_THROW(io::decode_frg1(bad_tag, "f"), FormatError);
    auto truncated = good;
    truncated.pop_back();
    const auto msg = error_of([&] { io::decode_frg1(truncated, "frame.frg1"); });
    EXPECT_NE(msg.find("frame.frg1"), std::string::npos);
    EXPECT_NE(msg.find("offset"), std::string::npos);
    auto trailing = good;
    trailing.push_back(0);
    EXPECT_THROW(io::decode_frg1(trailing, "f"), FormatError);
    EXPECT_THROW(io::decode_frg1(std::span<const std::uint8_t>{}, "f"), FormatError);
}

TEST(Frg1, FileRoundTripAndMissingFile) {
    TempDir dir("frg1");
    FringeFrame frame{sample_matrix(4, 2), GridTag::lambda_linear};
    io::write_fringe(dir / "a/b.frg1", frame);
    const auto back = io::read_fringe(dir / "a/b.frg1");
    EXPECT_EQ(back.grid_tag, GridTag::lambda_linear);
    EXPECT_EQ(back.samples.rows(), 4u);
    const auto msg = error_of([&] { io::read_frg1(dir / "missing.frg1"); });
    EXPECT_NE(msg.find("missing.frg1"), std::string::npos);
    EXPECT_THROW(io::read_frg1(dir / "missing.frg1"), IoError);
}

TEST(Pgm, BinaryP5Layout) {
    Matrix<std::uint8_t> img(2, 3, std::vector<std::uint8_t>{0, 1, 2, 253, 254, 255});
    const auto bytes = io::encode_pgm(img);
    const std::string header = "P5\n3 2\n255\n";
    ASSERT_EQ(bytes.size(), header.size() + 6);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(header.size())), header);
    EXPECT_EQ(bytes.back(), 255);
    EXPECT_EQ(bytes[header.size()], 0);
}

TEST(Manifest, KnownDigestAndDeterministicListing) {
    const std::string abc = "abc";
    EXPECT_EQ(io::sha256_hex({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()}),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    TempDir dir("manifest");
    io::write_text(dir / "b.txt", "bee");
    io::write_text(dir / "sub/a.txt", "abc");
    io::write_text(dir / "run.log", "timestamps");
    const auto written = io::write_manifest(dir.path());
    ASSERT_EQ(written.size(), 2u);
    EXPECT_EQ(written[0].relative_path, "b.txt");
    EXPECT_EQ(written[1].relative_path, "sub/a.txt");
    EXPECT_EQ(written[1].sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto read = io::read_manifest(dir.path());
    ASSERT_EQ(read.size(), 2u);
    EXPECT_EQ(read[0].sha256, written[0].sha256);
    // A rescan ignores the manifest itself.
    EXPECT_EQ(io::scan_manifest(dir.path()).size(), 2u);
}

TEST(Config, DefaultsAndOverrides) {
    const auto cfg = io::parse_run_config(R"({"seed": 9, "sweep": {"n_samples": 256},
        "dataset": {"n_alines": 32, "interp": "linear"}, "model": {"base_channels": 8}})");
    EXPECT_EQ(cfg.dataset.sweep.n_samples, 256u);
    EXPECT_EQ(cfg.dataset.interp, InterpMethod::linear);
    EXPECT_EQ(cfg.model.base_channels, 8u);
    EXPECT_EQ(cfg.model.patch_height, 32u);
    EXPECT_EQ(cfg.model.patch_width, 32u);
    EXPECT_EQ(cfg.dataset.seed, 9u);
    EXPECT_EQ(cfg.train.seed, 9u);
    EXPECT_DOUBLE_EQ(cfg.dataset.sweep.lambda_c, 1309e-9);
}

TEST(Config, UnknownKeyNamedWithPath) {
    const auto msg = error_of([] { io::parse_run_config(R"({"sweep": {"lamda_c": 1.3e-6}})"); });
    EXPECT_NE(msg.find("sweep.lamda_c"), std::string::npos) << msg;
    EXPECT_THROW(io::parse_run_config(R"({"sweeep": {}})"), ConfigError);
    EXPECT_THROW(io::parse_run_config(R"({"dataset": {"fractions": {"tran": 0.7}}})"), ConfigError);
}

TEST(Config, TypeAndRangeErrors) {
    const auto msg = error_of([] { io::parse_run_config(R"({"train": {"epochs": "many"}})"); });
    EXPECT_NE(msg.find("train.epochs"), std::string::npos) << msg;
    EXPECT_THROW(io::parse_run_config(R"({"train": {"epochs": -1}})"), ConfigError);
    EXPECT_THROW(io::parse_run_config(R"({"dataset": {"interp": "cubic"}})"), ConfigError);
    EXPECT_THROW(io::parse_run_config("{not json"), ConfigError);
    EXPECT_THROW(io::parse_run_config(R"({"sweep": {"n_samples": 100}})"), ConfigError);
}

TEST(Config, SerializedConfigParsesBackIdentically) {
    const auto cfg = io::parse_run_config(R"({"seed": 3, "train": {"epochs": 7, "lr": 0.002}})");
    const auto again = io::parse_run_config(io::run_config_to_json(cfg));
    EXPECT_EQ(io::run_config_to_json(again), io::run_config_to_json(cfg));
    EXPECT_EQ(again.train.epochs, 7u);
    EXPECT_DOUBLE_EQ(again.train.lr, 0.002);
}
