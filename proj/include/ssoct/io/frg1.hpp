#pragma once

// FRG1: a float32 matrix with a 16-byte header.
//   "FRG1" | version u16 | dtype u8 (0 = float32) | grid_tag u8 | rows u32 | cols u32
// followed by rows*cols little-endian samples in row-major order.

#include <filesystem>

#include "ssoct/forward_model.hpp"
#include "ssoct/io/binary.hpp"
#include "ssoct/matrix.hpp"

namespace ssoct::io {

inline constexpr std::uint16_t kFrg1Version = 1;
inline constexpr std::size_t kFrg1HeaderBytes = 16;

struct Frg1Block {
    Matrix<double> values;  // widened from the stored float32
    GridTag grid_tag = GridTag::lambda_linear;
};

void append_frg1(ByteWriter& out, const Matrix<double>& values, GridTag tag);
Bytes encode_frg1(const Matrix<double>& values, GridTag tag);

/// Decodes one block at the reader's cursor.
Frg1Block decode_frg1(ByteReader& in);
/// Decodes a whole buffer; trailing bytes are a format error.
Frg1Block decode_frg1(std::span<const std::uint8_t> bytes, const std::string& what);

void write_frg1(const std::filesystem::path& path, const Matrix<double>& values, GridTag tag);
Frg1Block read_frg1(const std::filesystem::path& path);

inline void write_fringe(const std::filesystem::path& path, const FringeFrame& frame) {
    write_frg1(path, frame.samples, frame.grid_tag);
}

inline FringeFrame read_fringe(const std::filesystem::path& path) {
    auto block = read_frg1(path);
    return {std::move(block.values), block.grid_tag};
}

}  // namespace ssoct::io
