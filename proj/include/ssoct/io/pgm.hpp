#pragma once

#include <cstdint>
#include <filesystem>

#include "ssoct/io/binary.hpp"
#include "ssoct/matrix.hpp"

namespace ssoct::io {

/// Binary 8-bit greymap ("P5", maxval 255); rows are image lines.
Bytes encode_pgm(const Matrix<std::uint8_t>& image);
void write_pgm(const std::filesystem::path& path, const Matrix<std::uint8_t>& image);

}  // namespace ssoct::io
