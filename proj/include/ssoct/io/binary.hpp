#pragma once

// Little-endian encoding helpers shared by the on-disk formats.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ssoct::io {

using Bytes = std::vector<std::uint8_t>;

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void f32(float v);
    void raw(std::string_view s);
    void raw(std::span<const std::uint8_t> s);

    const Bytes& bytes() const noexcept { return out_; }
    Bytes take() noexcept { return std::move(out_); }

private:
    Bytes out_;
};

/// Bounds-checked cursor. Every failure throws FormatError naming `what`
/// and the byte offset at which decoding stopped.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, std::string what, std::size_t start = 0)
        : data_(data), what_(std::move(what)), pos_(start) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    float f32();
    std::string str(std::size_t n);
    void f32_array(std::span<float> out);

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    [[noreturn]] void fail(const std::string& message) const;

private:
    void need(std::size_t n) const;

    std::span<const std::uint8_t> data_;
    std::string what_;
    std::size_t pos_;
};

/// Whole-file helpers; IoError carries the path.
Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace ssoct::io
