#include "ssoct/io/frg1.hpp"

#include <limits>

#include "ssoct/error.hpp"

namespace ssoct::io {

void append_frg1(ByteWriter& out, const Matrix<double>& values, GridTag tag) {
    constexpr auto u32_max = std::numeric_limits<std::uint32_t>::max();
    if (values.rows() > u32_max || values.cols() > u32_max) {
        throw DimensionError("matrix too large for FRG1: " + std::to_string(values.rows()) + "x" +
                             std::to_string(values.cols()));
    }
    out.raw("FRG1");
    out.u16(kFrg1Version);
    out.u8(0);
    out.u8(static_cast<std::uint8_t>(tag));
    out.u32(static_cast<std::uint32_t>(values.rows()));
    out.u32(static_cast<std::uint32_t>(values.cols()));
    for (const double v : values.values()) out.f32(static_cast<float>(v));
}

Bytes encode_frg1(const Matrix<double>& values, GridTag tag) {
    ByteWriter out;
    append_frg1(out, values, tag);
    return out.take();
}

Frg1Block decode_frg1(ByteReader& in) {
    if (in.str(4) != "FRG1") in.fail("bad magic, expected FRG1");
    const auto version = in.u16();
    if (version != kFrg1Version) in.fail("unsupported FRG1 version " + std::to_string(version));
    const auto dtype = in.u8();
    if (dtype != 0) in.fail("unsupported dtype " + std::to_string(dtype));
    const auto tag = in.u8();
    if (tag > 1) in.fail("unknown grid tag " + std::to_string(tag));
    const std::size_t rows = in.u32();
    const std::size_t cols = in.u32();
    if (in.remaining() / 4 / std::max<std::size_t>(cols, 1) < rows) {
        in.fail("payload shorter than declared " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::vector<float> raw(rows * cols);
    in.f32_array(raw);
    return {Matrix<double>(rows, cols, std::vector<double>(raw.begin(), raw.end())), static_cast<GridTag>(tag)};
}

Frg1Block decode_frg1(std::span<const std::uint8_t> bytes, const std::string& what) {
    ByteReader in(bytes, what);
    auto block = decode_frg1(in);
    if (in.remaining() != 0) in.fail(std::to_string(in.remaining()) + " trailing bytes after payload");
    return block;
}

void write_frg1(const std::filesystem::path& path, const Matrix<double>& values, GridTag tag) {
    write_file(path, encode_frg1(values, tag));
}

Frg1Block read_frg1(const std::filesystem::path& path) { return decode_frg1(read_file(path), path.string()); }

}  // namespace ssoct::io
