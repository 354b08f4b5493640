#include "ssoct/io/pgm.hpp"

#include <string>

namespace ssoct::io {

Bytes encode_pgm(const Matrix<std::uint8_t>& image) {
    ByteWriter out;
    out.raw("P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n");
    out.raw(image.values());
    return out.take();
}

void write_pgm(const std::filesystem::path& path, const Matrix<std::uint8_t>& image) {
    write_file(path, encode_pgm(image));
}

}  // namespace ssoct::io
