#include "ssoct/io/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <memory>
#include <sstream>

#include "ssoct/error.hpp"
#include "ssoct/io/binary.hpp"

namespace ssoct::io {

std::string sha256_hex(std::span<const std::uint8_t> data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::vector<ManifestEntry> scan_manifest(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw IoError("not a directory: " + root.string());
    std::vector<ManifestEntry> entries;
    for (const auto& item : fs::recursive_directory_iterator(root)) {
        if (!item.is_regular_file()) continue;
        const auto& p = item.path();
        if (p.filename() == kManifestName || p.extension() == ".log") continue;
        entries.push_back({fs::relative(p, root).generic_string(), sha256_file(p)});
    }
    std::sort(entries.begin(), entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.relative_path < b.relative_path; });
    return entries;
}

std::vector<ManifestEntry> write_manifest(const std::filesystem::path& root) {
    const auto entries = scan_manifest(root);
    std::string text;
    for (const auto& e : entries) text += e.sha256 + "  " + e.relative_path + "\n";
    write_text(root / kManifestName, text);
    return entries;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& root) {
    const auto bytes = read_file(root / kManifestName);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.size() < 67 || line.compare(64, 2, "  ") != 0) {
            throw FormatError((root / kManifestName).string() + ": malformed line " + std::to_string(line_no));
        }
        entries.push_back({line.substr(66), line.substr(0, 64)});
    }
    return entries;
}

}  // namespace ssoct::io
