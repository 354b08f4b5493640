#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ssoct::io {

inline constexpr const char* kManifestName = "manifest.sha256";

std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
    std::string relative_path;  // generic form, '/' separated
    std::string sha256;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Hashes every regular file below `root` except the manifest itself and
/// `*.log` files, sorted by relative path.
std::vector<ManifestEntry> scan_manifest(const std::filesystem::path& root);

/// Writes `<root>/manifest.sha256` in sha256sum's "<hex>  <path>" layout.
std::vector<ManifestEntry> write_manifest(const std::filesystem::path& root);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& root);

}  // namespace ssoct::io
