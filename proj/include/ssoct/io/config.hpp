#pragma once

// JSON run configuration. Every key is optional and falls back to the
// defaults of the corresponding struct; unknown keys and wrongly typed values
// are rejected with ConfigError naming the dotted key path.

#include <filesystem>
#include <string>
#include <string_view>

#include "ssoct/dataset.hpp"
#include "ssoct/metrics.hpp"
#include "ssoct/training.hpp"
#include "ssoct/wave_unet.hpp"

namespace ssoct::io {

struct BenchConfig {
    std::size_t frames = 100;
};

struct RunConfig {
    std::uint64_t seed = 0;
    DatasetSpec dataset;  // sweep, phantom, noise and dataset sections
    ModelConfig model;    // patch extents are derived from the sweep and A-line count
    TrainConfig train;
    MetricsConfig metrics;
    BenchConfig bench;

    /// Cross-section checks and derived fields; parse_run_config calls it.
    void finalize();
    /// Same seed for dataset generation and training.
    void set_seed(std::uint64_t s);
};

RunConfig parse_run_config(std::string_view json_text, const std::string& origin = "config");
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON (every key, defaults filled in).
std::string run_config_to_json(const RunConfig& cfg);

/// The subset that determines dataset bytes; parses back with parse_run_config.
std::string dataset_spec_to_json(const DatasetSpec& spec);

}  // namespace ssoct::io
