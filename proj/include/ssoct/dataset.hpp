#pragma once

// Paired synthetic datasets: lambda-space input, averaged classic ground truth
// and a single-realization classic reconstruction per frame.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ssoct/forward_model.hpp"
#include "ssoct/io/binary.hpp"
#include "ssoct/phantom_family.hpp"
#include "ssoct/spectral_pipeline.hpp"

namespace ssoct {

struct SplitFractions {
    double train = 0.7;
    double val = 0.2;
    double test = 0.1;

    /// Throws ConfigError unless all are >= 0 and they sum to 1 within 1e-9.
    void validate() const;
};

struct DatasetSpec {
    SweepConfig sweep;
    PhantomFamily family;
    NoiseConfig noise{true, 1e-3};  // detector floor roughly 60 dB below the strongest interfaces
    std::size_t n_volumes = 1;
    std::size_t frames_per_volume = 10;
    std::size_t n_alines = 64;
    std::size_t gt_repeats = 7;  // realizations averaged into the ground truth
    bool include_autocorrelation = false;
    InterpMethod interp = InterpMethod::cubic_spline;
    SplitFractions fractions;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t frame_count() const { return n_volumes * frames_per_volume; }
};

/// Sweep-derived quantities shared by every frame.
struct SweepContext {
    WavenumberGrid kgrid;  // lambda-linear sweep, descending
    std::vector<double> spectrum;
    std::vector<double> background;

    static SweepContext create(const SweepConfig& sweep, double reference_reflectivity);
    double k_lo() const { return kgrid.min(); }
    double k_hi() const { return kgrid.max(); }
};

/// Scene of frame (volume, frame). Realization 0 of the frame is the raw
/// input; realizations 0..gt_repeats-1 form the ground truth.
std::vector<FringeFrame> frame_realizations(const DatasetSpec& spec, const SweepContext& ctx, std::size_t volume,
                                            std::size_t frame, std::size_t count);

struct FramePair {
    std::size_t volume = 0;
    std::size_t frame = 0;
    BScan input;         // lambda-space image of realization 0
    BScan ground_truth;  // mean of gt_repeats classic reconstructions
    BScan classic;       // classic reconstruction of realization 0
};

FramePair generate_frame(const DatasetSpec& spec, const SweepContext& ctx, std::size_t volume, std::size_t frame);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Shuffles 0..n-1 by seed and cuts it into floor-sized parts; the remainder
/// goes to train.
SplitIndices split_dataset(std::size_t n_items, const SplitFractions& fractions, std::uint64_t seed);

enum class Split : std::uint8_t { train, val, test };
std::string_view split_name(Split s);

// PAIR: "PAIR" | version u16 | 10 reserved bytes | FRG1 input | FRG1 ground truth
inline constexpr std::uint16_t kPairVersion = 1;
inline constexpr std::size_t kPairHeaderBytes = 16;

io::Bytes encode_pair(const Matrix<double>& input, const Matrix<double>& ground_truth);
std::array<Matrix<double>, 2> decode_pair(std::span<const std::uint8_t> bytes, const std::string& what);

struct DatasetEntry {
    Split split = Split::train;
    std::size_t volume = 0;
    std::size_t frame = 0;
    std::filesystem::path pair_path;     // <root>/<split>/<volume>/<frame>.pair
    std::filesystem::path classic_path;  // same stem, .classic (FRG1)

    std::string id() const;  // "<volume>/<frame>"
};

struct DatasetIndex {
    std::filesystem::path root;
    std::vector<DatasetEntry> entries;  // sorted by (split, volume, frame)

    std::vector<DatasetEntry> of(Split s) const;
};

/// Writes every frame, dataset.json (the spec) and the manifest under `root`.
DatasetIndex generate_dataset(const DatasetSpec& spec, const std::filesystem::path& root);

/// Lists the pair files present under `root`.
DatasetIndex scan_dataset(const std::filesystem::path& root);

struct LoadedPair {
    Matrix<double> input_db;
    Matrix<double> ground_truth_db;
};
LoadedPair load_pair(const DatasetEntry& entry);
Matrix<double> load_classic(const DatasetEntry& entry);

}  // namespace ssoct
