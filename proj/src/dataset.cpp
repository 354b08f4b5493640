#include "ssoct/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <tuple>

#include "ssoct/error.hpp"
#include "ssoct/io/config.hpp"
#include "ssoct/io/frg1.hpp"
#include "ssoct/io/manifest.hpp"

namespace ssoct {

namespace fs = std::filesystem;

namespace {

std::mt19937_64 stream_rng(std::uint64_t seed, std::size_t volume, std::size_t frame, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(volume), static_cast<std::uint32_t>(frame), stream};
    return std::mt19937_64(seq);
}

std::string pad(std::size_t v, int width) {
    std::string s = std::to_string(v);
    return s.size() >= static_cast<std::size_t>(width) ? s : std::string(width - s.size(), '0') + s;
}

}  // namespace

void SplitFractions::validate() const {
    if (train < 0.0 || val < 0.0 || test < 0.0) throw ConfigError("split fractions must be non-negative");
    if (std::abs(train + val + test - 1.0) > 1e-9) {
        throw ConfigError("split fractions sum to " + std::to_string(train + val + test) + ", expected 1");
    }
}

void DatasetSpec::validate() const {
    sweep.validate();
    family.validate();
    fractions.validate();
    if (n_volumes < 1 || frames_per_volume < 1) throw ConfigError("dataset needs at least one volume and frame");
    if (n_alines < 1) throw ConfigError("dataset needs at least one A-line");
    if (gt_repeats < 1) throw ConfigError("ground truth needs at least one realization");
    if (noise.detector_sigma < 0.0) throw ConfigError("detector noise sigma must be >= 0");
}

SweepContext SweepContext::create(const SweepConfig& sweep, double reference_reflectivity) {
    SweepContext ctx;
    ctx.kgrid = to_wavenumbers(sweep_wavelength_grid(sweep));
    ctx.spectrum = source_spectrum(ctx.kgrid, sweep);
    ctx.background = background_fringe(ctx.kgrid, ctx.spectrum, reference_reflectivity);
    return ctx;
}

std::vector<FringeFrame> frame_realizations(const DatasetSpec& spec, const SweepContext& ctx, std::size_t volume,
                                            std::size_t frame, std::size_t count) {
    auto scene_rng = stream_rng(spec.seed, volume, frame, 0);
    VolumeRequest request;
    request.phantoms = generate_scene(spec.family, spec.sweep, spec.n_alines, scene_rng);
    request.n_alines = spec.n_alines;
    request.n_repeats = count;
    request.noise = spec.noise;
    request.include_autocorrelation = spec.include_autocorrelation;
    request.seed = stream_rng(spec.seed, volume, frame, 1)();
    return synthesize_volume(request, spec.sweep, ctx.kgrid, GridTag::lambda_linear);
}

FramePair generate_frame(const DatasetSpec& spec, const SweepContext& ctx, std::size_t volume, std::size_t frame) {
    const auto raw = frame_realizations(spec, ctx, volume, frame, spec.gt_repeats);
    std::vector<BScan> classic;
    classic.reserve(raw.size());
    for (const auto& f : raw) classic.push_back(classic_reconstruct(f, ctx.background, ctx.kgrid, spec.interp));
    FramePair pair;
    pair.volume = volume;
    pair.frame = frame;
    pair.input = lambda_space_image(raw.front(), ctx.background);
    pair.ground_truth = average_bscans(classic, spec.gt_repeats);
    pair.classic = classic.front();
    return pair;
}

SplitIndices split_dataset(std::size_t n_items, const SplitFractions& fractions, std::uint64_t seed) {
    if (n_items == 0) throw UsageError("cannot split an empty dataset");
    fractions.validate();
    std::vector<std::size_t> order(n_items);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    // The small epsilon keeps exact products such as 10 * 0.7 from flooring to 6.
    auto part = [n_items](double f) {
        return static_cast<std::size_t>(std::floor(static_cast<double>(n_items) * f + 1e-9));
    };
    const std::size_t n_val = part(fractions.val);
    const std::size_t n_test = part(fractions.test);
    const std::size_t n_train = n_items - n_val - n_test;
    SplitIndices s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    return s;
}

std::string_view split_name(Split s) {
    switch (s) {
        case Split::train:
            return "train";
        case Split::val:
            return "val";
        case Split::test:
            return "test";
    }
    return "unknown";
}

io::Bytes encode_pair(const Matrix<double>& input, const Matrix<double>& ground_truth) {
    if (!input.same_shape(ground_truth)) {
        throw DimensionError("pair images differ in shape: " + std::to_string(input.rows()) + "x" +
                             std::to_string(input.cols()) + " vs " + std::to_string(ground_truth.rows()) + "x" +
                             std::to_string(ground_truth.cols()));
    }
    io::ByteWriter out;
    out.raw("PAIR");
    out.u16(kPairVersion);
    for (std::size_t i = 0; i < kPairHeaderBytes - 6; ++i) out.u8(0);
    io::append_frg1(out, input, GridTag::lambda_linear);
    io::append_frg1(out, ground_truth, GridTag::k_linear);
    return out.take();
}

std::array<Matrix<double>, 2> decode_pair(std::span<const std::uint8_t> bytes, const std::string& what) {
    io::ByteReader in(bytes, what);
    if (in.str(4) != "PAIR") in.fail("bad magic, expected PAIR");
    const auto version = in.u16();
    if (version != kPairVersion) in.fail("unsupported PAIR version " + std::to_string(version));
    in.str(kPairHeaderBytes - 6);
    auto input = io::decode_frg1(in);
    auto truth = io::decode_frg1(in);
    if (in.remaining() != 0) in.fail(std::to_string(in.remaining()) + " trailing bytes");
    if (!input.values.same_shape(truth.values)) in.fail("input and ground truth shapes differ");
    return {std::move(input.values), std::move(truth.values)};
}

std::string DatasetEntry::id() const { return pad(volume, 3) + "/" + pad(frame, 4); }

std::vector<DatasetEntry> DatasetIndex::of(Split s) const {
    std::vector<DatasetEntry> out;
    std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
                 [s](const DatasetEntry& e) { return e.split == s; });
    return out;
}

DatasetIndex generate_dataset(const DatasetSpec& spec, const fs::path& root) {
    spec.validate();
    const auto ctx = SweepContext::create(spec.sweep, spec.family.reference_reflectivity);
    const auto splits = split_dataset(spec.frame_count(), spec.fractions, spec.seed);
    std::vector<Split> assignment(spec.frame_count());
    for (const auto i : splits.val) assignment[i] = Split::val;
    for (const auto i : splits.test) assignment[i] = Split::test;

    io::write_text(root / "dataset.json", io::dataset_spec_to_json(spec));
    for (std::size_t v = 0; v < spec.n_volumes; ++v) {
        for (std::size_t f = 0; f < spec.frames_per_volume; ++f) {
            const auto pair = generate_frame(spec, ctx, v, f);
            const auto split = assignment[v * spec.frames_per_volume + f];
            const auto dir = root / std::string(split_name(split)) / pad(v, 3);
            io::write_file(dir / (pad(f, 4) + ".pair"), encode_pair(pair.input.intensity_db, pair.ground_truth.intensity_db));
            io::write_frg1(dir / (pad(f, 4) + ".classic"), pair.classic.intensity_db, GridTag::k_linear);
        }
    }
    io::write_manifest(root);
    return scan_dataset(root);
}

DatasetIndex scan_dataset(const fs::path& root) {
    DatasetIndex index;
    index.root = root;
    for (const Split s : {Split::train, Split::val, Split::test}) {
        const auto split_dir = root / std::string(split_name(s));
        if (!fs::is_directory(split_dir)) continue;
        for (const auto& vol : fs::directory_iterator(split_dir)) {
            if (!vol.is_directory()) continue;
            for (const auto& item : fs::directory_iterator(vol.path())) {
                if (item.path().extension() != ".pair") continue;
                DatasetEntry e;
                e.split = s;
                try {
                    e.volume = std::stoul(vol.path().filename().string());
                    e.frame = std::stoul(item.path().stem().string());
                } catch (const std::exception&) {
                    throw FormatError("unexpected dataset entry " + item.path().string());
                }
                e.pair_path = item.path();
                e.classic_path = fs::path(item.path()).replace_extension(".classic");
                index.entries.push_back(std::move(e));
            }
        }
    }
    std::sort(index.entries.begin(), index.entries.end(), [](const DatasetEntry& a, const DatasetEntry& b) {
        return std::tie(a.split, a.volume, a.frame) < std::tie(b.split, b.volume, b.frame);
    });
    if (index.entries.empty()) throw UsageError("no .pair files found under " + root.string());
    return index;
}

LoadedPair load_pair(const DatasetEntry& entry) {
    auto [input, truth] = decode_pair(io::read_file(entry.pair_path), entry.pair_path.string());
    return {std::move(input), std::move(truth)};
}

Matrix<double> load_classic(const DatasetEntry& entry) { return io::read_frg1(entry.classic_path).values; }

}  // namespace ssoct
