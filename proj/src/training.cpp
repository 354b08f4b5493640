#include "ssoct/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ssoct/checkpoint.hpp"
#include "ssoct/error.hpp"
#include "ssoct/io/binary.hpp"
#include "ssoct/metrics.hpp"

namespace ssoct {

namespace {

constexpr double kStandardizeEps = 1e-8;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Batch {
    nn::Tensor<float> input;
    nn::Tensor<float> target;
};

Batch gather(std::span<const TrainingPatch> patches, std::span<const std::size_t> idx) {
    const std::size_t h = patches[idx[0]].input.height();
    const std::size_t w = patches[idx[0]].input.width();
    const std::size_t plane = h * w;
    std::vector<float> in(idx.size() * 2 * plane);
    std::vector<float> out(idx.size() * plane);
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const auto& p = patches[idx[b]];
        if (p.input.height() != h || p.input.width() != w || p.target.rows() != h || p.target.cols() != w) {
            throw DimensionError("training patches have mixed shapes");
        }
        std::copy(p.input.image.values().begin(), p.input.image.values().end(), in.begin() + b * 2 * plane);
        std::copy(p.input.wavenumber.values().begin(), p.input.wavenumber.values().end(),
                  in.begin() + b * 2 * plane + plane);
        std::copy(p.target.values().begin(), p.target.values().end(), out.begin() + b * plane);
    }
    return {nn::Tensor<float>({idx.size(), 2, h, w}, std::move(in)), nn::Tensor<float>({idx.size(), 1, h, w}, std::move(out))};
}

void check_geometry(const ModelConfig& cfg, std::size_t rows, std::size_t cols) {
    if (rows != cfg.patch_height * kPatchesPerImage || cols != cfg.patch_width) {
        throw ConfigError("image " + std::to_string(rows) + "x" + std::to_string(cols) + " does not match model patches " +
                          std::to_string(cfg.patch_height) + "x" + std::to_string(cfg.patch_width) + " (x" +
                          std::to_string(kPatchesPerImage) + " bands)");
    }
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("train.lr must be a finite value >= 0");
    if (eval_every < 1) throw ConfigError("train.eval_every must be >= 1");
}

FrameGeometry FrameGeometry::create(std::size_t rows, double k_lo, double k_hi) {
    return {rows, k_lo, k_hi, ws_grid(k_lo, k_hi, rows)};
}

std::array<Standardized, kPatchesPerImage> prepare_input(const Matrix<double>& input_db, const FrameGeometry& geom) {
    const auto planes = interleave_wavenumber_channel(input_db, geom.ws, geom.k_lo, geom.k_hi);
    const auto parts = split_patches(planes);
    std::array<Standardized, kPatchesPerImage> out;
    for (std::size_t i = 0; i < kPatchesPerImage; ++i) out[i] = standardize(parts[i], kStandardizeEps);
    return out;
}

std::array<TrainingPatch, kPatchesPerImage> prepare_pair(const Matrix<double>& input_db,
                                                         const Matrix<double>& ground_truth_db,
                                                         const FrameGeometry& geom) {
    if (!input_db.same_shape(ground_truth_db)) throw DimensionError("input and ground truth shapes differ");
    const auto inputs = prepare_input(input_db, geom);
    const auto bands = split_rows(ground_truth_db);
    std::array<TrainingPatch, kPatchesPerImage> out;
    for (std::size_t i = 0; i < kPatchesPerImage; ++i) {
        out[i].input = inputs[i].patch;
        out[i].target = bands[i];
        const double scale = inputs[i].stddev + kStandardizeEps;
        for (auto& v : out[i].target.values()) v = (v - inputs[i].mean) / scale;
    }
    return out;
}

std::vector<TrainingPatch> load_patches(std::span<const DatasetEntry> entries, const FrameGeometry& geom) {
    std::vector<TrainingPatch> out;
    out.reserve(entries.size() * kPatchesPerImage);
    for (const auto& e : entries) {
        const auto pair = load_pair(e);
        if (pair.input_db.rows() != geom.rows) {
            throw ConfigError(e.pair_path.string() + " has " + std::to_string(pair.input_db.rows()) +
                              " rows, the sweep implies " + std::to_string(geom.rows));
        }
        for (auto& p : prepare_pair(pair.input_db, pair.ground_truth_db, geom)) out.push_back(std::move(p));
    }
    return out;
}

double evaluate_loss(WaveUnet<float>& model, std::span<const TrainingPatch> patches, std::size_t batch_size) {
    if (patches.empty()) return std::numeric_limits<double>::quiet_NaN();
    nn::NoGradGuard no_grad;
    std::vector<std::size_t> idx(patches.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    double total = 0.0;
    for (std::size_t start = 0; start < idx.size(); start += batch_size) {
        const std::size_t n = std::min(batch_size, idx.size() - start);
        const auto batch = gather(patches, std::span(idx).subspan(start, n));
        total += nn::mse_loss(model.forward(batch.input, nn::Mode::eval), batch.target).item() * static_cast<double>(n);
    }
    return total / static_cast<double>(patches.size());
}

TrainResult train(WaveUnet<float>& model, nn::AdamState<float>& adam, std::span<const TrainingPatch> train_set,
                  std::span<const TrainingPatch> val_set, const TrainConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    if (train_set.empty()) throw UsageError("training set is empty");
    check_geometry(model.config(), train_set.front().input.height() * kPatchesPerImage, train_set.front().input.width());
    adam.options.lr = cfg.lr;
    auto params = model.parameters();
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    std::size_t steps = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        std::size_t batch_no = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
            const std::size_t n = std::min(cfg.batch_size, order.size() - start);
            const auto batch = gather(train_set, std::span(order).subspan(start, n));
            model.zero_grad();
            auto loss = nn::mse_loss(model.forward(batch.input, nn::Mode::train), batch.target);
            const double value = loss.item();
            if (!std::isfinite(value)) {
                throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_no) + " (patches " + std::to_string(start) + ".." +
                                   std::to_string(start + n - 1) + " of the shuffled order)");
            }
            loss.backward();
            nn::adam_step<float>(params, adam);
            ++steps;
            total += value * static_cast<double>(n);
        }
        EpochRecord rec{epoch, steps, total / static_cast<double>(order.size()),
                        std::numeric_limits<double>::quiet_NaN()};
        if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) rec.val_loss = evaluate_loss(model, val_set, cfg.batch_size);
        result.history.push_back(rec);

        const double score = val_set.empty() ? rec.train_loss : rec.val_loss;
        const bool improved = std::isfinite(score) && score < result.best_val_loss;
        if (improved) {
            result.best_val_loss = score;
            result.best_epoch = epoch;
        }
        if (!out_dir.empty()) {
            if (improved) {
                save_checkpoint(out_dir / "best.wun1",
                                capture_checkpoint(model, &adam, static_cast<std::int64_t>(epoch), result.best_val_loss));
            }
            if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
                save_checkpoint(out_dir / ("epoch_" + std::to_string(epoch) + ".wun1"),
                                capture_checkpoint(model, &adam, static_cast<std::int64_t>(epoch), result.best_val_loss));
            }
            io::write_text(out_dir / "history.csv", history_csv(result.history));
        }
    }
    if (!out_dir.empty()) {
        save_checkpoint(out_dir / "final.wun1",
                        capture_checkpoint(model, &adam, static_cast<std::int64_t>(cfg.epochs), result.best_val_loss));
    }
    return result;
}

std::string history_csv(std::span<const EpochRecord> history) {
    std::string out = "epoch,steps,train_loss,val_loss\n";
    for (const auto& r : history) {
        out += std::to_string(r.epoch) + "," + std::to_string(r.steps) + "," + format_metric(r.train_loss) + "," +
               (std::isnan(r.val_loss) ? std::string() : format_metric(r.val_loss)) + "\n";
    }
    return out;
}

BScan infer_image(WaveUnet<float>& model, const Matrix<double>& input_db, const FrameGeometry& geom) {
    check_geometry(model.config(), input_db.rows(), input_db.cols());
    const auto inputs = prepare_input(input_db, geom);
    std::array<PatchPlanes, kPatchesPerImage> planes;
    for (std::size_t i = 0; i < kPatchesPerImage; ++i) planes[i] = inputs[i].patch;
    nn::NoGradGuard no_grad;
    const auto out = model.forward(patches_to_tensor<float>(planes), nn::Mode::eval);
    std::vector<Matrix<double>> bands;
    for (std::size_t i = 0; i < kPatchesPerImage; ++i) {
        auto band = tensor_image(out, i);
        const double scale = inputs[i].stddev + kStandardizeEps;
        for (auto& v : band.values()) v = v * scale + inputs[i].mean;
        bands.push_back(std::move(band));
    }
    return BScan{merge_rows(bands), Provenance::network_output};
}

VolumeInference infer_volume(WaveUnet<float>& model, std::span<const FringeFrame> frames,
                             std::span<const double> background, const WavenumberGrid& source_k, InterpMethod interp) {
    if (frames.empty()) throw UsageError("no input frames");
    const std::size_t rows = frames.front().samples.rows() / 2;
    check_geometry(model.config(), rows, frames.front().samples.cols());
    const auto geom = FrameGeometry::create(rows, source_k.min(), source_k.max());
    VolumeInference result;
    auto& lat = result.latency;
    for (const auto& f : frames) {
        const auto start = Clock::now();
        result.images.push_back(infer_image(model, lambda_space_image(f, background).intensity_db, geom));
        lat.network_frame_s.push_back(seconds_since(start));
    }
    for (const auto& f : frames) {
        const auto start = Clock::now();
        const auto classic = classic_reconstruct(f, background, source_k, interp);
        lat.classic_frame_s.push_back(seconds_since(start));
    }
    lat.network_total_s = std::accumulate(lat.network_frame_s.begin(), lat.network_frame_s.end(), 0.0);
    lat.classic_total_s = std::accumulate(lat.classic_frame_s.begin(), lat.classic_frame_s.end(), 0.0);
    return result;
}

std::string latency_csv(const LatencyReport& r) {
    return "frames,classic_total_s,network_total_s,ratio\n" + std::to_string(r.network_frame_s.size()) + "," +
           format_metric(r.classic_total_s) + "," + format_metric(r.network_total_s) + "," + format_metric(r.ratio()) +
           "\n";
}

}  // namespace ssoct
