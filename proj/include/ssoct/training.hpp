#pragma once

// Patch preparation, the training loop, and timed volume inference.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ssoct/dataset.hpp"
#include "ssoct/nn/adam.hpp"
#include "ssoct/patches.hpp"
#include "ssoct/wave_unet.hpp"

namespace ssoct {

struct TrainConfig {
    std::size_t epochs = 150;
    std::size_t batch_size = 12;
    double lr = 1e-4;
    std::uint64_t seed = 0;
    std::size_t checkpoint_every = 0;  // extra epoch-numbered checkpoints; 0 disables
    std::size_t eval_every = 1;        // validation cadence in epochs

    void validate() const;
};

/// Row geometry of the network input: image rows and the wavenumber range of
/// the sweep that produced them.
struct FrameGeometry {
    std::size_t rows = 0;
    double k_lo = 0.0;
    double k_hi = 0.0;
    std::vector<double> ws;

    static FrameGeometry create(std::size_t rows, double k_lo, double k_hi);
};

/// One standardized network patch with its target in the same units.
struct TrainingPatch {
    PatchPlanes input;
    Matrix<double> target;  // ground truth band standardized with the input statistics
};

/// The four standardized input patches of a lambda-space image, plus the
/// statistics needed to map network output back to dB.
std::array<Standardized, kPatchesPerImage> prepare_input(const Matrix<double>& input_db, const FrameGeometry& geom);

std::array<TrainingPatch, kPatchesPerImage> prepare_pair(const Matrix<double>& input_db,
                                                         const Matrix<double>& ground_truth_db,
                                                         const FrameGeometry& geom);

std::vector<TrainingPatch> load_patches(std::span<const DatasetEntry> entries, const FrameGeometry& geom);

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    std::size_t steps = 0;  // optimizer steps so far
    double train_loss = 0.0;
    double val_loss = 0.0;  // NaN when not evaluated this epoch
};

struct TrainResult {
    std::vector<EpochRecord> history;
    double best_val_loss = 0.0;
    std::size_t best_epoch = 0;
};

/// Mean patch loss of `patches` in eval mode.
double evaluate_loss(WaveUnet<float>& model, std::span<const TrainingPatch> patches, std::size_t batch_size);

/// Adam over shuffled patch batches; the loss of a batch is the MSE over all
/// its pixels. With `out_dir` set, writes history.csv, best.wun1 (lowest
/// validation loss, or train loss without a validation set) and final.wun1.
/// Throws NumericError naming the epoch and batch on a non-finite loss.
TrainResult train(WaveUnet<float>& model, nn::AdamState<float>& adam, std::span<const TrainingPatch> train_set,
                  std::span<const TrainingPatch> val_set, const TrainConfig& cfg,
                  const std::filesystem::path& out_dir = {});

std::string history_csv(std::span<const EpochRecord> history);

/// Network reconstruction of one lambda-space image, in dB.
BScan infer_image(WaveUnet<float>& model, const Matrix<double>& input_db, const FrameGeometry& geom);

struct LatencyReport {
    std::vector<double> network_frame_s;
    std::vector<double> classic_frame_s;
    double network_total_s = 0.0;
    double classic_total_s = 0.0;

    double ratio() const { return network_total_s / classic_total_s; }  // network / classic
};

struct VolumeInference {
    std::vector<BScan> images;
    LatencyReport latency;
};

/// Lambda-space preprocessing plus network for every frame, timed against
/// classic_reconstruct of the same frames. Throws ConfigError when the frame
/// geometry does not match the model patches.
VolumeInference infer_volume(WaveUnet<float>& model, std::span<const FringeFrame> frames,
                             std::span<const double> background, const WavenumberGrid& source_k,
                             InterpMethod interp = InterpMethod::cubic_spline);

/// `frames,classic_total_s,network_total_s,ratio` header plus one row.
std::string latency_csv(const LatencyReport& report);

}  // namespace ssoct
