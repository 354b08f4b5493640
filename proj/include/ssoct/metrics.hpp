#pragma once

// Image quality metrics on display-mapped images scaled to [0, 1].

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssoct/matrix.hpp"

namespace ssoct {

/// Affine map of [db_lo, db_hi] onto [0, 255], clamped, rounded half away from zero.
Matrix<std::uint8_t> display_map(const Matrix<double>& db, double db_lo, double db_hi);

/// 8-bit image divided by 255.
Matrix<double> unit_scale(const Matrix<std::uint8_t>& image);

/// Convenience: display_map then unit_scale with the window [ref - range, ref].
Matrix<double> display_unit(const Matrix<double>& db, double reference_db, double range_db);

double mse(const Matrix<double>& a, const Matrix<double>& b);

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// 10 log10(max^2 / mse); identical images give kInfinitePsnr.
double psnr(const Matrix<double>& a, const Matrix<double>& b, double max_value = 1.0);

struct SsimOptions {
    std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

/// Mean of the local SSIM map over every full window position (no padding),
/// with a normalized Gaussian window.
double ssim(const Matrix<double>& a, const Matrix<double>& b, const SsimOptions& options = {});

enum class Variant : std::uint8_t { input, classic, network };
inline constexpr std::array<Variant, 3> kVariants{Variant::input, Variant::classic, Variant::network};
std::string_view variant_name(Variant v);

struct MetricsRecord {
    std::string sample;
    Variant variant = Variant::input;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double mse = 0.0;
};

struct VariantMeans {
    Variant variant = Variant::input;
    std::size_t count = 0;
    double psnr_db = 0.0;  // +inf if any record is infinite
    double ssim = 0.0;
    double mse = 0.0;
};

/// One sample to score: dB images on a shared depth/A-line grid. The display
/// window is [reference_db - range_db, reference_db].
struct EvaluationSample {
    std::string id;
    Matrix<double> ground_truth_db;
    Matrix<double> input_db;
    Matrix<double> classic_db;
    Matrix<double> network_db;
    double reference_db = 0.0;
};

struct MetricsConfig {
    double range_db = 60.0;
    SsimOptions ssim;
};

struct EvaluationReport {
    std::vector<MetricsRecord> records;  // three per sample, in kVariants order
    std::array<VariantMeans, 3> means;
};

EvaluationReport evaluate(std::span<const EvaluationSample> samples, const MetricsConfig& config);

/// "inf" for the infinite sentinel, shortest round-trip decimal otherwise.
std::string format_metric(double value);

/// Header `sample,variant,psnr_db,ssim,mse`, one line per record.
std::string metrics_csv(std::span<const MetricsRecord> records);
/// Header `variant,count,psnr_db,ssim,mse`.
std::string means_csv(std::span<const VariantMeans> means);

}  // namespace ssoct
