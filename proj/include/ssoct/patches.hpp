#pragma once

// Network input preparation: wavenumber-sharing channel, depth-band patches and
// per-patch standardization.

#include <array>
#include <span>
#include <vector>

#include "ssoct/matrix.hpp"
#include "ssoct/nn/tensor.hpp"

namespace ssoct {

enum class WsMode { reciprocal_lambda, uniform };

/// Wavenumber per image row. reciprocal_lambda follows a lambda-linear sweep
/// from 2*pi/k_hi to 2*pi/k_lo, so values descend with the row index.
std::vector<double> ws_grid(double k_lo, double k_hi, std::size_t n_rows, WsMode mode = WsMode::reciprocal_lambda);

/// Two-channel image: channel 0 intensity, channel 1 normalized wavenumber.
struct PatchPlanes {
    Matrix<double> image;
    Matrix<double> wavenumber;

    std::size_t height() const { return image.rows(); }
    std::size_t width() const { return image.cols(); }
};

/// Channel 1 row j is (ws[j] - k_lo) / (k_hi - k_lo), constant along the width.
PatchPlanes interleave_wavenumber_channel(const Matrix<double>& image, std::span<const double> ws, double k_lo,
                                          double k_hi);

constexpr std::size_t kPatchesPerImage = 4;

/// Contiguous bands of rows, top to bottom.
std::vector<Matrix<double>> split_rows(const Matrix<double>& m, std::size_t parts = kPatchesPerImage);
Matrix<double> merge_rows(std::span<const Matrix<double>> parts);

std::array<PatchPlanes, kPatchesPerImage> split_patches(const PatchPlanes& planes);
PatchPlanes merge_patches(std::span<const PatchPlanes> patches);

struct Standardized {
    PatchPlanes patch;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation of channel 0
};

/// Channel 0 -> (x - mean) / (stddev + eps); channel 1 untouched.
Standardized standardize(const PatchPlanes& patch, double eps = 1e-8);

/// Stacks patches into a batch x 2 x h x w tensor.
template <typename T>
nn::Tensor<T> patches_to_tensor(std::span<const PatchPlanes> patches);

/// Stacks single-channel images into a batch x 1 x h x w tensor.
template <typename T>
nn::Tensor<T> images_to_tensor(std::span<const Matrix<double>> images);

/// Channel 0 of sample b of a batch x C x h x w tensor.
template <typename T>
Matrix<double> tensor_image(const nn::Tensor<T>& t, std::size_t b);

}  // namespace ssoct
