#pragma once

// Fringe-to-image processing: the lambda-space chain used as network input and
// the classic k-linearization chain used for OCT output and ground truth.

#include <complex>
#include <span>
#include <vector>

#include "ssoct/forward_model.hpp"
#include "ssoct/matrix.hpp"

namespace ssoct {

using ComplexProfile = Matrix<std::complex<double>>;

enum class Provenance : std::uint8_t { lambda_space, k_resampled, ground_truth, network_output };

struct BScan {
    Matrix<double> intensity_db;  // rows = depth bins
    Provenance meta = Provenance::lambda_space;
};

enum class InterpMethod { linear, cubic_spline };

constexpr double kDefaultDbFloor = 1e-12;

FringeFrame subtract_background(const FringeFrame& frame, std::span<const double> background);

/// Symmetric Hann weight, 0.5 * (1 - cos(2*pi*n/(N-1))).
double hann_window(std::size_t n, std::size_t length);
std::vector<double> hann_weights(std::size_t length);
FringeFrame apply_hann(const FringeFrame& frame);

/// Per-column inverse DFT, out[p] = (1/N) sum_j in[j] exp(+2*pi*i*j*p/N).
ComplexProfile idft_columns(const FringeFrame& frame);

/// 20*log10(|z| + floor_eps) elementwise.
Matrix<double> magnitude_db(const ComplexProfile& profile, double floor_eps = kDefaultDbFloor);

/// Keeps rows [0, N/2); N must be even.
template <typename T>
Matrix<T> truncate_conjugate(const Matrix<T>& m) {
    if (m.rows() % 2 != 0) {
        throw DimensionError("conjugate truncation needs an even row count, got " + std::to_string(m.rows()));
    }
    const std::size_t half = m.rows() / 2;
    std::vector<T> out(m.values().begin(), m.values().begin() + static_cast<std::ptrdiff_t>(half * m.cols()));
    return Matrix<T>(half, m.cols(), std::move(out));
}

BScan lambda_space_image(const FringeFrame& raw, std::span<const double> background,
                         double floor_eps = kDefaultDbFloor);

/// Interpolates each column from `source_k` (strictly monotonic) onto
/// uniform_k_grid(min, max, N). Cubic spline uses natural boundary conditions.
FringeFrame resample_to_linear_k(const FringeFrame& frame, const WavenumberGrid& source_k,
                                 InterpMethod method);

BScan classic_reconstruct(const FringeFrame& raw, std::span<const double> background,
                          const WavenumberGrid& source_k, InterpMethod method = InterpMethod::cubic_spline,
                          double floor_eps = kDefaultDbFloor);

/// Elementwise mean of the first n scans, tagged ground_truth.
BScan average_bscans(std::span<const BScan> stack, std::size_t n = 7);

/// Full width at half maximum of a peak in a linear-magnitude column, with
/// linear interpolation of the half crossings.
double psf_fwhm(std::span<const double> column, std::size_t peak_bin);

/// Same measurement on a dB column (converted to linear magnitude first).
double psf_fwhm_db(std::span<const double> column_db, std::size_t peak_bin);

}  // namespace ssoct
