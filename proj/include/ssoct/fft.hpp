#pragma once

#include <complex>
#include <span>
#include <vector>

namespace ssoct {

/// Inverse DFT of length N with 1/N normalization and a positive exponent.
/// Backed by FFTW; plans are cached per length.
std::vector<std::complex<double>> inverse_dft(std::span<const std::complex<double>> input);
std::vector<std::complex<double>> inverse_dft(std::span<const double> real_input);

}  // namespace ssoct
