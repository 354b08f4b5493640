#pragma once

// Swept-source fringe synthesis on wavelength-linear sweeps.
//
// All quantities are SI: meters, rad/m, seconds. Row j of every fringe
// corresponds to sweep sample j, i.e. to wavelength_grid[j].

#include <cstdint>
#include <span>
#include <vector>

#include "ssoct/matrix.hpp"

namespace ssoct {

struct SweepConfig {
    double lambda_c = 1309e-9;
    double delta_lambda = 100e-9;
    std::size_t n_samples = 2304;
    double sweep_duration = 1.0;
    double spectrum_fwhm = 100e-9;

    /// Throws ConfigError when the sweep is not physical.
    void validate() const;

    /// Sweep rate in wavelength, delta_lambda / sweep_duration.
    double beta() const { return delta_lambda / sweep_duration; }
    double k_center() const;
};

struct WavelengthGrid {
    std::vector<double> values;
};

struct WavenumberGrid {
    std::vector<double> values;

    double min() const;
    double max() const;
};

struct Reflector {
    double depth = 0.0;         // meters from the reference mirror plane
    double reflectivity = 0.0;  // power reflectivity s in [0, 1]
    double phase = 0.0;         // radians
};

struct Phantom {
    std::vector<Reflector> reflectors;
    double reference_reflectivity = 1.0;
    double reference_depth = 0.0;

    /// Throws DomainError for reflectivities outside [0,1] or depths outside
    /// [0, max_depth).
    void validate(double max_depth) const;
};

enum class GridTag : std::uint8_t { lambda_linear = 0, k_linear = 1 };

struct FringeFrame {
    Matrix<double> samples;  // rows = sweep samples, cols = A-lines
    GridTag grid_tag = GridTag::lambda_linear;
};

struct NoiseConfig {
    bool speckle = false;      // redraw scatterer phases per realization
    double detector_sigma = 0.0;
};

WavelengthGrid sweep_wavelength_grid(const SweepConfig& cfg);

WavenumberGrid to_wavenumbers(const WavelengthGrid& grid);

/// n equally spaced wavenumbers from k_min to k_max inclusive, ascending.
WavenumberGrid uniform_k_grid(double k_min, double k_max, std::size_t n);

/// Gaussian source spectrum in k, peak 1 at 2*pi/lambda_c, FWHM mapped from
/// the wavelength FWHM to first order (2*pi*dl/lambda_c^2).
std::vector<double> source_spectrum(const WavenumberGrid& kgrid, const SweepConfig& cfg);

/// Largest depth that stays below the Nyquist bin for a grid of n samples
/// spanning [k_min, k_max] uniformly.
double max_imaging_depth(double k_min, double k_max, std::size_t n);
double max_imaging_depth(const SweepConfig& cfg);

/// One A-line of the interferometric signal. The cross-correlation and DC
/// terms are always present; the sample autocorrelation only on request.
std::vector<double> synthesize_fringe(const Phantom& phantom, const WavenumberGrid& kgrid,
                                      std::span<const double> spectrum,
                                      bool include_autocorrelation = false);

/// DC-only fringe (no sample reflectors), i.e. the background of step (i).
std::vector<double> background_fringe(const WavenumberGrid& kgrid, std::span<const double> spectrum,
                                      double reference_reflectivity);

struct VolumeRequest {
    /// One phantom per A-line, or a single phantom replicated over n_alines.
    std::vector<Phantom> phantoms;
    std::size_t n_alines = 1;
    std::size_t n_repeats = 1;
    NoiseConfig noise;
    bool include_autocorrelation = false;
    std::uint64_t seed = 0;
};

/// Frames on the configured lambda-linear sweep. Repeats share the scene and
/// differ only in the speckle phases and detector noise drawn from the seed.
std::vector<FringeFrame> synthesize_volume(const VolumeRequest& request, const SweepConfig& cfg);

/// Same as synthesize_volume but on an explicit grid (used for uniform-k
/// references).
std::vector<FringeFrame> synthesize_volume(const VolumeRequest& request, const SweepConfig& cfg,
                                           const WavenumberGrid& kgrid, GridTag tag);

/// Sweep time at wavenumber k, t = (2*pi*dT/dl)(1/k - 1/k_c).
double time_from_wavenumber(double k, const SweepConfig& cfg);

/// Power series of the above around k_c truncated after `order` terms.
double time_from_wavenumber_series(double k, const SweepConfig& cfg, int order);

}  // namespace ssoct
