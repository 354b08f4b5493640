#include "ssoct/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ssoct/error.hpp"
#include "ssoct/simd/kernels.hpp"

namespace ssoct {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

void SweepConfig::validate() const {
    if (!(delta_lambda > 0.0)) throw ConfigError("sweep.delta_lambda must be positive");
    if (!(lambda_c > delta_lambda / 2.0)) {
        throw ConfigError("sweep.lambda_c must exceed delta_lambda/2 so every wavelength is positive");
    }
    if (n_samples < 2) throw ConfigError("sweep.n_samples must be at least 2");
    if (!(sweep_duration > 0.0)) throw ConfigError("sweep.sweep_duration must be positive");
    if (!(spectrum_fwhm > 0.0)) throw ConfigError("sweep.spectrum_fwhm must be positive");
}

double SweepConfig::k_center() const { return kTwoPi / lambda_c; }

double WavenumberGrid::min() const { return *std::min_element(values.begin(), values.end()); }
double WavenumberGrid::max() const { return *std::max_element(values.begin(), values.end()); }

void Phantom::validate(double max_depth) const {
    if (reference_reflectivity < 0.0 || reference_reflectivity > 1.0) {
        throw DomainError("reference reflectivity outside [0, 1]");
    }
    for (std::size_t i = 0; i < reflectors.size(); ++i) {
        const auto& r = reflectors[i];
        if (r.reflectivity < 0.0 || r.reflectivity > 1.0) {
            throw DomainError("reflector " + std::to_string(i) + " reflectivity outside [0, 1]");
        }
        if (r.depth < 0.0 || r.depth >= max_depth) {
            throw DomainError("reflector " + std::to_string(i) + " depth " + std::to_string(r.depth) +
                              " m outside [0, " + std::to_string(max_depth) + ")");
        }
    }
}

WavelengthGrid sweep_wavelength_grid(const SweepConfig& cfg) {
    cfg.validate();
    WavelengthGrid grid;
    grid.values.resize(cfg.n_samples);
    const double dt = cfg.sweep_duration / static_cast<double>(cfg.n_samples - 1);
    const double beta = cfg.beta();
    for (std::size_t j = 0; j < cfg.n_samples; ++j) {
        const double t = -cfg.sweep_duration / 2.0 + dt * static_cast<double>(j);
        grid.values[j] = cfg.lambda_c + beta * t;
    }
    // pin the endpoints so they carry no accumulated rounding
    grid.values.front() = cfg.lambda_c - cfg.delta_lambda / 2.0;
    grid.values.back() = cfg.lambda_c + cfg.delta_lambda / 2.0;
    return grid;
}

WavenumberGrid to_wavenumbers(const WavelengthGrid& grid) {
    WavenumberGrid k;
    k.values.reserve(grid.values.size());
    for (const double lambda : grid.values) {
        if (!(lambda > 0.0)) throw DomainError("wavelength must be positive, got " + std::to_string(lambda));
        k.values.push_back(kTwoPi / lambda);
    }
    return k;
}

WavenumberGrid uniform_k_grid(double k_min, double k_max, std::size_t n) {
    if (!(k_max > k_min)) throw DomainError("uniform_k_grid needs k_max > k_min");
    if (n < 2) throw DomainError("uniform_k_grid needs at least 2 samples");
    WavenumberGrid k;
    k.values.resize(n);
    const double step = (k_max - k_min) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) k.values[j] = k_min + step * static_cast<double>(j);
    k.values.back() = k_max;
    return k;
}

std::vector<double> source_spectrum(const WavenumberGrid& kgrid, const SweepConfig& cfg) {
    if (kgrid.values.empty()) throw DimensionError("source_spectrum on an empty grid");
    const double kc = cfg.k_center();
    const double fwhm_k = kTwoPi * cfg.spectrum_fwhm / (cfg.lambda_c * cfg.lambda_c);
    const double a = 4.0 * std::numbers::ln2 / (fwhm_k * fwhm_k);
    std::vector<double> s(kgrid.values.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double dk = kgrid.values[j] - kc;
        s[j] = std::exp(-a * dk * dk);
    }
    return s;
}

double max_imaging_depth(double k_min, double k_max, std::size_t n) {
    // bin p = 2 d dk N / (2 pi) with dk = (k_max - k_min)/(N-1); Nyquist at p = N/2
    return std::numbers::pi * static_cast<double>(n - 1) / (2.0 * (k_max - k_min));
}

double max_imaging_depth(const SweepConfig& cfg) {
    const double k_hi = kTwoPi / (cfg.lambda_c - cfg.delta_lambda / 2.0);
    const double k_lo = kTwoPi / (cfg.lambda_c + cfg.delta_lambda / 2.0);
    return max_imaging_depth(k_lo, k_hi, cfg.n_samples);
}

std::vector<double> synthesize_fringe(const Phantom& phantom, const WavenumberGrid& kgrid,
                                      std::span<const double> spectrum, bool include_autocorrelation) {
    const std::size_t n = kgrid.values.size();
    if (spectrum.size() != n) {
        throw DimensionError("spectrum length " + std::to_string(spectrum.size()) +
                             " does not match grid length " + std::to_string(n));
    }
    const double r_ref = phantom.reference_reflectivity;
    const auto& refl = phantom.reflectors;

    std::vector<double> amp, freq, phase;
    amp.reserve(refl.size());
    freq.reserve(refl.size());
    phase.reserve(refl.size());
    double constant = r_ref * r_ref;
    for (const auto& r : refl) {
        amp.push_back(2.0 * r_ref * std::sqrt(r.reflectivity));
        freq.push_back(2.0 * (r.depth - phantom.reference_depth));
        phase.push_back(r.phase);
    }
    if (include_autocorrelation) {
        for (std::size_t m = 0; m < refl.size(); ++m) {
            constant += refl[m].reflectivity;
            for (std::size_t q = m + 1; q < refl.size(); ++q) {
                amp.push_back(2.0 * std::sqrt(refl[m].reflectivity * refl[q].reflectivity));
                freq.push_back(2.0 * (refl[m].depth - refl[q].depth));
                phase.push_back(refl[m].phase - refl[q].phase);
            }
        }
    }

    std::vector<double> fringe(n, constant);
    simd::accumulate_cosines(kgrid.values, amp, freq, phase, fringe);
    for (std::size_t j = 0; j < n; ++j) fringe[j] *= 0.25 * spectrum[j];
    return fringe;
}

std::vector<double> background_fringe(const WavenumberGrid& kgrid, std::span<const double> spectrum,
                                      double reference_reflectivity) {
    Phantom empty;
    empty.reference_reflectivity = reference_reflectivity;
    return synthesize_fringe(empty, kgrid, spectrum);
}

std::vector<FringeFrame> synthesize_volume(const VolumeRequest& request, const SweepConfig& cfg) {
    return synthesize_volume(request, cfg, to_wavenumbers(sweep_wavelength_grid(cfg)),
                             GridTag::lambda_linear);
}

std::vector<FringeFrame> synthesize_volume(const VolumeRequest& request, const SweepConfig& cfg,
                                           const WavenumberGrid& kgrid, GridTag tag) {
    if (request.n_alines < 1) throw DomainError("synthesize_volume needs at least one A-line");
    if (request.phantoms.empty()) throw DomainError("synthesize_volume needs at least one phantom");
    if (request.phantoms.size() != 1 && request.phantoms.size() != request.n_alines) {
        throw DimensionError("phantom count must be 1 or equal to n_alines");
    }
    if (request.noise.detector_sigma < 0.0) throw DomainError("detector noise sigma must be >= 0");
    const double max_depth = max_imaging_depth(kgrid.min(), kgrid.max(), kgrid.values.size());
    for (const auto& p : request.phantoms) p.validate(max_depth);

    const auto spectrum = source_spectrum(kgrid, cfg);
    const std::size_t n = kgrid.values.size();
    std::mt19937_64 rng(request.seed);
    std::uniform_real_distribution<double> uniform_phase(0.0, kTwoPi);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<FringeFrame> frames;
    frames.reserve(request.n_repeats);
    for (std::size_t rep = 0; rep < request.n_repeats; ++rep) {
        FringeFrame frame{Matrix<double>(n, request.n_alines), tag};
        for (std::size_t col = 0; col < request.n_alines; ++col) {
            const Phantom& base = request.phantoms.size() == 1 ? request.phantoms.front()
                                                               : request.phantoms[col];
            std::vector<double> fringe;
            if (request.noise.speckle) {
                Phantom realized = base;
                for (auto& r : realized.reflectors) r.phase = uniform_phase(rng);
                fringe = synthesize_fringe(realized, kgrid, spectrum, request.include_autocorrelation);
            } else {
                fringe = synthesize_fringe(base, kgrid, spectrum, request.include_autocorrelation);
            }
            if (request.noise.detector_sigma > 0.0) {
                for (auto& v : fringe) v += request.noise.detector_sigma * gauss(rng);
            }
            frame.samples.set_col(col, fringe);
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

double time_from_wavenumber(double k, const SweepConfig& cfg) {
    if (!(k > 0.0)) throw DomainError("wavenumber must be positive");
    const double kc = cfg.k_center();
    return kTwoPi * cfg.sweep_duration / cfg.delta_lambda * (1.0 / k - 1.0 / kc);
}

double time_from_wavenumber_series(double k, const SweepConfig& cfg, int order) {
    if (!(k > 0.0)) throw DomainError("wavenumber must be positive");
    if (order < 1) throw DomainError("series order must be >= 1");
    const double kc = cfg.k_center();
    const double x = k / kc - 1.0;
    // 1/k - 1/k_c = (1/k_c) * sum_{n>=1} (-x)^n
    double term = 1.0;
    double sum = 0.0;
    for (int i = 1; i <= order; ++i) {
        term *= -x;
        sum += term;
    }
    return kTwoPi / cfg.beta() * sum / kc;
}

}  // namespace ssoct
