#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ssoct/error.hpp"
#include "ssoct/fft.hpp"
#include "ssoct/spectral_pipeline.hpp"

using namespace ssoct;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

FringeFrame column_frame(const std::vector<double>& v, GridTag tag = GridTag::lambda_linear) {
    return {Matrix<double>(v.size(), 1, v), tag};
}

std::size_t peak_bin(const Matrix<double>& img, std::size_t col, std::size_t skip = 3) {
    std::size_t best = skip;
    for (std::size_t r = skip; r + 1 < img.rows(); ++r) {
        if (img(r, col) > img(best, col)) best = r;
    }
    return best;
}

struct SingleReflector {
    SweepConfig cfg;
    WavenumberGrid k;
    std::vector<double> spectrum;
    std::vector<double> background;

    explicit SingleReflector(std::size_t n) {
        cfg.n_samples = n;
        k = to_wavenumbers(sweep_wavelength_grid(cfg));
        spectrum = source_spectrum(k, cfg);
        background = background_fringe(k, spectrum, 1.0);
    }
    FringeFrame frame(double depth) const {
        Phantom p;
        p.reflectors = {{depth, 1e-3, 0.0}};
        return column_frame(synthesize_fringe(p, k, spectrum));
    }
};

}  // namespace

TEST(Background, SubtractionCases) {
    const std::vector<double> bg{1.0, 2.0, 3.0};
    FringeFrame f{Matrix<double>(3, 2, std::vector<double>{1, 1, 2, 2, 3, 3}), GridTag::lambda_linear};
    const auto zero = subtract_background(f, bg);
    for (const double v : zero.samples.values()) EXPECT_EQ(v, 0.0);
    const std::vector<double> none(3, 0.0);
    EXPECT_EQ(subtract_background(f, none).samples, f.samples);
    const std::vector<double> short_bg(2, 0.0);
    EXPECT_THROW(subtract_background(f, short_bg), DimensionError);
}

TEST(Background, SingleReflectorLeavesPureCosine) {
    SingleReflector s(256);
    const double d = 150e-6, refl = 1e-3;
    const auto out = subtract_background(s.frame(d), s.background);
    for (std::size_t j = 0; j < 256; ++j) {
        const double want = s.spectrum[j] * 2.0 * std::sqrt(refl) * std::cos(2.0 * s.k.values[j] * d) / 4.0;
        EXPECT_NEAR(out.samples(j, 0), want, 1e-14);
    }
}

TEST(Hann, KnownValuesAndSymmetry) {
    const auto w = hann_weights(4);
    ASSERT_EQ(w.size(), 4u);
    EXPECT_NEAR(w[0], 0.0, 1e-15);
    EXPECT_NEAR(w[1], 0.75, 1e-15);
    EXPECT_NEAR(w[2], 0.75, 1e-15);
    EXPECT_NEAR(w[3], 0.0, 1e-15);
    const auto w9 = hann_weights(97);
    EXPECT_NEAR(w9.front(), 0.0, 1e-15);
    EXPECT_NEAR(w9.back(), 0.0, 1e-15);
    for (std::size_t n = 0; n < 97; ++n) EXPECT_NEAR(w9[n], w9[96 - n], 1e-15);
    EXPECT_THROW(hann_window(0, 1), DomainError);
    EXPECT_THROW(hann_window(4, 4), DomainError);
}

TEST(Hann, AppliedPerColumn) {
    FringeFrame f{Matrix<double>(4, 2, 2.0), GridTag::k_linear};
    const auto out = apply_hann(f);
    EXPECT_NEAR(out.samples(1, 0), 1.5, 1e-15);
    EXPECT_NEAR(out.samples(2, 1), 1.5, 1e-15);
    EXPECT_NEAR(out.samples(0, 1), 0.0, 1e-15);
    EXPECT_EQ(out.grid_tag, GridTag::k_linear);
}

TEST(Idft, ConstantColumnIsDcOnly) {
    const auto out = idft_columns(column_frame(std::vector<double>(64, 2.5)));
    EXPECT_NEAR(out(0, 0).real(), 2.5, 1e-12);
    EXPECT_NEAR(out(0, 0).imag(), 0.0, 1e-12);
    for (std::size_t p = 1; p < 64; ++p) EXPECT_LT(std::abs(out(p, 0)), 1e-12);
}

TEST(Idft, CosineSplitsIntoTwoHalfBins) {
    const std::size_t n = 128;
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = std::cos(kTwoPi * 10.0 * j / n);
    const auto out = idft_columns(column_frame(v));
    for (std::size_t p = 0; p < n; ++p) {
        const double want = (p == 10 || p == n - 10) ? 0.5 : 0.0;
        EXPECT_NEAR(std::abs(out(p, 0)), want, 1e-12) << p;
    }
}

TEST(Idft, MatchesDirectSummationOracle) {
    std::mt19937_64 rng(256);
    for (const std::size_t n : {8u, 64u, 256u, 1024u, 2304u}) {
        const auto col = oracle::random_normal(n, rng);
        const auto fast = inverse_dft(std::span<const double>(col));
        const auto slow = oracle::direct_idft(col);
        EXPECT_LE(oracle::max_relative_error(fast, slow), 1e-9) << "N=" << n;
    }
}

TEST(Idft, ParsevalAndHermitianSymmetry) {
    std::mt19937_64 rng(17);
    const std::size_t n = 512;
    const auto col = oracle::random_normal(n, rng);
    const auto out = inverse_dft(std::span<const double>(col));
    double lhs = 0.0, rhs = 0.0;
    for (const auto& z : out) lhs += std::norm(z);
    for (const double v : col) rhs += v * v;
    rhs /= static_cast<double>(n);
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-9);
    for (std::size_t p = 1; p < n; ++p) EXPECT_LT(std::abs(out[p] - std::conj(out[n - p])), 1e-12);
}

TEST(Idft, ComplexInputMatchesOracleForRealPart) {
    std::mt19937_64 rng(4);
    const auto col = oracle::random_normal(100, rng);
    std::vector<std::complex<double>> z(col.begin(), col.end());
    const auto fast = inverse_dft(std::span<const std::complex<double>>(z));
    EXPECT_LE(oracle::max_relative_error(fast, oracle::direct_idft(col)), 1e-12);
}

TEST(Idft, TooShortRejected) {
    EXPECT_THROW(idft_columns(column_frame({1.0})), DimensionError);
}

TEST(MagnitudeDb, KnownValues) {
    ComplexProfile p(3, 1);
    p(0, 0) = {1.0, 0.0};
    p(1, 0) = {6.0, 8.0};
    p(2, 0) = {0.0, 0.0};
    const auto db = magnitude_db(p);
    EXPECT_NEAR(db(0, 0), 0.0, 1e-9);
    EXPECT_NEAR(db(1, 0), 20.0, 1e-9);
    EXPECT_NEAR(db(2, 0), -240.0, 1e-9);
}

TEST(Truncate, KeepsLowerHalf) {
    const Matrix<double> m(4, 1, std::vector<double>{1, 2, 3, 4});
    const auto t = truncate_conjugate(m);
    EXPECT_EQ(t(0, 0), 1.0);
    EXPECT_EQ(t(1, 0), 2.0);
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(truncate_conjugate(Matrix<double>(2304, 3)).rows(), 1152u);
    EXPECT_THROW(truncate_conjugate(Matrix<double>(5, 1)), DimensionError);
}

TEST(LambdaSpace, BackgroundOnlyGivesFloor) {
    SingleReflector s(256);
    const auto img = lambda_space_image(column_frame(s.background), s.background);
    EXPECT_EQ(img.meta, Provenance::lambda_space);
    ASSERT_EQ(img.intensity_db.rows(), 128u);
    for (std::size_t r = 1; r < 127; ++r) EXPECT_NEAR(img.intensity_db(r, 0), -240.0, 1e-9);
}

TEST(LambdaSpace, ShallowReflectorPeakMatchesOracle) {
    SingleReflector s(512);
    const auto raw = s.frame(0.1 * max_imaging_depth(s.cfg));
    const auto img = lambda_space_image(raw, s.background);
    // oracle: background subtraction and windowing by hand, then direct DFT
    std::vector<double> col(512);
    const auto w = hann_weights(512);
    for (std::size_t j = 0; j < 512; ++j) col[j] = (raw.samples(j, 0) - s.background[j]) * w[j];
    const auto ref = oracle::direct_idft(col);
    std::size_t best = 3;
    for (std::size_t p = 3; p < 255; ++p) {
        if (std::abs(ref[p]) > std::abs(ref[best])) best = p;
    }
    EXPECT_EQ(peak_bin(img.intensity_db, 0), best);
    for (std::size_t p = 0; p < 256; ++p) {
        EXPECT_NEAR(img.intensity_db(p, 0), 20.0 * std::log10(std::abs(ref[p]) + 1e-12), 1e-6);
    }
}

TEST(LambdaSpace, DeepReflectorIsBroader) {
    SingleReflector s(1024);
    const double dmax = max_imaging_depth(s.cfg);
    const auto shallow = lambda_space_image(s.frame(0.15 * dmax), s.background);
    const auto deep = lambda_space_image(s.frame(0.8 * dmax), s.background);
    const double w_shallow = psf_fwhm_db(shallow.intensity_db.col(0), peak_bin(shallow.intensity_db, 0));
    const double w_deep = psf_fwhm_db(deep.intensity_db.col(0), peak_bin(deep.intensity_db, 0));
    EXPECT_GT(w_deep, w_shallow);
}

TEST(LambdaSpace, ScalingShiftsDbUniformly) {
    SingleReflector s(256);
    const auto raw = s.frame(0.3 * max_imaging_depth(s.cfg));
    auto sub = subtract_background(raw, s.background);
    const std::vector<double> zero(256, 0.0);
    const auto a = lambda_space_image(sub, zero);
    for (auto& v : sub.samples.values()) v *= 3.0;
    const auto b = lambda_space_image(sub, zero);
    const double shift = 20.0 * std::log10(3.0);
    const std::size_t p = peak_bin(a.intensity_db, 0);
    for (std::size_t r = p - 3; r <= p + 3; ++r) EXPECT_NEAR(b.intensity_db(r, 0) - a.intensity_db(r, 0), shift, 1e-6);
}

TEST(Resample, UniformInputIsUnchanged) {
    const auto k = uniform_k_grid(4.6e6, 5.0e6, 200);
    std::vector<double> v(200);
    for (std::size_t j = 0; j < 200; ++j) v[j] = std::sin(j * 0.3) + 0.1 * j;
    for (const auto method : {InterpMethod::linear, InterpMethod::cubic_spline}) {
        const auto out = resample_to_linear_k(column_frame(v), k, method);
        EXPECT_EQ(out.grid_tag, GridTag::k_linear);
        for (std::size_t j = 0; j < 200; ++j) EXPECT_NEAR(out.samples(j, 0), v[j], 1e-10);
    }
}

TEST(Resample, LinearFunctionRecoveredExactly) {
    SweepConfig cfg;
    cfg.n_samples = 300;
    const auto k = to_wavenumbers(sweep_wavelength_grid(cfg));
    std::vector<double> v(300);
    const double k0 = k.min();
    for (std::size_t j = 0; j < 300; ++j) v[j] = 2.0 + 3.0 * (k.values[j] - k0) / 1e5;
    const auto out = resample_to_linear_k(column_frame(v), k, InterpMethod::linear);
    const auto uk = uniform_k_grid(k.min(), k.max(), 300);
    for (std::size_t j = 0; j < 300; ++j) EXPECT_NEAR(out.samples(j, 0), 2.0 + 3.0 * (uk.values[j] - k0) / 1e5, 1e-12);
}

TEST(Resample, NonMonotonicGridRejected) {
    const WavenumberGrid k{{1.0, 2.0, 1.5, 3.0}};
    EXPECT_THROW(resample_to_linear_k(column_frame({0, 1, 2, 3}), k, InterpMethod::linear), DomainError);
    const WavenumberGrid short_k{{1.0, 2.0, 3.0}};
    EXPECT_THROW(resample_to_linear_k(column_frame({0, 1, 2, 3}), short_k, InterpMethod::linear), DimensionError);
}

TEST(Resample, SplineRestoresReferenceWidth) {
    SingleReflector s(1024);
    const double depth = 0.5 * max_imaging_depth(s.cfg);
    const auto classic = classic_reconstruct(s.frame(depth), s.background, s.k);
    EXPECT_EQ(classic.meta, Provenance::k_resampled);
    // reference: same reflector synthesized directly on the uniform-k grid
    const auto uk = uniform_k_grid(s.k.min(), s.k.max(), 1024);
    const auto uspec = source_spectrum(uk, s.cfg);
    Phantom p;
    p.reflectors = {{depth, 1e-3, 0.0}};
    const auto ref = lambda_space_image(column_frame(synthesize_fringe(p, uk, uspec), GridTag::k_linear),
                                        background_fringe(uk, uspec, 1.0));
    const double w_classic = psf_fwhm_db(classic.intensity_db.col(0), peak_bin(classic.intensity_db, 0));
    const double w_ref = psf_fwhm_db(ref.intensity_db.col(0), peak_bin(ref.intensity_db, 0));
    EXPECT_LT(w_classic, 1.2 * w_ref);
    EXPECT_GT(w_classic, w_ref / 1.2);
}

TEST(Classic, PeakNearAnalyticBinAndMonotone) {
    SingleReflector s(1024);
    const double dk = s.k.max() - s.k.min();
    std::size_t previous = 0;
    for (int i = 1; i <= 10; ++i) {
        const double depth = 0.08 * i * max_imaging_depth(s.cfg);
        const auto img = classic_reconstruct(s.frame(depth), s.background, s.k);
        const std::size_t got = peak_bin(img.intensity_db, 0);
        const double predicted = 2.0 * depth * dk * 1024.0 / (kTwoPi * 1023.0);
        EXPECT_LE(std::abs(static_cast<double>(got) - predicted), 1.0) << "depth index " << i;
        EXPECT_GT(got, previous);
        previous = got;
    }
}

TEST(Classic, LambdaImageAtLeastAsWide) {
    SingleReflector s(1024);
    for (int i = 1; i <= 5; ++i) {
        const double depth = 0.15 * i * max_imaging_depth(s.cfg);
        const auto classic = classic_reconstruct(s.frame(depth), s.background, s.k);
        const auto lam = lambda_space_image(s.frame(depth), s.background);
        const double wc = psf_fwhm_db(classic.intensity_db.col(0), peak_bin(classic.intensity_db, 0));
        const double wl = psf_fwhm_db(lam.intensity_db.col(0), peak_bin(lam.intensity_db, 0));
        EXPECT_GE(wl, wc * 0.999) << "depth index " << i;
    }
}

TEST(Classic, UniformKInputMatchesLambdaImage) {
    SweepConfig cfg;
    cfg.n_samples = 256;
    const auto uk = uniform_k_grid(4.6234e6, 4.9906e6, 256);
    const auto spec = source_spectrum(uk, cfg);
    Phantom p;
    p.reflectors = {{200e-6, 1e-3, 0.2}};
    const auto raw = column_frame(synthesize_fringe(p, uk, spec), GridTag::k_linear);
    const auto bg = background_fringe(uk, spec, 1.0);
    const auto a = classic_reconstruct(raw, bg, uk);
    const auto b = lambda_space_image(raw, bg);
    const std::size_t pk = peak_bin(b.intensity_db, 0);
    for (std::size_t r = pk - 5; r <= pk + 5; ++r) EXPECT_NEAR(a.intensity_db(r, 0), b.intensity_db(r, 0), 1e-6);
}

TEST(Average, MeanSemantics) {
    BScan a{Matrix<double>(2, 2, 1.5), Provenance::k_resampled};
    std::vector<BScan> same(7, a);
    const auto avg = average_bscans(same);
    EXPECT_EQ(avg.meta, Provenance::ground_truth);
    EXPECT_EQ(avg.intensity_db, a.intensity_db);
    BScan neg{Matrix<double>(2, 2, -1.5), Provenance::k_resampled};
    const std::vector<BScan> pair{a, neg};
    const auto cancelled = average_bscans(pair, 2);
    for (const double v : cancelled.intensity_db.values()) EXPECT_EQ(v, 0.0);
    const std::vector<BScan> mixed{a, BScan{Matrix<double>(3, 2), Provenance::k_resampled}};
    EXPECT_THROW(average_bscans(mixed, 2), DimensionError);
}

TEST(Average, SpeckleVarianceDrops) {
    SweepConfig cfg;
    cfg.n_samples = 256;
    const auto k = to_wavenumbers(sweep_wavelength_grid(cfg));
    const auto spec = source_spectrum(k, cfg);
    const auto bg = background_fringe(k, spec, 1.0);
    Phantom p;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> depth(100e-6, 400e-6);
    for (int i = 0; i < 60; ++i) p.reflectors.push_back({depth(rng), 1e-4, 0.0});
    const std::size_t trials = 12;
    std::vector<BScan> singles, averages;
    for (std::size_t t = 0; t < trials; ++t) {
        VolumeRequest req;
        req.phantoms = {p};
        req.n_alines = 4;
        req.n_repeats = 7;
        req.noise.speckle = true;
        req.seed = 100 + t;
        const auto frames = synthesize_volume(req, cfg);
        std::vector<BScan> recon;
        for (const auto& f : frames) recon.push_back(classic_reconstruct(f, bg, k));
        singles.push_back(recon.front());
        averages.push_back(average_bscans(recon));
    }
    auto pixel_variance = [&](const std::vector<BScan>& set) {
        double total = 0.0;
        const auto& m0 = set.front().intensity_db;
        for (std::size_t i = 0; i < m0.size(); ++i) {
            double mean = 0.0;
            for (const auto& b : set) mean += b.intensity_db.values()[i];
            mean /= static_cast<double>(set.size());
            double var = 0.0;
            for (const auto& b : set) var += std::pow(b.intensity_db.values()[i] - mean, 2);
            total += var;
        }
        return total;
    };
    EXPECT_LT(pixel_variance(averages), pixel_variance(singles));
}

TEST(Fwhm, HandExamples) {
    const std::vector<double> tri{0, 1, 2, 1, 0};
    EXPECT_DOUBLE_EQ(psf_fwhm(tri, 2), 2.0);
    const std::vector<double> delta{0, 0, 1, 0, 0};
    EXPECT_DOUBLE_EQ(psf_fwhm(delta, 2), 1.0);
    std::vector<double> scaled = tri;
    for (auto& v : scaled) v *= 37.5;
    EXPECT_DOUBLE_EQ(psf_fwhm(scaled, 2), 2.0);
}

TEST(Fwhm, MissingCrossingRejected) {
    const std::vector<double> edge{2, 1.5, 0.2};
    EXPECT_THROW(psf_fwhm(edge, 0), DomainError);
    const std::vector<double> not_peak{0, 1, 2, 1, 0};
    EXPECT_THROW(psf_fwhm(not_peak, 1), DomainError);
}
