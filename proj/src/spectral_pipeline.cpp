#include "ssoct/spectral_pipeline.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_interp.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "ssoct/error.hpp"
#include "ssoct/fft.hpp"

namespace ssoct {

namespace {

void check_finite(const Matrix<double>& m, const char* what) {
    for (const double v : m.values()) {
        if (!std::isfinite(v)) throw NumericError(std::string(what) + " contains a non-finite sample");
    }
}

struct InterpDeleter {
    void operator()(gsl_interp* p) const { gsl_interp_free(p); }
};
struct AccelDeleter {
    void operator()(gsl_interp_accel* p) const { gsl_interp_accel_free(p); }
};

// Column interpolator over an ascending abscissa.
class ColumnInterpolator {
public:
    ColumnInterpolator(std::vector<double> x, InterpMethod method) : x_(std::move(x)) {
        static const bool handler_off = [] {
            gsl_set_error_handler_off();
            return true;
        }();
        (void)handler_off;
        const gsl_interp_type* type =
            (method == InterpMethod::cubic_spline && x_.size() >= 3) ? gsl_interp_cspline : gsl_interp_linear;
        interp_.reset(gsl_interp_alloc(type, x_.size()));
        accel_.reset(gsl_interp_accel_alloc());
        if (!interp_ || !accel_) throw Error("interpolator allocation failed");
    }

    void resample(std::span<const double> y, std::span<const double> targets, std::span<double> out) {
        if (gsl_interp_init(interp_.get(), x_.data(), y.data(), x_.size()) != GSL_SUCCESS) {
            throw DomainError("interpolator rejected the source grid");
        }
        gsl_interp_accel_reset(accel_.get());
        for (std::size_t i = 0; i < targets.size(); ++i) {
            double v = 0.0;
            if (gsl_interp_eval_e(interp_.get(), x_.data(), y.data(), targets[i], accel_.get(), &v) != GSL_SUCCESS) {
                throw DomainError("interpolation target outside the source grid");
            }
            out[i] = v;
        }
    }

private:
    std::vector<double> x_;
    std::unique_ptr<gsl_interp, InterpDeleter> interp_;
    std::unique_ptr<gsl_interp_accel, AccelDeleter> accel_;
};

}  // namespace

FringeFrame subtract_background(const FringeFrame& frame, std::span<const double> background) {
    const auto& m = frame.samples;
    if (background.size() != m.rows()) {
        throw DimensionError("background length " + std::to_string(background.size()) +
                             " does not match frame rows " + std::to_string(m.rows()));
    }
    FringeFrame out = frame;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = out.samples.row(r);
        for (auto& v : row) v -= background[r];
    }
    return out;
}

double hann_window(std::size_t n, std::size_t length) {
    if (length < 2) throw DomainError("Hann window needs length >= 2");
    if (n >= length) throw DomainError("Hann window index out of range");
    return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                 static_cast<double>(length - 1)));
}

std::vector<double> hann_weights(std::size_t length) {
    std::vector<double> w(length);
    for (std::size_t n = 0; n < length; ++n) w[n] = hann_window(n, length);
    return w;
}

FringeFrame apply_hann(const FringeFrame& frame) {
    const auto w = hann_weights(frame.samples.rows());
    FringeFrame out = frame;
    for (std::size_t r = 0; r < w.size(); ++r) {
        for (auto& v : out.samples.row(r)) v *= w[r];
    }
    return out;
}

ComplexProfile idft_columns(const FringeFrame& frame) {
    const auto& m = frame.samples;
    if (m.rows() < 2) throw DimensionError("inverse DFT needs at least 2 rows");
    ComplexProfile out(m.rows(), m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        const auto column = m.col(c);
        const auto spectrum = inverse_dft(std::span<const double>(column));
        out.set_col(c, spectrum);
    }
    return out;
}

Matrix<double> magnitude_db(const ComplexProfile& profile, double floor_eps) {
    if (!(floor_eps > 0.0)) throw DomainError("dB floor must be positive");
    Matrix<double> out(profile.rows(), profile.cols());
    auto dst = out.values();
    auto src = profile.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = 20.0 * std::log10(std::abs(src[i]) + floor_eps);
    return out;
}

BScan lambda_space_image(const FringeFrame& raw, std::span<const double> background, double floor_eps) {
    check_finite(raw.samples, "raw frame");
    const auto windowed = apply_hann(subtract_background(raw, background));
    return BScan{truncate_conjugate(magnitude_db(idft_columns(windowed), floor_eps)), Provenance::lambda_space};
}

FringeFrame resample_to_linear_k(const FringeFrame& frame, const WavenumberGrid& source_k,
                                 InterpMethod method) {
    const auto& k = source_k.values;
    const auto& m = frame.samples;
    if (k.size() != m.rows()) {
        throw DimensionError("source grid length " + std::to_string(k.size()) + " does not match frame rows " +
                             std::to_string(m.rows()));
    }
    if (k.size() < 2) throw DomainError("resampling needs at least 2 samples");
    const bool ascending = k[1] > k[0];
    for (std::size_t j = 1; j < k.size(); ++j) {
        if (ascending ? !(k[j] > k[j - 1]) : !(k[j] < k[j - 1])) {
            throw DomainError("source wavenumber grid is not strictly monotonic at index " + std::to_string(j));
        }
    }
    std::vector<double> x(k.begin(), k.end());
    if (!ascending) std::reverse(x.begin(), x.end());
    const auto target = uniform_k_grid(x.front(), x.back(), x.size());

    ColumnInterpolator interp(x, method);
    FringeFrame out{Matrix<double>(m.rows(), m.cols()), GridTag::k_linear};
    std::vector<double> column(m.rows());
    std::vector<double> resampled(m.rows());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        column = m.col(c);
        if (!ascending) std::reverse(column.begin(), column.end());
        interp.resample(column, target.values, resampled);
        out.samples.set_col(c, resampled);
    }
    return out;
}

BScan classic_reconstruct(const FringeFrame& raw, std::span<const double> background,
                          const WavenumberGrid& source_k, InterpMethod method, double floor_eps) {
    check_finite(raw.samples, "raw frame");
    const auto linear = resample_to_linear_k(subtract_background(raw, background), source_k, method);
    const auto windowed = apply_hann(linear);
    return BScan{truncate_conjugate(magnitude_db(idft_columns(windowed), floor_eps)), Provenance::k_resampled};
}

BScan average_bscans(std::span<const BScan> stack, std::size_t n) {
    if (n < 1) throw DomainError("average_bscans needs n >= 1");
    if (stack.size() < n) {
        throw DimensionError("average_bscans needs " + std::to_string(n) + " scans, got " +
                             std::to_string(stack.size()));
    }
    const auto& first = stack.front().intensity_db;
    Matrix<double> sum(first.rows(), first.cols());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& m = stack[i].intensity_db;
        if (!m.same_shape(first)) throw DimensionError("average_bscans shape mismatch at scan " + std::to_string(i));
        auto dst = sum.values();
        auto src = m.values();
        for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += src[e];
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : sum.values()) v *= inv;
    return BScan{std::move(sum), Provenance::ground_truth};
}

double psf_fwhm(std::span<const double> column, std::size_t peak_bin) {
    if (peak_bin >= column.size()) throw DomainError("peak bin outside the column");
    const double peak = column[peak_bin];
    if ((peak_bin > 0 && column[peak_bin - 1] > peak) ||
        (peak_bin + 1 < column.size() && column[peak_bin + 1] > peak)) {
        throw DomainError("bin " + std::to_string(peak_bin) + " is not a local maximum");
    }
    if (!(peak > 0.0)) throw DomainError("FWHM needs a positive peak");
    const double half = 0.5 * peak;

    double left = 0.0;
    bool found = false;
    for (std::size_t i = peak_bin; i-- > 0;) {
        if (column[i] <= half) {
            left = static_cast<double>(i) + (half - column[i]) / (column[i + 1] - column[i]);
            found = true;
            break;
        }
    }
    if (!found) throw DomainError("no half-maximum crossing left of the peak");

    double right = 0.0;
    found = false;
    for (std::size_t i = peak_bin + 1; i < column.size(); ++i) {
        if (column[i] <= half) {
            right = static_cast<double>(i) - (half - column[i]) / (column[i - 1] - column[i]);
            found = true;
            break;
        }
    }
    if (!found) throw DomainError("no half-maximum crossing right of the peak");
    return right - left;
}

double psf_fwhm_db(std::span<const double> column_db, std::size_t peak_bin) {
    std::vector<double> linear(column_db.size());
    for (std::size_t i = 0; i < linear.size(); ++i) linear[i] = std::pow(10.0, column_db[i] / 20.0);
    return psf_fwhm(linear, peak_bin);
}

}  // namespace ssoct
