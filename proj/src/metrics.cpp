#include "ssoct/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "ssoct/error.hpp"

namespace ssoct {

namespace {

void require_same_shape(const Matrix<double>& a, const Matrix<double>& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    }
    if (a.empty()) throw DimensionError(std::string(what) + ": empty images");
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
    std::vector<double> w(size);
    const double center = (static_cast<double>(size) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        const double d = static_cast<double>(i) - center;
        w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        total += w[i];
    }
    for (auto& v : w) v /= total;
    return w;
}

}  // namespace

Matrix<std::uint8_t> display_map(const Matrix<double>& db, double db_lo, double db_hi) {
    if (!(db_hi > db_lo)) {
        throw DomainError("display window needs db_hi > db_lo, got [" + std::to_string(db_lo) + ", " +
                          std::to_string(db_hi) + "]");
    }
    Matrix<std::uint8_t> out(db.rows(), db.cols());
    const double scale = 255.0 / (db_hi - db_lo);
    auto dst = out.values();
    const auto src = db.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double v = std::clamp((src[i] - db_lo) * scale, 0.0, 255.0);
        dst[i] = static_cast<std::uint8_t>(std::round(v));
    }
    return out;
}

Matrix<double> unit_scale(const Matrix<std::uint8_t>& image) {
    Matrix<double> out(image.rows(), image.cols());
    auto dst = out.values();
    const auto src = image.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<double>(src[i]) / 255.0;
    return out;
}

Matrix<double> display_unit(const Matrix<double>& db, double reference_db, double range_db) {
    return unit_scale(display_map(db, reference_db - range_db, reference_db));
}

double mse(const Matrix<double>& a, const Matrix<double>& b) {
    require_same_shape(a, b, "mse");
    const auto x = a.values();
    const auto y = b.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
    return acc / static_cast<double>(x.size());
}

double psnr(const Matrix<double>& a, const Matrix<double>& b, double max_value) {
    const double m = mse(a, b);
    if (m == 0.0) return kInfinitePsnr;
    return 10.0 * std::log10(max_value * max_value / m);
}

double ssim(const Matrix<double>& a, const Matrix<double>& b, const SsimOptions& o) {
    require_same_shape(a, b, "ssim");
    if (o.window == 0 || a.rows() < o.window || a.cols() < o.window) {
        throw DomainError("ssim window " + std::to_string(o.window) + " does not fit a " + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()) + " image");
    }
    const auto g = gaussian_window(o.window, o.sigma);
    const double c1 = (o.k1 * o.dynamic_range) * (o.k1 * o.dynamic_range);
    const double c2 = (o.k2 * o.dynamic_range) * (o.k2 * o.dynamic_range);
    const std::size_t out_rows = a.rows() - o.window + 1;
    const std::size_t out_cols = a.cols() - o.window + 1;
    double total = 0.0;
    for (std::size_t r = 0; r < out_rows; ++r) {
        for (std::size_t c = 0; c < out_cols; ++c) {
            // Centered second pass: E[x^2] - m^2 loses the variance of flat windows.
            double mx = 0.0, my = 0.0;
            for (std::size_t i = 0; i < o.window; ++i) {
                for (std::size_t j = 0; j < o.window; ++j) {
                    const double w = g[i] * g[j];
                    mx += w * a(r + i, c + j);
                    my += w * b(r + i, c + j);
                }
            }
            double vx = 0.0, vy = 0.0, cxy = 0.0;
            for (std::size_t i = 0; i < o.window; ++i) {
                for (std::size_t j = 0; j < o.window; ++j) {
                    const double w = g[i] * g[j];
                    const double dx = a(r + i, c + j) - mx;
                    const double dy = b(r + i, c + j) - my;
                    vx += w * dx * dx;
                    vy += w * dy * dy;
                    cxy += w * dx * dy;
                }
            }
            total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    return total / static_cast<double>(out_rows * out_cols);
}

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::input:
            return "input";
        case Variant::classic:
            return "classic";
        case Variant::network:
            return "network";
    }
    return "unknown";
}

EvaluationReport evaluate(std::span<const EvaluationSample> samples, const MetricsConfig& config) {
    if (samples.empty()) throw UsageError("evaluate: no samples");
    EvaluationReport report;
    for (std::size_t v = 0; v < kVariants.size(); ++v) report.means[v].variant = kVariants[v];
    for (const auto& s : samples) {
        const auto truth = display_unit(s.ground_truth_db, s.reference_db, config.range_db);
        for (std::size_t v = 0; v < kVariants.size(); ++v) {
            const Matrix<double>* image = nullptr;
            switch (kVariants[v]) {
                case Variant::input:
                    image = &s.input_db;
                    break;
                case Variant::classic:
                    image = &s.classic_db;
                    break;
                case Variant::network:
                    image = &s.network_db;
                    break;
            }
            if (image->empty()) {
                throw UsageError("evaluate: sample " + s.id + " lacks the " + std::string(variant_name(kVariants[v])) +
                                 " image");
            }
            const auto mapped = display_unit(*image, s.reference_db, config.range_db);
            MetricsRecord rec{s.id, kVariants[v], psnr(mapped, truth), ssim(mapped, truth, config.ssim),
                              mse(mapped, truth)};
            auto& m = report.means[v];
            m.count += 1;
            m.psnr_db += rec.psnr_db;
            m.ssim += rec.ssim;
            m.mse += rec.mse;
            report.records.push_back(std::move(rec));
        }
    }
    for (auto& m : report.means) {
        const auto n = static_cast<double>(m.count);
        m.psnr_db /= n;
        m.ssim /= n;
        m.mse /= n;
    }
    return report;
}

std::string format_metric(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string metrics_csv(std::span<const MetricsRecord> records) {
    std::string out = "sample,variant,psnr_db,ssim,mse\n";
    for (const auto& r : records) {
        out += r.sample + "," + std::string(variant_name(r.variant)) + "," + format_metric(r.psnr_db) + "," +
               format_metric(r.ssim) + "," + format_metric(r.mse) + "\n";
    }
    return out;
}

std::string means_csv(std::span<const VariantMeans> means) {
    std::string out = "variant,count,psnr_db,ssim,mse\n";
    for (const auto& m : means) {
        out += std::string(variant_name(m.variant)) + "," + std::to_string(m.count) + "," + format_metric(m.psnr_db) +
               "," + format_metric(m.ssim) + "," + format_metric(m.mse) + "\n";
    }
    return out;
}

}  // namespace ssoct
