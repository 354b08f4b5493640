#include "ssoct/patches.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ssoct/error.hpp"

namespace ssoct {

std::vector<double> ws_grid(double k_lo, double k_hi, std::size_t n_rows, WsMode mode) {
    if (!(k_lo > 0.0 && k_hi > k_lo)) throw DomainError("ws_grid needs 0 < k_lo < k_hi");
    if (n_rows < 2) throw DomainError("ws_grid needs at least 2 rows");
    std::vector<double> ws(n_rows);
    const double last = static_cast<double>(n_rows - 1);
    if (mode == WsMode::uniform) {
        for (std::size_t j = 0; j < n_rows; ++j) ws[j] = k_lo + (k_hi - k_lo) * static_cast<double>(j) / last;
        ws.back() = k_hi;
        return ws;
    }
    const double two_pi = 2.0 * std::numbers::pi;
    const double lambda_lo = two_pi / k_hi;
    const double lambda_hi = two_pi / k_lo;
    for (std::size_t j = 0; j < n_rows; ++j) {
        const double lambda = lambda_lo + (lambda_hi - lambda_lo) * static_cast<double>(j) / last;
        ws[j] = two_pi / lambda;
    }
    ws.front() = k_hi;
    ws.back() = k_lo;
    return ws;
}

PatchPlanes interleave_wavenumber_channel(const Matrix<double>& image, std::span<const double> ws, double k_lo,
                                          double k_hi) {
    if (ws.size() != image.rows()) {
        throw DimensionError("wavenumber grid length " + std::to_string(ws.size()) + " does not match image height " +
                             std::to_string(image.rows()));
    }
    if (!(k_hi > k_lo)) throw DomainError("wavenumber normalization needs k_hi > k_lo");
    PatchPlanes out{image, Matrix<double>(image.rows(), image.cols())};
    for (std::size_t r = 0; r < image.rows(); ++r) {
        const double v = (ws[r] - k_lo) / (k_hi - k_lo);
        for (auto& e : out.wavenumber.row(r)) e = v;
    }
    return out;
}

std::vector<Matrix<double>> split_rows(const Matrix<double>& m, std::size_t parts) {
    if (parts == 0 || m.rows() % parts != 0) {
        throw DimensionError("height " + std::to_string(m.rows()) + " is not divisible into " + std::to_string(parts) +
                             " bands");
    }
    const std::size_t band = m.rows() / parts;
    std::vector<Matrix<double>> out;
    out.reserve(parts);
    for (std::size_t p = 0; p < parts; ++p) {
        const auto begin = m.values().begin() + static_cast<std::ptrdiff_t>(p * band * m.cols());
        out.emplace_back(band, m.cols(), std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(band * m.cols())));
    }
    return out;
}

Matrix<double> merge_rows(std::span<const Matrix<double>> parts) {
    if (parts.empty()) throw DimensionError("merge of zero bands");
    const std::size_t cols = parts.front().cols();
    std::vector<double> data;
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.cols() != cols || p.rows() != parts.front().rows()) throw DimensionError("merge of unequal bands");
        data.insert(data.end(), p.values().begin(), p.values().end());
        rows += p.rows();
    }
    return Matrix<double>(rows, cols, std::move(data));
}

std::array<PatchPlanes, kPatchesPerImage> split_patches(const PatchPlanes& planes) {
    if (!planes.image.same_shape(planes.wavenumber)) throw DimensionError("patch channels differ in shape");
    auto image = split_rows(planes.image);
    auto ws = split_rows(planes.wavenumber);
    std::array<PatchPlanes, kPatchesPerImage> out;
    for (std::size_t i = 0; i < kPatchesPerImage; ++i) out[i] = {std::move(image[i]), std::move(ws[i])};
    return out;
}

PatchPlanes merge_patches(std::span<const PatchPlanes> patches) {
    std::vector<Matrix<double>> image, ws;
    for (const auto& p : patches) {
        image.push_back(p.image);
        ws.push_back(p.wavenumber);
    }
    return {merge_rows(image), merge_rows(ws)};
}

Standardized standardize(const PatchPlanes& patch, double eps) {
    const auto values = patch.image.values();
    if (values.empty()) return {patch, 0.0, 0.0};
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (const double v : values) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(values.size()));
    Standardized out{patch, mean, sd};
    for (auto& v : out.patch.image.values()) v = (v - mean) / (sd + eps);
    return out;
}

template <typename T>
nn::Tensor<T> patches_to_tensor(std::span<const PatchPlanes> patches) {
    if (patches.empty()) throw DimensionError("empty patch batch");
    const std::size_t h = patches.front().height();
    const std::size_t w = patches.front().width();
    std::vector<T> data;
    data.reserve(patches.size() * 2 * h * w);
    for (const auto& p : patches) {
        if (p.height() != h || p.width() != w || !p.image.same_shape(p.wavenumber)) {
            throw DimensionError("patch batch has mixed shapes");
        }
        for (const double v : p.image.values()) data.push_back(static_cast<T>(v));
        for (const double v : p.wavenumber.values()) data.push_back(static_cast<T>(v));
    }
    return nn::Tensor<T>({patches.size(), 2, h, w}, std::move(data));
}

template <typename T>
nn::Tensor<T> images_to_tensor(std::span<const Matrix<double>> images) {
    if (images.empty()) throw DimensionError("empty image batch");
    const std::size_t h = images.front().rows();
    const std::size_t w = images.front().cols();
    std::vector<T> data;
    data.reserve(images.size() * h * w);
    for (const auto& m : images) {
        if (m.rows() != h || m.cols() != w) throw DimensionError("image batch has mixed shapes");
        for (const double v : m.values()) data.push_back(static_cast<T>(v));
    }
    return nn::Tensor<T>({images.size(), 1, h, w}, std::move(data));
}

template <typename T>
Matrix<double> tensor_image(const nn::Tensor<T>& t, std::size_t b) {
    if (t.rank() != 4 || b >= t.dim(0)) throw DimensionError("tensor_image index out of range");
    const std::size_t h = t.dim(2);
    const std::size_t w = t.dim(3);
    const std::size_t offset = b * t.dim(1) * h * w;
    std::vector<double> data(h * w);
    for (std::size_t i = 0; i < h * w; ++i) data[i] = static_cast<double>(t.data()[offset + i]);
    return Matrix<double>(h, w, std::move(data));
}

template nn::Tensor<float> patches_to_tensor<float>(std::span<const PatchPlanes>);
template nn::Tensor<double> patches_to_tensor<double>(std::span<const PatchPlanes>);
template nn::Tensor<float> images_to_tensor<float>(std::span<const Matrix<double>>);
template nn::Tensor<double> images_to_tensor<double>(std::span<const Matrix<double>>);
template Matrix<double> tensor_image(const nn::Tensor<float>&, std::size_t);
template Matrix<double> tensor_image(const nn::Tensor<double>&, std::size_t);

}  // namespace ssoct
