#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "ssoct/nn/ops.hpp"

namespace ssoct::oracle {

/// O(N^2) inverse DFT, out[p] = (1/N) sum_j in[j] exp(+i 2 pi j p / N).
/// Phases are reduced as integers into a long double twiddle table so the
/// oracle keeps full accuracy at large N.
inline std::vector<std::complex<double>> direct_idft(std::span<const double> in) {
    const std::size_t n = in.size();
    std::vector<long double> cos_t(n), sin_t(n);
    for (std::size_t m = 0; m < n; ++m) {
        const long double angle =
            2.0L * std::numbers::pi_v<long double> * static_cast<long double>(m) / static_cast<long double>(n);
        cos_t[m] = std::cos(angle);
        sin_t[m] = std::sin(angle);
    }
    std::vector<std::complex<double>> out(n);
    for (std::size_t p = 0; p < n; ++p) {
        long double re = 0.0L, im = 0.0L;
        std::size_t m = 0;  // (j * p) mod n
        for (std::size_t j = 0; j < n; ++j) {
            re += static_cast<long double>(in[j]) * cos_t[m];
            im += static_cast<long double>(in[j]) * sin_t[m];
            m += p;
            if (m >= n) m -= n;
        }
        out[p] = {static_cast<double>(re / n), static_cast<double>(im / n)};
    }
    return out;
}

inline double max_relative_error(std::span<const std::complex<double>> got,
                                 std::span<const std::complex<double>> want) {
    double scale = 0.0;
    for (const auto& w : want) scale = std::max(scale, std::abs(w));
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    return scale > 0.0 ? worst / scale : worst;
}

inline std::vector<double> random_normal(std::size_t n, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> dist(0.0, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

/// Relative error with a floor so tiny gradients are compared absolutely.
inline double gradient_error(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheckResult {
    double max_error = 0.0;
    std::size_t checked = 0;
};

/// Central finite differences of `loss` with respect to the given leaves.
/// `loss` must rebuild its graph on every call. Each leaf is probed at
/// `per_tensor` random positions (all positions when 0).
inline GradCheckResult gradient_check(const std::function<nn::Tensor<double>()>& loss,
                                      std::vector<nn::Tensor<double>> leaves, std::mt19937_64& rng,
                                      double h = 1e-6, std::size_t per_tensor = 0) {
    for (auto& leaf : leaves) leaf.zero_grad();
    loss().backward();
    std::vector<std::vector<double>> analytic;
    for (const auto& leaf : leaves) {
        const auto g = leaf.grad();
        analytic.emplace_back(g.begin(), g.end());
        if (analytic.back().empty()) analytic.back().assign(leaf.numel(), 0.0);
    }
    GradCheckResult result;
    for (std::size_t t = 0; t < leaves.size(); ++t) {
        auto values = leaves[t].data();
        std::vector<std::size_t> positions;
        if (per_tensor == 0 || per_tensor >= values.size()) {
            for (std::size_t i = 0; i < values.size(); ++i) positions.push_back(i);
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
            for (std::size_t i = 0; i < per_tensor; ++i) positions.push_back(pick(rng));
        }
        for (const std::size_t i : positions) {
            const double saved = values[i];
            values[i] = saved + h;
            const double up = loss().item();
            values[i] = saved - h;
            const double down = loss().item();
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            result.max_error = std::max(result.max_error, gradient_error(analytic[t][i], numeric));
            ++result.checked;
        }
    }
    return result;
}

/// sum(out * weights): a scalar whose gradient exercises every output element
/// with a distinct coefficient.
inline nn::Tensor<double> weighted_sum(const nn::Tensor<double>& out, const std::vector<double>& weights) {
    return nn::sum(nn::mul(out, nn::Tensor<double>(out.shape(), weights)));
}

}  // namespace ssoct::oracle
