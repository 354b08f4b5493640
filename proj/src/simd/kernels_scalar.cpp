#include <cmath>

#include "ssoct/simd/kernels.hpp"

namespace ssoct::simd::scalar {

namespace {

template <typename T>
void gemm_impl(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
               const T* b, std::size_t ldb, T* c, std::size_t ldc) {
    for (std::size_t i = 0; i < m; ++i) {
        T* crow = c + i * ldc;
        for (std::size_t p = 0; p < k; ++p) {
            const T aip = a[i * lda + p];
            const T* brow = b + p * ldb;
            for (std::size_t j = 0; j < n; ++j) {
                const T prod = aip * brow[j];
                crow[j] = crow[j] + prod;
            }
        }
    }
}

}  // namespace

void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                     const float* b, std::size_t ldb, float* c, std::size_t ldc) {
    gemm_impl(m, n, k, a, lda, b, ldb, c, ldc);
}

void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     std::size_t lda, const double* b, std::size_t ldb, double* c,
                     std::size_t ldc) {
    gemm_impl(m, n, k, a, lda, b, ldb, c, ldc);
}

void accumulate_cosines(std::span<const double> x, std::span<const double> amplitude,
                        std::span<const double> frequency, std::span<const double> phase,
                        std::span<double> out) {
    for (std::size_t r = 0; r < amplitude.size(); ++r) {
        const double amp = amplitude[r];
        const double freq = frequency[r];
        const double ph = phase[r];
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double arg = freq * x[j];
            out[j] += amp * std::cos(arg + ph);
        }
    }
}

}  // namespace ssoct::simd::scalar
