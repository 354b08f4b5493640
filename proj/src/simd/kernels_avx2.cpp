#include "ssoct/simd/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace ssoct::simd::avx2 {

bool compiled() noexcept { return true; }

namespace {

constexpr std::size_t kBlockN = 512;
constexpr std::size_t kBlockK = 256;

// 4 rows x 16 columns register tile for float.
inline void tile_f32_4x16(std::size_t k, const float* a, std::size_t lda, const float* b,
                          std::size_t ldb, float* c, std::size_t ldc) {
    __m256 c00 = _mm256_loadu_ps(c), c01 = _mm256_loadu_ps(c + 8);
    __m256 c10 = _mm256_loadu_ps(c + ldc), c11 = _mm256_loadu_ps(c + ldc + 8);
    __m256 c20 = _mm256_loadu_ps(c + 2 * ldc), c21 = _mm256_loadu_ps(c + 2 * ldc + 8);
    __m256 c30 = _mm256_loadu_ps(c + 3 * ldc), c31 = _mm256_loadu_ps(c + 3 * ldc + 8);
    for (std::size_t p = 0; p < k; ++p) {
        const __m256 b0 = _mm256_loadu_ps(b + p * ldb);
        const __m256 b1 = _mm256_loadu_ps(b + p * ldb + 8);
        __m256 av = _mm256_broadcast_ss(a + p);
        c00 = _mm256_fmadd_ps(av, b0, c00);
        c01 = _mm256_fmadd_ps(av, b1, c01);
        av = _mm256_broadcast_ss(a + lda + p);
        c10 = _mm256_fmadd_ps(av, b0, c10);
        c11 = _mm256_fmadd_ps(av, b1, c11);
        av = _mm256_broadcast_ss(a + 2 * lda + p);
        c20 = _mm256_fmadd_ps(av, b0, c20);
        c21 = _mm256_fmadd_ps(av, b1, c21);
        av = _mm256_broadcast_ss(a + 3 * lda + p);
        c30 = _mm256_fmadd_ps(av, b0, c30);
        c31 = _mm256_fmadd_ps(av, b1, c31);
    }
    _mm256_storeu_ps(c, c00);
    _mm256_storeu_ps(c + 8, c01);
    _mm256_storeu_ps(c + ldc, c10);
    _mm256_storeu_ps(c + ldc + 8, c11);
    _mm256_storeu_ps(c + 2 * ldc, c20);
    _mm256_storeu_ps(c + 2 * ldc + 8, c21);
    _mm256_storeu_ps(c + 3 * ldc, c30);
    _mm256_storeu_ps(c + 3 * ldc + 8, c31);
}

// 4 rows x 8 columns register tile for double.
inline void tile_f64_4x8(std::size_t k, const double* a, std::size_t lda, const double* b,
                         std::size_t ldb, double* c, std::size_t ldc) {
    __m256d c00 = _mm256_loadu_pd(c), c01 = _mm256_loadu_pd(c + 4);
    __m256d c10 = _mm256_loadu_pd(c + ldc), c11 = _mm256_loadu_pd(c + ldc + 4);
    __m256d c20 = _mm256_loadu_pd(c + 2 * ldc), c21 = _mm256_loadu_pd(c + 2 * ldc + 4);
    __m256d c30 = _mm256_loadu_pd(c + 3 * ldc), c31 = _mm256_loadu_pd(c + 3 * ldc + 4);
    for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * ldb);
        const __m256d b1 = _mm256_loadu_pd(b + p * ldb + 4);
        __m256d av = _mm256_broadcast_sd(a + p);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(a + lda + p);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(a + 2 * lda + p);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(a + 3 * lda + p);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
    }
    _mm256_storeu_pd(c, c00);
    _mm256_storeu_pd(c + 4, c01);
    _mm256_storeu_pd(c + ldc, c10);
    _mm256_storeu_pd(c + ldc + 4, c11);
    _mm256_storeu_pd(c + 2 * ldc, c20);
    _mm256_storeu_pd(c + 2 * ldc + 4, c21);
    _mm256_storeu_pd(c + 3 * ldc, c30);
    _mm256_storeu_pd(c + 3 * ldc + 4, c31);
}

inline __m256 load_vec(const float* p) { return _mm256_loadu_ps(p); }
inline __m256d load_vec(const double* p) { return _mm256_loadu_pd(p); }
inline void store_vec(float* p, __m256 v) { _mm256_storeu_ps(p, v); }
inline void store_vec(double* p, __m256d v) { _mm256_storeu_pd(p, v); }
inline __m256 broadcast(const float* p) { return _mm256_broadcast_ss(p); }
inline __m256d broadcast(const double* p) { return _mm256_broadcast_sd(p); }
inline __m256 fmadd(__m256 a, __m256 b, __m256 c) { return _mm256_fmadd_ps(a, b, c); }
inline __m256d fmadd(__m256d a, __m256d b, __m256d c) { return _mm256_fmadd_pd(a, b, c); }

template <typename T>
constexpr std::size_t lanes = 32 / sizeof(T);

// Single row over columns [j0, j1), vectorized with a scalar tail.
template <typename T>
void row_strip(std::size_t k, const T* a, const T* b, std::size_t ldb, T* c, std::size_t n) {
    constexpr std::size_t w = lanes<T>;
    std::size_t j = 0;
    for (; j + w <= n; j += w) {
        auto acc = load_vec(c + j);
        for (std::size_t p = 0; p < k; ++p) acc = fmadd(broadcast(a + p), load_vec(b + p * ldb + j), acc);
        store_vec(c + j, acc);
    }
    for (; j < n; ++j) {
        T acc = c[j];
        for (std::size_t p = 0; p < k; ++p) acc = std::fma(a[p], b[p * ldb + j], acc);
        c[j] = acc;
    }
}

template <typename T, typename Tile>
void gemm_blocked(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
                  const T* b, std::size_t ldb, T* c, std::size_t ldc, Tile tile) {
    constexpr std::size_t tile_n = 2 * lanes<T>;
    for (std::size_t jc = 0; jc < n; jc += kBlockN) {
        const std::size_t nc = std::min(kBlockN, n - jc);
        for (std::size_t pc = 0; pc < k; pc += kBlockK) {
            const std::size_t kc = std::min(kBlockK, k - pc);
            const T* bblk = b + pc * ldb + jc;
            std::size_t i = 0;
            for (; i + 4 <= m; i += 4) {
                const T* ablk = a + i * lda + pc;
                T* cblk = c + i * ldc + jc;
                std::size_t j = 0;
                for (; j + tile_n <= nc; j += tile_n) tile(kc, ablk, lda, bblk + j, ldb, cblk + j, ldc);
                if (j < nc) {
                    for (std::size_t r = 0; r < 4; ++r) {
                        row_strip(kc, ablk + r * lda, bblk + j, ldb, cblk + r * ldc + j, nc - j);
                    }
                }
            }
            for (; i < m; ++i) row_strip(kc, a + i * lda + pc, bblk, ldb, c + i * ldc + jc, nc);
        }
    }
}

// fdlibm-derived kernels, valid for |r| <= pi/4.
constexpr double kS1 = -1.66666666666666324348e-01;
constexpr double kS2 = 8.33333333332248946124e-03;
constexpr double kS3 = -1.98412698298579493134e-04;
constexpr double kS4 = 2.75573137070700676789e-06;
constexpr double kS5 = -2.50507602534068634195e-08;
constexpr double kS6 = 1.58969099521155010221e-10;
constexpr double kC1 = 4.16666666666666019037e-02;
constexpr double kC2 = -1.38888888888741095749e-03;
constexpr double kC3 = 2.48015872894767294178e-05;
constexpr double kC4 = -2.75573143513906633035e-07;
constexpr double kC5 = 2.08757232129817482790e-09;
constexpr double kC6 = -1.13596475577881948265e-11;

// pi/2 split into three parts; the first has 33 significant bits so n*kPio2_1
// is exact for |n| < 2^20.
constexpr double kTwoOverPi = 6.36619772367581382433e-01;
constexpr double kPio2_1 = 1.57079632673412561417e+00;
constexpr double kPio2_2 = 6.07710050630396597660e-11;
constexpr double kPio2_3 = 2.02226624871116645580e-21;
constexpr double kReductionLimit = 1.0e6;

inline __m256d poly_sin(__m256d r) {
    const __m256d z = _mm256_mul_pd(r, r);
    __m256d p = _mm256_set1_pd(kS6);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(kS5));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(kS4));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(kS3));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(kS2));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(kS1));
    const __m256d r3 = _mm256_mul_pd(z, r);
    return _mm256_fmadd_pd(r3, p, r);
}

inline __m256d poly_cos(__m256d r) {
    const __m256d z = _mm256_mul_pd(r, r);
    __m256d p = _mm256_set1_pd(kC6);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(kC5));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(kC4));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(kC3));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(kC2));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(kC1));
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d hz = _mm256_mul_pd(_mm256_set1_pd(0.5), z);
    const __m256d w = _mm256_sub_pd(one, hz);
    // w + (((1 - w) - hz) + z*z*p)
    const __m256d corr = _mm256_sub_pd(_mm256_sub_pd(one, w), hz);
    return _mm256_add_pd(w, _mm256_fmadd_pd(_mm256_mul_pd(z, z), p, corr));
}

inline __m256d vcos(__m256d x) {
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kPio2_1), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kPio2_2), r);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kPio2_3), r);

    // quadrant q = n mod 4: cos, -sin, -cos, sin
    const __m128i q32 = _mm256_cvtpd_epi32(n);
    const __m256i q = _mm256_cvtepi32_epi64(_mm_and_si128(q32, _mm_set1_epi32(3)));
    const __m256d s = poly_sin(r);
    const __m256d c = poly_cos(r);
    const __m256i odd = _mm256_and_si256(q, _mm256_set1_epi64x(1));
    const __m256d use_sin = _mm256_castsi256_pd(_mm256_cmpeq_epi64(odd, _mm256_set1_epi64x(1)));
    __m256d v = _mm256_blendv_pd(c, s, use_sin);
    // negate for q == 1 or q == 2, i.e. ((q + 1) & 2) != 0
    const __m256i neg = _mm256_and_si256(_mm256_add_epi64(q, _mm256_set1_epi64x(1)),
                                         _mm256_set1_epi64x(2));
    const __m256d sign = _mm256_castsi256_pd(_mm256_slli_epi64(neg, 62));
    return _mm256_xor_pd(v, sign);
}

}  // namespace

void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                     const float* b, std::size_t ldb, float* c, std::size_t ldc) {
    gemm_blocked(m, n, k, a, lda, b, ldb, c, ldc, tile_f32_4x16);
}

void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     std::size_t lda, const double* b, std::size_t ldb, double* c,
                     std::size_t ldc) {
    gemm_blocked(m, n, k, a, lda, b, ldb, c, ldc, tile_f64_4x8);
}

void accumulate_cosines(std::span<const double> x, std::span<const double> amplitude,
                        std::span<const double> frequency, std::span<const double> phase,
                        std::span<double> out) {
    const std::size_t n = x.size();
    double x_max = 0.0;
    for (const double v : x) x_max = std::max(x_max, std::abs(v));
    for (std::size_t r = 0; r < amplitude.size(); ++r) {
        if (std::abs(frequency[r]) * x_max + std::abs(phase[r]) > kReductionLimit) {
            for (std::size_t j = 0; j < n; ++j) {
                const double arg = frequency[r] * x[j];
                out[j] += amplitude[r] * std::cos(arg + phase[r]);
            }
            continue;
        }
        const __m256d amp = _mm256_set1_pd(amplitude[r]);
        const __m256d freq = _mm256_set1_pd(frequency[r]);
        const __m256d ph = _mm256_set1_pd(phase[r]);
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            const __m256d arg = _mm256_add_pd(_mm256_mul_pd(freq, _mm256_loadu_pd(x.data() + j)), ph);
            const __m256d term = _mm256_mul_pd(amp, vcos(arg));
            _mm256_storeu_pd(out.data() + j, _mm256_add_pd(_mm256_loadu_pd(out.data() + j), term));
        }
        if (j < n) {
            alignas(32) double xs[4] = {0, 0, 0, 0};
            alignas(32) double cs[4];
            for (std::size_t t = j; t < n; ++t) xs[t - j] = x[t];
            const __m256d arg = _mm256_add_pd(_mm256_mul_pd(freq, _mm256_load_pd(xs)), ph);
            _mm256_store_pd(cs, _mm256_mul_pd(amp, vcos(arg)));
            for (std::size_t t = j; t < n; ++t) out[t] += cs[t - j];
        }
    }
}

}  // namespace ssoct::simd::avx2

#else

#include "ssoct/error.hpp"

namespace ssoct::simd::avx2 {

bool compiled() noexcept { return false; }

void gemm_accumulate(std::size_t, std::size_t, std::size_t, const float*, std::size_t,
                     const float*, std::size_t, float*, std::size_t) {
    throw DomainError("AVX2 kernels not compiled into this build");
}
void gemm_accumulate(std::size_t, std::size_t, std::size_t, const double*, std::size_t,
                     const double*, std::size_t, double*, std::size_t) {
    throw DomainError("AVX2 kernels not compiled into this build");
}
void accumulate_cosines(std::span<const double>, std::span<const double>,
                        std::span<const double>, std::span<const double>, std::span<double>) {
    throw DomainError("AVX2 kernels not compiled into this build");
}

}  // namespace ssoct::simd::avx2

#endif
