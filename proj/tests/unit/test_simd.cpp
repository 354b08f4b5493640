#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ssoct/simd/kernels.hpp"

namespace simd = ssoct::simd;

namespace {

template <typename T>
std::vector<T> random_values(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(dist(rng));
    return v;
}

template <typename T>
void check_gemm(std::size_t m, std::size_t n, std::size_t k, double tol) {
    std::mt19937_64 rng(m * 1000003 + n * 1009 + k);
    const auto a = random_values<T>(m * k, rng);
    const auto b = random_values<T>(k * n, rng);
    const auto c0 = random_values<T>(m * n, rng);
    auto ref = c0;
    auto fast = c0;
    simd::scalar::gemm_accumulate(m, n, k, a.data(), k, b.data(), n, ref.data(), n);
    simd::avx2::gemm_accumulate(m, n, k, a.data(), k, b.data(), n, fast.data(), n);
    for (std::size_t i = 0; i < m * n; ++i) {
        ASSERT_NEAR(static_cast<double>(fast[i]), static_cast<double>(ref[i]), tol * std::sqrt(static_cast<double>(k)))
            << "m=" << m << " n=" << n << " k=" << k << " i=" << i;
    }
}

bool avx2_usable() { return simd::avx2::compiled() && simd::detected_isa() == simd::Isa::avx2; }

}  // namespace

TEST(SimdGemm, ScalarMatchesNaiveTripleLoop) {
    std::mt19937_64 rng(7);
    const std::size_t m = 5, n = 7, k = 3;
    const auto a = random_values<double>(m * k, rng);
    const auto b = random_values<double>(k * n, rng);
    std::vector<double> c(m * n, 1.0);
    simd::scalar::gemm_accumulate(m, n, k, a.data(), k, b.data(), n, c.data(), n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double want = 1.0;
            for (std::size_t p = 0; p < k; ++p) want += a[i * k + p] * b[p * n + j];
            EXPECT_NEAR(c[i * n + j], want, 1e-14);
        }
    }
}

TEST(SimdGemm, Avx2MatchesScalarDouble) {
    if (!avx2_usable()) GTEST_SKIP() << "AVX2 not available";
    for (const auto& [m, n, k] : {std::tuple{1, 1, 1}, {3, 5, 7}, {4, 8, 8}, {17, 33, 9}, {64, 1030, 300}, {5, 600, 270}}) {
        check_gemm<double>(m, n, k, 1e-14);
    }
}

TEST(SimdGemm, Avx2MatchesScalarFloat) {
    if (!avx2_usable()) GTEST_SKIP() << "AVX2 not available";
    for (const auto& [m, n, k] : {std::tuple{1, 1, 1}, {3, 5, 7}, {4, 16, 8}, {19, 47, 13}, {32, 1100, 288}}) {
        check_gemm<float>(m, n, k, 2e-6);
    }
}

TEST(SimdGemm, StridedOperands) {
    if (!avx2_usable()) GTEST_SKIP() << "AVX2 not available";
    std::mt19937_64 rng(11);
    const std::size_t m = 6, n = 21, k = 10, lda = 13, ldb = 25, ldc = 30;
    const auto a = random_values<double>(m * lda, rng);
    const auto b = random_values<double>(k * ldb, rng);
    const auto c0 = random_values<double>(m * ldc, rng);
    auto ref = c0, fast = c0;
    simd::scalar::gemm_accumulate(m, n, k, a.data(), lda, b.data(), ldb, ref.data(), ldc);
    simd::avx2::gemm_accumulate(m, n, k, a.data(), lda, b.data(), ldb, fast.data(), ldc);
    for (std::size_t i = 0; i < m * ldc; ++i) EXPECT_NEAR(fast[i], ref[i], 1e-13);
}

TEST(SimdCosines, Avx2MatchesScalar) {
    if (!avx2_usable()) GTEST_SKIP() << "AVX2 not available";
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> kdist(4.6e6, 5.0e6);
    for (const std::size_t len : {1u, 3u, 4u, 5u, 255u, 2304u}) {
        std::vector<double> x(len);
        for (auto& v : x) v = kdist(rng);
        const std::vector<double> amp{0.3, 1e-3, 2.0};
        const std::vector<double> freq{2.0 * 1e-4, 2.0 * 7.7e-4, 2.0 * 3e-6};
        const std::vector<double> phase{0.0, 1.3, -2.9};
        std::vector<double> ref(len, 0.5), fast(len, 0.5);
        simd::scalar::accumulate_cosines(x, amp, freq, phase, ref);
        simd::avx2::accumulate_cosines(x, amp, freq, phase, fast);
        for (std::size_t j = 0; j < len; ++j) EXPECT_NEAR(fast[j], ref[j], 1e-12) << "len=" << len << " j=" << j;
    }
}

TEST(SimdCosines, LargeArgumentsFallBackAccurately) {
    if (!avx2_usable()) GTEST_SKIP() << "AVX2 not available";
    const std::vector<double> x{1e9, 2e9, 3e9, 4e9, 5e9};
    const std::vector<double> amp{1.0}, freq{3.0}, phase{0.1};
    std::vector<double> ref(x.size()), fast(x.size());
    simd::scalar::accumulate_cosines(x, amp, freq, phase, ref);
    simd::avx2::accumulate_cosines(x, amp, freq, phase, fast);
    for (std::size_t j = 0; j < x.size(); ++j) EXPECT_NEAR(fast[j], ref[j], 1e-9);
}

TEST(SimdDispatch, SetIsaRoundTrip) {
    const auto original = simd::active_isa();
    simd::set_isa(simd::Isa::scalar);
    EXPECT_EQ(simd::active_isa(), simd::Isa::scalar);
    if (avx2_usable()) {
        simd::set_isa(simd::Isa::avx2);
        EXPECT_EQ(simd::active_isa(), simd::Isa::avx2);
    }
    simd::set_isa(original);
}

TEST(SimdDispatch, MismatchedCosineSpansRejected) {
    std::vector<double> x(4), out(3), a(1), f(1), p(1);
    EXPECT_ANY_THROW(simd::accumulate_cosines(x, a, f, p, out));
}
