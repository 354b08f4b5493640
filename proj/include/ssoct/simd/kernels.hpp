#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2/FMA variant. The variant is chosen once at startup from CPUID; tests
// force each path with set_isa() and compare them.

#include <cstddef>
#include <span>
#include <string_view>

namespace ssoct::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best instruction set this CPU and build support.
Isa detected_isa() noexcept;

/// Instruction set currently used by the dispatched entry points.
Isa active_isa() noexcept;

/// Overrides dispatch. Throws DomainError when `isa` is not supported here.
/// Not thread-safe; call before any concurrent work.
void set_isa(Isa isa);

// C(m x n) += A(m x k) * B(k x n), all row-major with explicit leading dimensions.
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                     const float* b, std::size_t ldb, float* c, std::size_t ldc);
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     std::size_t lda, const double* b, std::size_t ldb, double* c,
                     std::size_t ldc);

// out[j] += sum_m amplitude[m] * cos(frequency[m] * x[j] + phase[m])
//
// The argument is formed as a rounded product followed by a rounded sum in
// both variants, so the only difference between them is the cosine itself.
void accumulate_cosines(std::span<const double> x, std::span<const double> amplitude,
                        std::span<const double> frequency, std::span<const double> phase,
                        std::span<double> out);

namespace scalar {
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                     const float* b, std::size_t ldb, float* c, std::size_t ldc);
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     std::size_t lda, const double* b, std::size_t ldb, double* c,
                     std::size_t ldc);
void accumulate_cosines(std::span<const double> x, std::span<const double> amplitude,
                        std::span<const double> frequency, std::span<const double> phase,
                        std::span<double> out);
}  // namespace scalar

namespace avx2 {
bool compiled() noexcept;
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                     const float* b, std::size_t ldb, float* c, std::size_t ldc);
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     std::size_t lda, const double* b, std::size_t ldb, double* c,
                     std::size_t ldc);
void accumulate_cosines(std::span<const double> x, std::span<const double> amplitude,
                        std::span<const double> frequency, std::span<const double> phase,
                        std::span<double> out);
}  // namespace avx2

}  // namespace ssoct::simd
