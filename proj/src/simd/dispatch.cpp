#include <atomic>

#include "ssoct/error.hpp"
#include "ssoct/simd/kernels.hpp"

namespace ssoct::simd {

namespace {

bool cpu_has_avx2_fma() noexcept {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detected_isa()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

Isa detected_isa() noexcept {
    static const Isa isa = (avx2::compiled() && cpu_has_avx2_fma()) ? Isa::avx2 : Isa::scalar;
    return isa;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (isa == Isa::avx2 && detected_isa() != Isa::avx2) {
        throw DomainError("AVX2/FMA not available on this CPU or build");
    }
    current().store(isa, std::memory_order_relaxed);
}

void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                     const float* b, std::size_t ldb, float* c, std::size_t ldc) {
    if (active_isa() == Isa::avx2) {
        avx2::gemm_accumulate(m, n, k, a, lda, b, ldb, c, ldc);
    } else {
        scalar::gemm_accumulate(m, n, k, a, lda, b, ldb, c, ldc);
    }
}

void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     std::size_t lda, const double* b, std::size_t ldb, double* c,
                     std::size_t ldc) {
    if (active_isa() == Isa::avx2) {
        avx2::gemm_accumulate(m, n, k, a, lda, b, ldb, c, ldc);
    } else {
        scalar::gemm_accumulate(m, n, k, a, lda, b, ldb, c, ldc);
    }
}

void accumulate_cosines(std::span<const double> x, std::span<const double> amplitude,
                        std::span<const double> frequency, std::span<const double> phase,
                        std::span<double> out) {
    if (amplitude.size() != frequency.size() || amplitude.size() != phase.size()) {
        throw DimensionError("cosine term arrays differ in length");
    }
    if (x.size() != out.size()) throw DimensionError("cosine abscissa and output differ in length");
    if (active_isa() == Isa::avx2) {
        avx2::accumulate_cosines(x, amplitude, frequency, phase, out);
    } else {
        scalar::accumulate_cosines(x, amplitude, frequency, phase, out);
    }
}

}  // namespace ssoct::simd
