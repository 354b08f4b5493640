#include "ssoct/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "ssoct/error.hpp"

namespace ssoct {

namespace {

// The FFTW planner is not re-entrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class BackwardPlan {
public:
    explicit BackwardPlan(std::size_t n) : n_(n) {
        std::lock_guard lock(planner_mutex());
        in_ = fftw_alloc_complex(n);
        out_ = fftw_alloc_complex(n);
        if (in_ == nullptr || out_ == nullptr) throw Error("FFTW buffer allocation failed");
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (plan_ == nullptr) throw Error("FFTW plan creation failed for length " + std::to_string(n));
    }
    ~BackwardPlan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(in_);
        fftw_free(out_);
    }
    BackwardPlan(const BackwardPlan&) = delete;
    BackwardPlan& operator=(const BackwardPlan&) = delete;

    std::complex<double>* input() { return reinterpret_cast<std::complex<double>*>(in_); }

    std::vector<std::complex<double>> run() {
        fftw_execute(plan_);
        std::vector<std::complex<double>> out(n_);
        const double scale = 1.0 / static_cast<double>(n_);
        const auto* o = reinterpret_cast<const std::complex<double>*>(out_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = o[i] * scale;
        return out;
    }

private:
    std::size_t n_;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

BackwardPlan& plan_for(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<BackwardPlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<BackwardPlan>(n);
    return *slot;
}

}  // namespace

std::vector<std::complex<double>> inverse_dft(std::span<const std::complex<double>> input) {
    if (input.empty()) throw DimensionError("inverse DFT of an empty sequence");
    auto& plan = plan_for(input.size());
    std::copy(input.begin(), input.end(), plan.input());
    return plan.run();
}

std::vector<std::complex<double>> inverse_dft(std::span<const double> real_input) {
    if (real_input.empty()) throw DimensionError("inverse DFT of an empty sequence");
    auto& plan = plan_for(real_input.size());
    auto* in = plan.input();
    for (std::size_t i = 0; i < real_input.size(); ++i) in[i] = {real_input[i], 0.0};
    return plan.run();
}

}  // namespace ssoct
