#include "ssoct/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ssoct/error.hpp"
#include "ssoct/simd/kernels.hpp"

namespace ssoct::nn {

namespace {

struct Dims4 {
    std::size_t n, c, h, w;
};

template <typename T>
Dims4 dims4(const Tensor<T>& t, const char* op) {
    if (!t.defined() || t.rank() != 4) {
        throw DimensionError(std::string(op) + " expects a 4-D tensor, got " +
                             (t.defined() ? shape_string(t.shape()) : std::string("undefined")));
    }
    return {t.dim(0), t.dim(1), t.dim(2), t.dim(3)};
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + " shape mismatch: " + shape_string(a.shape()) + " vs " +
                             shape_string(b.shape()));
    }
}

struct ConvGeometry {
    std::size_t c, h, w, kh, kw, stride, pad, oh, ow;
    std::size_t k() const { return c * kh * kw; }
    std::size_t p() const { return oh * ow; }
};

// Output columns [lo, hi) read inside the input for kernel offset `kj`.
inline std::pair<std::size_t, std::size_t> valid_columns(const ConvGeometry& g, std::size_t kj) {
    std::size_t lo = 0;
    while (lo < g.ow && lo * g.stride + kj < g.pad) ++lo;
    std::size_t hi = lo;
    while (hi < g.ow && hi * g.stride + kj < g.pad + g.w) ++hi;
    return {lo, hi};
}

// Writes the k x p patch matrix of one sample into `col` with row stride `ld`.
template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* col, std::size_t ld) {
    for (std::size_t c = 0; c < g.c; ++c) {
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
            for (std::size_t kj = 0; kj < g.kw; ++kj) {
                const auto [lo, hi] = valid_columns(g, kj);
                T* dst = col + ((c * g.kh + ki) * g.kw + kj) * ld;
                for (std::size_t oy = 0; oy < g.oh; ++oy) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) -
                                              static_cast<std::ptrdiff_t>(g.pad);
                    T* drow = dst + oy * g.ow;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) {
                        std::fill(drow, drow + g.ow, T{});
                        continue;
                    }
                    const T* srow = x + (c * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::ptrdiff_t>(kj) - static_cast<std::ptrdiff_t>(g.pad);
                    std::fill(drow, drow + lo, T{});
                    if (g.stride == 1) {
                        std::copy(srow + lo, srow + hi, drow + lo);
                    } else {
                        for (std::size_t ox = lo; ox < hi; ++ox) drow[ox] = srow[ox * g.stride];
                    }
                    std::fill(drow + hi, drow + g.ow, T{});
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, T* dx, std::size_t ld) {
    for (std::size_t c = 0; c < g.c; ++c) {
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
            for (std::size_t kj = 0; kj < g.kw; ++kj) {
                const auto [lo, hi] = valid_columns(g, kj);
                const T* src = col + ((c * g.kh + ki) * g.kw + kj) * ld;
                for (std::size_t oy = 0; oy < g.oh; ++oy) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) -
                                              static_cast<std::ptrdiff_t>(g.pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
                    T* drow = dx + (c * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::ptrdiff_t>(kj) - static_cast<std::ptrdiff_t>(g.pad);
                    const T* srow = src + oy * g.ow;
                    for (std::size_t ox = lo; ox < hi; ++ox) drow[ox * g.stride] += srow[ox];
                }
            }
        }
    }
}

template <typename T>
void transpose(const T* src, std::size_t rows, std::size_t cols, T* dst) {
    constexpr std::size_t kTile = 32;
    for (std::size_t r0 = 0; r0 < rows; r0 += kTile) {
        const std::size_t r1 = std::min(rows, r0 + kTile);
        for (std::size_t c0 = 0; c0 < cols; c0 += kTile) {
            const std::size_t c1 = std::min(cols, c0 + kTile);
            for (std::size_t r = r0; r < r1; ++r) {
                for (std::size_t c = c0; c < c1; ++c) dst[c * rows + r] = src[r * cols + c];
            }
        }
    }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, Conv2dOptions opts) {
    const auto xd = dims4(x, "conv2d input");
    const auto wd = dims4(weight, "conv2d weight");
    if (wd.c != xd.c) {
        throw DimensionError("conv2d weight expects " + std::to_string(wd.c) + " input channels, got " +
                             std::to_string(xd.c));
    }
    if (bias.defined() && bias.numel() != wd.n) {
        throw DimensionError("conv2d bias length " + std::to_string(bias.numel()) + " != out channels " +
                             std::to_string(wd.n));
    }
    if (opts.stride < 1) throw DimensionError("conv2d stride must be >= 1");
    if (xd.h + 2 * opts.padding < wd.h || xd.w + 2 * opts.padding < wd.w) {
        throw DimensionError("conv2d kernel larger than padded input");
    }
    const ConvGeometry g{xd.c,
                         xd.h,
                         xd.w,
                         wd.h,
                         wd.w,
                         opts.stride,
                         opts.padding,
                         (xd.h + 2 * opts.padding - wd.h) / opts.stride + 1,
                         (xd.w + 2 * opts.padding - wd.w) / opts.stride + 1};
    const std::size_t out_c = wd.n;
    const std::size_t k = g.k();
    const std::size_t p = g.p();
    const std::size_t in_stride = xd.c * xd.h * xd.w;

    // All samples share one GEMM: col is k x (batch * p), sample n occupying columns [n*p, (n+1)*p).
    const std::size_t np = xd.n * p;
    std::vector<T> col(k * np);
    for (std::size_t n = 0; n < xd.n; ++n) im2col(x.data().data() + n * in_stride, g, col.data() + n * p, np);
    std::vector<T> flat(out_c * np, T{});
    if (bias.defined()) {
        for (std::size_t o = 0; o < out_c; ++o) std::fill_n(flat.data() + o * np, np, bias.data()[o]);
    }
    simd::gemm_accumulate(out_c, np, k, weight.data().data(), k, col.data(), np, flat.data(), np);
    std::vector<T> out(xd.n * out_c * p);
    for (std::size_t n = 0; n < xd.n; ++n) {
        for (std::size_t o = 0; o < out_c; ++o) {
            std::copy_n(flat.data() + o * np + n * p, p, out.data() + (n * out_c + o) * p);
        }
    }

    auto backward = [x, weight, bias, g, out_c, batch = xd.n, in_stride](Node<T>& self) {
        const std::size_t k = g.k();
        const std::size_t p = g.p();
        const std::size_t np = batch * p;
        const T* dy = self.grad.data();
        const bool need_x = x.requires_grad();
        const bool need_w = weight.requires_grad();
        const bool need_b = bias.defined() && bias.requires_grad();
        if (need_b) {
            T* db = bias.node()->ensure_grad().data();
            for (std::size_t n = 0; n < batch; ++n) {
                for (std::size_t o = 0; o < out_c; ++o) {
                    const T* src = dy + (n * out_c + o) * p;
                    T acc{};
                    for (std::size_t i = 0; i < p; ++i) acc += src[i];
                    db[o] += acc;
                }
            }
        }
        if (!need_x && !need_w) return;
        std::vector<T> dy_flat(out_c * np);
        for (std::size_t n = 0; n < batch; ++n) {
            for (std::size_t o = 0; o < out_c; ++o) {
                std::copy_n(dy + (n * out_c + o) * p, p, dy_flat.data() + o * np + n * p);
            }
        }
        if (need_w) {
            std::vector<T> col(k * np);
            for (std::size_t n = 0; n < batch; ++n) {
                im2col(x.data().data() + n * in_stride, g, col.data() + n * p, np);
            }
            std::vector<T> col_t(np * k);
            transpose(col.data(), k, np, col_t.data());
            simd::gemm_accumulate(out_c, k, np, dy_flat.data(), np, col_t.data(), k,
                                  weight.node()->ensure_grad().data(), k);
        }
        if (need_x) {
            std::vector<T> w_t(k * out_c);
            transpose(weight.data().data(), out_c, k, w_t.data());
            std::vector<T> dcol(k * np, T{});
            simd::gemm_accumulate(k, np, out_c, w_t.data(), out_c, dy_flat.data(), np, dcol.data(), np);
            T* dx = x.node()->ensure_grad().data();
            for (std::size_t n = 0; n < batch; ++n) col2im_add(dcol.data() + n * p, g, dx + n * in_stride, np);
        }
    };
    return make_result<T>({xd.n, out_c, g.oh, g.ow}, std::move(out), {x, weight, bias}, backward);
}

template <typename T>
BatchNormState<T> BatchNormState<T>::create(std::size_t channels) {
    BatchNormState s;
    s.gamma = Tensor<T>({channels}, std::vector<T>(channels, T{1}), true);
    s.beta = Tensor<T>({channels}, std::vector<T>(channels, T{0}), true);
    s.running_mean.assign(channels, T{0});
    s.running_var.assign(channels, T{1});
    return s;
}

template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, BatchNormState<T>& state, Mode mode) {
    const auto d = dims4(x, "batch_norm");
    if (state.gamma.numel() != d.c || state.beta.numel() != d.c || state.running_mean.size() != d.c ||
        state.running_var.size() != d.c) {
        throw DimensionError("batch_norm parameters sized for " + std::to_string(state.gamma.numel()) +
                             " channels, input has " + std::to_string(d.c));
    }
    const std::size_t hw = d.h * d.w;
    const std::size_t count = d.n * hw;
    const auto xs = x.data();
    const auto gamma = state.gamma.data();
    const auto beta = state.beta.data();
    std::vector<T> out(xs.size());
    std::vector<T> xhat(xs.size());
    std::vector<T> inv_std(d.c);

    for (std::size_t c = 0; c < d.c; ++c) {
        double mean = 0.0;
        double var = 0.0;
        if (mode == Mode::train) {
            for (std::size_t n = 0; n < d.n; ++n) {
                const T* src = xs.data() + (n * d.c + c) * hw;
                for (std::size_t i = 0; i < hw; ++i) mean += src[i];
            }
            mean /= static_cast<double>(count);
            for (std::size_t n = 0; n < d.n; ++n) {
                const T* src = xs.data() + (n * d.c + c) * hw;
                for (std::size_t i = 0; i < hw; ++i) {
                    const double dv = src[i] - mean;
                    var += dv * dv;
                }
            }
            var /= static_cast<double>(count);
            const double unbiased = count > 1 ? var * static_cast<double>(count) / static_cast<double>(count - 1) : var;
            state.running_mean[c] =
                static_cast<T>((1.0 - state.momentum) * state.running_mean[c] + state.momentum * mean);
            state.running_var[c] =
                static_cast<T>((1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased);
        } else {
            mean = state.running_mean[c];
            var = state.running_var[c];
        }
        const double istd = 1.0 / std::sqrt(var + state.eps);
        inv_std[c] = static_cast<T>(istd);
        for (std::size_t n = 0; n < d.n; ++n) {
            const std::size_t base = (n * d.c + c) * hw;
            for (std::size_t i = 0; i < hw; ++i) {
                const T xh = static_cast<T>((xs[base + i] - mean) * istd);
                xhat[base + i] = xh;
                out[base + i] = gamma[c] * xh + beta[c];
            }
        }
    }

    auto backward = [x, g = state.gamma, b = state.beta, xhat = std::move(xhat), inv_std = std::move(inv_std), d, mode,
                     count](Node<T>& self) {
        const std::size_t hw = d.h * d.w;
        const T* dy = self.grad.data();
        T* dx = x.requires_grad() ? x.node()->ensure_grad().data() : nullptr;
        T* dg = g.requires_grad() ? g.node()->ensure_grad().data() : nullptr;
        T* db = b.requires_grad() ? b.node()->ensure_grad().data() : nullptr;
        const auto gamma = g.data();
        for (std::size_t c = 0; c < d.c; ++c) {
            double sum_dy = 0.0;
            double sum_dy_xhat = 0.0;
            for (std::size_t n = 0; n < d.n; ++n) {
                const std::size_t base = (n * d.c + c) * hw;
                for (std::size_t i = 0; i < hw; ++i) {
                    sum_dy += dy[base + i];
                    sum_dy_xhat += static_cast<double>(dy[base + i]) * xhat[base + i];
                }
            }
            if (dg) dg[c] += static_cast<T>(sum_dy_xhat);
            if (db) db[c] += static_cast<T>(sum_dy);
            if (!dx) continue;
            const double scale = static_cast<double>(gamma[c]) * inv_std[c];
            if (mode == Mode::train) {
                const double mean_dy = sum_dy / static_cast<double>(count);
                const double mean_dy_xhat = sum_dy_xhat / static_cast<double>(count);
                for (std::size_t n = 0; n < d.n; ++n) {
                    const std::size_t base = (n * d.c + c) * hw;
                    for (std::size_t i = 0; i < hw; ++i) {
                        dx[base + i] +=
                            static_cast<T>(scale * (dy[base + i] - mean_dy - xhat[base + i] * mean_dy_xhat));
                    }
                }
            } else {
                for (std::size_t n = 0; n < d.n; ++n) {
                    const std::size_t base = (n * d.c + c) * hw;
                    for (std::size_t i = 0; i < hw; ++i) dx[base + i] += static_cast<T>(scale * dy[base + i]);
                }
            }
        }
    };
    return make_result<T>(x.shape(), std::move(out), {x, state.gamma, state.beta}, backward);
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    const auto xs = x.data();
    std::vector<T> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i] > T{0} ? xs[i] : T{0};
    auto backward = [x](Node<T>& self) {
        if (!x.requires_grad()) return;
        auto& dx = x.node()->ensure_grad();
        const auto xs = x.data();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i] > T{0}) dx[i] += self.grad[i];
        }
    };
    return make_result<T>(x.shape(), std::move(out), {x}, backward);
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    const auto xs = x.data();
    std::vector<T> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const T v = xs[i];
        if (v >= T{0}) {
            out[i] = T{1} / (T{1} + std::exp(-v));
        } else {
            const T e = std::exp(v);
            out[i] = e / (T{1} + e);
        }
    }
    auto backward = [x](Node<T>& self) {
        if (!x.requires_grad()) return;
        auto& dx = x.node()->ensure_grad();
        for (std::size_t i = 0; i < dx.size(); ++i) {
            const T y = self.data[i];
            dx[i] += self.grad[i] * y * (T{1} - y);
        }
    };
    return make_result<T>(x.shape(), std::move(out), {x}, backward);
}

template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& x, std::size_t window, std::size_t stride) {
    const auto d = dims4(x, "max_pool2d");
    if (window < 1 || stride < 1) throw DimensionError("max_pool2d window and stride must be >= 1");
    if (d.h < window || d.w < window || (d.h - window) % stride != 0 || (d.w - window) % stride != 0) {
        throw DimensionError("max_pool2d extents " + std::to_string(d.h) + "x" + std::to_string(d.w) +
                             " do not tile with window " + std::to_string(window) + " stride " +
                             std::to_string(stride));
    }
    const std::size_t oh = (d.h - window) / stride + 1;
    const std::size_t ow = (d.w - window) / stride + 1;
    const auto xs = x.data();
    std::vector<T> out(d.n * d.c * oh * ow);
    std::vector<std::size_t> argmax(out.size());
    for (std::size_t plane = 0; plane < d.n * d.c; ++plane) {
        const std::size_t in_base = plane * d.h * d.w;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                std::size_t best = in_base + (oy * stride) * d.w + ox * stride;
                for (std::size_t ky = 0; ky < window; ++ky) {
                    for (std::size_t kx = 0; kx < window; ++kx) {
                        const std::size_t idx = in_base + (oy * stride + ky) * d.w + ox * stride + kx;
                        if (xs[idx] > xs[best]) best = idx;
                    }
                }
                const std::size_t o = (plane * oh + oy) * ow + ox;
                out[o] = xs[best];
                argmax[o] = best;
            }
        }
    }
    auto backward = [x, argmax = std::move(argmax)](Node<T>& self) {
        if (!x.requires_grad()) return;
        auto& dx = x.node()->ensure_grad();
        for (std::size_t o = 0; o < argmax.size(); ++o) dx[argmax[o]] += self.grad[o];
    };
    return make_result<T>({d.n, d.c, oh, ow}, std::move(out), {x}, backward);
}

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& x, std::size_t factor) {
    const auto d = dims4(x, "upsample_nearest");
    if (factor < 1) throw DimensionError("upsample factor must be >= 1");
    const std::size_t oh = d.h * factor;
    const std::size_t ow = d.w * factor;
    const auto xs = x.data();
    std::vector<T> out(d.n * d.c * oh * ow);
    for (std::size_t plane = 0; plane < d.n * d.c; ++plane) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            const T* src = xs.data() + (plane * d.h + oy / factor) * d.w;
            T* dst = out.data() + (plane * oh + oy) * ow;
            for (std::size_t ox = 0; ox < ow; ++ox) dst[ox] = src[ox / factor];
        }
    }
    auto backward = [x, d, factor, oh, ow](Node<T>& self) {
        if (!x.requires_grad()) return;
        auto& dx = x.node()->ensure_grad();
        for (std::size_t plane = 0; plane < d.n * d.c; ++plane) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                T* dst = dx.data() + (plane * d.h + oy / factor) * d.w;
                const T* src = self.grad.data() + (plane * oh + oy) * ow;
                for (std::size_t ox = 0; ox < ow; ++ox) dst[ox / factor] += src[ox];
            }
        }
    };
    return make_result<T>({d.n, d.c, oh, ow}, std::move(out), {x}, backward);
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    const auto da = dims4(a, "concat_channels");
    const auto db = dims4(b, "concat_channels");
    if (da.n != db.n || da.h != db.h || da.w != db.w) {
        throw DimensionError("concat_channels shape mismatch: " + shape_string(a.shape()) + " vs " +
                             shape_string(b.shape()));
    }
    const std::size_t hw = da.h * da.w;
    const std::size_t c = da.c + db.c;
    std::vector<T> out(da.n * c * hw);
    for (std::size_t n = 0; n < da.n; ++n) {
        std::copy_n(a.data().data() + n * da.c * hw, da.c * hw, out.data() + n * c * hw);
        std::copy_n(b.data().data() + n * db.c * hw, db.c * hw, out.data() + n * c * hw + da.c * hw);
    }
    auto backward = [a, b, da, db, hw, c](Node<T>& self) {
        for (std::size_t n = 0; n < da.n; ++n) {
            const T* src = self.grad.data() + n * c * hw;
            if (a.requires_grad()) {
                T* dst = a.node()->ensure_grad().data() + n * da.c * hw;
                for (std::size_t i = 0; i < da.c * hw; ++i) dst[i] += src[i];
            }
            if (b.requires_grad()) {
                T* dst = b.node()->ensure_grad().data() + n * db.c * hw;
                for (std::size_t i = 0; i < db.c * hw; ++i) dst[i] += src[da.c * hw + i];
            }
        }
    };
    return make_result<T>({da.n, c, da.h, da.w}, std::move(out), {a, b}, backward);
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a, b, "add");
    const auto as = a.data();
    const auto bs = b.data();
    std::vector<T> out(as.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = as[i] + bs[i];
    auto backward = [a, b](Node<T>& self) {
        for (const auto* t : {&a, &b}) {
            if (!t->requires_grad()) continue;
            auto& g = t->node()->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    };
    return make_result<T>(a.shape(), std::move(out), {a, b}, backward);
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a, b, "mul");
    const auto as = a.data();
    const auto bs = b.data();
    std::vector<T> out(as.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = as[i] * bs[i];
    auto backward = [a, b](Node<T>& self) {
        if (a.requires_grad()) {
            auto& g = a.node()->ensure_grad();
            const auto bs = b.data();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bs[i];
        }
        if (b.requires_grad()) {
            auto& g = b.node()->ensure_grad();
            const auto as = a.data();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * as[i];
        }
    };
    return make_result<T>(a.shape(), std::move(out), {a, b}, backward);
}

template <typename T>
Tensor<T> mul_channel_map(const Tensor<T>& x, const Tensor<T>& map) {
    const auto dx = dims4(x, "mul_channel_map");
    const auto dm = dims4(map, "mul_channel_map");
    if (dm.n != dx.n || dm.c != 1 || dm.h != dx.h || dm.w != dx.w) {
        throw DimensionError("mul_channel_map needs map " + std::to_string(dx.n) + "x1x" + std::to_string(dx.h) +
                             "x" + std::to_string(dx.w) + ", got " + shape_string(map.shape()));
    }
    const std::size_t hw = dx.h * dx.w;
    const auto xs = x.data();
    const auto ms = map.data();
    std::vector<T> out(xs.size());
    for (std::size_t n = 0; n < dx.n; ++n) {
        for (std::size_t c = 0; c < dx.c; ++c) {
            const std::size_t base = (n * dx.c + c) * hw;
            for (std::size_t i = 0; i < hw; ++i) out[base + i] = xs[base + i] * ms[n * hw + i];
        }
    }
    auto backward = [x, map, dx, hw](Node<T>& self) {
        const auto xs = x.data();
        const auto ms = map.data();
        T* gx = x.requires_grad() ? x.node()->ensure_grad().data() : nullptr;
        T* gm = map.requires_grad() ? map.node()->ensure_grad().data() : nullptr;
        for (std::size_t n = 0; n < dx.n; ++n) {
            for (std::size_t c = 0; c < dx.c; ++c) {
                const std::size_t base = (n * dx.c + c) * hw;
                for (std::size_t i = 0; i < hw; ++i) {
                    const T g = self.grad[base + i];
                    if (gx) gx[base + i] += g * ms[n * hw + i];
                    if (gm) gm[n * hw + i] += g * xs[base + i];
                }
            }
        }
    };
    return make_result<T>(x.shape(), std::move(out), {x, map}, backward);
}

template <typename T>
Tensor<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
    require_same_shape(pred, target, "mse_loss");
    const auto ps = pred.data();
    const auto ts = target.data();
    if (ps.empty()) throw DimensionError("mse_loss on empty tensors");
    double acc = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double d = static_cast<double>(ts[i]) - ps[i];
        acc += d * d;
    }
    const double n = static_cast<double>(ps.size());
    auto backward = [pred, target, n](Node<T>& self) {
        const double g = self.grad[0];
        const auto ps = pred.data();
        const auto ts = target.data();
        T* gp = pred.requires_grad() ? pred.node()->ensure_grad().data() : nullptr;
        T* gt = target.requires_grad() ? target.node()->ensure_grad().data() : nullptr;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const T v = static_cast<T>(2.0 * g * (static_cast<double>(ps[i]) - ts[i]) / n);
            if (gp) gp[i] += v;
            if (gt) gt[i] -= v;
        }
    };
    return make_result<T>({}, {static_cast<T>(acc / n)}, {pred, target}, backward);
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
    double acc = 0.0;
    for (const T v : x.data()) acc += v;
    auto backward = [x](Node<T>& self) {
        if (!x.requires_grad()) return;
        auto& g = x.node()->ensure_grad();
        for (auto& v : g) v += self.grad[0];
    };
    return make_result<T>({}, {static_cast<T>(acc)}, {x}, backward);
}

#define SSOCT_INSTANTIATE_OPS(T)                                                                 \
    template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Conv2dOptions); \
    template struct BatchNormState<T>;                                                           \
    template Tensor<T> batch_norm(const Tensor<T>&, BatchNormState<T>&, Mode);                   \
    template Tensor<T> relu(const Tensor<T>&);                                                   \
    template Tensor<T> sigmoid(const Tensor<T>&);                                                \
    template Tensor<T> max_pool2d(const Tensor<T>&, std::size_t, std::size_t);                   \
    template Tensor<T> upsample_nearest(const Tensor<T>&, std::size_t);                          \
    template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);                      \
    template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                  \
    template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                  \
    template Tensor<T> mul_channel_map(const Tensor<T>&, const Tensor<T>&);                      \
    template Tensor<T> mse_loss(const Tensor<T>&, const Tensor<T>&);                             \
    template Tensor<T> sum(const Tensor<T>&);

SSOCT_INSTANTIATE_OPS(float)
SSOCT_INSTANTIATE_OPS(double)

#undef SSOCT_INSTANTIATE_OPS

}  // namespace ssoct::nn
