#include "vinpaint/align.hpp"

#include <cstring>
#include <string>

#include "vinpaint/kernels.hpp"
#include "vinpaint/ops.hpp"

namespace vinpaint::align {

namespace k = vinpaint::kernels;
using std::int64_t;

namespace {

// out = v * warped + (1 - v) * own, v broadcast over the f channel planes.
template <typename T>
void fuse(int64_t f, int64_t HW, const T* v, const T* warped, const T* own, T* out) {
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < f; ++c)
        for (int64_t i = 0; i < HW; ++i)
            out[c * HW + i] = v[i] * warped[c * HW + i] + (T(1) - v[i]) * own[c * HW + i];
}

// acc += (1 - v) * g — the fallback share of the band gradient.
template <typename T>
void fallback_grad(int64_t f, int64_t HW, const T* v, const T* g, T* acc) {
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < f; ++c)
        for (int64_t i = 0; i < HW; ++i) acc[c * HW + i] += (T(1) - v[i]) * g[c * HW + i];
}

// out = v * g — the share that flows back through the warp.
template <typename T>
void masked_grad(int64_t f, int64_t HW, const T* v, const T* g, T* out) {
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < f; ++c)
        for (int64_t i = 0; i < HW; ++i) out[c * HW + i] = v[i] * g[c * HW + i];
}

template <typename T>
void acc_add(int64_t n, const T* g, T* acc) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) acc[i] += g[i];
}

template <typename T>
void dispatch_warp(int64_t C, int64_t H, int64_t W, const T* src, const T* fl, T* out) {
    if (parallel_kernels())
        k::warp_bilinear_omp(C, H, W, src, fl, out, static_cast<T*>(nullptr));
    else
        k::warp_bilinear_serial(C, H, W, src, fl, out, static_cast<T*>(nullptr));
}

template <typename T>
void dispatch_warp_dgrad(int64_t C, int64_t H, int64_t W, const T* fl, const T* gout, T* gsrc) {
    if (parallel_kernels())
        k::warp_bilinear_dgrad_omp(C, H, W, fl, gout, gsrc);
    else
        k::warp_bilinear_dgrad_serial(C, H, W, fl, gout, gsrc);
}

template <typename T>
void check_entry(const Tensor<T>& t, const Shape& want, const char* what, int64_t idx) {
    if (!t.defined() || t.shape() != want)
        throw dim_error("shift_and_align: " + std::string(what) + "[" + std::to_string(idx) +
                        "] must be " + shape_str(want));
}

} // namespace

template <typename T>
AlignData<T> build_align_data(const std::vector<Tensor<T>>& pair_fwd,
                              const std::vector<Tensor<T>>& pair_bwd, int64_t stride,
                              const flow::ValidityConfig& cfg) {
    if (pair_fwd.size() != pair_bwd.size())
        throw dim_error("build_align_data: " + std::to_string(pair_fwd.size()) +
                        " forward vs " + std::to_string(pair_bwd.size()) + " backward flows");
    const std::size_t pairs = pair_fwd.size();
    flow::ValidityConfig lvl = cfg;
    lvl.delta = cfg.delta / static_cast<double>(stride);
    lvl.soft_scale = cfg.soft_scale / static_cast<double>(stride);

    AlignData<T> out;
    out.flow_to_prev.resize(pairs + 1);
    out.flow_to_next.resize(pairs + 1);
    out.valid_prev.resize(pairs + 1);
    out.valid_next.resize(pairs + 1);
    for (std::size_t i = 0; i < pairs; ++i) {
        auto f = flow::rescale_flow(pair_fwd[i], stride);
        auto b = flow::rescale_flow(pair_bwd[i], stride);
        out.valid_prev[i + 1] = flow::cycle_validity(f, b, lvl);
        out.valid_next[i] = flow::cycle_validity(b, f, lvl);
        out.flow_to_next[i] = std::move(f);
        out.flow_to_prev[i + 1] = std::move(b);
    }
    return out;
}

template <typename T>
Tensor<T> shift_and_align(Tape* tape, const Tensor<T>& x, const AlignData<T>& data, int64_t f) {
    if (x.rank() != 4)
        throw dim_error("shift_and_align: x must be [T, C, H, W], got " + shape_str(x.shape()));
    const auto Tn = static_cast<int64_t>(x.extent(0));
    const auto C = static_cast<int64_t>(x.extent(1));
    const auto H = static_cast<int64_t>(x.extent(2));
    const auto W = static_cast<int64_t>(x.extent(3));
    if (f < 1 || 2 * f > C)
        throw dim_error("shift_and_align: band width " + std::to_string(f) +
                        " does not fit twice in " + std::to_string(C) + " channels");
    const auto tn = static_cast<std::size_t>(Tn);
    if (data.flow_to_prev.size() != tn || data.flow_to_next.size() != tn ||
        data.valid_prev.size() != tn || data.valid_next.size() != tn)
        throw dim_error("shift_and_align: alignment data is not per-frame (need " +
                        std::to_string(Tn) + " entries)");
    const Shape flow_shape{x.extent(2), x.extent(3), 2};
    const Shape mask_shape{x.extent(2), x.extent(3)};
    for (int64_t t = 1; t < Tn; ++t) {
        check_entry(data.flow_to_prev[static_cast<std::size_t>(t)], flow_shape, "flow_to_prev", t);
        check_entry(data.valid_prev[static_cast<std::size_t>(t)], mask_shape, "valid_prev", t);
    }
    for (int64_t t = 0; t + 1 < Tn; ++t) {
        check_entry(data.flow_to_next[static_cast<std::size_t>(t)], flow_shape, "flow_to_next", t);
        check_entry(data.valid_next[static_cast<std::size_t>(t)], mask_shape, "valid_next", t);
    }

    const int64_t HW = H * W;
    const int64_t frame = C * HW;
    const int64_t band = f * HW;
    Tensor<T> y(x.shape());
    std::vector<T> tmp(static_cast<std::size_t>(band));
    for (int64_t t = 0; t < Tn; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        const T* xt = x.data() + t * frame;
        T* yt = y.data() + t * frame;
        std::memcpy(yt + 2 * band, xt + 2 * band,
                    static_cast<std::size_t>(frame - 2 * band) * sizeof(T));
        if (t == 0) {
            std::memcpy(yt, xt, static_cast<std::size_t>(band) * sizeof(T));
        } else {
            dispatch_warp(f, H, W, x.data() + (t - 1) * frame, data.flow_to_prev[ut].data(),
                          tmp.data());
            fuse(f, HW, data.valid_prev[ut].data(), tmp.data(), xt, yt);
        }
        if (t == Tn - 1) {
            std::memcpy(yt + band, xt + band, static_cast<std::size_t>(band) * sizeof(T));
        } else {
            dispatch_warp(f, H, W, x.data() + (t + 1) * frame + band,
                          data.flow_to_next[ut].data(), tmp.data());
            fuse(f, HW, data.valid_next[ut].data(), tmp.data(), xt + band, yt + band);
        }
    }
    ensure_finite(y, "shift_and_align");

    if (tape && x.requires_grad()) {
        y.set_requires_grad(true);
        tape->record("shift_and_align", [=, x = x]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            x.ensure_grad();
            T* gx = x.grad();
            std::vector<T> gw(static_cast<std::size_t>(band));
            for (int64_t t = 0; t < Tn; ++t) {
                const auto ut = static_cast<std::size_t>(t);
                const T* gyt = gy + t * frame;
                acc_add(frame - 2 * band, gyt + 2 * band, gx + t * frame + 2 * band);
                if (t == 0) {
                    acc_add(band, gyt, gx);
                } else {
                    const T* v = data.valid_prev[ut].data();
                    fallback_grad(f, HW, v, gyt, gx + t * frame);
                    masked_grad(f, HW, v, gyt, gw.data());
                    dispatch_warp_dgrad(f, H, W, data.flow_to_prev[ut].data(), gw.data(),
                                        gx + (t - 1) * frame);
                }
                if (t == Tn - 1) {
                    acc_add(band, gyt + band, gx + t * frame + band);
                } else {
                    const T* v = data.valid_next[ut].data();
                    fallback_grad(f, HW, v, gyt + band, gx + t * frame + band);
                    masked_grad(f, HW, v, gyt + band, gw.data());
                    dispatch_warp_dgrad(f, H, W, data.flow_to_next[ut].data(), gw.data(),
                                        gx + (t + 1) * frame + band);
                }
            }
        });
    }
    return y;
}

#define VINPAINT_ALIGN_INSTANTIATE(T)                                                             \
    template AlignData<T> build_align_data<T>(const std::vector<Tensor<T>>&,                      \
                                              const std::vector<Tensor<T>>&, std::int64_t,        \
                                              const flow::ValidityConfig&);                       \
    template Tensor<T> shift_and_align<T>(Tape*, const Tensor<T>&, const AlignData<T>&,           \
                                          std::int64_t);

VINPAINT_ALIGN_INSTANTIATE(float)
VINPAINT_ALIGN_INSTANTIATE(double)

#undef VINPAINT_ALIGN_INSTANTIATE

} // namespace vinpaint::align
