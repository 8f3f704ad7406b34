#include "vinpaint/flow.hpp"

#include <cmath>
#include <string>

#include "vinpaint/kernels.hpp"
#include "vinpaint/ops.hpp"

namespace vinpaint::flow {

namespace k = vinpaint::kernels;
using std::int64_t;

namespace {

// Bilinear read of an interleaved [H, W, 2] field at a fractional position
// known to be inside [0, W-1] x [0, H-1]; corners with zero weight may fall
// outside the grid and are skipped.
template <typename T>
void sample_flow(const T* f, int64_t H, int64_t W, T sx, T sy, T& dx, T& dy) {
    const int64_t x0 = static_cast<int64_t>(std::floor(sx));
    const int64_t y0 = static_cast<int64_t>(std::floor(sy));
    const T fx = sx - static_cast<T>(x0);
    const T fy = sy - static_cast<T>(y0);
    const int64_t cx[4] = {x0, x0 + 1, x0, x0 + 1};
    const int64_t cy[4] = {y0, y0, y0 + 1, y0 + 1};
    const T wgt[4] = {(T(1) - fx) * (T(1) - fy), fx * (T(1) - fy), (T(1) - fx) * fy, fx * fy};
    dx = T(0);
    dy = T(0);
    for (int c = 0; c < 4; ++c) {
        if (cx[c] < 0 || cx[c] >= W || cy[c] < 0 || cy[c] >= H) continue;
        const T* v = f + (cy[c] * W + cx[c]) * 2;
        dx += wgt[c] * v[0];
        dy += wgt[c] * v[1];
    }
}

} // namespace

template <typename T>
void validate_flow(const Tensor<T>& flow, const char* name) {
    if (flow.rank() != 3 || flow.extent(2) != 2)
        throw dim_error(std::string(name) + ": flow must be [H, W, 2], got " +
                        shape_str(flow.shape()));
    ensure_finite(flow, name);
    const auto H = static_cast<T>(flow.extent(0));
    const auto W = static_cast<T>(flow.extent(1));
    const T* f = flow.data();
    for (std::size_t i = 0; i < flow.numel(); i += 2) {
        if (std::fabs(f[i]) > W || std::fabs(f[i + 1]) > H)
            throw numeric_error(std::string(name) + ": flow displacement exceeds frame size");
    }
}

template <typename T>
Tensor<T> warp_bilinear(Tape* tape, const Tensor<T>& src, const Tensor<T>& flow,
                        Tensor<T>* in_bounds) {
    if (src.rank() != 3)
        throw dim_error("warp_bilinear: src must be [C, H, W], got " + shape_str(src.shape()));
    validate_flow(flow, "warp_bilinear");
    const int64_t C = static_cast<int64_t>(src.extent(0));
    const int64_t H = static_cast<int64_t>(src.extent(1));
    const int64_t W = static_cast<int64_t>(src.extent(2));
    if (static_cast<int64_t>(flow.extent(0)) != H || static_cast<int64_t>(flow.extent(1)) != W)
        throw dim_error("warp_bilinear: flow " + shape_str(flow.shape()) + " does not match src " +
                        shape_str(src.shape()));

    Tensor<T> y(src.shape());
    T* inb = nullptr;
    if (in_bounds) {
        *in_bounds = Tensor<T>(Shape{static_cast<std::size_t>(H), static_cast<std::size_t>(W)});
        inb = in_bounds->data();
    }
    if (parallel_kernels())
        k::warp_bilinear_omp(C, H, W, src.data(), flow.data(), y.data(), inb);
    else
        k::warp_bilinear_serial(C, H, W, src.data(), flow.data(), y.data(), inb);
    ensure_finite(y, "warp_bilinear");

    if (tape && src.requires_grad()) {
        y.set_requires_grad(true);
        tape->record("warp_bilinear", [=, src = src]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            src.ensure_grad();
            if (parallel_kernels())
                k::warp_bilinear_dgrad_omp(C, H, W, flow.data(), gy, src.grad());
            else
                k::warp_bilinear_dgrad_serial(C, H, W, flow.data(), gy, src.grad());
        });
    }
    return y;
}

template <typename T>
Tensor<T> cycle_validity(const Tensor<T>& fwd, const Tensor<T>& bwd, const ValidityConfig& cfg) {
    validate_flow(fwd, "cycle_validity");
    validate_flow(bwd, "cycle_validity");
    if (fwd.shape() != bwd.shape())
        throw dim_error("cycle_validity: flow shapes differ, " + shape_str(fwd.shape()) + " vs " +
                        shape_str(bwd.shape()));
    if (cfg.delta <= 0 || (cfg.soft && cfg.soft_scale <= 0))
        throw dim_error("cycle_validity: delta and soft_scale must be positive");

    const int64_t H = static_cast<int64_t>(fwd.extent(0));
    const int64_t W = static_cast<int64_t>(fwd.extent(1));
    Tensor<T> mask(Shape{static_cast<std::size_t>(H), static_cast<std::size_t>(W)});
    const T* fw = fwd.data();
    const T* bw = bwd.data();
    T* m = mask.data();
    const T delta = static_cast<T>(cfg.delta);
    const T inv_ss2 = cfg.soft ? T(1) / static_cast<T>(cfg.soft_scale * cfg.soft_scale) : T(0);

#pragma omp parallel for schedule(static)
    for (int64_t y = 0; y < H; ++y) {
        for (int64_t x = 0; x < W; ++x) {
            const T* b = bw + (y * W + x) * 2;
            const T qx = static_cast<T>(x) + b[0];
            const T qy = static_cast<T>(y) + b[1];
            T* out = m + y * W + x;
            if (qx < T(0) || qx > static_cast<T>(W - 1) || qy < T(0) ||
                qy > static_cast<T>(H - 1)) {
                *out = T(0);
                continue;
            }
            T dx, dy;
            sample_flow(fw, H, W, qx, qy, dx, dy);
            const T ex = b[0] + dx;
            const T ey = b[1] + dy;
            const T err2 = ex * ex + ey * ey;
            if (cfg.soft)
                *out = std::exp(-err2 * inv_ss2);
            else
                *out = err2 < delta * delta ? T(1) : T(0);
        }
    }
    return mask;
}

template <typename T>
Tensor<T> rescale_flow(const Tensor<T>& flow, int64_t stride) {
    validate_flow(flow, "rescale_flow");
    const int64_t H = static_cast<int64_t>(flow.extent(0));
    const int64_t W = static_cast<int64_t>(flow.extent(1));
    if (stride < 1) throw dim_error("rescale_flow: stride must be >= 1");
    if (H % stride != 0 || W % stride != 0)
        throw dim_error("rescale_flow: extents " + shape_str(flow.shape()) +
                        " not divisible by stride " + std::to_string(stride));
    if (stride == 1) return flow.clone();

    const int64_t Ho = H / stride, Wo = W / stride;
    Tensor<T> out(Shape{static_cast<std::size_t>(Ho), static_cast<std::size_t>(Wo), 2});
    const T* f = flow.data();
    T* o = out.data();
    const T norm = T(1) / (static_cast<T>(stride) * static_cast<T>(stride) * static_cast<T>(stride));
#pragma omp parallel for schedule(static)
    for (int64_t oy = 0; oy < Ho; ++oy) {
        for (int64_t ox = 0; ox < Wo; ++ox) {
            T sx = 0, sy = 0;
            for (int64_t ky = 0; ky < stride; ++ky) {
                const T* row = f + ((oy * stride + ky) * W + ox * stride) * 2;
                for (int64_t kx = 0; kx < stride; ++kx) {
                    sx += row[kx * 2];
                    sy += row[kx * 2 + 1];
                }
            }
            o[(oy * Wo + ox) * 2] = sx * norm;
            o[(oy * Wo + ox) * 2 + 1] = sy * norm;
        }
    }
    return out;
}

template <typename T>
Tensor<T> synth_flow(const Motion<T>& m, int64_t H, int64_t W, bool to_prev) {
    if (H < 1 || W < 1) throw dim_error("synth_flow: empty frame");
    Tensor<T> out(Shape{static_cast<std::size_t>(H), static_cast<std::size_t>(W), 2});
    T* o = out.data();
    const T cx = static_cast<T>(W - 1) / T(2);
    const T cy = static_cast<T>(H - 1) / T(2);

    // Linear map delta(p) = A (p - c) + t for every motion kind.
    T a00 = 0, a01 = 0, a10 = 0, a11 = 0, tx = 0, ty = 0;
    switch (m.kind) {
    case MotionKind::none:
        break;
    case MotionKind::constant:
        tx = to_prev ? -m.dx : m.dx;
        ty = to_prev ? -m.dy : m.dy;
        break;
    case MotionKind::rotation: {
        const T th = to_prev ? -m.angle : m.angle;
        a00 = std::cos(th) - T(1);
        a01 = -std::sin(th);
        a10 = std::sin(th);
        a11 = std::cos(th) - T(1);
        break;
    }
    case MotionKind::zoom: {
        if (m.scale <= T(0)) throw dim_error("synth_flow: zoom scale must be positive");
        const T s = to_prev ? T(1) / m.scale : m.scale;
        a00 = s - T(1);
        a11 = s - T(1);
        break;
    }
    }

#pragma omp parallel for schedule(static)
    for (int64_t y = 0; y < H; ++y) {
        for (int64_t x = 0; x < W; ++x) {
            const T px = static_cast<T>(x) - cx;
            const T py = static_cast<T>(y) - cy;
            o[(y * W + x) * 2] = a00 * px + a01 * py + tx;
            o[(y * W + x) * 2 + 1] = a10 * px + a11 * py + ty;
        }
    }
    return out;
}

template <typename T>
Tensor<T> synth_noise_flow(Rng& rng, int64_t H, int64_t W, T sigma, int64_t cell) {
    if (H < 1 || W < 1) throw dim_error("synth_noise_flow: empty frame");
    if (cell < 1) throw dim_error("synth_noise_flow: cell must be >= 1");
    const int64_t gh = (H - 1) / cell + 2;
    const int64_t gw = (W - 1) / cell + 2;
    std::vector<T> nodes(static_cast<std::size_t>(gh * gw * 2));
    for (auto& v : nodes) v = static_cast<T>(rng.normal(0.0, static_cast<double>(sigma)));

    Tensor<T> out(Shape{static_cast<std::size_t>(H), static_cast<std::size_t>(W), 2});
    T* o = out.data();
    const T inv = T(1) / static_cast<T>(cell);
#pragma omp parallel for schedule(static)
    for (int64_t y = 0; y < H; ++y) {
        const int64_t gy = y / cell;
        const T fy = static_cast<T>(y % cell) * inv;
        for (int64_t x = 0; x < W; ++x) {
            const int64_t gx = x / cell;
            const T fx = static_cast<T>(x % cell) * inv;
            for (int64_t c = 0; c < 2; ++c) {
                const T n00 = nodes[(gy * gw + gx) * 2 + c];
                const T n10 = nodes[(gy * gw + gx + 1) * 2 + c];
                const T n01 = nodes[((gy + 1) * gw + gx) * 2 + c];
                const T n11 = nodes[((gy + 1) * gw + gx + 1) * 2 + c];
                const T top = n00 + fx * (n10 - n00);
                const T bot = n01 + fx * (n11 - n01);
                o[(y * W + x) * 2 + c] = top + fy * (bot - top);
            }
        }
    }
    return out;
}

#define VINPAINT_FLOW_INSTANTIATE(T)                                                              \
    template void validate_flow<T>(const Tensor<T>&, const char*);                                \
    template Tensor<T> warp_bilinear<T>(Tape*, const Tensor<T>&, const Tensor<T>&, Tensor<T>*);   \
    template Tensor<T> cycle_validity<T>(const Tensor<T>&, const Tensor<T>&,                      \
                                         const ValidityConfig&);                                  \
    template Tensor<T> rescale_flow<T>(const Tensor<T>&, std::int64_t);                           \
    template Tensor<T> synth_flow<T>(const Motion<T>&, std::int64_t, std::int64_t, bool);         \
    template Tensor<T> synth_noise_flow<T>(Rng&, std::int64_t, std::int64_t, T, std::int64_t);

VINPAINT_FLOW_INSTANTIATE(float)
VINPAINT_FLOW_INSTANTIATE(double)

#undef VINPAINT_FLOW_INSTANTIATE

} // namespace vinpaint::flow
