#pragma once

// Independent reference implementations the tests compare the library
// against. These are written the "obvious" way (explicit zero-padded
// buffers, direct index walks) on purpose, sharing no code with the
// library kernels.

#include <cmath>
#include <cstdint>
#include <vector>

#include "vinpaint/rng.hpp"
#include "vinpaint/tensor.hpp"

namespace oracle {

using std::int64_t;
using std::size_t;
using vinpaint::Rng;
using vinpaint::Shape;
using vinpaint::Tensor;

template <typename T>
Tensor<T> random_tensor(Rng& rng, Shape s, double scale = 1.0) {
    Tensor<T> t(std::move(s));
    for (size_t i = 0; i < t.numel(); ++i)
        t.data()[i] = static_cast<T>(rng.uniform(-scale, scale));
    return t;
}

// conv2d via an explicitly zero-padded input copy.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int64_t stride,
                 int64_t pad) {
    const int64_t N = static_cast<int64_t>(x.extent(0)), C = static_cast<int64_t>(x.extent(1)),
                  H = static_cast<int64_t>(x.extent(2)), W = static_cast<int64_t>(x.extent(3));
    const int64_t K = static_cast<int64_t>(w.extent(0)), kh = static_cast<int64_t>(w.extent(2)),
                  kw = static_cast<int64_t>(w.extent(3));
    const int64_t Hp = H + 2 * pad, Wp = W + 2 * pad;
    std::vector<T> padded(static_cast<size_t>(N * C * Hp * Wp), T(0));
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t y = 0; y < H; ++y)
                for (int64_t xx = 0; xx < W; ++xx)
                    padded[static_cast<size_t>(((n * C + c) * Hp + y + pad) * Wp + xx + pad)] =
                        x.at(n, c, y, xx);
    const int64_t Ho = (Hp - kh) / stride + 1, Wo = (Wp - kw) / stride + 1;
    Tensor<T> out(Shape{static_cast<size_t>(N), static_cast<size_t>(K), static_cast<size_t>(Ho),
                        static_cast<size_t>(Wo)});
    for (int64_t n = 0; n < N; ++n)
        for (int64_t k = 0; k < K; ++k)
            for (int64_t oy = 0; oy < Ho; ++oy)
                for (int64_t ox = 0; ox < Wo; ++ox) {
                    double acc = b.defined() ? static_cast<double>(b.at(k)) : 0.0;
                    for (int64_t c = 0; c < C; ++c)
                        for (int64_t ky = 0; ky < kh; ++ky)
                            for (int64_t kx = 0; kx < kw; ++kx)
                                acc += static_cast<double>(w.at(k, c, ky, kx)) *
                                       static_cast<double>(
                                           padded[static_cast<size_t>(((n * C + c) * Hp +
                                                                       oy * stride + ky) *
                                                                          Wp +
                                                                      ox * stride + kx)]);
                    out.at(n, k, oy, ox) = static_cast<T>(acc);
                }
    return out;
}

// conv3d the same way.
template <typename T>
Tensor<T> conv3d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int64_t sd,
                 int64_t sh, int64_t sw, int64_t pd, int64_t ph, int64_t pw) {
    const int64_t N = static_cast<int64_t>(x.extent(0)), C = static_cast<int64_t>(x.extent(1)),
                  D = static_cast<int64_t>(x.extent(2)), H = static_cast<int64_t>(x.extent(3)),
                  W = static_cast<int64_t>(x.extent(4));
    const int64_t K = static_cast<int64_t>(w.extent(0)), kd = static_cast<int64_t>(w.extent(2)),
                  kh = static_cast<int64_t>(w.extent(3)), kw = static_cast<int64_t>(w.extent(4));
    const int64_t Dp = D + 2 * pd, Hp = H + 2 * ph, Wp = W + 2 * pw;
    std::vector<T> padded(static_cast<size_t>(N * C * Dp * Hp * Wp), T(0));
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t d = 0; d < D; ++d)
                for (int64_t y = 0; y < H; ++y)
                    for (int64_t xx = 0; xx < W; ++xx)
                        padded[static_cast<size_t>(
                            (((n * C + c) * Dp + d + pd) * Hp + y + ph) * Wp + xx + pw)] =
                            x.at(n, c, d, y, xx);
    const int64_t Do = (Dp - kd) / sd + 1, Ho = (Hp - kh) / sh + 1, Wo = (Wp - kw) / sw + 1;
    Tensor<T> out(Shape{static_cast<size_t>(N), static_cast<size_t>(K), static_cast<size_t>(Do),
                        static_cast<size_t>(Ho), static_cast<size_t>(Wo)});
    for (int64_t n = 0; n < N; ++n)
        for (int64_t k = 0; k < K; ++k)
            for (int64_t od = 0; od < Do; ++od)
                for (int64_t oy = 0; oy < Ho; ++oy)
                    for (int64_t ox = 0; ox < Wo; ++ox) {
                        double acc = b.defined() ? static_cast<double>(b.at(k)) : 0.0;
                        for (int64_t c = 0; c < C; ++c)
                            for (int64_t zd = 0; zd < kd; ++zd)
                                for (int64_t ky = 0; ky < kh; ++ky)
                                    for (int64_t kx = 0; kx < kw; ++kx)
                                        acc += static_cast<double>(w.at(k, c, zd, ky, kx)) *
                                               static_cast<double>(padded[static_cast<size_t>(
                                                   (((n * C + c) * Dp + od * sd + zd) * Hp +
                                                    oy * sh + ky) *
                                                       Wp +
                                                   ox * sw + kx)]);
                        out.at(n, k, od, oy, ox) = static_cast<T>(acc);
                    }
    return out;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    const size_t M = a.extent(0), K = a.extent(1), N = b.extent(1);
    Tensor<T> y(Shape{M, N});
    for (size_t m = 0; m < M; ++m)
        for (size_t j = 0; j < N; ++j) {
            double acc = 0.0;
            for (size_t k = 0; k < K; ++k)
                acc += static_cast<double>(a.at(m, k)) * static_cast<double>(b.at(k, j));
            y.at(m, j) = static_cast<T>(acc);
        }
    return y;
}

// Temporal channel shift by explicit index gathering.
template <typename T>
Tensor<T> temporal_shift(const Tensor<T>& x, int64_t f) {
    const int64_t Tn = static_cast<int64_t>(x.extent(0)), C = static_cast<int64_t>(x.extent(1)),
                  H = static_cast<int64_t>(x.extent(2)), W = static_cast<int64_t>(x.extent(3));
    Tensor<T> y(x.shape());
    for (int64_t t = 0; t < Tn; ++t)
        for (int64_t c = 0; c < C; ++c) {
            int64_t src = t;
            if (c < f)
                src = t - 1;
            else if (c < 2 * f)
                src = t + 1;
            for (int64_t yy = 0; yy < H; ++yy)
                for (int64_t xx = 0; xx < W; ++xx)
                    y.at(t, c, yy, xx) =
                        (src < 0 || src >= Tn) ? T(0) : x.at(src, c, yy, xx);
        }
    return y;
}

// One bilinear sample with zero fill, done longhand.
template <typename T>
T bilinear_at(const Tensor<T>& img, int64_t ch, double sy, double sx) {
    const int64_t H = static_cast<int64_t>(img.extent(1)), W = static_cast<int64_t>(img.extent(2));
    const auto pick = [&](int64_t yy, int64_t xx) -> double {
        if (yy < 0 || yy >= H || xx < 0 || xx >= W) return 0.0;
        return static_cast<double>(img.at(ch, yy, xx));
    };
    const double fy = std::floor(sy), fx = std::floor(sx);
    const int64_t y0 = static_cast<int64_t>(fy), x0 = static_cast<int64_t>(fx);
    const double ay = sy - fy, ax = sx - fx;
    return static_cast<T>((1.0 - ay) * ((1.0 - ax) * pick(y0, x0) + ax * pick(y0, x0 + 1)) +
                          ay * ((1.0 - ax) * pick(y0 + 1, x0) + ax * pick(y0 + 1, x0 + 1)));
}

} // namespace oracle
