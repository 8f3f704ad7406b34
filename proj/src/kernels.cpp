#include "vinpaint/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace vinpaint::kernels {

namespace {

using std::int64_t;

inline int64_t floordiv(int64_t a, int64_t b) {
    return a >= 0 ? a / b : -((-a + b - 1) / b);
}
inline int64_t ceildiv(int64_t a, int64_t b) { return floordiv(a + b - 1, b); }

// Valid output index range [lo, hi] such that o*stride - pad + k lies in [0, extent).
inline void conv_out_range(int64_t extent, int64_t Oext, int64_t stride, int64_t pad, int64_t k,
                           int64_t& lo, int64_t& hi) {
    lo = ceildiv(pad - k, stride);
    if (lo < 0) lo = 0;
    hi = floordiv(extent - 1 + pad - k, stride);
    if (hi > Oext - 1) hi = Oext - 1;
}

template <typename T>
inline T unary_apply(Unary k, T x, T alpha) {
    switch (k) {
    case Unary::sigmoid: return T(1) / (T(1) + std::exp(-x));
    case Unary::relu: return x > T(0) ? x : T(0);
    case Unary::leaky_relu: return x > T(0) ? x : alpha * x;
    case Unary::tanh: return std::tanh(x);
    case Unary::abs: return x < T(0) ? -x : x;
    case Unary::neg: return -x;
    }
    return x;
}

template <typename T>
inline T unary_grad(Unary k, T x, T y, T gy, T alpha) {
    switch (k) {
    case Unary::sigmoid: return y * (T(1) - y) * gy;
    case Unary::relu: return x > T(0) ? gy : T(0);
    case Unary::leaky_relu: return x > T(0) ? gy : alpha * gy;
    case Unary::tanh: return (T(1) - y * y) * gy;
    case Unary::abs: return x > T(0) ? gy : (x < T(0) ? -gy : T(0));
    case Unary::neg: return -gy;
    }
    return gy;
}

template <typename T>
inline T binary_apply(Binary k, T a, T b) {
    switch (k) {
    case Binary::add: return a + b;
    case Binary::sub: return a - b;
    case Binary::mul: return a * b;
    }
    return a;
}

template <typename T>
inline T sum_block(const T* x, int64_t n) {
    T acc = T(0);
    for (int64_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

template <typename T>
inline T abs_sum_block(const T* x, int64_t n) {
    T acc = T(0);
    for (int64_t i = 0; i < n; ++i) acc += x[i] < T(0) ? -x[i] : x[i];
    return acc;
}

} // namespace

// --- elementwise ------------------------------------------------------------

template <typename T>
void unary_forward_serial(Unary k, int64_t n, const T* x, T* y, T alpha) {
    for (int64_t i = 0; i < n; ++i) y[i] = unary_apply(k, x[i], alpha);
}

template <typename T>
void unary_forward_omp(Unary k, int64_t n, const T* x, T* y, T alpha) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) y[i] = unary_apply(k, x[i], alpha);
}

template <typename T>
void unary_backward_serial(Unary k, int64_t n, const T* x, const T* y, const T* gy, T* gx,
                           T alpha) {
    for (int64_t i = 0; i < n; ++i) gx[i] += unary_grad(k, x[i], y[i], gy[i], alpha);
}

template <typename T>
void unary_backward_omp(Unary k, int64_t n, const T* x, const T* y, const T* gy, T* gx, T alpha) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) gx[i] += unary_grad(k, x[i], y[i], gy[i], alpha);
}

template <typename T>
void binary_forward_serial(Binary k, int64_t n, const T* a, int64_t sa, const T* b, int64_t sb,
                           T* y) {
    for (int64_t i = 0; i < n; ++i) y[i] = binary_apply(k, a[i * sa], b[i * sb]);
}

template <typename T>
void binary_forward_omp(Binary k, int64_t n, const T* a, int64_t sa, const T* b, int64_t sb,
                        T* y) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) y[i] = binary_apply(k, a[i * sa], b[i * sb]);
}

// --- reductions -------------------------------------------------------------

template <typename T>
T block_sum_serial(int64_t n, const T* x) {
    const int64_t nb = n > 0 ? ceildiv(n, kReduceBlock) : 0;
    T total = T(0);
    for (int64_t b = 0; b < nb; ++b) {
        const int64_t lo = b * kReduceBlock;
        const int64_t len = std::min(kReduceBlock, n - lo);
        total += sum_block(x + lo, len);
    }
    return total;
}

template <typename T>
T block_sum_omp(int64_t n, const T* x) {
    const int64_t nb = n > 0 ? ceildiv(n, kReduceBlock) : 0;
    std::vector<T> partial(static_cast<size_t>(nb));
#pragma omp parallel for schedule(static)
    for (int64_t b = 0; b < nb; ++b) {
        const int64_t lo = b * kReduceBlock;
        partial[static_cast<size_t>(b)] = sum_block(x + lo, std::min(kReduceBlock, n - lo));
    }
    T total = T(0);
    for (int64_t b = 0; b < nb; ++b) total += partial[static_cast<size_t>(b)];
    return total;
}

template <typename T>
T block_abs_sum_serial(int64_t n, const T* x) {
    const int64_t nb = n > 0 ? ceildiv(n, kReduceBlock) : 0;
    T total = T(0);
    for (int64_t b = 0; b < nb; ++b) {
        const int64_t lo = b * kReduceBlock;
        total += abs_sum_block(x + lo, std::min(kReduceBlock, n - lo));
    }
    return total;
}

template <typename T>
T block_abs_sum_omp(int64_t n, const T* x) {
    const int64_t nb = n > 0 ? ceildiv(n, kReduceBlock) : 0;
    std::vector<T> partial(static_cast<size_t>(nb));
#pragma omp parallel for schedule(static)
    for (int64_t b = 0; b < nb; ++b) {
        const int64_t lo = b * kReduceBlock;
        partial[static_cast<size_t>(b)] = abs_sum_block(x + lo, std::min(kReduceBlock, n - lo));
    }
    T total = T(0);
    for (int64_t b = 0; b < nb; ++b) total += partial[static_cast<size_t>(b)];
    return total;
}

template <typename T>
void where_serial(int64_t n, const T* m, const T* a, const T* b, T* y) {
    for (int64_t i = 0; i < n; ++i) y[i] = m[i] != T(0) ? a[i] : b[i];
}

template <typename T>
void where_omp(int64_t n, const T* m, const T* a, const T* b, T* y) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) y[i] = m[i] != T(0) ? a[i] : b[i];
}

template <typename T>
void masked_acc_serial(int64_t n, const T* m, bool when_nonzero, const T* gy, T* acc) {
    for (int64_t i = 0; i < n; ++i)
        if ((m[i] != T(0)) == when_nonzero) acc[i] += gy[i];
}

template <typename T>
void masked_acc_omp(int64_t n, const T* m, bool when_nonzero, const T* gy, T* acc) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i)
        if ((m[i] != T(0)) == when_nonzero) acc[i] += gy[i];
}

namespace {

struct AxisSplit {
    // Row-major strides of the input, partitioned into kept and reduced axes.
    std::vector<int64_t> keep_dim, keep_stride, red_dim, red_stride;
    int64_t out_n = 1, red_n = 1;
};

inline AxisSplit split_axes(int64_t rank, const int64_t* shape, const bool* reduce_axis) {
    AxisSplit s;
    std::vector<int64_t> stride(static_cast<size_t>(rank), 1);
    for (int64_t i = rank - 2; i >= 0; --i)
        stride[static_cast<size_t>(i)] = stride[static_cast<size_t>(i + 1)] * shape[i + 1];
    for (int64_t i = 0; i < rank; ++i) {
        if (reduce_axis[i]) {
            s.red_dim.push_back(shape[i]);
            s.red_stride.push_back(stride[static_cast<size_t>(i)]);
            s.red_n *= shape[i];
        } else {
            s.keep_dim.push_back(shape[i]);
            s.keep_stride.push_back(stride[static_cast<size_t>(i)]);
            s.out_n *= shape[i];
        }
    }
    return s;
}

inline int64_t axis_offset(int64_t linear, const std::vector<int64_t>& dim,
                           const std::vector<int64_t>& stride) {
    int64_t off = 0;
    for (size_t i = dim.size(); i-- > 0;) {
        off += (linear % dim[i]) * stride[i];
        linear /= dim[i];
    }
    return off;
}

template <typename T>
inline T axis_reduce_one(int64_t o, const AxisSplit& s, const T* x) {
    const int64_t base = axis_offset(o, s.keep_dim, s.keep_stride);
    T acc = T(0);
    for (int64_t r = 0; r < s.red_n; ++r) acc += x[base + axis_offset(r, s.red_dim, s.red_stride)];
    return acc;
}

} // namespace

template <typename T>
void axis_reduce_sum_serial(int64_t rank, const int64_t* shape, const bool* reduce_axis,
                            const T* x, T* y) {
    const AxisSplit s = split_axes(rank, shape, reduce_axis);
    for (int64_t o = 0; o < s.out_n; ++o) y[o] = axis_reduce_one(o, s, x);
}

template <typename T>
void axis_reduce_sum_omp(int64_t rank, const int64_t* shape, const bool* reduce_axis, const T* x,
                         T* y) {
    const AxisSplit s = split_axes(rank, shape, reduce_axis);
#pragma omp parallel for schedule(static)
    for (int64_t o = 0; o < s.out_n; ++o) y[o] = axis_reduce_one(o, s, x);
}

// --- matmul -----------------------------------------------------------------

template <typename T>
void matmul_nn_serial(int64_t M, int64_t K, int64_t N, const T* a, const T* b, T* y) {
    for (int64_t m = 0; m < M; ++m)
        for (int64_t j = 0; j < N; ++j) {
            T acc = T(0);
            for (int64_t k = 0; k < K; ++k) acc += a[m * K + k] * b[k * N + j];
            y[m * N + j] = acc;
        }
}

template <typename T>
void matmul_nn_omp(int64_t M, int64_t K, int64_t N, const T* a, const T* b, T* y) {
#pragma omp parallel for schedule(static)
    for (int64_t m = 0; m < M; ++m) {
        T* yr = y + m * N;
        for (int64_t j = 0; j < N; ++j) yr[j] = T(0);
        for (int64_t k = 0; k < K; ++k) {
            const T av = a[m * K + k];
            const T* br = b + k * N;
            for (int64_t j = 0; j < N; ++j) yr[j] += av * br[j];
        }
    }
}

template <typename T>
void matmul_nt_acc_serial(int64_t M, int64_t N, int64_t K, const T* a, const T* b, T* y) {
    for (int64_t m = 0; m < M; ++m)
        for (int64_t k = 0; k < K; ++k) {
            T acc = T(0);
            for (int64_t j = 0; j < N; ++j) acc += a[m * N + j] * b[k * N + j];
            y[m * K + k] += acc;
        }
}

template <typename T>
void matmul_nt_acc_omp(int64_t M, int64_t N, int64_t K, const T* a, const T* b, T* y) {
#pragma omp parallel for schedule(static)
    for (int64_t m = 0; m < M; ++m)
        for (int64_t k = 0; k < K; ++k) {
            T acc = T(0);
            const T* ar = a + m * N;
            const T* br = b + k * N;
            for (int64_t j = 0; j < N; ++j) acc += ar[j] * br[j];
            y[m * K + k] += acc;
        }
}

template <typename T>
void matmul_tn_acc_serial(int64_t M, int64_t K, int64_t N, const T* a, const T* b, T* y) {
    for (int64_t k = 0; k < K; ++k)
        for (int64_t j = 0; j < N; ++j) {
            T acc = T(0);
            for (int64_t m = 0; m < M; ++m) acc += a[m * K + k] * b[m * N + j];
            y[k * N + j] += acc;
        }
}

template <typename T>
void matmul_tn_acc_omp(int64_t M, int64_t K, int64_t N, const T* a, const T* b, T* y) {
#pragma omp parallel for schedule(static)
    for (int64_t k = 0; k < K; ++k)
        for (int64_t j = 0; j < N; ++j) {
            T acc = T(0);
            for (int64_t m = 0; m < M; ++m) acc += a[m * K + k] * b[m * N + j];
            y[k * N + j] += acc;
        }
}

// --- 2-D convolution ----------------------------------------------------------

template <typename T>
void conv2d_forward_serial(int64_t N, int64_t C, int64_t H, int64_t W, int64_t K, int64_t kh,
                           int64_t kw, int64_t stride, int64_t pad, const T* x, const T* w,
                           const T* b, T* y) {
    const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
    const int64_t Wo = (W + 2 * pad - kw) / stride + 1;
    for (int64_t n = 0; n < N; ++n)
        for (int64_t k = 0; k < K; ++k)
            for (int64_t oy = 0; oy < Ho; ++oy)
                for (int64_t ox = 0; ox < Wo; ++ox) {
                    T acc = b ? b[k] : T(0);
                    for (int64_t c = 0; c < C; ++c)
                        for (int64_t ky = 0; ky < kh; ++ky) {
                            const int64_t iy = oy * stride - pad + ky;
                            if (iy < 0 || iy >= H) continue;
                            for (int64_t kx = 0; kx < kw; ++kx) {
                                const int64_t ix = ox * stride - pad + kx;
                                if (ix < 0 || ix >= W) continue;
                                acc += w[((k * C + c) * kh + ky) * kw + kx] *
                                       x[((n * C + c) * H + iy) * W + ix];
                            }
                        }
                    y[((n * K + k) * Ho + oy) * Wo + ox] = acc;
                }
}

template <typename T>
void conv2d_forward_omp(int64_t N, int64_t C, int64_t H, int64_t W, int64_t K, int64_t kh,
                        int64_t kw, int64_t stride, int64_t pad, const T* x, const T* w,
                        const T* b, T* y) {
    const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
    const int64_t Wo = (W + 2 * pad - kw) / stride + 1;
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < N; ++n)
        for (int64_t k = 0; k < K; ++k) {
            T* yp = y + (n * K + k) * Ho * Wo;
            const T bias = b ? b[k] : T(0);
            for (int64_t i = 0; i < Ho * Wo; ++i) yp[i] = bias;
            for (int64_t c = 0; c < C; ++c) {
                const T* xp = x + (n * C + c) * H * W;
                for (int64_t ky = 0; ky < kh; ++ky) {
                    int64_t oy_lo, oy_hi;
                    conv_out_range(H, Ho, stride, pad, ky, oy_lo, oy_hi);
                    for (int64_t kx = 0; kx < kw; ++kx) {
                        const T wv = w[((k * C + c) * kh + ky) * kw + kx];
                        int64_t ox_lo, ox_hi;
                        conv_out_range(W, Wo, stride, pad, kx, ox_lo, ox_hi);
                        for (int64_t oy = oy_lo; oy <= oy_hi; ++oy) {
                            const int64_t iy = oy * stride - pad + ky;
                            T* yr = yp + oy * Wo;
                            const T* xr = xp + iy * W - pad + kx;
                            for (int64_t ox = ox_lo; ox <= ox_hi; ++ox)
                                yr[ox] += wv * xr[ox * stride];
                        }
                    }
                }
            }
        }
}

template <typename T>
void conv2d_dgrad_serial(int64_t N, int64_t C, int64_t H, int64_t W, int64_t K, int64_t kh,
                         int64_t kw, int64_t stride, int64_t pad, const T* gy, const T* w,
                         T* gx) {
    const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
    const int64_t Wo = (W + 2 * pad - kw) / stride + 1;
    // Accumulates term by term directly into gx (not via a register) so the
    // rounding sequence matches the scatter-form parallel variant even when
    // gx already holds a partial gradient.
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t iy = 0; iy < H; ++iy)
                for (int64_t ix = 0; ix < W; ++ix) {
                    T* dst = gx + ((n * C + c) * H + iy) * W + ix;
                    for (int64_t k = 0; k < K; ++k)
                        for (int64_t ky = 0; ky < kh; ++ky) {
                            const int64_t qy = iy + pad - ky;
                            if (qy < 0 || qy % stride != 0) continue;
                            const int64_t oy = qy / stride;
                            if (oy >= Ho) continue;
                            for (int64_t kx = 0; kx < kw; ++kx) {
                                const int64_t qx = ix + pad - kx;
                                if (qx < 0 || qx % stride != 0) continue;
                                const int64_t ox = qx / stride;
                                if (ox >= Wo) continue;
                                *dst += w[((k * C + c) * kh + ky) * kw + kx] *
                                        gy[((n * K + k) * Ho + oy) * Wo + ox];
                            }
                        }
                }
}

template <typename T>
void conv2d_dgrad_omp(int64_t N, int64_t C, int64_t H, int64_t W, int64_t K, int64_t kh,
                      int64_t kw, int64_t stride, int64_t pad, const T* gy, const T* w, T* gx) {
    const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
    const int64_t Wo = (W + 2 * pad - kw) / stride + 1;
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            T* gp = gx + (n * C + c) * H * W;
            for (int64_t k = 0; k < K; ++k) {
                const T* gyp = gy + (n * K + k) * Ho * Wo;
                for (int64_t ky = 0; ky < kh; ++ky) {
                    int64_t oy_lo, oy_hi;
                    conv_out_range(H, Ho, stride, pad, ky, oy_lo, oy_hi);
                    for (int64_t kx = 0; kx < kw; ++kx) {
                        const T wv = w[((k * C + c) * kh + ky) * kw + kx];
                        int64_t ox_lo, ox_hi;
                        conv_out_range(W, Wo, stride, pad, kx, ox_lo, ox_hi);
                        for (int64_t oy = oy_lo; oy <= oy_hi; ++oy) {
                            const int64_t iy = oy * stride - pad + ky;
                            T* gr = gp + iy * W - pad + kx;
                            const T* gyr = gyp + oy * Wo;
                            for (int64_t ox = ox_lo; ox <= ox_hi; ++ox)
                                gr[ox * stride] += wv * gyr[ox];
                        }
                    }
                }
            }
        }
}

template <typename T>
void conv2d_wgrad_serial(int64_t N, int64_t C, int64_t H, int64_t W, int64_t K, int64_t kh,
                         int64_t kw, int64_t stride, int64_t pad, const T* gy, const T* x,
                         T* gw) {
    const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
    const int64_t Wo = (W + 2 * pad - kw) / stride + 1;
    for (int64_t k = 0; k < K; ++k)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t ky = 0; ky < kh; ++ky)
                for (int64_t kx = 0; kx < kw; ++kx) {
                    T acc = T(0);
                    for (int64_t n = 0; n < N; ++n)
                        for (int64_t oy = 0; oy < Ho; ++oy) {
                            const int64_t iy = oy * stride - pad + ky;
                            if (iy < 0 || iy >= H) continue;
                            for (int64_t ox = 0; ox < Wo; ++ox) {
                                const int64_t ix = ox * stride - pad + kx;
                                if (ix < 0 || ix >= W) continue;
                                acc += gy[((n * K + k) * Ho + oy) * Wo + ox] *
                                       x[((n * C + c) * H + iy) * W + ix];
                            }
                        }
                    gw[((k * C + c) * kh + ky) * kw + kx] += acc;
                }
}

template <typename T>
void conv2d_wgrad_omp(int64_t N, int64_t C, int64_t H, int64_t W, int64_t K, int64_t kh,
                      int64_t kw, int64_t stride, int64_t pad, const T* gy, const T* x, T* gw) {
    const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
    const int64_t Wo = (W + 2 * pad - kw) / stride + 1;
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t k = 0; k < K; ++k)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t ky = 0; ky < kh; ++ky) {
                int64_t oy_lo, oy_hi;
                conv_out_range(H, Ho, stride, pad, ky, oy_lo, oy_hi);
                for (int64_t kx = 0; kx < kw; ++kx) {
                    int64_t ox_lo, ox_hi;
                    conv_out_range(W, Wo, stride, pad, kx, ox_lo, ox_hi);
                    T acc = T(0);
                    for (int64_t n = 0; n < N; ++n) {
                        const T* gyp = gy + (n * K + k) * Ho * Wo;
                        const T* xp = x + (n * C + c) * H * W;
                        for (int64_t oy = oy_lo; oy <= oy_hi; ++oy) {
                            const int64_t iy = oy * stride - pad + ky;
                            const T* gyr = gyp + oy * Wo;
                            const T* xr = xp + iy * W - pad + kx;
                            for (int64_t ox = ox_lo; ox <= ox_hi; ++ox)
                                acc += gyr[ox] * xr[ox * stride];
                        }
                    }
                    gw[((k * C + c) * kh + ky) * kw + kx] += acc;
                }
            }
}

template <typename T>
void conv2d_bgrad_serial(int64_t N, int64_t K, int64_t Ho, int64_t Wo, const T* gy, T* gb) {
    for (int64_t k = 0; k < K; ++k) {
        T acc = T(0);
        for (int64_t n = 0; n < N; ++n) {
            const T* gp = gy + (n * K + k) * Ho * Wo;
            for (int64_t i = 0; i < Ho * Wo; ++i) acc += gp[i];
        }
        gb[k] += acc;
    }
}

template <typename T>
void conv2d_bgrad_omp(int64_t N, int64_t K, int64_t Ho, int64_t Wo, const T* gy, T* gb) {
#pragma omp parallel for schedule(static)
    for (int64_t k = 0; k < K; ++k) {
        T acc = T(0);
        for (int64_t n = 0; n < N; ++n) {
            const T* gp = gy + (n * K + k) * Ho * Wo;
            for (int64_t i = 0; i < Ho * Wo; ++i) acc += gp[i];
        }
        gb[k] += acc;
    }
}

// --- 3-D convolution ----------------------------------------------------------

template <typename T>
void conv3d_forward_serial(int64_t N, int64_t C, int64_t D, int64_t H, int64_t W, int64_t K,
                           int64_t kd, int64_t kh, int64_t kw, int64_t sd, int64_t sh, int64_t sw,
                           int64_t pd, int64_t ph, int64_t pw, const T* x, const T* w, const T* b,
                           T* y) {
    const int64_t Do = (D + 2 * pd - kd) / sd + 1;
    const int64_t Ho = (H + 2 * ph - kh) / sh + 1;
    const int64_t Wo = (W + 2 * pw - kw) / sw + 1;
    for (int64_t n = 0; n < N; ++n)
        for (int64_t k = 0; k < K; ++k)
            for (int64_t od = 0; od < Do; ++od)
                for (int64_t oy = 0; oy < Ho; ++oy)
                    for (int64_t ox = 0; ox < Wo; ++ox) {
                        T acc = b ? b[k] : T(0);
                        for (int64_t c = 0; c < C; ++c)
                            for (int64_t zd = 0; zd < kd; ++zd) {
                                const int64_t id = od * sd - pd + zd;
                                if (id < 0 || id >= D) continue;
                                for (int64_t ky = 0; ky < kh; ++ky) {
                                    const int64_t iy = oy * sh - ph + ky;
                                    if (iy < 0 || iy >= H) continue;
                                    for (int64_t kx = 0; kx < kw; ++kx) {
                                        const int64_t ix = ox * sw - pw + kx;
                                        if (ix < 0 || ix >= W) continue;
                                        acc += w[(((k * C + c) * kd + zd) * kh + ky) * kw + kx] *
                                               x[(((n * C + c) * D + id) * H + iy) * W + ix];
                                    }
                                }
                            }
                        y[(((n * K + k) * Do + od) * Ho + oy) * Wo + ox] = acc;
                    }
}

template <typename T>
void conv3d_forward_omp(int64_t N, int64_t C, int64_t D, int64_t H, int64_t W, int64_t K,
                        int64_t kd, int64_t kh, int64_t kw, int64_t sd, int64_t sh, int64_t sw,
                        int64_t pd, int64_t ph, int64_t pw, const T* x, const T* w, const T* b,
                        T* y) {
    const int64_t Do = (D + 2 * pd - kd) / sd + 1;
    const int64_t Ho = (H + 2 * ph - kh) / sh + 1;
    const int64_t Wo = (W + 2 * pw - kw) / sw + 1;
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < N; ++n)
        for (int64_t k = 0; k < K; ++k) {
            T* yp = y + (n * K + k) * Do * Ho * Wo;
            const T bias = b ? b[k] : T(0);
            for (int64_t i = 0; i < Do * Ho * Wo; ++i) yp[i] = bias;
            for (int64_t c = 0; c < C; ++c) {
                const T* xp = x + (n * C + c) * D * H * W;
                for (int64_t zd = 0; zd < kd; ++zd) {
                    int64_t od_lo, od_hi;
                    conv_out_range(D, Do, sd, pd, zd, od_lo, od_hi);
                    for (int64_t ky = 0; ky < kh; ++ky) {
                        int64_t oy_lo, oy_hi;
                        conv_out_range(H, Ho, sh, ph, ky, oy_lo, oy_hi);
                        for (int64_t kx = 0; kx < kw; ++kx) {
                            const T wv = w[(((k * C + c) * kd + zd) * kh + ky) * kw + kx];
                            int64_t ox_lo, ox_hi;
                            conv_out_range(W, Wo, sw, pw, kx, ox_lo, ox_hi);
                            for (int64_t od = od_lo; od <= od_hi; ++od) {
                                const int64_t id = od * sd - pd + zd;
                                for (int64_t oy = oy_lo; oy <= oy_hi; ++oy) {
                                    const int64_t iy = oy * sh - ph + ky;
                                    T* yr = yp + (od * Ho + oy) * Wo;
                                    const T* xr = xp + (id * H + iy) * W - pw + kx;
                                    for (int64_t ox = ox_lo; ox <= ox_hi; ++ox)
                                        yr[ox] += wv * xr[ox * sw];
                                }
                            }
                        }
                    }
                }
            }
        }
}

template <typename T>
void conv3d_dgrad_serial(int64_t N, int64_t C, int64_t D, int64_t H, int64_t W, int64_t K,
                         int64_t kd, int64_t kh, int64_t kw, int64_t sd, int64_t sh, int64_t sw,
                         int64_t pd, int64_t ph, int64_t pw, const T* gy, const T* w, T* gx) {
    const int64_t Do = (D + 2 * pd - kd) / sd + 1;
    const int64_t Ho = (H + 2 * ph - kh) / sh + 1;
    const int64_t Wo = (W + 2 * pw - kw) / sw + 1;
    // Term-by-term accumulation into gx; see the 2-D dgrad note.
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t id = 0; id < D; ++id)
                for (int64_t iy = 0; iy < H; ++iy)
                    for (int64_t ix = 0; ix < W; ++ix) {
                        T* dst = gx + (((n * C + c) * D + id) * H + iy) * W + ix;
                        for (int64_t k = 0; k < K; ++k)
                            for (int64_t zd = 0; zd < kd; ++zd) {
                                const int64_t qd = id + pd - zd;
                                if (qd < 0 || qd % sd != 0) continue;
                                const int64_t od = qd / sd;
                                if (od >= Do) continue;
                                for (int64_t ky = 0; ky < kh; ++ky) {
                                    const int64_t qy = iy + ph - ky;
                                    if (qy < 0 || qy % sh != 0) continue;
                                    const int64_t oy = qy / sh;
                                    if (oy >= Ho) continue;
                                    for (int64_t kx = 0; kx < kw; ++kx) {
                                        const int64_t qx = ix + pw - kx;
                                        if (qx < 0 || qx % sw != 0) continue;
                                        const int64_t ox = qx / sw;
                                        if (ox >= Wo) continue;
                                        *dst += w[(((k * C + c) * kd + zd) * kh + ky) * kw + kx] *
                                                gy[(((n * K + k) * Do + od) * Ho + oy) * Wo + ox];
                                    }
                                }
                            }
                    }
}

template <typename T>
void conv3d_dgrad_omp(int64_t N, int64_t C, int64_t D, int64_t H, int64_t W, int64_t K,
                      int64_t kd, int64_t kh, int64_t kw, int64_t sd, int64_t sh, int64_t sw,
                      int64_t pd, int64_t ph, int64_t pw, const T* gy, const T* w, T* gx) {
    const int64_t Do = (D + 2 * pd - kd) / sd + 1;
    const int64_t Ho = (H + 2 * ph - kh) / sh + 1;
    const int64_t Wo = (W + 2 * pw - kw) / sw + 1;
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            T* gp = gx + (n * C + c) * D * H * W;
            for (int64_t k = 0; k < K; ++k) {
                const T* gyp = gy + (n * K + k) * Do * Ho * Wo;
                for (int64_t zd = 0; zd < kd; ++zd) {
                    int64_t od_lo, od_hi;
                    conv_out_range(D, Do, sd, pd, zd, od_lo, od_hi);
                    for (int64_t ky = 0; ky < kh; ++ky) {
                        int64_t oy_lo, oy_hi;
                        conv_out_range(H, Ho, sh, ph, ky, oy_lo, oy_hi);
                        for (int64_t kx = 0; kx < kw; ++kx) {
                            const T wv = w[(((k * C + c) * kd + zd) * kh + ky) * kw + kx];
                            int64_t ox_lo, ox_hi;
                            conv_out_range(W, Wo, sw, pw, kx, ox_lo, ox_hi);
                            for (int64_t od = od_lo; od <= od_hi; ++od) {
                                const int64_t id = od * sd - pd + zd;
                                for (int64_t oy = oy_lo; oy <= oy_hi; ++oy) {
                                    const int64_t iy = oy * sh - ph + ky;
                                    T* gr = gp + (id * H + iy) * W - pw + kx;
                                    const T* gyr = gyp + (od * Ho + oy) * Wo;
                                    for (int64_t ox = ox_lo; ox <= ox_hi; ++ox)
                                        gr[ox * sw] += wv * gyr[ox];
                                }
                            }
                        }
                    }
                }
            }
        }
}

template <typename T>
void conv3d_wgrad_serial(int64_t N, int64_t C, int64_t D, int64_t H, int64_t W, int64_t K,
                         int64_t kd, int64_t kh, int64_t kw, int64_t sd, int64_t sh, int64_t sw,
                         int64_t pd, int64_t ph, int64_t pw, const T* gy, const T* x, T* gw) {
    const int64_t Do = (D + 2 * pd - kd) / sd + 1;
    const int64_t Ho = (H + 2 * ph - kh) / sh + 1;
    const int64_t Wo = (W + 2 * pw - kw) / sw + 1;
    for (int64_t k = 0; k < K; ++k)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t zd = 0; zd < kd; ++zd)
                for (int64_t ky = 0; ky < kh; ++ky)
                    for (int64_t kx = 0; kx < kw; ++kx) {
                        T acc = T(0);
                        for (int64_t n = 0; n < N; ++n)
                            for (int64_t od = 0; od < Do; ++od) {
                                const int64_t id = od * sd - pd + zd;
                                if (id < 0 || id >= D) continue;
                                for (int64_t oy = 0; oy < Ho; ++oy) {
                                    const int64_t iy = oy * sh - ph + ky;
                                    if (iy < 0 || iy >= H) continue;
                                    for (int64_t ox = 0; ox < Wo; ++ox) {
                                        const int64_t ix = ox * sw - pw + kx;
                                        if (ix < 0 || ix >= W) continue;
                                        acc += gy[(((n * K + k) * Do + od) * Ho + oy) * Wo + ox] *
                                               x[(((n * C + c) * D + id) * H + iy) * W + ix];
                                    }
                                }
                            }
                        gw[(((k * C + c) * kd + zd) * kh + ky) * kw + kx] += acc;
                    }
}

template <typename T>
void conv3d_wgrad_omp(int64_t N, int64_t C, int64_t D, int64_t H, int64_t W, int64_t K,
                      int64_t kd, int64_t kh, int64_t kw, int64_t sd, int64_t sh, int64_t sw,
                      int64_t pd, int64_t ph, int64_t pw, const T* gy, const T* x, T* gw) {
    const int64_t Do = (D + 2 * pd - kd) / sd + 1;
    const int64_t Ho = (H + 2 * ph - kh) / sh + 1;
    const int64_t Wo = (W + 2 * pw - kw) / sw + 1;
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t k = 0; k < K; ++k)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t zd = 0; zd < kd; ++zd) {
                int64_t od_lo, od_hi;
                conv_out_range(D, Do, sd, pd, zd, od_lo, od_hi);
                for (int64_t ky = 0; ky < kh; ++ky) {
                    int64_t oy_lo, oy_hi;
                    conv_out_range(H, Ho, sh, ph, ky, oy_lo, oy_hi);
                    for (int64_t kx = 0; kx < kw; ++kx) {
                        int64_t ox_lo, ox_hi;
                        conv_out_range(W, Wo, sw, pw, kx, ox_lo, ox_hi);
                        T acc = T(0);
                        for (int64_t n = 0; n < N; ++n) {
                            const T* gyp = gy + (n * K + k) * Do * Ho * Wo;
                            const T* xp = x + (n * C + c) * D * H * W;
                            for (int64_t od = od_lo; od <= od_hi; ++od) {
                                const int64_t id = od * sd - pd + zd;
                                for (int64_t oy = oy_lo; oy <= oy_hi; ++oy) {
                                    const int64_t iy = oy * sh - ph + ky;
                                    const T* gyr = gyp + (od * Ho + oy) * Wo;
                                    const T* xr = xp + (id * H + iy) * W - pw + kx;
                                    for (int64_t ox = ox_lo; ox <= ox_hi; ++ox)
                                        acc += gyr[ox] * xr[ox * sw];
                                }
                            }
                        }
                        gw[(((k * C + c) * kd + zd) * kh + ky) * kw + kx] += acc;
                    }
                }
            }
}

template <typename T>
void conv3d_bgrad_serial(int64_t N, int64_t K, int64_t Do, int64_t Ho, int64_t Wo, const T* gy,
                         T* gb) {
    for (int64_t k = 0; k < K; ++k) {
        T acc = T(0);
        for (int64_t n = 0; n < N; ++n) {
            const T* gp = gy + (n * K + k) * Do * Ho * Wo;
            for (int64_t i = 0; i < Do * Ho * Wo; ++i) acc += gp[i];
        }
        gb[k] += acc;
    }
}

template <typename T>
void conv3d_bgrad_omp(int64_t N, int64_t K, int64_t Do, int64_t Ho, int64_t Wo, const T* gy,
                      T* gb) {
#pragma omp parallel for schedule(static)
    for (int64_t k = 0; k < K; ++k) {
        T acc = T(0);
        for (int64_t n = 0; n < N; ++n) {
            const T* gp = gy + (n * K + k) * Do * Ho * Wo;
            for (int64_t i = 0; i < Do * Ho * Wo; ++i) acc += gp[i];
        }
        gb[k] += acc;
    }
}

// --- bilinear warp -----------------------------------------------------------

namespace {

// Shared inner body: corner indices/weights for sampling position (sx, sy).
// Corners are visited in the fixed order 00,10,01,11.
template <typename T>
struct WarpCorners {
    int64_t cx[4], cy[4];
    T wgt[4];
    bool inb;
};

template <typename T>
inline WarpCorners<T> warp_corners(T sx, T sy, int64_t H, int64_t W) {
    WarpCorners<T> c;
    const T fx = std::floor(sx);
    const T fy = std::floor(sy);
    const int64_t x0 = static_cast<int64_t>(fx);
    const int64_t y0 = static_cast<int64_t>(fy);
    const T ax = sx - fx;
    const T ay = sy - fy;
    c.cx[0] = x0;     c.cy[0] = y0;     c.wgt[0] = (T(1) - ax) * (T(1) - ay);
    c.cx[1] = x0 + 1; c.cy[1] = y0;     c.wgt[1] = ax * (T(1) - ay);
    c.cx[2] = x0;     c.cy[2] = y0 + 1; c.wgt[2] = (T(1) - ax) * ay;
    c.cx[3] = x0 + 1; c.cy[3] = y0 + 1; c.wgt[3] = ax * ay;
    c.inb = sx >= T(0) && sx <= T(W - 1) && sy >= T(0) && sy <= T(H - 1);
    return c;
}

template <typename T>
void warp_row(int64_t y, int64_t C, int64_t H, int64_t W, const T* src, const T* flow, T* out,
              T* inb) {
    for (int64_t x = 0; x < W; ++x) {
        const T dx = flow[(y * W + x) * 2 + 0];
        const T dy = flow[(y * W + x) * 2 + 1];
        const auto c = warp_corners<T>(T(x) + dx, T(y) + dy, H, W);
        if (inb) inb[y * W + x] = c.inb ? T(1) : T(0);
        for (int64_t ch = 0; ch < C; ++ch) {
            T acc = T(0);
            for (int j = 0; j < 4; ++j) {
                if (c.cx[j] < 0 || c.cx[j] >= W || c.cy[j] < 0 || c.cy[j] >= H) continue;
                acc += c.wgt[j] * src[(ch * H + c.cy[j]) * W + c.cx[j]];
            }
            out[(ch * H + y) * W + x] = acc;
        }
    }
}

} // namespace

template <typename T>
void warp_bilinear_serial(int64_t C, int64_t H, int64_t W, const T* src, const T* flow, T* out,
                          T* inb) {
    for (int64_t y = 0; y < H; ++y) warp_row(y, C, H, W, src, flow, out, inb);
}

template <typename T>
void warp_bilinear_omp(int64_t C, int64_t H, int64_t W, const T* src, const T* flow, T* out,
                       T* inb) {
#pragma omp parallel for schedule(static)
    for (int64_t y = 0; y < H; ++y) warp_row(y, C, H, W, src, flow, out, inb);
}

template <typename T>
void warp_bilinear_dgrad_serial(int64_t C, int64_t H, int64_t W, const T* flow, const T* gout,
                                T* gsrc) {
    for (int64_t ch = 0; ch < C; ++ch)
        for (int64_t y = 0; y < H; ++y)
            for (int64_t x = 0; x < W; ++x) {
                const T dx = flow[(y * W + x) * 2 + 0];
                const T dy = flow[(y * W + x) * 2 + 1];
                const auto c = warp_corners<T>(T(x) + dx, T(y) + dy, H, W);
                const T g = gout[(ch * H + y) * W + x];
                for (int j = 0; j < 4; ++j) {
                    if (c.cx[j] < 0 || c.cx[j] >= W || c.cy[j] < 0 || c.cy[j] >= H) continue;
                    gsrc[(ch * H + c.cy[j]) * W + c.cx[j]] += c.wgt[j] * g;
                }
            }
}

template <typename T>
void warp_bilinear_dgrad_omp(int64_t C, int64_t H, int64_t W, const T* flow, const T* gout,
                             T* gsrc) {
#pragma omp parallel for schedule(static)
    for (int64_t ch = 0; ch < C; ++ch)
        for (int64_t y = 0; y < H; ++y)
            for (int64_t x = 0; x < W; ++x) {
                const T dx = flow[(y * W + x) * 2 + 0];
                const T dy = flow[(y * W + x) * 2 + 1];
                const auto c = warp_corners<T>(T(x) + dx, T(y) + dy, H, W);
                const T g = gout[(ch * H + y) * W + x];
                for (int j = 0; j < 4; ++j) {
                    if (c.cx[j] < 0 || c.cx[j] >= W || c.cy[j] < 0 || c.cy[j] >= H) continue;
                    gsrc[(ch * H + c.cy[j]) * W + c.cx[j]] += c.wgt[j] * g;
                }
            }
}

// --- temporal channel shift ----------------------------------------------------

namespace {

template <typename T>
void shift_frame(int64_t t, int64_t Tn, int64_t C, int64_t HW, int64_t f, bool adjoint,
                 const T* x, T* y) {
    // Forward: band [0,f) <- frame t-1, band [f,2f) <- frame t+1.
    // Adjoint swaps the source directions.
    const int64_t prev = adjoint ? t + 1 : t - 1;
    const int64_t next = adjoint ? t - 1 : t + 1;
    T* yt = y + t * C * HW;
    const T* xprev = (prev >= 0 && prev < Tn) ? x + prev * C * HW : nullptr;
    const T* xnext = (next >= 0 && next < Tn) ? x + next * C * HW : nullptr;
    if (xprev)
        std::memcpy(yt, xprev, static_cast<size_t>(f * HW) * sizeof(T));
    else
        std::memset(yt, 0, static_cast<size_t>(f * HW) * sizeof(T));
    if (xnext)
        std::memcpy(yt + f * HW, xnext + f * HW, static_cast<size_t>(f * HW) * sizeof(T));
    else
        std::memset(yt + f * HW, 0, static_cast<size_t>(f * HW) * sizeof(T));
    std::memcpy(yt + 2 * f * HW, x + t * C * HW + 2 * f * HW,
                static_cast<size_t>((C - 2 * f) * HW) * sizeof(T));
}

} // namespace

template <typename T>
void temporal_shift_serial(int64_t Tn, int64_t C, int64_t H, int64_t W, int64_t f, bool adjoint,
                           const T* x, T* y) {
    const int64_t HW = H * W;
    for (int64_t t = 0; t < Tn; ++t) shift_frame(t, Tn, C, HW, f, adjoint, x, y);
}

template <typename T>
void temporal_shift_omp(int64_t Tn, int64_t C, int64_t H, int64_t W, int64_t f, bool adjoint,
                        const T* x, T* y) {
    const int64_t HW = H * W;
#pragma omp parallel for schedule(static)
    for (int64_t t = 0; t < Tn; ++t) shift_frame(t, Tn, C, HW, f, adjoint, x, y);
}

// --- optimizer ---------------------------------------------------------------

template <typename T>
void adam_update_serial(int64_t n, T* p, const T* g, T* m, T* v, T lr, T beta1, T beta2, T eps,
                        T bias1, T bias2) {
    for (int64_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
        v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / bias1) / (std::sqrt(v[i] / bias2) + eps);
    }
}

template <typename T>
void adam_update_omp(int64_t n, T* p, const T* g, T* m, T* v, T lr, T beta1, T beta2, T eps,
                     T bias1, T bias2) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
        v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / bias1) / (std::sqrt(v[i] / bias2) + eps);
    }
}

// --- instantiations -----------------------------------------------------------

#define VINPAINT_KERNELS_INSTANTIATE(T)                                                          \
    template void unary_forward_serial<T>(Unary, std::int64_t, const T*, T*, T);                 \
    template void unary_forward_omp<T>(Unary, std::int64_t, const T*, T*, T);                    \
    template void unary_backward_serial<T>(Unary, std::int64_t, const T*, const T*, const T*,    \
                                           T*, T);                                               \
    template void unary_backward_omp<T>(Unary, std::int64_t, const T*, const T*, const T*, T*,   \
                                        T);                                                      \
    template void binary_forward_serial<T>(Binary, std::int64_t, const T*, std::int64_t,         \
                                           const T*, std::int64_t, T*);                          \
    template void binary_forward_omp<T>(Binary, std::int64_t, const T*, std::int64_t, const T*,  \
                                        std::int64_t, T*);                                       \
    template void where_serial<T>(std::int64_t, const T*, const T*, const T*, T*);               \
    template void where_omp<T>(std::int64_t, const T*, const T*, const T*, T*);                  \
    template void masked_acc_serial<T>(std::int64_t, const T*, bool, const T*, T*);              \
    template void masked_acc_omp<T>(std::int64_t, const T*, bool, const T*, T*);                 \
    template void axis_reduce_sum_serial<T>(std::int64_t, const std::int64_t*, const bool*,      \
                                            const T*, T*);                                       \
    template void axis_reduce_sum_omp<T>(std::int64_t, const std::int64_t*, const bool*,         \
                                         const T*, T*);                                          \
    template T block_sum_serial<T>(std::int64_t, const T*);                                      \
    template T block_sum_omp<T>(std::int64_t, const T*);                                         \
    template T block_abs_sum_serial<T>(std::int64_t, const T*);                                  \
    template T block_abs_sum_omp<T>(std::int64_t, const T*);                                     \
    template void matmul_nn_serial<T>(std::int64_t, std::int64_t, std::int64_t, const T*,        \
                                      const T*, T*);                                             \
    template void matmul_nn_omp<T>(std::int64_t, std::int64_t, std::int64_t, const T*, const T*, \
                                   T*);                                                          \
    template void matmul_nt_acc_serial<T>(std::int64_t, std::int64_t, std::int64_t, const T*,    \
                                          const T*, T*);                                         \
    template void matmul_nt_acc_omp<T>(std::int64_t, std::int64_t, std::int64_t, const T*,       \
                                       const T*, T*);                                            \
    template void matmul_tn_acc_serial<T>(std::int64_t, std::int64_t, std::int64_t, const T*,    \
                                          const T*, T*);                                         \
    template void matmul_tn_acc_omp<T>(std::int64_t, std::int64_t, std::int64_t, const T*,       \
                                       const T*, T*);                                            \
    template void conv2d_forward_serial<T>(std::int64_t, std::int64_t, std::int64_t,             \
                                           std::int64_t, std::int64_t, std::int64_t,             \
                                           std::int64_t, std::int64_t, std::int64_t, const T*,   \
                                           const T*, const T*, T*);                              \
    template void conv2d_forward_omp<T>(std::int64_t, std::int64_t, std::int64_t, std::int64_t,  \
                                        std::int64_t, std::int64_t, std::int64_t, std::int64_t,  \
                                        std::int64_t, const T*, const T*, const T*, T*);         \
    template void conv2d_dgrad_serial<T>(std::int64_t, std::int64_t, std::int64_t, std::int64_t, \
                                         std::int64_t, std::int64_t, std::int64_t, std::int64_t, \
                                         std::int64_t, const T*, const T*, T*);                  \
    template void conv2d_dgrad_omp<T>(std::int64_t, std::int64_t, std::int64_t, std::int64_t,    \
                                      std::int64_t, std::int64_t, std::int64_t, std::int64_t,    \
                                      std::int64_t, const T*, const T*, T*);                     \
    template void conv2d_wgrad_serial<T>(std::int64_t, std::int64_t, std::int64_t, std::int64_t, \
                                         std::int64_t, std::int64_t, std::int64_t, std::int64_t, \
                                         std::int64_t, const T*, const T*, T*);                  \
    template void conv2d_wgrad_omp<T>(std::int64_t, std::int64_t, std::int64_t, std::int64_t,    \
                                      std::int64_t, std::int64_t, std::int64_t, std::int64_t,    \
                                      std::int64_t, const T*, const T*, T*);                     \
    template void conv2d_bgrad_serial<T>(std::int64_t, std::int64_t, std::int64_t, std::int64_t, \
                                         const T*, T*);                                          \
    template void conv2d_bgrad_omp<T>(std::int64_t, std::int64_t, std::int64_t, std::int64_t,    \
                                      const T*, T*);                                             \
    template void conv3d_forward_serial<T>(                                                      \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, const T*, const T*, const T*, T*);             \
    template void conv3d_forward_omp<T>(                                                         \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, const T*, const T*, const T*, T*);             \
    template void conv3d_dgrad_serial<T>(                                                        \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, const T*, const T*, T*);                       \
    template void conv3d_dgrad_omp<T>(                                                           \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, const T*, const T*, T*);                       \
    template void conv3d_wgrad_serial<T>(                                                        \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, const T*, const T*, T*);                       \
    template void conv3d_wgrad_omp<T>(                                                           \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t,      \
        std::int64_t, std::int64_t, std::int64_t, const T*, const T*, T*);                       \
    template void conv3d_bgrad_serial<T>(std::int64_t, std::int64_t, std::int64_t, std::int64_t, \
                                         std::int64_t, const T*, T*);                            \
    template void conv3d_bgrad_omp<T>(std::int64_t, std::int64_t, std::int64_t, std::int64_t,    \
                                      std::int64_t, const T*, T*);                               \
    template void warp_bilinear_serial<T>(std::int64_t, std::int64_t, std::int64_t, const T*,    \
                                          const T*, T*, T*);                                     \
    template void warp_bilinear_omp<T>(std::int64_t, std::int64_t, std::int64_t, const T*,       \
                                       const T*, T*, T*);                                        \
    template void warp_bilinear_dgrad_serial<T>(std::int64_t, std::int64_t, std::int64_t,        \
                                                const T*, const T*, T*);                         \
    template void warp_bilinear_dgrad_omp<T>(std::int64_t, std::int64_t, std::int64_t, const T*, \
                                             const T*, T*);                                      \
    template void temporal_shift_serial<T>(std::int64_t, std::int64_t, std::int64_t,             \
                                           std::int64_t, std::int64_t, bool, const T*, T*);      \
    template void temporal_shift_omp<T>(std::int64_t, std::int64_t, std::int64_t, std::int64_t,  \
                                        std::int64_t, bool, const T*, T*);                       \
    template void adam_update_serial<T>(std::int64_t, T*, const T*, T*, T*, T, T, T, T, T, T);   \
    template void adam_update_omp<T>(std::int64_t, T*, const T*, T*, T*, T, T, T, T, T, T);

VINPAINT_KERNELS_INSTANTIATE(float)
VINPAINT_KERNELS_INSTANTIATE(double)

#undef VINPAINT_KERNELS_INSTANTIATE

} // namespace vinpaint::kernels
