#pragma once

#include <cstdint>

namespace vinpaint::kernels {

// Low-level numeric kernels. Every kernel comes in two variants:
//   *_serial  - plain loop nest, the reference the tests compare against
//   *_omp     - OpenMP-parallel version used by the ops layer
//
// The parallel variants split work only across independent output elements
// (or disjoint planes) and keep the per-element accumulation order identical
// to the serial variant, so the two are bit-identical for the same inputs,
// at any thread count. Global reductions use a fixed block decomposition
// (kReduceBlock) in both variants for the same reason.

inline constexpr std::int64_t kReduceBlock = 1024;

enum class Unary { sigmoid, relu, leaky_relu, tanh, abs, neg };
enum class Binary { add, sub, mul };

// --- elementwise ------------------------------------------------------------

template <typename T>
void unary_forward_serial(Unary k, std::int64_t n, const T* x, T* y, T alpha);
template <typename T>
void unary_forward_omp(Unary k, std::int64_t n, const T* x, T* y, T alpha);

// gx += d(unary)/dx * gy   (x = input, y = forward output)
template <typename T>
void unary_backward_serial(Unary k, std::int64_t n, const T* x, const T* y, const T* gy, T* gx, T alpha);
template <typename T>
void unary_backward_omp(Unary k, std::int64_t n, const T* x, const T* y, const T* gy, T* gx, T alpha);

// sa/sb are element strides (1 = dense, 0 = broadcast a single scalar).
template <typename T>
void binary_forward_serial(Binary k, std::int64_t n, const T* a, std::int64_t sa, const T* b,
                           std::int64_t sb, T* y);
template <typename T>
void binary_forward_omp(Binary k, std::int64_t n, const T* a, std::int64_t sa, const T* b,
                        std::int64_t sb, T* y);

// --- reductions -------------------------------------------------------------

// Fixed-block sum: per-block partials (blocks of kReduceBlock elements,
// each accumulated left to right) combined left to right. The blocking is
// part of the operation's definition, which is what makes the parallel
// variant bit-identical to this one.
template <typename T>
T block_sum_serial(std::int64_t n, const T* x);
template <typename T>
T block_sum_omp(std::int64_t n, const T* x);

template <typename T>
T block_abs_sum_serial(std::int64_t n, const T* x);
template <typename T>
T block_abs_sum_omp(std::int64_t n, const T* x);

// y[i] = m[i] != 0 ? a[i] : b[i]. Pure select, no arithmetic, so the picked
// branch passes through bit-exact.
template <typename T>
void where_serial(std::int64_t n, const T* m, const T* a, const T* b, T* y);
template <typename T>
void where_omp(std::int64_t n, const T* m, const T* a, const T* b, T* y);

// acc[i] += gy[i] where (m[i] != 0) == when_nonzero, else unchanged.
template <typename T>
void masked_acc_serial(std::int64_t n, const T* m, bool when_nonzero, const T* gy, T* acc);
template <typename T>
void masked_acc_omp(std::int64_t n, const T* m, bool when_nonzero, const T* gy, T* acc);

// Sum x over the axes flagged in reduce_axis (length = rank); y has the kept
// axes in original order. Per output element the reduced coordinates are
// visited in row-major order.
template <typename T>
void axis_reduce_sum_serial(std::int64_t rank, const std::int64_t* shape, const bool* reduce_axis,
                            const T* x, T* y);
template <typename T>
void axis_reduce_sum_omp(std::int64_t rank, const std::int64_t* shape, const bool* reduce_axis,
                         const T* x, T* y);

// --- matmul -----------------------------------------------------------------

// y[M,N] = a[M,K] * b[K,N]; accumulation over k in ascending order.
template <typename T>
void matmul_nn_serial(std::int64_t M, std::int64_t K, std::int64_t N, const T* a, const T* b, T* y);
template <typename T>
void matmul_nn_omp(std::int64_t M, std::int64_t K, std::int64_t N, const T* a, const T* b, T* y);

// y[M,K] += a[M,N] * b[K,N]^T   (grad wrt lhs)
template <typename T>
void matmul_nt_acc_serial(std::int64_t M, std::int64_t N, std::int64_t K, const T* a, const T* b, T* y);
template <typename T>
void matmul_nt_acc_omp(std::int64_t M, std::int64_t N, std::int64_t K, const T* a, const T* b, T* y);

// y[K,N] += a[M,K]^T * b[M,N]   (grad wrt rhs)
template <typename T>
void matmul_tn_acc_serial(std::int64_t M, std::int64_t K, std::int64_t N, const T* a, const T* b, T* y);
template <typename T>
void matmul_tn_acc_omp(std::int64_t M, std::int64_t K, std::int64_t N, const T* a, const T* b, T* y);

// --- 2-D convolution ----------------------------------------------------------
// x[N,C,H,W], w[K,C,kh,kw], b[K], y[N,K,Ho,Wo]; zero padding, per-output
// accumulation order (c,ky,kx) ascending, bias first.

template <typename T>
void conv2d_forward_serial(std::int64_t N, std::int64_t C, std::int64_t H, std::int64_t W,
                           std::int64_t K, std::int64_t kh, std::int64_t kw, std::int64_t stride,
                           std::int64_t pad, const T* x, const T* w, const T* b, T* y);
template <typename T>
void conv2d_forward_omp(std::int64_t N, std::int64_t C, std::int64_t H, std::int64_t W,
                        std::int64_t K, std::int64_t kh, std::int64_t kw, std::int64_t stride,
                        std::int64_t pad, const T* x, const T* w, const T* b, T* y);

// gx += conv2d^T(gy, w)
template <typename T>
void conv2d_dgrad_serial(std::int64_t N, std::int64_t C, std::int64_t H, std::int64_t W,
                         std::int64_t K, std::int64_t kh, std::int64_t kw, std::int64_t stride,
                         std::int64_t pad, const T* gy, const T* w, T* gx);
template <typename T>
void conv2d_dgrad_omp(std::int64_t N, std::int64_t C, std::int64_t H, std::int64_t W,
                      std::int64_t K, std::int64_t kh, std::int64_t kw, std::int64_t stride,
                      std::int64_t pad, const T* gy, const T* w, T* gx);

// gw += sum_n gy * x
template <typename T>
void conv2d_wgrad_serial(std::int64_t N, std::int64_t C, std::int64_t H, std::int64_t W,
                         std::int64_t K, std::int64_t kh, std::int64_t kw, std::int64_t stride,
                         std::int64_t pad, const T* gy, const T* x, T* gw);
template <typename T>
void conv2d_wgrad_omp(std::int64_t N, std::int64_t C, std::int64_t H, std::int64_t W,
                      std::int64_t K, std::int64_t kh, std::int64_t kw, std::int64_t stride,
                      std::int64_t pad, const T* gy, const T* x, T* gw);

template <typename T>
void conv2d_bgrad_serial(std::int64_t N, std::int64_t K, std::int64_t Ho, std::int64_t Wo,
                         const T* gy, T* gb);
template <typename T>
void conv2d_bgrad_omp(std::int64_t N, std::int64_t K, std::int64_t Ho, std::int64_t Wo,
                      const T* gy, T* gb);

// --- 3-D convolution ----------------------------------------------------------
// x[N,C,D,H,W], w[K,C,kd,kh,kw]; per-output accumulation order (c,kd,ky,kx).

template <typename T>
void conv3d_forward_serial(std::int64_t N, std::int64_t C, std::int64_t D, std::int64_t H,
                           std::int64_t W, std::int64_t K, std::int64_t kd, std::int64_t kh,
                           std::int64_t kw, std::int64_t sd, std::int64_t sh, std::int64_t sw,
                           std::int64_t pd, std::int64_t ph, std::int64_t pw, const T* x,
                           const T* w, const T* b, T* y);
template <typename T>
void conv3d_forward_omp(std::int64_t N, std::int64_t C, std::int64_t D, std::int64_t H,
                        std::int64_t W, std::int64_t K, std::int64_t kd, std::int64_t kh,
                        std::int64_t kw, std::int64_t sd, std::int64_t sh, std::int64_t sw,
                        std::int64_t pd, std::int64_t ph, std::int64_t pw, const T* x, const T* w,
                        const T* b, T* y);

template <typename T>
void conv3d_dgrad_serial(std::int64_t N, std::int64_t C, std::int64_t D, std::int64_t H,
                         std::int64_t W, std::int64_t K, std::int64_t kd, std::int64_t kh,
                         std::int64_t kw, std::int64_t sd, std::int64_t sh, std::int64_t sw,
                         std::int64_t pd, std::int64_t ph, std::int64_t pw, const T* gy,
                         const T* w, T* gx);
template <typename T>
void conv3d_dgrad_omp(std::int64_t N, std::int64_t C, std::int64_t D, std::int64_t H,
                      std::int64_t W, std::int64_t K, std::int64_t kd, std::int64_t kh,
                      std::int64_t kw, std::int64_t sd, std::int64_t sh, std::int64_t sw,
                      std::int64_t pd, std::int64_t ph, std::int64_t pw, const T* gy, const T* w,
                      T* gx);

template <typename T>
void conv3d_wgrad_serial(std::int64_t N, std::int64_t C, std::int64_t D, std::int64_t H,
                         std::int64_t W, std::int64_t K, std::int64_t kd, std::int64_t kh,
                         std::int64_t kw, std::int64_t sd, std::int64_t sh, std::int64_t sw,
                         std::int64_t pd, std::int64_t ph, std::int64_t pw, const T* gy,
                         const T* x, T* gw);
template <typename T>
void conv3d_wgrad_omp(std::int64_t N, std::int64_t C, std::int64_t D, std::int64_t H,
                      std::int64_t W, std::int64_t K, std::int64_t kd, std::int64_t kh,
                      std::int64_t kw, std::int64_t sd, std::int64_t sh, std::int64_t sw,
                      std::int64_t pd, std::int64_t ph, std::int64_t pw, const T* gy, const T* x,
                      T* gw);

template <typename T>
void conv3d_bgrad_serial(std::int64_t N, std::int64_t K, std::int64_t Do, std::int64_t Ho,
                         std::int64_t Wo, const T* gy, T* gb);
template <typename T>
void conv3d_bgrad_omp(std::int64_t N, std::int64_t K, std::int64_t Do, std::int64_t Ho,
                      std::int64_t Wo, const T* gy, T* gb);

// --- bilinear warp -----------------------------------------------------------
// src[C,H,W], flow[H,W,2] (dx,dy in pixels); out(x,y) samples src at
// (x+dx, y+dy) with zero fill outside. inb[H,W] gets 1 where the sampling
// position lies within [0,W-1]x[0,H-1], else 0. inb may be null.

template <typename T>
void warp_bilinear_serial(std::int64_t C, std::int64_t H, std::int64_t W, const T* src,
                          const T* flow, T* out, T* inb);
template <typename T>
void warp_bilinear_omp(std::int64_t C, std::int64_t H, std::int64_t W, const T* src,
                       const T* flow, T* out, T* inb);

// gsrc += warp^T(gout); scatter through the same four corners.
// Planes are disjoint per channel, so the parallel variant splits over C.
template <typename T>
void warp_bilinear_dgrad_serial(std::int64_t C, std::int64_t H, std::int64_t W, const T* flow,
                                const T* gout, T* gsrc);
template <typename T>
void warp_bilinear_dgrad_omp(std::int64_t C, std::int64_t H, std::int64_t W, const T* flow,
                             const T* gout, T* gsrc);

// --- temporal channel shift ----------------------------------------------------
// x[T,C,H,W]: channels [0,f) take frame t-1, [f,2f) take frame t+1, the rest
// pass through; missing neighbours are zero-filled. adjoint=true applies the
// transpose (for backward).

template <typename T>
void temporal_shift_serial(std::int64_t Tn, std::int64_t C, std::int64_t H, std::int64_t W,
                           std::int64_t f, bool adjoint, const T* x, T* y);
template <typename T>
void temporal_shift_omp(std::int64_t Tn, std::int64_t C, std::int64_t H, std::int64_t W,
                        std::int64_t f, bool adjoint, const T* x, T* y);

// --- optimizer ---------------------------------------------------------------

template <typename T>
void adam_update_serial(std::int64_t n, T* p, const T* g, T* m, T* v, T lr, T beta1, T beta2,
                        T eps, T bias1, T bias2);
template <typename T>
void adam_update_omp(std::int64_t n, T* p, const T* g, T* m, T* v, T lr, T beta1, T beta2, T eps,
                     T bias1, T bias2);

} // namespace vinpaint::kernels
