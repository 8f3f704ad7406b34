#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "vinpaint/rng.hpp"
#include "vinpaint/tape.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint {

// Kernel dispatch mode. Parallel (OpenMP) by default; the tests and the
// kernel benchmark flip it to run the serial reference implementations.
void set_parallel_kernels(bool on);
bool parallel_kernels();

} // namespace vinpaint

namespace vinpaint::ops {

// Differentiable tensor ops. Every op validates input shapes (dim_error),
// verifies its outputs are finite (numeric_error naming the op), and — when
// `tape` is non-null and an input requires grad — records a backward closure
// that accumulates into the inputs' grad buffers. Pass tape = nullptr for
// inference-only evaluation.

// --- convolutions -------------------------------------------------------------

// x [N,C,H,W], w [K,C,kh,kw], b [K] (or default-constructed for no bias).
template <typename T>
Tensor<T> conv2d(Tape* tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                 std::int64_t stride, std::int64_t pad);

// Adjoint of conv2d. x [N,C,H,W], w [C,K,kh,kw], output [N,K,(H-1)s-2p+kh,...].
template <typename T>
Tensor<T> conv_transpose2d(Tape* tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                           std::int64_t stride, std::int64_t pad);

// x [N,C,D,H,W], w [K,C,kd,kh,kw]; stride/pad given per (depth, height, width).
template <typename T>
Tensor<T> conv3d(Tape* tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                 const std::array<std::int64_t, 3>& stride, const std::array<std::int64_t, 3>& pad);

// --- pointwise ----------------------------------------------------------------

template <typename T> Tensor<T> sigmoid(Tape* tape, const Tensor<T>& x);
template <typename T> Tensor<T> relu(Tape* tape, const Tensor<T>& x);
template <typename T> Tensor<T> leaky_relu(Tape* tape, const Tensor<T>& x, T alpha);
template <typename T> Tensor<T> tanh(Tape* tape, const Tensor<T>& x);
template <typename T> Tensor<T> abs(Tape* tape, const Tensor<T>& x);
template <typename T> Tensor<T> neg(Tape* tape, const Tensor<T>& x);

// Elementwise; shapes must match exactly, or one operand may be a single
// element (broadcast scalar).
template <typename T> Tensor<T> add(Tape* tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(Tape* tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(Tape* tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> add_scalar(Tape* tape, const Tensor<T>& x, T v);
template <typename T> Tensor<T> mul_scalar(Tape* tape, const Tensor<T>& x, T v);

// out[i] = cond[i] != 0 ? a[i] : b[i]; the selected branch passes through
// bit-exact. cond carries no gradient.
template <typename T>
Tensor<T> where(Tape* tape, const Tensor<T>& cond, const Tensor<T>& a, const Tensor<T>& b);

// --- reductions ---------------------------------------------------------------

template <typename T> Tensor<T> sum(Tape* tape, const Tensor<T>& x);   // scalar output
template <typename T> Tensor<T> mean(Tape* tape, const Tensor<T>& x);  // scalar output

// Sum / mean over the given axes (kept axes survive in order). Axes must be
// in range and unique.
template <typename T>
Tensor<T> reduce_sum(Tape* tape, const Tensor<T>& x, const std::vector<std::size_t>& axes);
template <typename T>
Tensor<T> reduce_mean(Tape* tape, const Tensor<T>& x, const std::vector<std::size_t>& axes);

// --- structure ----------------------------------------------------------------

template <typename T> Tensor<T> matmul(Tape* tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> reshape(Tape* tape, const Tensor<T>& x, Shape s);
template <typename T> Tensor<T> concat_ch(Tape* tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> swap01(Tape* tape, const Tensor<T>& x);

// Extract index i along axis 0, keeping the axis: [N, ...] -> [1, ...].
template <typename T> Tensor<T> slice0(Tape* tape, const Tensor<T>& x, std::size_t i);

// Temporal channel shift on [T,C,H,W]: channels [0,f) come from frame t-1,
// [f,2f) from frame t+1 (zeros past the clip ends), the rest pass through
// untouched. Requires 1 <= f and 2f <= C.
template <typename T>
Tensor<T> temporal_shift(Tape* tape, const Tensor<T>& x, std::int64_t f);

// --- helpers ------------------------------------------------------------------

template <typename T>
Tensor<T> randn(Rng& rng, Shape s, T stddev) {
    Tensor<T> t(std::move(s));
    T* p = t.data();
    for (std::size_t i = 0; i < t.numel(); ++i) p[i] = static_cast<T>(rng.normal()) * stddev;
    return t;
}

// Repeat a [N,1,H,W] tensor to [N,C,H,W]. No gradient (mask utility).
template <typename T>
Tensor<T> repeat_ch(const Tensor<T>& x, std::size_t c) {
    if (x.rank() != 4 || x.extent(1) != 1)
        throw dim_error("repeat_ch expects [N,1,H,W], got " + shape_str(x.shape()));
    const std::size_t n = x.extent(0), hw = x.extent(2) * x.extent(3);
    Tensor<T> out(Shape{n, c, x.extent(2), x.extent(3)});
    const T* src = x.data();
    T* dst = out.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j)
            for (std::size_t k = 0; k < hw; ++k) dst[(i * c + j) * hw + k] = src[i * hw + k];
    return out;
}

// --- finite-difference gradient check -------------------------------------------

template <typename T>
struct GradCheckResult {
    T max_abs_err = T(0);
    T max_rel_err = T(0);
    bool ok = true;
};

// fwd must rebuild the computation from the current contents of `inputs` and
// return a scalar loss. Compares tape gradients against central differences.
// Leaves the inputs as it found them (grads zeroed, requires_grad off).
template <typename T, typename F>
GradCheckResult<T> grad_check(F&& fwd, std::vector<Tensor<T>> inputs, T eps, T tol) {
    for (auto& in : inputs) {
        in.set_requires_grad(true);
        in.zero_grad();
    }
    Tape tape;
    Tensor<T> loss = fwd(&tape);
    if (loss.numel() != 1) throw dim_error("grad_check: loss must be scalar");
    backward(tape, loss);

    GradCheckResult<T> res;
    for (auto& in : inputs) {
        in.ensure_grad();
        const T* g = in.grad();
        T* p = in.data();
        for (std::size_t i = 0; i < in.numel(); ++i) {
            const T saved = p[i];
            p[i] = saved + eps;
            const T fp = fwd(nullptr).item();
            p[i] = saved - eps;
            const T fm = fwd(nullptr).item();
            p[i] = saved;
            const T fd = (fp - fm) / (T(2) * eps);
            const T abs_err = std::fabs(fd - g[i]);
            const T rel_err = abs_err / std::max(T(1), std::max(std::fabs(fd), std::fabs(g[i])));
            res.max_abs_err = std::max(res.max_abs_err, abs_err);
            res.max_rel_err = std::max(res.max_rel_err, rel_err);
            if (rel_err > tol) res.ok = false;
        }
    }
    for (auto& in : inputs) {
        in.zero_grad();
        in.set_requires_grad(false);
    }
    return res;
}

} // namespace vinpaint::ops
