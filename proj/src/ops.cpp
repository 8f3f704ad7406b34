#include "vinpaint/ops.hpp"

#include <algorithm>
#include <cstring>
#include <memory>
#include <set>

#include "vinpaint/kernels.hpp"

namespace vinpaint {

namespace {
bool g_parallel_kernels = true;
}

void set_parallel_kernels(bool on) { g_parallel_kernels = on; }
bool parallel_kernels() { return g_parallel_kernels; }

} // namespace vinpaint

namespace vinpaint::ops {

namespace k = vinpaint::kernels;
using std::int64_t;

namespace {

int64_t i64(std::size_t v) { return static_cast<int64_t>(v); }

// Single-add-per-element accumulators; deterministic at any thread count.

template <typename T>
void acc_add(int64_t n, const T* g, T* acc) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) acc[i] += g[i];
}

template <typename T>
void acc_scaled(int64_t n, const T* g, T s, T* acc) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) acc[i] += s * g[i];
}

template <typename T>
void acc_mul(int64_t n, const T* g, const T* f, T* acc) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) acc[i] += g[i] * f[i];
}

template <typename T>
T dispatch_block_sum(int64_t n, const T* x) {
    return parallel_kernels() ? k::block_sum_omp(n, x) : k::block_sum_serial(n, x);
}

template <typename T>
bool wants_grad(Tape* tape, std::initializer_list<Tensor<T>> ins) {
    if (!tape) return false;
    for (const auto& t : ins)
        if (t.defined() && t.requires_grad()) return true;
    return false;
}

void check_conv_geom(const char* op, int64_t stride, int64_t pad) {
    if (stride < 1) throw dim_error(std::string(op) + ": stride must be >= 1");
    if (pad < 0) throw dim_error(std::string(op) + ": pad must be >= 0");
}

} // namespace

// --- conv2d -------------------------------------------------------------------

template <typename T>
Tensor<T> conv2d(Tape* tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                 int64_t stride, int64_t pad) {
    if (x.rank() != 4) throw dim_error("conv2d: input must be [N,C,H,W], got " + shape_str(x.shape()));
    if (w.rank() != 4) throw dim_error("conv2d: weight must be [K,C,kh,kw], got " + shape_str(w.shape()));
    if (w.extent(1) != x.extent(1))
        throw dim_error("conv2d: weight channels " + std::to_string(w.extent(1)) +
                        " vs input channels " + std::to_string(x.extent(1)));
    check_conv_geom("conv2d", stride, pad);
    const int64_t N = i64(x.extent(0)), C = i64(x.extent(1)), H = i64(x.extent(2)),
                  W = i64(x.extent(3));
    const int64_t K = i64(w.extent(0)), kh = i64(w.extent(2)), kw = i64(w.extent(3));
    if (b.defined() && (b.rank() != 1 || i64(b.extent(0)) != K))
        throw dim_error("conv2d: bias must be [K], got " + shape_str(b.shape()));
    if (H + 2 * pad < kh || W + 2 * pad < kw)
        throw dim_error("conv2d: kernel exceeds padded input");
    const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
    const int64_t Wo = (W + 2 * pad - kw) / stride + 1;

    Tensor<T> y(Shape{x.extent(0), w.extent(0), static_cast<std::size_t>(Ho),
                      static_cast<std::size_t>(Wo)});
    const T* bp = b.defined() ? b.data() : nullptr;
    if (parallel_kernels())
        k::conv2d_forward_omp(N, C, H, W, K, kh, kw, stride, pad, x.data(), w.data(), bp, y.data());
    else
        k::conv2d_forward_serial(N, C, H, W, K, kh, kw, stride, pad, x.data(), w.data(), bp,
                                 y.data());
    ensure_finite(y, "conv2d");

    if (wants_grad(tape, {x, w, b})) {
        y.set_requires_grad(true);
        tape->record("conv2d", [=, x = x, w = w, b = b]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            if (x.requires_grad()) {
                x.ensure_grad();
                if (parallel_kernels())
                    k::conv2d_dgrad_omp(N, C, H, W, K, kh, kw, stride, pad, gy, w.data(), x.grad());
                else
                    k::conv2d_dgrad_serial(N, C, H, W, K, kh, kw, stride, pad, gy, w.data(),
                                           x.grad());
            }
            if (w.requires_grad()) {
                w.ensure_grad();
                if (parallel_kernels())
                    k::conv2d_wgrad_omp(N, C, H, W, K, kh, kw, stride, pad, gy, x.data(), w.grad());
                else
                    k::conv2d_wgrad_serial(N, C, H, W, K, kh, kw, stride, pad, gy, x.data(),
                                           w.grad());
            }
            if (b.defined() && b.requires_grad()) {
                b.ensure_grad();
                if (parallel_kernels())
                    k::conv2d_bgrad_omp(N, K, Ho, Wo, gy, b.grad());
                else
                    k::conv2d_bgrad_serial(N, K, Ho, Wo, gy, b.grad());
            }
        });
    }
    return y;
}

// --- conv_transpose2d -----------------------------------------------------------

template <typename T>
Tensor<T> conv_transpose2d(Tape* tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                           int64_t stride, int64_t pad) {
    if (x.rank() != 4)
        throw dim_error("conv_transpose2d: input must be [N,C,H,W], got " + shape_str(x.shape()));
    if (w.rank() != 4)
        throw dim_error("conv_transpose2d: weight must be [C,K,kh,kw], got " + shape_str(w.shape()));
    if (w.extent(0) != x.extent(1))
        throw dim_error("conv_transpose2d: weight in-channels " + std::to_string(w.extent(0)) +
                        " vs input channels " + std::to_string(x.extent(1)));
    check_conv_geom("conv_transpose2d", stride, pad);
    const int64_t N = i64(x.extent(0)), C = i64(x.extent(1)), H = i64(x.extent(2)),
                  W = i64(x.extent(3));
    const int64_t K = i64(w.extent(1)), kh = i64(w.extent(2)), kw = i64(w.extent(3));
    if (b.defined() && (b.rank() != 1 || i64(b.extent(0)) != K))
        throw dim_error("conv_transpose2d: bias must be [K], got " + shape_str(b.shape()));
    const int64_t Ho = (H - 1) * stride - 2 * pad + kh;
    const int64_t Wo = (W - 1) * stride - 2 * pad + kw;
    if (Ho < 1 || Wo < 1) throw dim_error("conv_transpose2d: output would be empty");

    Tensor<T> y(Shape{x.extent(0), w.extent(1), static_cast<std::size_t>(Ho),
                      static_cast<std::size_t>(Wo)});
    // Bias first, then the adjoint-conv scatter on top; the underlying conv
    // here maps y-space [N,K,Ho,Wo] -> x-space [N,C,H,W] with weight [C,K,kh,kw].
    {
        T* yp = y.data();
        const int64_t plane = Ho * Wo;
#pragma omp parallel for collapse(2) schedule(static)
        for (int64_t n = 0; n < N; ++n)
            for (int64_t c = 0; c < K; ++c) {
                const T v = b.defined() ? b.data()[c] : T(0);
                T* p = yp + (n * K + c) * plane;
                for (int64_t i = 0; i < plane; ++i) p[i] = v;
            }
    }
    if (parallel_kernels())
        k::conv2d_dgrad_omp(N, K, Ho, Wo, C, kh, kw, stride, pad, x.data(), w.data(), y.data());
    else
        k::conv2d_dgrad_serial(N, K, Ho, Wo, C, kh, kw, stride, pad, x.data(), w.data(), y.data());
    ensure_finite(y, "conv_transpose2d");

    if (wants_grad(tape, {x, w, b})) {
        y.set_requires_grad(true);
        tape->record("conv_transpose2d", [=, x = x, w = w, b = b]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            if (x.requires_grad()) {
                x.ensure_grad();
                Tensor<T> tmp(x.shape());
                if (parallel_kernels())
                    k::conv2d_forward_omp(N, K, Ho, Wo, C, kh, kw, stride, pad, gy, w.data(),
                                          static_cast<const T*>(nullptr), tmp.data());
                else
                    k::conv2d_forward_serial(N, K, Ho, Wo, C, kh, kw, stride, pad, gy, w.data(),
                                             static_cast<const T*>(nullptr), tmp.data());
                acc_add(i64(tmp.numel()), tmp.data(), x.grad());
            }
            if (w.requires_grad()) {
                w.ensure_grad();
                if (parallel_kernels())
                    k::conv2d_wgrad_omp(N, K, Ho, Wo, C, kh, kw, stride, pad, x.data(), gy,
                                        w.grad());
                else
                    k::conv2d_wgrad_serial(N, K, Ho, Wo, C, kh, kw, stride, pad, x.data(), gy,
                                           w.grad());
            }
            if (b.defined() && b.requires_grad()) {
                b.ensure_grad();
                if (parallel_kernels())
                    k::conv2d_bgrad_omp(N, K, Ho, Wo, gy, b.grad());
                else
                    k::conv2d_bgrad_serial(N, K, Ho, Wo, gy, b.grad());
            }
        });
    }
    return y;
}

// --- conv3d -------------------------------------------------------------------

template <typename T>
Tensor<T> conv3d(Tape* tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                 const std::array<int64_t, 3>& stride, const std::array<int64_t, 3>& pad) {
    if (x.rank() != 5)
        throw dim_error("conv3d: input must be [N,C,D,H,W], got " + shape_str(x.shape()));
    if (w.rank() != 5)
        throw dim_error("conv3d: weight must be [K,C,kd,kh,kw], got " + shape_str(w.shape()));
    if (w.extent(1) != x.extent(1))
        throw dim_error("conv3d: weight channels " + std::to_string(w.extent(1)) +
                        " vs input channels " + std::to_string(x.extent(1)));
    for (int i = 0; i < 3; ++i) {
        if (stride[static_cast<std::size_t>(i)] < 1) throw dim_error("conv3d: stride must be >= 1");
        if (pad[static_cast<std::size_t>(i)] < 0) throw dim_error("conv3d: pad must be >= 0");
    }
    const int64_t N = i64(x.extent(0)), C = i64(x.extent(1)), D = i64(x.extent(2)),
                  H = i64(x.extent(3)), W = i64(x.extent(4));
    const int64_t K = i64(w.extent(0)), kd = i64(w.extent(2)), kh = i64(w.extent(3)),
                  kw = i64(w.extent(4));
    if (b.defined() && (b.rank() != 1 || i64(b.extent(0)) != K))
        throw dim_error("conv3d: bias must be [K], got " + shape_str(b.shape()));
    const int64_t sd = stride[0], sh = stride[1], sw = stride[2];
    const int64_t pd = pad[0], ph = pad[1], pw = pad[2];
    if (D + 2 * pd < kd || H + 2 * ph < kh || W + 2 * pw < kw)
        throw dim_error("conv3d: kernel exceeds padded input");
    const int64_t Do = (D + 2 * pd - kd) / sd + 1;
    const int64_t Ho = (H + 2 * ph - kh) / sh + 1;
    const int64_t Wo = (W + 2 * pw - kw) / sw + 1;

    Tensor<T> y(Shape{x.extent(0), w.extent(0), static_cast<std::size_t>(Do),
                      static_cast<std::size_t>(Ho), static_cast<std::size_t>(Wo)});
    const T* bp = b.defined() ? b.data() : nullptr;
    if (parallel_kernels())
        k::conv3d_forward_omp(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, x.data(),
                              w.data(), bp, y.data());
    else
        k::conv3d_forward_serial(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, x.data(),
                                 w.data(), bp, y.data());
    ensure_finite(y, "conv3d");

    if (wants_grad(tape, {x, w, b})) {
        y.set_requires_grad(true);
        tape->record("conv3d", [=, x = x, w = w, b = b]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            if (x.requires_grad()) {
                x.ensure_grad();
                if (parallel_kernels())
                    k::conv3d_dgrad_omp(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, gy,
                                        w.data(), x.grad());
                else
                    k::conv3d_dgrad_serial(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw,
                                           gy, w.data(), x.grad());
            }
            if (w.requires_grad()) {
                w.ensure_grad();
                if (parallel_kernels())
                    k::conv3d_wgrad_omp(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, gy,
                                        x.data(), w.grad());
                else
                    k::conv3d_wgrad_serial(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw,
                                           gy, x.data(), w.grad());
            }
            if (b.defined() && b.requires_grad()) {
                b.ensure_grad();
                if (parallel_kernels())
                    k::conv3d_bgrad_omp(N, K, Do, Ho, Wo, gy, b.grad());
                else
                    k::conv3d_bgrad_serial(N, K, Do, Ho, Wo, gy, b.grad());
            }
        });
    }
    return y;
}

// --- pointwise ----------------------------------------------------------------

namespace {

template <typename T>
Tensor<T> unary_op(Tape* tape, const Tensor<T>& x, k::Unary kind, const char* name, T alpha) {
    if (!x.defined()) throw dim_error(std::string(name) + ": undefined input");
    Tensor<T> y(x.shape());
    const int64_t n = i64(x.numel());
    if (parallel_kernels())
        k::unary_forward_omp(kind, n, x.data(), y.data(), alpha);
    else
        k::unary_forward_serial(kind, n, x.data(), y.data(), alpha);
    ensure_finite(y, name);
    if (wants_grad(tape, {x})) {
        y.set_requires_grad(true);
        tape->record(name, [=, x = x]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            x.ensure_grad();
            if (parallel_kernels())
                k::unary_backward_omp(kind, n, x.data(), y.data(), gy, x.grad(), alpha);
            else
                k::unary_backward_serial(kind, n, x.data(), y.data(), gy, x.grad(), alpha);
        });
    }
    return y;
}

} // namespace

template <typename T>
Tensor<T> sigmoid(Tape* tape, const Tensor<T>& x) {
    return unary_op(tape, x, k::Unary::sigmoid, "sigmoid", T(0));
}
template <typename T>
Tensor<T> relu(Tape* tape, const Tensor<T>& x) {
    return unary_op(tape, x, k::Unary::relu, "relu", T(0));
}
template <typename T>
Tensor<T> leaky_relu(Tape* tape, const Tensor<T>& x, T alpha) {
    return unary_op(tape, x, k::Unary::leaky_relu, "leaky_relu", alpha);
}
template <typename T>
Tensor<T> tanh(Tape* tape, const Tensor<T>& x) {
    return unary_op(tape, x, k::Unary::tanh, "tanh", T(0));
}
template <typename T>
Tensor<T> abs(Tape* tape, const Tensor<T>& x) {
    return unary_op(tape, x, k::Unary::abs, "abs", T(0));
}
template <typename T>
Tensor<T> neg(Tape* tape, const Tensor<T>& x) {
    return unary_op(tape, x, k::Unary::neg, "neg", T(0));
}

namespace {

template <typename T>
Tensor<T> binary_op(Tape* tape, const Tensor<T>& a, const Tensor<T>& b, k::Binary kind,
                    const char* name) {
    if (!a.defined() || !b.defined()) throw dim_error(std::string(name) + ": undefined input");
    const bool a_scalar = a.numel() == 1 && !shape_eq(a.shape(), b.shape());
    const bool b_scalar = b.numel() == 1 && !shape_eq(a.shape(), b.shape());
    if (!shape_eq(a.shape(), b.shape()) && !a_scalar && !b_scalar)
        throw dim_error(std::string(name) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                        shape_str(b.shape()));
    const Shape& out_shape = a_scalar ? b.shape() : a.shape();
    Tensor<T> y(out_shape);
    const int64_t n = i64(y.numel());
    const int64_t sa = a_scalar ? 0 : 1;
    const int64_t sb = b_scalar ? 0 : 1;
    if (parallel_kernels())
        k::binary_forward_omp(kind, n, a.data(), sa, b.data(), sb, y.data());
    else
        k::binary_forward_serial(kind, n, a.data(), sa, b.data(), sb, y.data());
    ensure_finite(y, name);

    if (wants_grad(tape, {a, b})) {
        y.set_requires_grad(true);
        tape->record(name, [=, a = a, b = b]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            if (a.requires_grad()) {
                a.ensure_grad();
                if (a_scalar) {
                    if (kind == k::Binary::mul) {
                        Tensor<T> tmp(y.shape());
                        if (parallel_kernels())
                            k::binary_forward_omp(k::Binary::mul, n, gy, int64_t(1), b.data(), sb,
                                                  tmp.data());
                        else
                            k::binary_forward_serial(k::Binary::mul, n, gy, int64_t(1), b.data(),
                                                     sb, tmp.data());
                        a.grad()[0] += dispatch_block_sum(n, tmp.data());
                    } else {
                        a.grad()[0] += dispatch_block_sum(n, gy);
                    }
                } else {
                    if (kind == k::Binary::mul) {
                        if (sb == 0) {
                            acc_scaled(n, gy, b.data()[0], a.grad());
                        } else {
                            acc_mul(n, gy, b.data(), a.grad());
                        }
                    } else {
                        acc_add(n, gy, a.grad());
                    }
                }
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                const T sign = kind == k::Binary::sub ? T(-1) : T(1);
                if (b_scalar) {
                    if (kind == k::Binary::mul) {
                        Tensor<T> tmp(y.shape());
                        if (parallel_kernels())
                            k::binary_forward_omp(k::Binary::mul, n, gy, int64_t(1), a.data(), sa,
                                                  tmp.data());
                        else
                            k::binary_forward_serial(k::Binary::mul, n, gy, int64_t(1), a.data(),
                                                     sa, tmp.data());
                        b.grad()[0] += dispatch_block_sum(n, tmp.data());
                    } else {
                        b.grad()[0] += sign * dispatch_block_sum(n, gy);
                    }
                } else {
                    if (kind == k::Binary::mul) {
                        if (sa == 0) {
                            acc_scaled(n, gy, a.data()[0], b.grad());
                        } else {
                            acc_mul(n, gy, a.data(), b.grad());
                        }
                    } else if (kind == k::Binary::sub) {
                        acc_scaled(n, gy, T(-1), b.grad());
                    } else {
                        acc_add(n, gy, b.grad());
                    }
                }
            }
        });
    }
    return y;
}

} // namespace

template <typename T>
Tensor<T> add(Tape* tape, const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(tape, a, b, k::Binary::add, "add");
}
template <typename T>
Tensor<T> sub(Tape* tape, const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(tape, a, b, k::Binary::sub, "sub");
}
template <typename T>
Tensor<T> mul(Tape* tape, const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(tape, a, b, k::Binary::mul, "mul");
}

template <typename T>
Tensor<T> add_scalar(Tape* tape, const Tensor<T>& x, T v) {
    return add(tape, x, Tensor<T>::scalar(v));
}
template <typename T>
Tensor<T> mul_scalar(Tape* tape, const Tensor<T>& x, T v) {
    return mul(tape, x, Tensor<T>::scalar(v));
}

template <typename T>
Tensor<T> where(Tape* tape, const Tensor<T>& cond, const Tensor<T>& a, const Tensor<T>& b) {
    if (!shape_eq(cond.shape(), a.shape()) || !shape_eq(a.shape(), b.shape()))
        throw dim_error("where: shape mismatch " + shape_str(cond.shape()) + " / " +
                        shape_str(a.shape()) + " / " + shape_str(b.shape()));
    Tensor<T> y(a.shape());
    const int64_t n = i64(y.numel());
    if (parallel_kernels())
        k::where_omp(n, cond.data(), a.data(), b.data(), y.data());
    else
        k::where_serial(n, cond.data(), a.data(), b.data(), y.data());
    // Pure select: inputs were already validated by their producers.
    if (wants_grad(tape, {a, b})) {
        y.set_requires_grad(true);
        tape->record("where", [=, a = a, b = b]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            if (a.requires_grad()) {
                a.ensure_grad();
                if (parallel_kernels())
                    k::masked_acc_omp(n, cond.data(), true, gy, a.grad());
                else
                    k::masked_acc_serial(n, cond.data(), true, gy, a.grad());
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                if (parallel_kernels())
                    k::masked_acc_omp(n, cond.data(), false, gy, b.grad());
                else
                    k::masked_acc_serial(n, cond.data(), false, gy, b.grad());
            }
        });
    }
    return y;
}

// --- reductions ---------------------------------------------------------------

template <typename T>
Tensor<T> sum(Tape* tape, const Tensor<T>& x) {
    if (x.numel() == 0) throw dim_error("sum: empty tensor");
    const int64_t n = i64(x.numel());
    Tensor<T> y = Tensor<T>::scalar(dispatch_block_sum(n, x.data()));
    ensure_finite(y, "sum");
    if (wants_grad(tape, {x})) {
        y.set_requires_grad(true);
        tape->record("sum", [=, x = x]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            x.ensure_grad();
            const T g0 = gy[0];
            T* gx = x.grad();
#pragma omp parallel for schedule(static)
            for (int64_t i = 0; i < n; ++i) gx[i] += g0;
        });
    }
    return y;
}

template <typename T>
Tensor<T> mean(Tape* tape, const Tensor<T>& x) {
    if (x.numel() == 0) throw dim_error("mean: empty tensor");
    const int64_t n = i64(x.numel());
    const T inv = T(1) / static_cast<T>(n);
    Tensor<T> y = Tensor<T>::scalar(dispatch_block_sum(n, x.data()) * inv);
    ensure_finite(y, "mean");
    if (wants_grad(tape, {x})) {
        y.set_requires_grad(true);
        tape->record("mean", [=, x = x]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            x.ensure_grad();
            const T g0 = gy[0] * inv;
            T* gx = x.grad();
#pragma omp parallel for schedule(static)
            for (int64_t i = 0; i < n; ++i) gx[i] += g0;
        });
    }
    return y;
}

namespace {

struct ReducePlan {
    std::vector<int64_t> in_shape;
    std::vector<bool> reduce_axis; // std::vector<bool> is fine here; copied to raw below
    Shape out_shape;
    int64_t red_n = 1;
};

template <typename T>
ReducePlan make_reduce_plan(const char* op, const Tensor<T>& x,
                            const std::vector<std::size_t>& axes) {
    if (axes.empty()) throw dim_error(std::string(op) + ": no axes given");
    ReducePlan p;
    p.reduce_axis.assign(x.rank(), false);
    std::set<std::size_t> seen;
    for (std::size_t a : axes) {
        if (a >= x.rank())
            throw dim_error(std::string(op) + ": axis " + std::to_string(a) +
                            " out of range for rank " + std::to_string(x.rank()));
        if (!seen.insert(a).second)
            throw dim_error(std::string(op) + ": duplicate axis " + std::to_string(a));
        p.reduce_axis[a] = true;
    }
    for (std::size_t i = 0; i < x.rank(); ++i) {
        p.in_shape.push_back(i64(x.extent(i)));
        if (p.reduce_axis[i])
            p.red_n *= i64(x.extent(i));
        else
            p.out_shape.push_back(x.extent(i));
    }
    return p;
}

// gx[full index] += gy[kept index]; one add per input element.
template <typename T>
void bcast_axis_add(const ReducePlan& p, const T* gy, T* gx) {
    const int64_t rank = i64(p.in_shape.size());
    std::vector<int64_t> in_stride(p.in_shape.size(), 1);
    for (int64_t i = rank - 2; i >= 0; --i)
        in_stride[static_cast<std::size_t>(i)] =
            in_stride[static_cast<std::size_t>(i + 1)] * p.in_shape[static_cast<std::size_t>(i + 1)];
    int64_t n = 1;
    for (int64_t d : p.in_shape) n *= d;
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
        int64_t out_idx = 0;
        for (int64_t a = 0; a < rank; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            if (p.reduce_axis[ua]) continue;
            const int64_t coord = (i / in_stride[ua]) % p.in_shape[ua];
            out_idx = out_idx * p.in_shape[ua] + coord;
        }
        gx[i] += gy[out_idx];
    }
}

} // namespace

template <typename T>
Tensor<T> reduce_sum(Tape* tape, const Tensor<T>& x, const std::vector<std::size_t>& axes) {
    const ReducePlan p = make_reduce_plan("reduce_sum", x, axes);
    Tensor<T> y(p.out_shape);
    std::unique_ptr<bool[]> mask(new bool[x.rank()]);
    for (std::size_t i = 0; i < x.rank(); ++i) mask[i] = p.reduce_axis[i];
    if (parallel_kernels())
        k::axis_reduce_sum_omp(i64(x.rank()), p.in_shape.data(), mask.get(), x.data(), y.data());
    else
        k::axis_reduce_sum_serial(i64(x.rank()), p.in_shape.data(), mask.get(), x.data(),
                                  y.data());
    ensure_finite(y, "reduce_sum");
    if (wants_grad(tape, {x})) {
        y.set_requires_grad(true);
        tape->record("reduce_sum", [=, x = x]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            x.ensure_grad();
            bcast_axis_add(p, gy, x.grad());
        });
    }
    return y;
}

template <typename T>
Tensor<T> reduce_mean(Tape* tape, const Tensor<T>& x, const std::vector<std::size_t>& axes) {
    ReducePlan p = make_reduce_plan("reduce_mean", x, axes);
    Tensor<T> s = reduce_sum(tape, x, axes);
    return mul_scalar(tape, s, T(1) / static_cast<T>(p.red_n));
}

// --- structure ----------------------------------------------------------------

template <typename T>
Tensor<T> matmul(Tape* tape, const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw dim_error("matmul: expects rank-2 operands, got " + shape_str(a.shape()) + " and " +
                        shape_str(b.shape()));
    if (a.extent(1) != b.extent(0))
        throw dim_error("matmul: inner dims " + std::to_string(a.extent(1)) + " vs " +
                        std::to_string(b.extent(0)));
    const int64_t M = i64(a.extent(0)), K = i64(a.extent(1)), N = i64(b.extent(1));
    Tensor<T> y(Shape{a.extent(0), b.extent(1)});
    if (parallel_kernels())
        k::matmul_nn_omp(M, K, N, a.data(), b.data(), y.data());
    else
        k::matmul_nn_serial(M, K, N, a.data(), b.data(), y.data());
    ensure_finite(y, "matmul");
    if (wants_grad(tape, {a, b})) {
        y.set_requires_grad(true);
        tape->record("matmul", [=, a = a, b = b]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            if (a.requires_grad()) {
                a.ensure_grad();
                if (parallel_kernels())
                    k::matmul_nt_acc_omp(M, N, K, gy, b.data(), a.grad());
                else
                    k::matmul_nt_acc_serial(M, N, K, gy, b.data(), a.grad());
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                if (parallel_kernels())
                    k::matmul_tn_acc_omp(M, K, N, a.data(), gy, b.grad());
                else
                    k::matmul_tn_acc_serial(M, K, N, a.data(), gy, b.grad());
            }
        });
    }
    return y;
}

template <typename T>
Tensor<T> reshape(Tape* tape, const Tensor<T>& x, Shape s) {
    if (shape_numel(s) != x.numel())
        throw dim_error("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(s));
    Tensor<T> y(std::move(s), x.vec());
    if (wants_grad(tape, {x})) {
        y.set_requires_grad(true);
        tape->record("reshape", [=, x = x]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            x.ensure_grad();
            acc_add(i64(x.numel()), gy, x.grad());
        });
    }
    return y;
}

template <typename T>
Tensor<T> concat_ch(Tape* tape, const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() != 4 || b.rank() != 4)
        throw dim_error("concat_ch: expects rank-4 operands");
    if (a.extent(0) != b.extent(0) || a.extent(2) != b.extent(2) || a.extent(3) != b.extent(3))
        throw dim_error("concat_ch: shape mismatch " + shape_str(a.shape()) + " vs " +
                        shape_str(b.shape()));
    const int64_t N = i64(a.extent(0)), Ca = i64(a.extent(1)), Cb = i64(b.extent(1)),
                  HW = i64(a.extent(2) * a.extent(3));
    Tensor<T> y(Shape{a.extent(0), a.extent(1) + b.extent(1), a.extent(2), a.extent(3)});
    T* yp = y.data();
#pragma omp parallel for schedule(static)
    for (int64_t n = 0; n < N; ++n) {
        std::memcpy(yp + n * (Ca + Cb) * HW, a.data() + n * Ca * HW,
                    static_cast<std::size_t>(Ca * HW) * sizeof(T));
        std::memcpy(yp + (n * (Ca + Cb) + Ca) * HW, b.data() + n * Cb * HW,
                    static_cast<std::size_t>(Cb * HW) * sizeof(T));
    }
    if (wants_grad(tape, {a, b})) {
        y.set_requires_grad(true);
        tape->record("concat_ch", [=, a = a, b = b]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            if (a.requires_grad()) {
                a.ensure_grad();
                T* ga = a.grad();
#pragma omp parallel for schedule(static)
                for (int64_t n = 0; n < N; ++n) {
                    const T* src = gy + n * (Ca + Cb) * HW;
                    T* dst = ga + n * Ca * HW;
                    for (int64_t i = 0; i < Ca * HW; ++i) dst[i] += src[i];
                }
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                T* gb = b.grad();
#pragma omp parallel for schedule(static)
                for (int64_t n = 0; n < N; ++n) {
                    const T* src = gy + (n * (Ca + Cb) + Ca) * HW;
                    T* dst = gb + n * Cb * HW;
                    for (int64_t i = 0; i < Cb * HW; ++i) dst[i] += src[i];
                }
            }
        });
    }
    return y;
}

template <typename T>
Tensor<T> slice0(Tape* tape, const Tensor<T>& x, std::size_t i) {
    if (x.rank() < 1) throw dim_error("slice0: needs rank >= 1");
    if (i >= x.extent(0))
        throw dim_error("slice0: index " + std::to_string(i) + " out of range for " +
                        shape_str(x.shape()));
    Shape s = x.shape();
    s[0] = 1;
    Tensor<T> y(std::move(s));
    const std::size_t chunk = y.numel();
    std::memcpy(y.data(), x.data() + i * chunk, chunk * sizeof(T));
    if (wants_grad(tape, {x})) {
        y.set_requires_grad(true);
        tape->record("slice0", [=, x = x]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            x.ensure_grad();
            T* gx = x.grad() + i * chunk;
            for (std::size_t k = 0; k < chunk; ++k) gx[k] += gy[k];
        });
    }
    return y;
}

template <typename T>
Tensor<T> swap01(Tape* tape, const Tensor<T>& x) {
    if (x.rank() < 2) throw dim_error("swap01: needs rank >= 2, got " + shape_str(x.shape()));
    Shape s = x.shape();
    std::swap(s[0], s[1]);
    const int64_t D0 = i64(x.extent(0)), D1 = i64(x.extent(1));
    int64_t R = 1;
    for (std::size_t i = 2; i < x.rank(); ++i) R *= i64(x.extent(i));
    Tensor<T> y(std::move(s));
    T* yp = y.data();
    const T* xp = x.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t i = 0; i < D0; ++i)
        for (int64_t j = 0; j < D1; ++j)
            std::memcpy(yp + (j * D0 + i) * R, xp + (i * D1 + j) * R,
                        static_cast<std::size_t>(R) * sizeof(T));
    if (wants_grad(tape, {x})) {
        y.set_requires_grad(true);
        tape->record("swap01", [=, x = x]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            x.ensure_grad();
            T* gx = x.grad();
#pragma omp parallel for collapse(2) schedule(static)
            for (int64_t i = 0; i < D0; ++i)
                for (int64_t j = 0; j < D1; ++j) {
                    const T* src = gy + (j * D0 + i) * R;
                    T* dst = gx + (i * D1 + j) * R;
                    for (int64_t r = 0; r < R; ++r) dst[r] += src[r];
                }
        });
    }
    return y;
}

template <typename T>
Tensor<T> temporal_shift(Tape* tape, const Tensor<T>& x, int64_t f) {
    if (x.rank() != 4)
        throw dim_error("temporal_shift: input must be [T,C,H,W], got " + shape_str(x.shape()));
    const int64_t Tn = i64(x.extent(0)), C = i64(x.extent(1)), H = i64(x.extent(2)),
                  W = i64(x.extent(3));
    if (f < 1) throw dim_error("temporal_shift: band width must be >= 1");
    if (2 * f > C)
        throw dim_error("temporal_shift: 2*" + std::to_string(f) + " bands exceed " +
                        std::to_string(C) + " channels");
    Tensor<T> y(x.shape());
    if (parallel_kernels())
        k::temporal_shift_omp(Tn, C, H, W, f, false, x.data(), y.data());
    else
        k::temporal_shift_serial(Tn, C, H, W, f, false, x.data(), y.data());
    if (wants_grad(tape, {x})) {
        y.set_requires_grad(true);
        tape->record("temporal_shift", [=, x = x]() mutable {
            const T* gy = y.grad();
            if (!gy) return;
            x.ensure_grad();
            Tensor<T> tmp(x.shape());
            if (parallel_kernels())
                k::temporal_shift_omp(Tn, C, H, W, f, true, gy, tmp.data());
            else
                k::temporal_shift_serial(Tn, C, H, W, f, true, gy, tmp.data());
            acc_add(i64(x.numel()), tmp.data(), x.grad());
        });
    }
    return y;
}

// --- instantiations -----------------------------------------------------------

#define VINPAINT_OPS_INSTANTIATE(T)                                                              \
    template Tensor<T> conv2d<T>(Tape*, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                 std::int64_t, std::int64_t);                                    \
    template Tensor<T> conv_transpose2d<T>(Tape*, const Tensor<T>&, const Tensor<T>&,            \
                                           const Tensor<T>&, std::int64_t, std::int64_t);        \
    template Tensor<T> conv3d<T>(Tape*, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                 const std::array<std::int64_t, 3>&,                             \
                                 const std::array<std::int64_t, 3>&);                            \
    template Tensor<T> sigmoid<T>(Tape*, const Tensor<T>&);                                      \
    template Tensor<T> relu<T>(Tape*, const Tensor<T>&);                                         \
    template Tensor<T> leaky_relu<T>(Tape*, const Tensor<T>&, T);                                \
    template Tensor<T> tanh<T>(Tape*, const Tensor<T>&);                                         \
    template Tensor<T> abs<T>(Tape*, const Tensor<T>&);                                          \
    template Tensor<T> neg<T>(Tape*, const Tensor<T>&);                                          \
    template Tensor<T> add<T>(Tape*, const Tensor<T>&, const Tensor<T>&);                        \
    template Tensor<T> sub<T>(Tape*, const Tensor<T>&, const Tensor<T>&);                        \
    template Tensor<T> mul<T>(Tape*, const Tensor<T>&, const Tensor<T>&);                        \
    template Tensor<T> add_scalar<T>(Tape*, const Tensor<T>&, T);                                \
    template Tensor<T> mul_scalar<T>(Tape*, const Tensor<T>&, T);                                \
    template Tensor<T> where<T>(Tape*, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);    \
    template Tensor<T> sum<T>(Tape*, const Tensor<T>&);                                          \
    template Tensor<T> mean<T>(Tape*, const Tensor<T>&);                                         \
    template Tensor<T> reduce_sum<T>(Tape*, const Tensor<T>&, const std::vector<std::size_t>&);  \
    template Tensor<T> reduce_mean<T>(Tape*, const Tensor<T>&, const std::vector<std::size_t>&); \
    template Tensor<T> matmul<T>(Tape*, const Tensor<T>&, const Tensor<T>&);                     \
    template Tensor<T> reshape<T>(Tape*, const Tensor<T>&, Shape);                               \
    template Tensor<T> concat_ch<T>(Tape*, const Tensor<T>&, const Tensor<T>&);                  \
    template Tensor<T> swap01<T>(Tape*, const Tensor<T>&);                                       \
    template Tensor<T> slice0<T>(Tape*, const Tensor<T>&, std::size_t);                          \
    template Tensor<T> temporal_shift<T>(Tape*, const Tensor<T>&, std::int64_t);

VINPAINT_OPS_INSTANTIATE(float)
VINPAINT_OPS_INSTANTIATE(double)

#undef VINPAINT_OPS_INSTANTIATE

} // namespace vinpaint::ops
