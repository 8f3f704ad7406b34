#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cstring>
#include <vector>

#include "oracles.hpp"
#include "vinpaint/kernels.hpp"
#include "vinpaint/rng.hpp"
#include "vinpaint/tensor.hpp"

using namespace vinpaint;
namespace k = vinpaint::kernels;
using std::int64_t;

namespace {

// The sandbox may have one core; force a real thread team so the parallel
// variants are exercised as actually-parallel code.
struct ForceThreads {
    ForceThreads() { omp_set_num_threads(4); }
} force_threads;

template <typename T>
double dot(const std::vector<T>& a, const std::vector<T>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

template <typename T>
bool bytes_equal(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

std::vector<float> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-scale, scale));
    return v;
}

} // namespace

TEST_CASE("conv2d forward matches the padded-buffer oracle") {
    Rng rng(11);
    for (const auto& [stride, pad, khw] : {std::tuple{1, 1, 3}, {2, 1, 3}, {2, 1, 4}, {1, 0, 1}}) {
        auto x = oracle::random_tensor<double>(rng, Shape{2, 3, 9, 10});
        auto w = oracle::random_tensor<double>(rng, Shape{4, 3, (std::size_t)khw, (std::size_t)khw});
        auto b = oracle::random_tensor<double>(rng, Shape{4});
        auto ref = oracle::conv2d(x, w, b, stride, pad);
        Tensor<double> y(ref.shape());
        k::conv2d_forward_serial<double>(2, 3, 9, 10, 4, khw, khw, stride, pad, x.data(), w.data(),
                                         b.data(), y.data());
        for (std::size_t i = 0; i < y.numel(); ++i)
            CHECK(y.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d serial and omp variants are bit-identical") {
    Rng rng(12);
    const int64_t N = 2, C = 3, H = 11, W = 9, K = 5, kh = 3, kw = 3;
    for (const int64_t stride : {1, 2})
        for (const int64_t pad : {0, 1, 2}) {
            const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
            const int64_t Wo = (W + 2 * pad - kw) / stride + 1;
            auto x = random_vec(rng, N * C * H * W);
            auto w = random_vec(rng, K * C * kh * kw);
            auto b = random_vec(rng, K);
            std::vector<float> y1(N * K * Ho * Wo), y2(y1.size());
            k::conv2d_forward_serial<float>(N, C, H, W, K, kh, kw, stride, pad, x.data(), w.data(),
                                            b.data(), y1.data());
            k::conv2d_forward_omp<float>(N, C, H, W, K, kh, kw, stride, pad, x.data(), w.data(),
                                         b.data(), y2.data());
            REQUIRE(bytes_equal(y1, y2));

            // Gradient kernels accumulate; start from a non-zero buffer to
            // check the rounding sequences stay aligned mid-stream too.
            auto gy = random_vec(rng, y1.size());
            auto gx1 = random_vec(rng, x.size());
            auto gx2 = gx1;
            k::conv2d_dgrad_serial<float>(N, C, H, W, K, kh, kw, stride, pad, gy.data(), w.data(),
                                          gx1.data());
            k::conv2d_dgrad_omp<float>(N, C, H, W, K, kh, kw, stride, pad, gy.data(), w.data(),
                                       gx2.data());
            REQUIRE(bytes_equal(gx1, gx2));

            auto gw1 = random_vec(rng, w.size());
            auto gw2 = gw1;
            k::conv2d_wgrad_serial<float>(N, C, H, W, K, kh, kw, stride, pad, gy.data(), x.data(),
                                          gw1.data());
            k::conv2d_wgrad_omp<float>(N, C, H, W, K, kh, kw, stride, pad, gy.data(), x.data(),
                                       gw2.data());
            REQUIRE(bytes_equal(gw1, gw2));

            auto gb1 = random_vec(rng, K);
            auto gb2 = gb1;
            k::conv2d_bgrad_serial<float>(N, K, Ho, Wo, gy.data(), gb1.data());
            k::conv2d_bgrad_omp<float>(N, K, Ho, Wo, gy.data(), gb2.data());
            REQUIRE(bytes_equal(gb1, gb2));
        }
}

TEST_CASE("conv2d dgrad and wgrad satisfy the adjoint identities") {
    Rng rng(13);
    const int64_t N = 2, C = 3, H = 8, W = 7, K = 4, kh = 3, kw = 3, stride = 2, pad = 1;
    const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
    const int64_t Wo = (W + 2 * pad - kw) / stride + 1;
    std::vector<double> x(N * C * H * W), w(K * C * kh * kw), gy(N * K * Ho * Wo);
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : w) v = rng.uniform(-1, 1);
    for (auto& v : gy) v = rng.uniform(-1, 1);
    std::vector<double> y(gy.size());
    k::conv2d_forward_serial<double>(N, C, H, W, K, kh, kw, stride, pad, x.data(), w.data(),
                                     nullptr, y.data());

    // <conv(x; w), gy> == <x, dgrad(gy; w)>
    std::vector<double> gx(x.size(), 0.0);
    k::conv2d_dgrad_serial<double>(N, C, H, W, K, kh, kw, stride, pad, gy.data(), w.data(),
                                   gx.data());
    CHECK(dot(y, gy) == doctest::Approx(dot(x, gx)).epsilon(1e-10));

    // <conv(x; w), gy> == <w, wgrad(gy; x)>
    std::vector<double> gw(w.size(), 0.0);
    k::conv2d_wgrad_serial<double>(N, C, H, W, K, kh, kw, stride, pad, gy.data(), x.data(),
                                   gw.data());
    CHECK(dot(y, gy) == doctest::Approx(dot(w, gw)).epsilon(1e-10));

    // Bias path: <bias-only conv, gy> == <b, bgrad(gy)>
    std::vector<double> b(K), zero_x(x.size(), 0.0), yb(gy.size()), gb(K, 0.0);
    for (auto& v : b) v = rng.uniform(-1, 1);
    k::conv2d_forward_serial<double>(N, C, H, W, K, kh, kw, stride, pad, zero_x.data(), w.data(),
                                     b.data(), yb.data());
    k::conv2d_bgrad_serial<double>(N, K, Ho, Wo, gy.data(), gb.data());
    CHECK(dot(yb, gy) == doctest::Approx(dot(b, gb)).epsilon(1e-10));
}

TEST_CASE("conv3d forward matches the oracle and omp is bit-identical") {
    Rng rng(14);
    const int64_t N = 1, C = 2, D = 5, H = 7, W = 6, K = 3;
    const int64_t kd = 3, kh = 5, kw = 5, sd = 1, sh = 2, sw = 2, pd = 1, ph = 2, pw = 2;
    auto x = oracle::random_tensor<double>(rng, Shape{1, 2, 5, 7, 6});
    auto w = oracle::random_tensor<double>(rng, Shape{3, 2, 3, 5, 5});
    auto b = oracle::random_tensor<double>(rng, Shape{3});
    auto ref = oracle::conv3d(x, w, b, sd, sh, sw, pd, ph, pw);
    Tensor<double> y(ref.shape());
    k::conv3d_forward_serial<double>(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw,
                                     x.data(), w.data(), b.data(), y.data());
    for (std::size_t i = 0; i < y.numel(); ++i)
        CHECK(y.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-12));

    // float bit-identity, forward + all gradients
    Rng frng(15);
    auto xf = random_vec(frng, N * C * D * H * W);
    auto wf = random_vec(frng, K * C * kd * kh * kw);
    auto bf = random_vec(frng, K);
    const int64_t Do = (D + 2 * pd - kd) / sd + 1, Ho = (H + 2 * ph - kh) / sh + 1,
                  Wo = (W + 2 * pw - kw) / sw + 1;
    std::vector<float> y1(N * K * Do * Ho * Wo), y2(y1.size());
    k::conv3d_forward_serial<float>(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw,
                                    xf.data(), wf.data(), bf.data(), y1.data());
    k::conv3d_forward_omp<float>(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, xf.data(),
                                 wf.data(), bf.data(), y2.data());
    REQUIRE(bytes_equal(y1, y2));

    auto gy = random_vec(frng, y1.size());
    auto gx1 = random_vec(frng, xf.size());
    auto gx2 = gx1;
    k::conv3d_dgrad_serial<float>(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, gy.data(),
                                  wf.data(), gx1.data());
    k::conv3d_dgrad_omp<float>(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, gy.data(),
                               wf.data(), gx2.data());
    REQUIRE(bytes_equal(gx1, gx2));

    auto gw1 = random_vec(frng, wf.size());
    auto gw2 = gw1;
    k::conv3d_wgrad_serial<float>(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, gy.data(),
                                  xf.data(), gw1.data());
    k::conv3d_wgrad_omp<float>(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, gy.data(),
                               xf.data(), gw2.data());
    REQUIRE(bytes_equal(gw1, gw2));
}

TEST_CASE("conv3d adjoint identities") {
    Rng rng(16);
    const int64_t N = 1, C = 2, D = 4, H = 6, W = 5, K = 2;
    const int64_t kd = 3, kh = 3, kw = 3, sd = 1, sh = 2, sw = 2, pd = 1, ph = 1, pw = 1;
    const int64_t Do = (D + 2 * pd - kd) / sd + 1, Ho = (H + 2 * ph - kh) / sh + 1,
                  Wo = (W + 2 * pw - kw) / sw + 1;
    std::vector<double> x(N * C * D * H * W), w(K * C * kd * kh * kw), gy(N * K * Do * Ho * Wo);
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : w) v = rng.uniform(-1, 1);
    for (auto& v : gy) v = rng.uniform(-1, 1);
    std::vector<double> y(gy.size());
    k::conv3d_forward_serial<double>(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw,
                                     x.data(), w.data(), nullptr, y.data());
    std::vector<double> gx(x.size(), 0.0), gw(w.size(), 0.0);
    k::conv3d_dgrad_serial<double>(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, gy.data(),
                                   w.data(), gx.data());
    k::conv3d_wgrad_serial<double>(N, C, D, H, W, K, kd, kh, kw, sd, sh, sw, pd, ph, pw, gy.data(),
                                   x.data(), gw.data());
    CHECK(dot(y, gy) == doctest::Approx(dot(x, gx)).epsilon(1e-10));
    CHECK(dot(y, gy) == doctest::Approx(dot(w, gw)).epsilon(1e-10));
}

TEST_CASE("matmul matches oracle and variants agree bitwise") {
    Rng rng(17);
    auto a = oracle::random_tensor<double>(rng, Shape{7, 5});
    auto b = oracle::random_tensor<double>(rng, Shape{5, 9});
    auto ref = oracle::matmul(a, b);
    Tensor<double> y(Shape{7, 9});
    k::matmul_nn_serial<double>(7, 5, 9, a.data(), b.data(), y.data());
    for (std::size_t i = 0; i < y.numel(); ++i)
        CHECK(y.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-12));

    auto af = random_vec(rng, 33 * 17), bf = random_vec(rng, 17 * 29);
    std::vector<float> y1(33 * 29), y2(33 * 29);
    k::matmul_nn_serial<float>(33, 17, 29, af.data(), bf.data(), y1.data());
    k::matmul_nn_omp<float>(33, 17, 29, af.data(), bf.data(), y2.data());
    REQUIRE(bytes_equal(y1, y2));

    auto g = random_vec(rng, 33 * 29);
    auto ga1 = random_vec(rng, af.size());
    auto ga2 = ga1;
    k::matmul_nt_acc_serial<float>(33, 29, 17, g.data(), bf.data(), ga1.data());
    k::matmul_nt_acc_omp<float>(33, 29, 17, g.data(), bf.data(), ga2.data());
    REQUIRE(bytes_equal(ga1, ga2));
    auto gb1 = random_vec(rng, bf.size());
    auto gb2 = gb1;
    k::matmul_tn_acc_serial<float>(33, 17, 29, af.data(), g.data(), gb1.data());
    k::matmul_tn_acc_omp<float>(33, 17, 29, af.data(), g.data(), gb2.data());
    REQUIRE(bytes_equal(gb1, gb2));
}

TEST_CASE("block reductions follow the fixed blocking and agree across variants") {
    Rng rng(18);
    const int64_t n = 3 * k::kReduceBlock + 137;
    auto v = random_vec(rng, static_cast<std::size_t>(n), 100.0);

    // Reference: explicit two-phase blocked sum, written independently.
    float expected = 0.0f;
    {
        std::vector<float> partials;
        for (int64_t lo = 0; lo < n; lo += k::kReduceBlock) {
            float p = 0.0f;
            for (int64_t i = lo; i < std::min(n, lo + k::kReduceBlock); ++i) p += v[i];
            partials.push_back(p);
        }
        for (float p : partials) expected += p;
    }
    const float s1 = k::block_sum_serial<float>(n, v.data());
    const float s2 = k::block_sum_omp<float>(n, v.data());
    CHECK(s1 == expected);
    CHECK(s1 == s2);

    const float a1 = k::block_abs_sum_serial<float>(n, v.data());
    const float a2 = k::block_abs_sum_omp<float>(n, v.data());
    CHECK(a1 == a2);
    CHECK(a1 >= std::fabs(s1));
    CHECK(k::block_sum_serial<float>(0, v.data()) == 0.0f);
}

TEST_CASE("temporal shift matches the index-gather oracle") {
    Rng rng(19);
    auto x = oracle::random_tensor<float>(rng, Shape{5, 8, 4, 3});
    auto ref = oracle::temporal_shift(x, 2);
    Tensor<float> y(x.shape());
    k::temporal_shift_serial<float>(5, 8, 4, 3, 2, false, x.data(), y.data());
    REQUIRE(bytes_equal(y.vec(), ref.vec()));
    Tensor<float> y2(x.shape());
    k::temporal_shift_omp<float>(5, 8, 4, 3, 2, false, x.data(), y2.data());
    REQUIRE(bytes_equal(y.vec(), y2.vec()));

    // single-frame clip: both shifted bands are zero, the rest passes through
    auto x1 = oracle::random_tensor<float>(rng, Shape{1, 6, 2, 2});
    Tensor<float> o1(x1.shape());
    k::temporal_shift_serial<float>(1, 6, 2, 2, 1, false, x1.data(), o1.data());
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 4; ++i) CHECK(o1.data()[c * 4 + i] == 0.0f);
    for (std::size_t i = 2 * 4; i < o1.numel(); ++i) CHECK(o1.data()[i] == x1.data()[i]);
}

TEST_CASE("temporal shift adjoint satisfies the inner-product identity") {
    Rng rng(20);
    auto x = oracle::random_tensor<double>(rng, Shape{4, 6, 3, 3});
    auto g = oracle::random_tensor<double>(rng, Shape{4, 6, 3, 3});
    Tensor<double> y(x.shape()), gx(x.shape());
    k::temporal_shift_serial<double>(4, 6, 3, 3, 2, false, x.data(), y.data());
    k::temporal_shift_serial<double>(4, 6, 3, 3, 2, true, g.data(), gx.data());
    CHECK(dot(y.vec(), g.vec()) == doctest::Approx(dot(x.vec(), gx.vec())).epsilon(1e-12));
}

TEST_CASE("bilinear warp: zero flow is identity with full in-bounds mask") {
    Rng rng(21);
    const int64_t C = 3, H = 6, W = 5;
    Tensor<float> src(Shape{3, 6, 5});
    for (std::size_t i = 0; i < src.numel(); ++i) src.data()[i] = static_cast<float>(rng.uniform(0, 1));
    std::vector<float> flow(H * W * 2, 0.0f), out(C * H * W), inb(H * W);
    k::warp_bilinear_serial<float>(C, H, W, src.data(), flow.data(), out.data(), inb.data());
    REQUIRE(bytes_equal(out, src.vec()));
    for (float m : inb) CHECK(m == 1.0f);
}

TEST_CASE("bilinear warp: unit x displacement on 2x2 shifts columns and clips the mask") {
    // src column x samples from x+1; x=1 lands at 2 which is outside [0, W-1].
    Tensor<float> src(Shape{1, 2, 2}, std::vector<float>{1.f, 2.f, 3.f, 4.f});
    std::vector<float> flow = {1.f, 0.f, 1.f, 0.f, 1.f, 0.f, 1.f, 0.f};
    std::vector<float> out(4), inb(4);
    k::warp_bilinear_serial<float>(1, 2, 2, src.data(), flow.data(), out.data(), inb.data());
    CHECK(out[0] == 2.0f);
    CHECK(out[1] == 0.0f); // zero fill outside
    CHECK(out[2] == 4.0f);
    CHECK(out[3] == 0.0f);
    CHECK(inb[0] == 1.0f);
    CHECK(inb[1] == 0.0f);
    CHECK(inb[2] == 1.0f);
    CHECK(inb[3] == 0.0f);
}

TEST_CASE("bilinear warp matches the longhand sampler on fractional flows") {
    Rng rng(22);
    const int64_t C = 2, H = 7, W = 8;
    auto src = oracle::random_tensor<double>(rng, Shape{2, 7, 8});
    std::vector<double> flow(H * W * 2);
    for (auto& f : flow) f = rng.uniform(-3.0, 3.0);
    std::vector<double> out(C * H * W), inb(H * W);
    k::warp_bilinear_serial<double>(C, H, W, src.data(), flow.data(), out.data(), inb.data());
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x) {
            const double sx = x + flow[(y * W + x) * 2 + 0];
            const double sy = y + flow[(y * W + x) * 2 + 1];
            for (int64_t c = 0; c < C; ++c) {
                const double ref = oracle::bilinear_at(src, c, sy, sx);
                CHECK(out[(c * H + y) * W + x] == doctest::Approx(ref).epsilon(1e-12));
            }
            const bool in = sx >= 0 && sx <= W - 1 && sy >= 0 && sy <= H - 1;
            CHECK(inb[y * W + x] == (in ? 1.0 : 0.0));
        }

    std::vector<double> out2(out.size()), inb2(inb.size());
    k::warp_bilinear_omp<double>(C, H, W, src.data(), flow.data(), out2.data(), inb2.data());
    REQUIRE(bytes_equal(out, out2));
}

TEST_CASE("bilinear warp dgrad: adjoint identity and variant equality") {
    Rng rng(23);
    const int64_t C = 2, H = 6, W = 6;
    auto src = oracle::random_tensor<double>(rng, Shape{2, 6, 6});
    std::vector<double> flow(H * W * 2);
    for (auto& f : flow) f = rng.uniform(-2.0, 2.0);
    std::vector<double> out(C * H * W), g(C * H * W), gsrc(C * H * W, 0.0);
    for (auto& v : g) v = rng.uniform(-1, 1);
    k::warp_bilinear_serial<double>(C, H, W, src.data(), flow.data(), out.data(), nullptr);
    k::warp_bilinear_dgrad_serial<double>(C, H, W, flow.data(), g.data(), gsrc.data());
    CHECK(dot(out, g) == doctest::Approx(dot(src.vec(), gsrc)).epsilon(1e-12));

    std::vector<float> srcf(src.numel()), flowf(flow.size()), gf(g.size());
    for (std::size_t i = 0; i < srcf.size(); ++i) srcf[i] = static_cast<float>(src.data()[i]);
    for (std::size_t i = 0; i < flowf.size(); ++i) flowf[i] = static_cast<float>(flow[i]);
    for (std::size_t i = 0; i < gf.size(); ++i) gf[i] = static_cast<float>(g[i]);
    auto gs1 = random_vec(rng, srcf.size());
    auto gs2 = gs1;
    k::warp_bilinear_dgrad_serial<float>(C, H, W, flowf.data(), gf.data(), gs1.data());
    k::warp_bilinear_dgrad_omp<float>(C, H, W, flowf.data(), gf.data(), gs2.data());
    REQUIRE(bytes_equal(gs1, gs2));
}

TEST_CASE("pointwise and select kernels: semantics plus variant equality") {
    Rng rng(24);
    const int64_t n = 4099;
    auto x = random_vec(rng, n, 3.0);
    std::vector<float> y1(n), y2(n);
    for (auto kind : {k::Unary::sigmoid, k::Unary::relu, k::Unary::leaky_relu, k::Unary::tanh,
                      k::Unary::abs, k::Unary::neg}) {
        k::unary_forward_serial<float>(kind, n, x.data(), y1.data(), 0.2f);
        k::unary_forward_omp<float>(kind, n, x.data(), y2.data(), 0.2f);
        REQUIRE(bytes_equal(y1, y2));
    }
    k::unary_forward_serial<float>(k::Unary::leaky_relu, n, x.data(), y1.data(), 0.2f);
    for (int64_t i = 0; i < n; ++i)
        CHECK(y1[i] == (x[i] > 0 ? x[i] : 0.2f * x[i]));

    auto b = random_vec(rng, n, 3.0);
    k::binary_forward_serial<float>(k::Binary::mul, n, x.data(), 1, b.data(), 1, y1.data());
    k::binary_forward_omp<float>(k::Binary::mul, n, x.data(), 1, b.data(), 1, y2.data());
    REQUIRE(bytes_equal(y1, y2));
    for (int64_t i = 0; i < n; ++i) CHECK(y1[i] == x[i] * b[i]);
    const float scalar = 2.5f;
    k::binary_forward_serial<float>(k::Binary::add, n, x.data(), 1, &scalar, 0, y1.data());
    for (int64_t i = 0; i < n; ++i) CHECK(y1[i] == x[i] + 2.5f);

    std::vector<float> m(n);
    for (auto& v : m) v = rng.uniform() < 0.5 ? 0.0f : 1.0f;
    k::where_serial<float>(n, m.data(), x.data(), b.data(), y1.data());
    k::where_omp<float>(n, m.data(), x.data(), b.data(), y2.data());
    REQUIRE(bytes_equal(y1, y2));
    for (int64_t i = 0; i < n; ++i) CHECK(y1[i] == (m[i] != 0 ? x[i] : b[i]));

    auto acc1 = random_vec(rng, n);
    auto acc2 = acc1;
    k::masked_acc_serial<float>(n, m.data(), true, x.data(), acc1.data());
    k::masked_acc_omp<float>(n, m.data(), true, x.data(), acc2.data());
    REQUIRE(bytes_equal(acc1, acc2));
}

TEST_CASE("axis reduction sums the flagged axes in row-major order") {
    Tensor<double> x(Shape{2, 3, 4});
    for (std::size_t i = 0; i < x.numel(); ++i) x.data()[i] = static_cast<double>(i + 1);
    const int64_t shape[3] = {2, 3, 4};

    {
        const bool mask[3] = {false, true, false}; // sum over axis 1 -> [2,4]
        std::vector<double> y(8), ref(8, 0.0);
        k::axis_reduce_sum_serial<double>(3, shape, mask, x.data(), y.data());
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 3; ++b)
                for (std::size_t c = 0; c < 4; ++c) ref[a * 4 + c] += x.at(a, b, c);
        for (int i = 0; i < 8; ++i) CHECK(y[static_cast<std::size_t>(i)] == ref[static_cast<std::size_t>(i)]);
        std::vector<double> y2(8);
        k::axis_reduce_sum_omp<double>(3, shape, mask, x.data(), y2.data());
        REQUIRE(bytes_equal(y, y2));
    }
    {
        const bool mask[3] = {true, true, true}; // full reduce -> scalar
        std::vector<double> y(1);
        k::axis_reduce_sum_serial<double>(3, shape, mask, x.data(), y.data());
        CHECK(y[0] == 24.0 * 25.0 / 2.0);
    }
}

TEST_CASE("adam update matches a hand computation and variants agree") {
    // one step from zero moments: m = (1-b1)g, v = (1-b2)g^2,
    // p -= lr * (m/(1-b1)) / (sqrt(v/(1-b2)) + eps) = lr * g/(|g|+eps)
    std::vector<double> p{1.0, -2.0}, g{0.5, -3.0}, m{0, 0}, v{0, 0};
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    k::adam_update_serial<double>(2, p.data(), g.data(), m.data(), v.data(), lr, b1, b2, eps,
                                  1.0 - b1, 1.0 - b2);
    CHECK(p[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + eps)).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(-2.0 + 0.1 * 3.0 / (3.0 + eps)).epsilon(1e-12));
    CHECK(m[0] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.001 * 9.0).epsilon(1e-12));

    Rng rng(25);
    const int64_t n = 2048;
    auto pf = random_vec(rng, n);
    auto gf = random_vec(rng, n);
    auto mf = random_vec(rng, n, 0.1);
    auto vf = random_vec(rng, n, 0.0); // zeros
    for (auto& x : vf) x = std::fabs(x) + 0.01f;
    auto p2 = pf;
    auto m2 = mf;
    auto v2 = vf;
    k::adam_update_serial<float>(n, pf.data(), gf.data(), mf.data(), vf.data(), 1e-3f, 0.9f,
                                 0.999f, 1e-8f, 0.1f, 0.001f);
    k::adam_update_omp<float>(n, p2.data(), gf.data(), m2.data(), v2.data(), 1e-3f, 0.9f, 0.999f,
                              1e-8f, 0.1f, 0.001f);
    REQUIRE(bytes_equal(pf, p2));
    REQUIRE(bytes_equal(mf, m2));
    REQUIRE(bytes_equal(vf, v2));
}
