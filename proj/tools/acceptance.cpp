// Standalone acceptance suite: one line per criterion, exit 0 iff all pass.
// Optionally pass criterion numbers to run a subset, e.g. `acceptance 6 7`.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vinpaint/align.hpp"
#include "vinpaint/config.hpp"
#include "vinpaint/imageio.hpp"
#include "vinpaint/metrics.hpp"
#include "vinpaint/ops.hpp"
#include "vinpaint/trainer.hpp"

namespace fs = std::filesystem;
using namespace vinpaint;

namespace {

template <typename... A>
std::string cat(A&&... a) {
    std::ostringstream o;
    (o << ... << a);
    return o.str();
}

#define REQ(cond, ...)                                                                            \
    do {                                                                                          \
        if (!(cond)) throw std::runtime_error(cat(__VA_ARGS__));                                  \
    } while (0)

int g_failures = 0;

void criterion(int id, const char* label, double budget_s, const std::function<std::string()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    try {
        detail = body();
    } catch (const std::exception& e) {
        pass = false;
        detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (pass && secs > budget_s) {
        pass = false;
        detail += " [runtime over budget]";
    }
    std::printf("[%s] %d. %s: %s (%.1fs, budget %.0fs)\n", pass ? "PASS" : "FAIL", id, label,
                detail.c_str(), secs, budget_s);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

bool bits_equal(const Tensor<double>& a, const Tensor<double>& b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data(), b.data(), a.numel() * sizeof(double)) == 0;
}

Tensor<double> channel_band(const Tensor<double>& clip, std::size_t t, std::size_t c0,
                            std::size_t c1) {
    const std::size_t c = clip.extent(1), h = clip.extent(2), w = clip.extent(3);
    const double* p = clip.data() + (t * c + c0) * h * w;
    return Tensor<double>(Shape{c1 - c0, h, w}, std::vector<double>(p, p + (c1 - c0) * h * w));
}

// --- 1. gradient suite ----------------------------------------------------------

std::string c1_gradients() {
    Rng rng(0xACC1);
    double worst_op = 0, worst_comp = 0;
    const double eps = 1e-5;

    auto rt = [&](Shape s, double scale = 1.0) {
        return oracle::random_tensor<double>(rng, std::move(s), scale);
    };
    // Inputs kept away from relu/abs kinks so central differences stay valid.
    auto rt_off = [&](Shape s) {
        Tensor<double> t(std::move(s));
        for (std::size_t i = 0; i < t.numel(); ++i) {
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            t.data()[i] = sign * (0.4 + 0.8 * rng.uniform());
        }
        return t;
    };
    auto check_op = [&](const char* name, auto&& fwd, std::vector<Tensor<double>> inputs) {
        const auto r = ops::grad_check<double>(fwd, std::move(inputs), eps, 1e-5);
        REQ(r.ok, "op ", name, ": rel err ", r.max_rel_err, " exceeds 1e-5");
        worst_op = std::max(worst_op, static_cast<double>(r.max_rel_err));
    };
    auto check_comp = [&](const char* name, auto&& fwd, std::vector<Tensor<double>> inputs) {
        const auto r = ops::grad_check<double>(fwd, std::move(inputs), eps, 1e-4);
        REQ(r.ok, "composite ", name, ": rel err ", r.max_rel_err, " exceeds 1e-4");
        worst_comp = std::max(worst_comp, static_cast<double>(r.max_rel_err));
    };

    {
        auto x = rt({1, 2, 4, 5}), w = rt({3, 2, 3, 3}, 0.5), b = rt({3}, 0.2);
        check_op("conv2d", [&](Tape* t) { return ops::mean(t, ops::conv2d(t, x, w, b, 1, 1)); },
                 {x, w, b});
    }
    {
        auto x = rt({1, 3, 3, 3}), w = rt({3, 2, 3, 3}, 0.5), b = rt({2}, 0.2);
        check_op("conv_transpose2d",
                 [&](Tape* t) { return ops::mean(t, ops::conv_transpose2d(t, x, w, b, 2, 1)); },
                 {x, w, b});
    }
    {
        auto x = rt({1, 2, 3, 4, 4}), w = rt({2, 2, 2, 3, 3}, 0.5), b = rt({2}, 0.2);
        check_op("conv3d",
                 [&](Tape* t) {
                     return ops::mean(t, ops::conv3d(t, x, w, b, {1, 1, 1}, {0, 1, 1}));
                 },
                 {x, w, b});
    }
    {
        auto x = rt({3, 5});
        auto c = rt({3, 5});
        check_op("sigmoid",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::sigmoid(t, x), c)); }, {x});
        check_op("tanh", [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::tanh(t, x), c)); },
                 {x});
        check_op("neg", [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::neg(t, x), c)); },
                 {x});
    }
    {
        auto x = rt_off({4, 6});
        auto c = rt({4, 6});
        check_op("relu", [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::relu(t, x), c)); },
                 {x});
        check_op("leaky_relu",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::leaky_relu(t, x, 0.2), c)); },
                 {x});
        check_op("abs", [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::abs(t, x), c)); },
                 {x});
    }
    {
        auto a = rt({2, 3, 4}), b = rt({2, 3, 4}), s = rt({1});
        auto c = rt({2, 3, 4});
        check_op("add", [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::add(t, a, b), c)); },
                 {a, b});
        check_op("sub", [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::sub(t, a, b), c)); },
                 {a, b});
        check_op("mul", [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::mul(t, a, b), c)); },
                 {a, b});
        check_op("add broadcast",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::add(t, a, s), c)); }, {a, s});
        check_op("add_scalar",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::add_scalar(t, a, 0.7), c)); },
                 {a});
        check_op("mul_scalar",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::mul_scalar(t, a, -1.3), c)); },
                 {a});
    }
    {
        auto a = rt({3, 4}), b = rt({3, 4});
        Tensor<double> cond(Shape{3, 4});
        for (std::size_t i = 0; i < cond.numel(); ++i) cond.data()[i] = rng.uniform() < 0.5;
        auto c = rt({3, 4});
        check_op("where",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::where(t, cond, a, b), c)); },
                 {a, b});
    }
    {
        auto x = rt({2, 3, 4});
        check_op("sum", [&](Tape* t) { return ops::sum(t, x); }, {x});
        check_op("mean", [&](Tape* t) { return ops::mean(t, x); }, {x});
        auto c1 = rt({2, 4}), c2 = rt({3});
        check_op("reduce_sum",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::reduce_sum(t, x, {1}), c1)); },
                 {x});
        check_op("reduce_mean",
                 [&](Tape* t) {
                     return ops::mean(t, ops::mul(t, ops::reduce_mean(t, x, {0, 2}), c2));
                 },
                 {x});
    }
    {
        auto a = rt({3, 4}), b = rt({4, 2});
        auto c = rt({3, 2});
        check_op("matmul",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::matmul(t, a, b), c)); },
                 {a, b});
    }
    {
        auto x = rt({2, 6});
        auto c = rt({3, 4});
        check_op("reshape",
                 [&](Tape* t) {
                     return ops::mean(t, ops::mul(t, ops::reshape(t, x, Shape{3, 4}), c));
                 },
                 {x});
    }
    {
        auto x = rt({2, 3, 2, 2});
        auto c = rt({3, 2, 2, 2});
        check_op("swap01",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::swap01(t, x), c)); }, {x});
    }
    {
        auto x = rt({3, 2, 3});
        auto c = rt({1, 2, 3});
        check_op("slice0",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::slice0(t, x, 1), c)); }, {x});
    }
    {
        auto a = rt({1, 2, 3, 3}), b = rt({1, 3, 3, 3});
        auto c = rt({1, 5, 3, 3});
        check_op("concat_ch",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::concat_ch(t, a, b), c)); },
                 {a, b});
    }
    {
        auto x = rt({3, 4, 3, 3});
        auto c = rt({3, 4, 3, 3});
        check_op("temporal_shift",
                 [&](Tape* t) { return ops::mean(t, ops::mul(t, ops::temporal_shift(t, x, 1), c)); },
                 {x});
    }
    {
        auto src = rt({2, 5, 6});
        Tensor<double> fl(Shape{5, 6, 2});
        for (std::size_t i = 0; i < fl.numel(); ++i) fl.data()[i] = rng.uniform(-1.5, 1.5);
        auto c = rt({2, 5, 6});
        check_op("warp_bilinear",
                 [&](Tape* t) {
                     return ops::mean(t, ops::mul(t, flow::warp_bilinear(t, src, fl), c));
                 },
                 {src});
    }
    {
        auto x = rt({3, 4, 6, 6});
        flow::Motion<double> m;
        m.kind = flow::MotionKind::rotation;
        m.angle = 0.05;
        std::vector<Tensor<double>> pf, pb;
        for (int i = 0; i < 2; ++i) {
            pf.push_back(flow::synth_flow(m, 6, 6, false));
            pb.push_back(flow::synth_flow(m, 6, 6, true));
        }
        const auto data = align::build_align_data(pf, pb, 1, {});
        auto c = rt({3, 4, 6, 6});
        check_op("shift_and_align",
                 [&](Tape* t) {
                     return ops::mean(t, ops::mul(t, align::shift_and_align(t, x, data, 1), c));
                 },
                 {x});
    }

    // Each loss through a one-layer conv model.
    const losses::FeatureExtractor<double> ex;
    {
        auto x = rt({1, 3, 16, 16}), w = rt({3, 3, 3, 3}, 0.3), b = rt({3}, 0.1);
        auto gt = rt({1, 3, 16, 16});
        Tensor<double> mask(Shape{1, 1, 16, 16});
        for (std::size_t i = 0; i < mask.numel(); ++i) mask.data()[i] = rng.uniform() < 0.7;
        check_comp("recon_loss",
                   [&](Tape* t) {
                       return losses::recon_loss(t, ops::conv2d(t, x, w, b, 1, 1), gt, mask, 1.0,
                                                 6.0);
                   },
                   {x, w, b});
        check_comp("perceptual_loss",
                   [&](Tape* t) {
                       return losses::perceptual_loss(t, ex, ops::conv2d(t, x, w, b, 1, 1), gt);
                   },
                   {x, w, b});
        check_comp("style_loss",
                   [&](Tape* t) {
                       return losses::style_loss(t, ex, ops::conv2d(t, x, w, b, 1, 1), gt);
                   },
                   {x, w, b});
    }
    {
        auto xr = rt({1, 3, 8, 8}), xf = rt({1, 3, 8, 8});
        auto w = rt({1, 3, 3, 3}, 0.3), b = rt({1}, 0.1);
        check_comp("adversarial d_loss",
                   [&](Tape* t) {
                       return losses::adversarial_losses(t, ops::conv2d(t, xr, w, b, 1, 1),
                                                         ops::conv2d(t, xf, w, b, 1, 1))
                           .first;
                   },
                   {xr, xf, w, b});
        check_comp("adversarial g_loss",
                   [&](Tape* t) {
                       return losses::adversarial_losses(t, ops::conv2d(t, xr, w, b, 1, 1),
                                                         ops::conv2d(t, xf, w, b, 1, 1))
                           .second;
                   },
                   {xf, w, b});
    }
    {
        auto x = rt({1, 3, 8, 8}), w = rt({2, 3, 3, 3}, 0.3), b = rt({2}, 0.1);
        auto c = rt({1, 2, 8, 8});
        losses::LossWeights lw;
        lw.lambda_g = 0.1;
        check_comp("total_loss",
                   [&](Tape* t) {
                       const auto h = ops::conv2d(t, x, w, b, 1, 1);
                       losses::LossParts<double> parts;
                       parts.recon = ops::mean(t, ops::mul(t, h, c));
                       parts.perceptual = ops::mean(t, ops::abs(t, h));
                       parts.style = ops::mean(t, ops::mul(t, h, h));
                       parts.adversarial = ops::mean(t, ops::neg(t, h));
                       return losses::total_loss(t, parts, lw);
                   },
                   {x, w, b});
    }
    return cat("worst rel err: ops ", worst_op, " (<1e-5), composites ", worst_comp, " (<1e-4)");
}

// --- 2. warp / validity oracles ---------------------------------------------------

double cycle_valid_at(const Tensor<double>& fwd, const Tensor<double>& bwd, std::int64_t x,
                      std::int64_t y, double delta) {
    const auto H = static_cast<std::int64_t>(fwd.extent(0));
    const auto W = static_cast<std::int64_t>(fwd.extent(1));
    const double* b = bwd.data() + (y * W + x) * 2;
    const double qx = static_cast<double>(x) + b[0];
    const double qy = static_cast<double>(y) + b[1];
    if (qx < 0 || qx > static_cast<double>(W - 1) || qy < 0 || qy > static_cast<double>(H - 1))
        return 0.0;
    const auto x0 = static_cast<std::int64_t>(std::floor(qx));
    const auto y0 = static_cast<std::int64_t>(std::floor(qy));
    const double fx = qx - static_cast<double>(x0), fy = qy - static_cast<double>(y0);
    const std::int64_t cx[4] = {x0, x0 + 1, x0, x0 + 1};
    const std::int64_t cy[4] = {y0, y0, y0 + 1, y0 + 1};
    const double wg[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    double dx = 0, dy = 0;
    for (int c = 0; c < 4; ++c) {
        if (cx[c] < 0 || cx[c] >= W || cy[c] < 0 || cy[c] >= H) continue;
        const double* v = fwd.data() + (cy[c] * W + cx[c]) * 2;
        dx += wg[c] * v[0];
        dy += wg[c] * v[1];
    }
    const double ex = b[0] + dx, ey = b[1] + dy;
    return ex * ex + ey * ey < delta * delta ? 1.0 : 0.0;
}

std::string c2_warp_validity() {
    Rng rng(0xACC2);

    // Identity warp is exact.
    auto src = oracle::random_tensor<double>(rng, {3, 7, 9});
    const Tensor<double> zero_flow(Shape{7, 9, 2}, 0.0);
    REQ(bits_equal(flow::warp_bilinear<double>(nullptr, src, zero_flow), src),
        "identity warp is not bit-exact");

    // Inverse-translation recovery, whole-pixel offsets on an arbitrary texture.
    auto recover = [&](const Tensor<double>& img, double dx, double dy, std::int64_t margin) {
        const auto h = img.extent(1), w = img.extent(2);
        Tensor<double> f1(Shape{h, w, 2}), f2(Shape{h, w, 2});
        for (std::size_t i = 0; i < h * w; ++i) {
            f1.data()[2 * i] = dx;
            f1.data()[2 * i + 1] = dy;
            f2.data()[2 * i] = -dx;
            f2.data()[2 * i + 1] = -dy;
        }
        const auto back =
            flow::warp_bilinear<double>(nullptr, flow::warp_bilinear<double>(nullptr, img, f1), f2);
        double worst = 0;
        for (std::size_t c = 0; c < img.extent(0); ++c)
            for (std::size_t y = margin; y + margin < h; ++y)
                for (std::size_t x = margin; x + margin < w; ++x) {
                    const std::size_t i = (c * h + y) * w + x;
                    worst = std::max(worst, std::abs(back.data()[i] - img.data()[i]));
                }
        return worst;
    };
    auto tex = oracle::random_tensor<double>(rng, {2, 12, 12});
    const double e_int = recover(tex, 3, -2, 6);
    REQ(e_int < 1e-5, "integer translation recovery err ", e_int);

    Tensor<double> affine(Shape{2, 12, 12});
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t y = 0; y < 12; ++y)
            for (std::size_t x = 0; x < 12; ++x)
                affine.data()[(c * 12 + y) * 12 + x] =
                    0.1 * static_cast<double>(c) + 0.03 * static_cast<double>(x) -
                    0.02 * static_cast<double>(y);
    const double e_frac = recover(affine, 0.5, 0.25, 3);
    REQ(e_frac < 1e-5, "fractional translation recovery err ", e_frac);

    // Brute-force per-pixel cycle oracle, exact match on 10 random pairs.
    for (int k = 0; k < 10; ++k) {
        Tensor<double> f(Shape{16, 16, 2}), b(Shape{16, 16, 2});
        for (std::size_t i = 0; i < f.numel(); ++i) {
            f.data()[i] = rng.uniform(-3.0, 3.0);
            b.data()[i] = rng.uniform(-3.0, 3.0);
        }
        const auto mask = flow::cycle_validity(f, b, {});
        for (std::int64_t y = 0; y < 16; ++y)
            for (std::int64_t x = 0; x < 16; ++x)
                REQ(mask.data()[y * 16 + x] == cycle_valid_at(f, b, x, y, 1.0),
                    "validity mismatch vs brute force at pair ", k, " pixel (", x, ",", y, ")");
    }
    return cat("identity exact; recovery err ", std::max(e_int, e_frac),
               " (<1e-5); 10/10 cycle masks match brute force");
}

// --- 3. shift oracles ---------------------------------------------------------------

std::string c3_shift() {
    Rng rng(0xACC3);

    for (int i = 0; i < 50; ++i) {
        const auto f = static_cast<std::int64_t>(rng.uniform_int(1, 3));
        const Shape s{static_cast<std::size_t>(rng.uniform_int(1, 5)),
                      static_cast<std::size_t>(2 * f + rng.uniform_int(0, 3)),
                      static_cast<std::size_t>(rng.uniform_int(1, 6)),
                      static_cast<std::size_t>(rng.uniform_int(1, 6))};
        auto x = oracle::random_tensor<double>(rng, s);
        REQ(bits_equal(ops::temporal_shift<double>(nullptr, x, f), oracle::temporal_shift(x, f)),
            "temporal_shift disagrees with the index-gather oracle on case ", i, " shape ",
            shape_str(s), " f=", f);
    }

    constexpr std::size_t T = 4, C = 6, H = 8, W = 8;
    constexpr std::int64_t f = 2;
    auto x = oracle::random_tensor<double>(rng, {T, C, H, W});
    flow::Motion<double> m;
    m.kind = flow::MotionKind::constant;
    m.dx = 1;
    m.dy = -1;
    std::vector<Tensor<double>> pf, pb;
    for (std::size_t i = 0; i + 1 < T; ++i) {
        pf.push_back(flow::synth_flow(m, H, W, false));
        pb.push_back(flow::synth_flow(m, H, W, true));
    }

    flow::ValidityConfig soft;
    soft.soft = true;
    soft.soft_scale = 0.5;
    int checked = 0;
    for (const auto& cfg : {flow::ValidityConfig{}, soft}) {
        const auto data = align::build_align_data(pf, pb, 1, cfg);
        const auto y = align::shift_and_align<double>(nullptr, x, data, f);

        // Channels past the two shifted bands pass through bit-for-bit.
        for (std::size_t t = 0; t < T; ++t)
            REQ(bits_equal(channel_band(y, t, 2 * f, C), channel_band(x, t, 2 * f, C)),
                "untouched channel band modified at frame ", t);

        // Every fused element stays inside the hull of its two candidates.
        auto hull_check = [&](std::size_t t, std::size_t c0, const Tensor<double>& warped,
                              const char* which) {
            const auto own = channel_band(x, t, c0, c0 + f);
            const auto out = channel_band(y, t, c0, c0 + f);
            for (std::size_t i = 0; i < out.numel(); ++i) {
                const double lo = std::min(own.data()[i], warped.data()[i]);
                const double hi = std::max(own.data()[i], warped.data()[i]);
                REQ(out.data()[i] >= lo - 1e-12 && out.data()[i] <= hi + 1e-12, which,
                    " fusion leaves the candidate hull at frame ", t, " elem ", i, ": ",
                    out.data()[i], " not in [", lo, ", ", hi, "]");
                ++checked;
            }
        };
        for (std::size_t t = 0; t < T; ++t) {
            if (t == 0)
                REQ(bits_equal(channel_band(y, t, 0, f), channel_band(x, t, 0, f)),
                    "first frame prev-band must pass through");
            else
                hull_check(t, 0,
                           flow::warp_bilinear<double>(nullptr, channel_band(x, t - 1, 0, f),
                                                       data.flow_to_prev[t]),
                           "prev");
            if (t == T - 1)
                REQ(bits_equal(channel_band(y, t, f, 2 * f), channel_band(x, t, f, 2 * f)),
                    "last frame next-band must pass through");
            else
                hull_check(t, f,
                           flow::warp_bilinear<double>(nullptr, channel_band(x, t + 1, f, 2 * f),
                                                       data.flow_to_next[t]),
                           "next");
        }
    }
    return cat("50/50 shifts match the gather oracle; untouched bands bit-identical; ", checked,
               " fused elements inside their hulls");
}

// --- 4. metric closed forms ---------------------------------------------------------

std::string c4_metrics() {
    Rng rng(0xACC4);

    Tensor<double> gt(Shape{5, 5}, 0.25), pred(Shape{5, 5}, 0.35); // MSE = 0.01
    const double p = metrics::psnr(pred, gt, 1.0);
    REQ(std::abs(p - 20.0) < 1e-9, "psnr(peak=1, mse=0.01) = ", p, ", want 20 +- 1e-9");

    auto img = oracle::random_tensor<double>(rng, {16, 16});
    const double s = metrics::ssim(img, img);
    REQ(s == 1.0, "ssim(identical) = ", s, ", want exactly 1.0");

    metrics::FidStats a, b;
    a.mu = {0.0};
    a.sigma = {1.0};
    b.mu = {1.0};
    b.sigma = {1.0};
    const double f1 = metrics::fid(a, b);
    REQ(std::abs(f1 - 1.0) < 1e-6, "fid case one = ", f1, ", want 1 +- 1e-6");
    a.sigma = {4.0};
    const double f2 = metrics::fid(a, b);
    REQ(std::abs(f2 - 2.0) < 1e-6, "fid case two = ", f2, ", want 2 +- 1e-6");

    constexpr std::size_t d = 8;
    std::vector<double> bmat(d * d), amat(d * d, 0.0);
    for (auto& v : bmat) v = rng.normal();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double acc = i == j ? 0.1 : 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += bmat[i * d + k] * bmat[j * d + k];
            amat[i * d + j] = acc;
        }
    const auto root = metrics::sqrtm_psd(amat, d);
    double worst = 0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0;
            for (std::size_t k = 0; k < d; ++k) acc += root[i * d + k] * root[k * d + j];
            worst = std::max(worst, std::abs(acc - amat[i * d + j]));
        }
    REQ(worst < 1e-8, "sqrtm reconstruction err ", worst);

    return cat("psnr err ", std::abs(p - 20.0), "; ssim exact; fid errs ", std::abs(f1 - 1.0),
               "/", std::abs(f2 - 2.0), "; sqrtm err ", worst);
}

// --- 5. pass-through invariant --------------------------------------------------------

std::string c5_passthrough() {
    std::size_t checked = 0;
    for (int i = 0; i < 20; ++i) {
        Rng rng(2000 + i);
        model::GeneratorConfig gc;
        gc.base_channels = 8;
        model::Generator<double> gen(gc, rng);

        flow::Motion<double> m;
        m.kind = flow::MotionKind::constant;
        m.dx = 1;
        m.dy = 0;
        auto clip = synth::gen_clip<double>(m, synth::TextureKind::checker, 3, 16, 16,
                                            7000 + static_cast<std::uint64_t>(i));
        Tensor<double> mask(Shape{3, 1, 16, 16});
        Rng mrng(9000 + i);
        for (std::size_t j = 0; j < mask.numel(); ++j) mask.data()[j] = mrng.uniform() < 0.7;

        model::FlowPyramid<double> pyr;
        const auto mode =
            i % 2 == 0 ? model::TemporalMode::aligned : model::TemporalMode::shift_only;
        if (mode == model::TemporalMode::aligned)
            pyr = model::build_flow_pyramid(clip.pair_fwd, clip.pair_bwd,
                                            gen.config().pyramid_strides(), {});
        const auto out = gen.forward(nullptr, clip.frames, mask, pyr, mode);
        REQ(out.shape() == clip.frames.shape(), "composite shape mismatch");

        const std::size_t hw = 16 * 16;
        for (std::size_t t = 0; t < 3; ++t)
            for (std::size_t c = 0; c < 3; ++c)
                for (std::size_t j = 0; j < hw; ++j) {
                    if (mask.data()[t * hw + j] == 0.0) continue;
                    const std::size_t idx = (t * 3 + c) * hw + j;
                    REQ(out.data()[idx] == clip.frames.data()[idx],
                        "init ", i, ": composite differs from input at a valid pixel (frame ", t,
                        ", ch ", c, ", px ", j, ")");
                    ++checked;
                }
    }
    return cat("20/20 inits exact on ", checked, " valid pixels");
}

// --- 6. overfit smoke ------------------------------------------------------------------

std::string c6_overfit() {
    synth::DatasetSpec spec;
    spec.clips = 1;
    spec.frames = 8;
    spec.height = 64;
    spec.width = 64;
    spec.seed = 0xC6;
    spec.mask.cover_lo = 0.1;
    spec.mask.cover_hi = 0.3;
    const auto clip = synth::sample_clip<double>(spec, 0);

    model::GeneratorConfig gc;
    gc.base_channels = 8;
    Rng rng = Rng(0xC6).fork(1);
    model::Generator<double> gen(gc, rng);

    trainer::Schedule sched;
    sched.stage1_steps = 200;
    sched.lr = 2e-3;
    const auto res = trainer::train<double>(gen, nullptr, {clip}, sched,
                                            model::TemporalMode::aligned);
    REQ(!res.aborted, "training aborted after ", res.steps_done, " steps");
    REQ(res.curve.size() == 200, "expected 200 curve rows");
    const double first = res.curve.front().total, last = res.curve.back().total;
    const double ratio = first / last;
    REQ(ratio >= 10.0, "loss only fell ", ratio, "x (need >=10x): ", first, " -> ", last);

    const auto pyr = model::build_flow_pyramid(clip.pair_fwd, clip.pair_bwd,
                                               gen.config().pyramid_strides(), {});
    const auto comp =
        gen.forward(nullptr, clip.frames, clip.masks, pyr, model::TemporalMode::aligned);
    const double hp = metrics::hole_psnr(comp, clip.frames, clip.masks, 2.0);
    REQ(hp >= 25.0, "hole PSNR ", hp, " dB below 25 dB (loss fell ", ratio, "x)");
    return cat("loss down ", ratio, "x (>=10x); hole PSNR ", hp, " dB (>=25)");
}

// --- 7. alignment ordering across seeds ---------------------------------------------------

std::string c7_trend() {
    const std::vector<trainer::AblationArm> arms{
        {"aligned_exact", trainer::Alignment::aligned_exact},
        {"aligned_perturbed", trainer::Alignment::aligned_perturbed},
        {"shift_only", trainer::Alignment::shift_only},
    };
    const std::vector<synth::MaskKind> kinds{synth::MaskKind::object_like, synth::MaskKind::curve,
                                             synth::MaskKind::stationary};
    int exact_beats_shift = 0, perturbed_between = 0;
    std::string per_seed;
    for (int seed = 1; seed <= 5; ++seed) {
        trainer::AblationConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.frames = 6;
        cfg.height = 32;
        cfg.width = 32;
        cfg.steps = 150;
        cfg.lr = 2e-3;
        cfg.base_channels = 8;
        const auto rows = trainer::run_ablation<float>(arms, kinds, cfg);
        double hole[3] = {0, 0, 0}; // exact, perturbed, shift
        for (const auto& r : rows) {
            const int a = r.arm == "aligned_exact" ? 0 : r.arm == "aligned_perturbed" ? 1 : 2;
            hole[a] += r.hole_l1 / static_cast<double>(kinds.size());
        }
        if (hole[0] < hole[2]) ++exact_beats_shift;
        if (hole[0] <= hole[1] && hole[1] <= hole[2]) ++perturbed_between;
        per_seed += cat(seed == 1 ? "" : " ", "[", hole[0], "/", hole[1], "/", hole[2], "]");
    }
    REQ(exact_beats_shift >= 4, "exact flow beat shift-only in only ", exact_beats_shift,
        "/5 seeds (need >=4); per-seed hole-L1 exact/perturbed/shift: ", per_seed);
    REQ(perturbed_between >= 3, "perturbed flow ranked between in only ", perturbed_between,
        "/5 seeds (need >=3); per-seed hole-L1 exact/perturbed/shift: ", per_seed);
    return cat("exact<shift in ", exact_beats_shift, "/5, perturbed between in ",
               perturbed_between, "/5; hole-L1 exact/perturbed/shift per seed: ", per_seed);
}

// --- 8. CLI determinism ---------------------------------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = std::string(VINPAINT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::string slurp_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void require_same_tree(const fs::path& a, const fs::path& b, const char* what) {
    std::vector<fs::path> rel;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
    std::sort(rel.begin(), rel.end());
    std::size_t b_count = 0;
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) ++b_count;
    REQ(rel.size() == b_count, what, ": file counts differ (", rel.size(), " vs ", b_count, ")");
    for (const auto& r : rel)
        REQ(slurp_file(a / r) == slurp_file(b / r), what, ": ", r.string(),
            " differs between re-runs");
}

std::string c8_cli_determinism() {
    const fs::path root = fs::temp_directory_path() / "vinpaint_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string cfg_path = (root / "run.cfg").string();
    {
        std::ofstream cfg(cfg_path, std::ios::binary);
        cfg << "clips = 2\nframes = 4\nheight = 32\nwidth = 32\n"
               "cover_lo = 0.1\ncover_hi = 0.3\nbase_channels = 8\n"
               "stage1_steps = 4\nlr = 0.002\n";
    }
    auto run = [&](const std::string& args) {
        const int rc = run_cli(args);
        REQ(rc == 0, "`", args, "` exited ", rc);
    };

    std::size_t files = 0;
    for (const char* tag : {"a", "b"}) {
        const std::string d = (root / tag).string();
        run(cat("gen-data --config ", cfg_path, " --out ", d, "/data"));
        run(cat("flow-validity --fwd ", d, "/data/clip_000/flow_fwd_000.tsr --bwd ", d,
                "/data/clip_000/flow_bwd_000.tsr --delta 0.5 --out ", d, "/validity/v"));
        run(cat("train --config ", cfg_path, " --data ", d, "/data --out ", d, "/run"));
        run(cat("inpaint --config ", cfg_path, " --data ", d, "/data/clip_000 --params ", d,
                "/run/generator --out ", d, "/pred/clip_000"));
        run(cat("inpaint --config ", cfg_path, " --data ", d, "/data/clip_001 --params ", d,
                "/run/generator --out ", d, "/pred/clip_001"));
        run(cat("eval --config ", cfg_path, " --data ", d, "/data --pred ", d, "/pred --out ", d,
                "/eval.csv"));
    }
    for (const auto& e : fs::recursive_directory_iterator(root / "a"))
        if (e.is_regular_file()) ++files;
    require_same_tree(root / "a", root / "b", "re-run");
    fs::remove_all(root);
    return cat("gen-data/flow-validity/train/inpaint/eval re-runs byte-identical across ", files,
               " files");
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    auto want = [&](int id) { return only.empty() || only.count(id) > 0; };

    if (want(1)) criterion(1, "gradient suite", 120, c1_gradients);
    if (want(2)) criterion(2, "warp and validity oracles", 30, c2_warp_validity);
    if (want(3)) criterion(3, "temporal shift oracles", 30, c3_shift);
    if (want(4)) criterion(4, "metric closed forms", 10, c4_metrics);
    if (want(5)) criterion(5, "valid-pixel pass-through", 60, c5_passthrough);
    if (want(6)) criterion(6, "single-clip overfit", 600, c6_overfit);
    if (want(7)) criterion(7, "alignment ordering across seeds", 3600, c7_trend);
    if (want(8)) criterion(8, "CLI determinism", 600, c8_cli_determinism);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
