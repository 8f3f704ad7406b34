#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "vinpaint/flow.hpp"
#include "vinpaint/ops.hpp"

using namespace vinpaint;
namespace fl = vinpaint::flow;
namespace op = vinpaint::ops;

namespace {

Tensor<double> rt(Rng& rng, const Shape& s, double scale = 1.0) {
    return oracle::random_tensor<double>(rng, s, scale);
}

// Long-hand cycle-consistency check, one pixel at a time, sharing no code with
// the library: returns 1 iff the backward landing point stays inside the frame
// and the bilinearly-interpolated forward flow closes the loop within delta.
double cycle_pixel(const Tensor<double>& fwd, const Tensor<double>& bwd, std::size_t y,
                   std::size_t x, double delta) {
    const auto H = static_cast<double>(fwd.extent(0));
    const auto W = static_cast<double>(fwd.extent(1));
    const double bx = bwd.at(y, x, 0), by = bwd.at(y, x, 1);
    const double qx = static_cast<double>(x) + bx;
    const double qy = static_cast<double>(y) + by;
    if (!(qx >= 0 && qx <= W - 1 && qy >= 0 && qy <= H - 1)) return 0.0;
    auto pick = [&](long yy, long xx, std::size_t c) -> double {
        if (yy < 0 || yy >= static_cast<long>(fwd.extent(0)) || xx < 0 ||
            xx >= static_cast<long>(fwd.extent(1)))
            return 0.0;
        return fwd.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx), c);
    };
    const long x0 = static_cast<long>(std::floor(qx)), y0 = static_cast<long>(std::floor(qy));
    const double fx = qx - static_cast<double>(x0), fy = qy - static_cast<double>(y0);
    double d[2];
    for (std::size_t c = 0; c < 2; ++c) {
        const double top = (1 - fx) * pick(y0, x0, c) + fx * pick(y0, x0 + 1, c);
        const double bot = (1 - fx) * pick(y0 + 1, x0, c) + fx * pick(y0 + 1, x0 + 1, c);
        d[c] = (1 - fy) * top + fy * bot;
    }
    return std::hypot(bx + d[0], by + d[1]) < delta ? 1.0 : 0.0;
}

} // namespace

TEST_CASE("validate_flow rejects bad shapes and values") {
    CHECK_THROWS_AS(fl::validate_flow(Tensor<double>(Shape{4, 4, 3}), "t"), const dim_error&);
    CHECK_THROWS_AS(fl::validate_flow(Tensor<double>(Shape{4, 4}), "t"), const dim_error&);
    Tensor<double> f(Shape{4, 4, 2});
    f.data()[5] = std::nan("");
    CHECK_THROWS_AS(fl::validate_flow(f, "t"), const numeric_error&);
    Tensor<double> g(Shape{4, 4, 2});
    g.data()[0] = 100.0; // |dx| > W
    CHECK_THROWS_AS(fl::validate_flow(g, "t"), const numeric_error&);
    CHECK_NOTHROW(fl::validate_flow(Tensor<double>(Shape{4, 4, 2}), "t"));
}

TEST_CASE("warp_bilinear op: zero flow is the identity, in-bounds everywhere") {
    Rng rng(21);
    auto src = rt(rng, Shape{3, 5, 7});
    Tensor<double> flow(Shape{5, 7, 2});
    Tensor<double> inb;
    auto y = fl::warp_bilinear<double>(nullptr, src, flow, &inb);
    CHECK(std::memcmp(y.data(), src.data(), src.numel() * sizeof(double)) == 0);
    for (std::size_t i = 0; i < inb.numel(); ++i) CHECK(inb.data()[i] == 1.0);
}

TEST_CASE("warp_bilinear op: gradient w.r.t. src passes finite differences") {
    Rng rng(22);
    auto src = rt(rng, Shape{2, 5, 6});
    Tensor<double> flow(Shape{5, 6, 2});
    for (std::size_t i = 0; i < flow.numel(); ++i) flow.data()[i] = rng.uniform(-1.5, 1.5);
    auto f = [&](Tape* t) { return op::mean(t, fl::warp_bilinear(t, src, flow)); };
    CHECK(op::grad_check<double>(f, {src}, 1e-5, 1e-6).ok);
}

TEST_CASE("warp_bilinear op rejects mismatched flow") {
    Tensor<double> src(Shape{1, 4, 4});
    CHECK_THROWS_AS(fl::warp_bilinear<double>(nullptr, src, Tensor<double>(Shape{5, 4, 2})),
                    const dim_error&);
    CHECK_THROWS_AS(fl::warp_bilinear<double>(nullptr, Tensor<double>(Shape{4, 4}),
                                              Tensor<double>(Shape{4, 4, 2})),
                    const dim_error&);
}

TEST_CASE("cycle_validity matches the brute-force oracle on random smooth flows") {
    Rng rng(23);
    const std::size_t H = 16, W = 16;
    for (int trial = 0; trial < 4; ++trial) {
        auto fwd = fl::synth_noise_flow<double>(rng, H, W, 1.3, 4);
        auto bwd = fl::synth_noise_flow<double>(rng, H, W, 1.3, 4);
        fl::ValidityConfig cfg;
        cfg.delta = 1.0;
        auto mask = fl::cycle_validity(fwd, bwd, cfg);
        REQUIRE(mask.shape() == Shape{H, W});
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x)
                CHECK(mask.at(y, x) == cycle_pixel(fwd, bwd, y, x, cfg.delta));
    }
}

TEST_CASE("cycle_validity: consistent constant pair is valid wherever it lands in frame") {
    const std::size_t H = 6, W = 8;
    fl::Motion<double> m;
    m.kind = fl::MotionKind::constant;
    m.dx = 2.0;
    auto fwd = fl::synth_flow(m, H, W, false); // (+2, 0) on the earlier frame
    auto bwd = fl::synth_flow(m, H, W, true);  // (-2, 0) on the later frame
    auto mask = fl::cycle_validity(fwd, bwd);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x)
            CHECK(mask.at(y, x) == (x >= 2 ? 1.0 : 0.0));
}

TEST_CASE("cycle_validity: inconsistent pair fails the threshold, passes a looser one") {
    const std::size_t H = 6, W = 8;
    fl::Motion<double> m;
    m.kind = fl::MotionKind::constant;
    m.dx = 2.0;
    auto bwd = fl::synth_flow(m, H, W, true);        // (-2, 0)
    Tensor<double> fwd(Shape{H, W, 2});              // forward claims no motion
    auto tight = fl::cycle_validity(fwd, bwd);       // err = 2 >= 1
    for (std::size_t i = 0; i < tight.numel(); ++i) CHECK(tight.data()[i] == 0.0);
    fl::ValidityConfig loose;
    loose.delta = 2.5;
    auto ok = fl::cycle_validity(fwd, bwd, loose);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x)
            CHECK(ok.at(y, x) == (x >= 2 ? 1.0 : 0.0));
}

TEST_CASE("cycle_validity: soft mode scores the round-trip error, zero out of frame") {
    const std::size_t H = 4, W = 6;
    fl::Motion<double> m;
    m.kind = fl::MotionKind::constant;
    m.dx = 2.0;
    auto bwd = fl::synth_flow(m, H, W, true);
    Tensor<double> fwd(Shape{H, W, 2});
    fl::ValidityConfig cfg;
    cfg.soft = true;
    cfg.soft_scale = 2.0; // err = 2 -> exp(-1)
    auto mask = fl::cycle_validity(fwd, bwd, cfg);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            if (x < 2)
                CHECK(mask.at(y, x) == 0.0);
            else
                CHECK(mask.at(y, x) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
        }
}

TEST_CASE("cycle_validity: analytic rotation pair closes the loop exactly") {
    const std::size_t H = 16, W = 16;
    fl::Motion<double> m;
    m.kind = fl::MotionKind::rotation;
    m.angle = 0.15;
    auto fwd = fl::synth_flow(m, H, W, false);
    auto bwd = fl::synth_flow(m, H, W, true);
    auto mask = fl::cycle_validity(fwd, bwd);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            const double qx = static_cast<double>(x) + bwd.at(y, x, 0);
            const double qy = static_cast<double>(y) + bwd.at(y, x, 1);
            const bool inb = qx >= 0 && qx <= W - 1.0 && qy >= 0 && qy <= H - 1.0;
            CHECK(mask.at(y, x) == (inb ? 1.0 : 0.0));
        }
}

TEST_CASE("rescale_flow: box average matches the analytic coarse field for linear flows") {
    const std::size_t H = 16, W = 16;
    fl::Motion<double> m;
    m.kind = fl::MotionKind::rotation;
    m.angle = 0.2;
    auto fine = fl::synth_flow(m, H, W, true);
    auto coarse = fl::rescale_flow(fine, 4);
    auto expect = fl::synth_flow(m, std::size_t(4), std::size_t(4), true);
    REQUIRE(coarse.shape() == Shape{4, 4, 2});
    for (std::size_t i = 0; i < coarse.numel(); ++i)
        CHECK(coarse.data()[i] == doctest::Approx(expect.data()[i]).epsilon(1e-12));

    // translation components scale by 1/stride
    fl::Motion<double> t;
    t.kind = fl::MotionKind::constant;
    t.dx = 4.0;
    t.dy = -2.0;
    auto ct = fl::rescale_flow(fl::synth_flow(t, H, W, false), 4);
    for (std::size_t i = 0; i < ct.numel(); i += 2) {
        CHECK(ct.data()[i] == doctest::Approx(1.0));
        CHECK(ct.data()[i + 1] == doctest::Approx(-0.5));
    }

    CHECK_THROWS_AS(fl::rescale_flow(fine, 3), const dim_error&);
    auto same = fl::rescale_flow(fine, 1);
    CHECK(std::memcmp(same.data(), fine.data(), fine.numel() * sizeof(double)) == 0);
}

TEST_CASE("synth_flow for integer translation reproduces the shifted frame bit-for-bit") {
    Rng rng(24);
    const std::size_t H = 9, W = 12;
    const long dx = 3, dy = 1; // content moves right and down per frame
    auto prev = rt(rng, Shape{1, H, W});
    Tensor<double> cur(Shape{1, H, W});
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            const long sx = static_cast<long>(x) - dx, sy = static_cast<long>(y) - dy;
            if (sx >= 0 && sy >= 0 && sx < static_cast<long>(W) && sy < static_cast<long>(H))
                cur.at(0, y, x) = prev.at(0, static_cast<std::size_t>(sy),
                                          static_cast<std::size_t>(sx));
        }
    fl::Motion<double> m;
    m.kind = fl::MotionKind::constant;
    m.dx = static_cast<double>(dx);
    m.dy = static_cast<double>(dy);
    auto bwd = fl::synth_flow(m, H, W, true);
    Tensor<double> inb;
    auto warped = fl::warp_bilinear<double>(nullptr, prev, bwd, &inb);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            if (inb.at(y, x) == 1.0)
                CHECK(warped.at(0, y, x) == cur.at(0, y, x));
            else
                CHECK(warped.at(0, y, x) == 0.0);
        }
}

TEST_CASE("synth_noise_flow is deterministic, smooth, and bounded") {
    Rng a(77), b(77);
    auto f1 = fl::synth_noise_flow<double>(a, 32, 24, 0.5);
    auto f2 = fl::synth_noise_flow<double>(b, 32, 24, 0.5);
    CHECK(std::memcmp(f1.data(), f2.data(), f1.numel() * sizeof(double)) == 0);
    CHECK_NOTHROW(fl::validate_flow(f1, "noise"));
    for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 0; x + 1 < 24; ++x)
            for (std::size_t c = 0; c < 2; ++c)
                CHECK(std::fabs(f1.at(y, x + 1, c) - f1.at(y, x, c)) < 1.5);
    Rng c(78);
    auto f3 = fl::synth_noise_flow<double>(c, 32, 24, 0.5);
    CHECK(std::memcmp(f1.data(), f3.data(), f1.numel() * sizeof(double)) != 0);
}
