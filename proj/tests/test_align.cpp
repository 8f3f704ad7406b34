#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "oracles.hpp"
#include "vinpaint/align.hpp"
#include "vinpaint/ops.hpp"

using namespace vinpaint;
namespace al = vinpaint::align;
namespace fl = vinpaint::flow;
namespace op = vinpaint::ops;

namespace {

// All-zero flows and all-one validity for a T-frame clip at H x W.
al::AlignData<double> trivial_data(std::size_t T, std::size_t H, std::size_t W) {
    al::AlignData<double> d;
    d.flow_to_prev.resize(T);
    d.flow_to_next.resize(T);
    d.valid_prev.resize(T);
    d.valid_next.resize(T);
    for (std::size_t t = 1; t < T; ++t) {
        d.flow_to_prev[t] = Tensor<double>(Shape{H, W, 2});
        d.valid_prev[t] = Tensor<double>(Shape{H, W}, 1.0);
    }
    for (std::size_t t = 0; t + 1 < T; ++t) {
        d.flow_to_next[t] = Tensor<double>(Shape{H, W, 2});
        d.valid_next[t] = Tensor<double>(Shape{H, W}, 1.0);
    }
    return d;
}

Tensor<double> positive_tensor(Rng& rng, const Shape& s) {
    Tensor<double> t(s);
    for (std::size_t i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(0.5, 1.5);
    return t;
}

} // namespace

TEST_CASE("shift_channels and temporal_receptive_field") {
    CHECK(al::shift_channels(16) == 2);
    CHECK(al::shift_channels(8) == 1);
    CHECK(al::shift_channels(4, 0.1) == 1); // floor gives 0, clamped up to 1
    CHECK(al::shift_channels(64, 0.25) == 16);
    CHECK_THROWS_AS(al::shift_channels(1), const dim_error&);
    CHECK_THROWS_AS(al::shift_channels(8, 0.8), const dim_error&); // 2*6 > 8
    CHECK_THROWS_AS(al::shift_channels(8, 0.0), const dim_error&);
    CHECK(al::temporal_receptive_field(0) == 1);
    CHECK(al::temporal_receptive_field(1) == 1);
    CHECK(al::temporal_receptive_field(12) == 23);
    CHECK(al::temporal_receptive_field(21) == 41);
    CHECK_THROWS_AS(al::temporal_receptive_field(-1), const dim_error&);
}

TEST_CASE("zero flow + full validity reproduces the plain channel shift away from clip ends") {
    Rng rng(31);
    const std::size_t T = 4, C = 6, H = 3, W = 5;
    auto x = positive_tensor(rng, Shape{T, C, H, W});
    const std::int64_t f = 2;
    auto aligned = al::shift_and_align<double>(nullptr, x, trivial_data(T, H, W), f);
    auto plain = op::temporal_shift<double>(nullptr, x, f);

    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t w = 0; w < W; ++w) {
                    const double got = aligned.at(t, c, y, w);
                    if (c < 2 && t == 0)
                        CHECK(got == x.at(t, c, y, w)); // no prev: keep own features
                    else if (c >= 2 && c < 4 && t == T - 1)
                        CHECK(got == x.at(t, c, y, w)); // no next: keep own features
                    else
                        CHECK(got == plain.at(t, c, y, w));
                }
}

TEST_CASE("integer translation with matching flows makes the aligned shift an identity") {
    // Every frame shows the same content displaced one pixel right per frame.
    // After warping, borrowed neighbour bands land exactly on the current
    // frame's features, and invalid border pixels fall back to them too.
    Rng rng(32);
    const std::size_t T = 4, C = 4, H = 6, W = 8;
    // One wide panorama; frame t shows a window one pixel further left, so the
    // on-screen content moves one pixel right per frame and every pixel of
    // every frame has a well-defined counterpart in its neighbours.
    auto pano = positive_tensor(rng, Shape{C, H, W + T - 1});
    Tensor<double> x(Shape{T, C, H, W});
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t w = 0; w < W; ++w)
                    x.at(t, c, y, w) = pano.at(c, y, w + (T - 1 - t));

    fl::Motion<double> m;
    m.kind = fl::MotionKind::constant;
    m.dx = 1.0;
    std::vector<Tensor<double>> pf(T - 1), pb(T - 1);
    for (std::size_t i = 0; i + 1 < T; ++i) {
        pf[i] = fl::synth_flow(m, H, W, false);
        pb[i] = fl::synth_flow(m, H, W, true);
    }
    auto data = al::build_align_data(pf, pb, 1, {});

    // Valid pixels borrow the neighbour band warped into register with the
    // current frame — which equals the frame's own band here — and invalid
    // pixels fall back to the frame's own band, so the whole op is an identity.
    auto aligned = al::shift_and_align<double>(nullptr, x, data, 1);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(aligned.data()[i] == x.data()[i]);
}

TEST_CASE("zero validity everywhere degrades to the identity") {
    Rng rng(33);
    const std::size_t T = 3, C = 4, H = 4, W = 4;
    auto x = positive_tensor(rng, Shape{T, C, H, W});
    auto d = trivial_data(T, H, W);
    for (std::size_t t = 1; t < T; ++t) d.valid_prev[t] = Tensor<double>(Shape{H, W});
    for (std::size_t t = 0; t + 1 < T; ++t) d.valid_next[t] = Tensor<double>(Shape{H, W});
    for (std::size_t t = 1; t < T; ++t)
        for (std::size_t i = 0; i < d.flow_to_prev[t].numel(); ++i)
            d.flow_to_prev[t].data()[i] = rng.uniform(-1.0, 1.0);
    auto y = al::shift_and_align<double>(nullptr, x, d, 1);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == x.data()[i]);
}

TEST_CASE("shift_and_align gradient passes finite differences (hard and soft validity)") {
    Rng rng(34);
    const std::size_t T = 3, C = 4, H = 4, W = 5;
    auto x = positive_tensor(rng, Shape{T, C, H, W});
    std::vector<Tensor<double>> pf(T - 1), pb(T - 1);
    for (std::size_t i = 0; i + 1 < T; ++i) {
        pf[i] = fl::synth_noise_flow<double>(rng, H, W, 0.8, 2);
        pb[i] = fl::synth_noise_flow<double>(rng, H, W, 0.8, 2);
    }
    auto hard = al::build_align_data(pf, pb, 1, {});
    auto f1 = [&](Tape* t) { return op::mean(t, al::shift_and_align(t, x, hard, 1)); };
    CHECK(op::grad_check<double>(f1, {x}, 1e-5, 1e-6).ok);

    fl::ValidityConfig soft;
    soft.soft = true;
    soft.soft_scale = 1.5;
    auto sdata = al::build_align_data(pf, pb, 1, soft);
    auto f2 = [&](Tape* t) { return op::mean(t, al::shift_and_align(t, x, sdata, 1)); };
    CHECK(op::grad_check<double>(f2, {x}, 1e-5, 1e-6).ok);
}

TEST_CASE("shift_and_align serial and parallel dispatch are bit-identical") {
    Rng rng(35);
    const std::size_t T = 4, C = 6, H = 7, W = 9;
    auto x = positive_tensor(rng, Shape{T, C, H, W});
    std::vector<Tensor<double>> pf(T - 1), pb(T - 1);
    for (std::size_t i = 0; i + 1 < T; ++i) {
        pf[i] = fl::synth_noise_flow<double>(rng, H, W, 1.1, 2);
        pb[i] = fl::synth_noise_flow<double>(rng, H, W, 1.1, 2);
    }
    auto data = al::build_align_data(pf, pb, 1, {});

    auto run = [&](bool par) {
        set_parallel_kernels(par);
        auto xc = x.clone();
        xc.set_requires_grad(true);
        Tape tape;
        auto loss = op::mean(&tape, op::abs(&tape, al::shift_and_align(&tape, xc, data, 2)));
        backward(tape, loss);
        set_parallel_kernels(true);
        return std::pair<Tensor<double>, Tensor<double>>(loss, xc);
    };
    auto [l1, x1] = run(false);
    auto [l2, x2] = run(true);
    CHECK(std::memcmp(l1.data(), l2.data(), sizeof(double)) == 0);
    CHECK(std::memcmp(x1.grad(), x2.grad(), x1.numel() * sizeof(double)) == 0);
}

TEST_CASE("shift_and_align validates its inputs") {
    Rng rng(36);
    const std::size_t T = 3, C = 4, H = 4, W = 4;
    auto x = positive_tensor(rng, Shape{T, C, H, W});
    auto good = trivial_data(T, H, W);
    CHECK_NOTHROW(al::shift_and_align<double>(nullptr, x, good, 1));
    CHECK_THROWS_AS(al::shift_and_align<double>(nullptr, x, good, 0), const dim_error&);
    CHECK_THROWS_AS(al::shift_and_align<double>(nullptr, x, good, 3), const dim_error&);

    auto short_vecs = trivial_data(T - 1, H, W);
    CHECK_THROWS_AS(al::shift_and_align<double>(nullptr, x, short_vecs, 1), const dim_error&);

    auto missing = trivial_data(T, H, W);
    missing.flow_to_prev[1] = Tensor<double>();
    CHECK_THROWS_AS(al::shift_and_align<double>(nullptr, x, missing, 1), const dim_error&);

    auto wrong_mask = trivial_data(T, H, W);
    wrong_mask.valid_next[0] = Tensor<double>(Shape{H, W + 1});
    CHECK_THROWS_AS(al::shift_and_align<double>(nullptr, x, wrong_mask, 1), const dim_error&);

    CHECK_THROWS_AS(al::shift_and_align<double>(nullptr, Tensor<double>(Shape{C, H, W}), good, 1),
                    const dim_error&);
}

TEST_CASE("build_align_data scales flows and thresholds with the pyramid stride") {
    const std::size_t T = 3, H = 8, W = 8;
    fl::Motion<double> m;
    m.kind = fl::MotionKind::constant;
    m.dx = 1.0;
    std::vector<Tensor<double>> pf(T - 1), pb(T - 1);
    for (std::size_t i = 0; i + 1 < T; ++i) {
        pf[i] = fl::synth_flow(m, H, W, false);
        pb[i] = fl::synth_flow(m, H, W, true);
    }
    auto d = al::build_align_data(pf, pb, 2, {});
    REQUIRE(d.flow_to_prev.size() == T);
    CHECK(!d.flow_to_prev[0].defined());
    CHECK(!d.flow_to_next[T - 1].defined());
    REQUIRE(d.flow_to_prev[1].shape() == Shape{4, 4, 2});
    CHECK(d.flow_to_prev[1].at(2, 2, 0) == doctest::Approx(-0.5));
    // round trip still closes exactly, so validity is the in-bounds region
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x2 = 0; x2 < 4; ++x2)
            CHECK(d.valid_prev[1].at(y, x2) == (x2 >= 1 ? 1.0 : 0.0));

    pb.pop_back();
    CHECK_THROWS_AS(al::build_align_data(pf, pb, 2, {}), const dim_error&);
}
