#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "vinpaint/model.hpp"
#include "vinpaint/ops.hpp"

using namespace vinpaint;
using model::FlowPyramid;
using model::TemporalMode;

namespace {

// A pyramid of zero flows with full validity at each requested stride: the
// aligned path then degenerates to a plain temporal shift with boundary-frame
// fallback, which is enough for shape and gradient tests.
template <typename T>
FlowPyramid<T> trivial_pyramid(std::size_t frames, std::size_t h, std::size_t w,
                               const std::vector<std::int64_t>& strides) {
    FlowPyramid<T> p;
    for (std::int64_t s : strides) {
        const std::size_t hs = h / s, ws = w / s;
        align::AlignData<T> d;
        d.flow_to_prev.assign(frames, Tensor<T>());
        d.flow_to_next.assign(frames, Tensor<T>());
        d.valid_prev.assign(frames, Tensor<T>());
        d.valid_next.assign(frames, Tensor<T>());
        for (std::size_t t = 0; t < frames; ++t) {
            if (t > 0) {
                d.flow_to_prev[t] = Tensor<T>(Shape{hs, ws, 2});
                d.valid_prev[t] = Tensor<T>(Shape{hs, ws}, T(1));
            }
            if (t + 1 < frames) {
                d.flow_to_next[t] = Tensor<T>(Shape{hs, ws, 2});
                d.valid_next[t] = Tensor<T>(Shape{hs, ws}, T(1));
            }
        }
        p.levels[s] = std::move(d);
    }
    return p;
}

template <typename T>
Tensor<T> uniform(Rng& rng, Shape s, T lo, T hi) {
    Tensor<T> t(std::move(s));
    for (std::size_t i = 0; i < t.numel(); ++i)
        t.data()[i] = lo + static_cast<T>(rng.uniform()) * (hi - lo);
    return t;
}

} // namespace

TEST_CASE("gated conv with zero gate weights halves the feature") {
    Rng rng(7);
    auto gc = model::GatedConv<double>::init(rng, 2, 3, 3, 1, 1, /*activate=*/false);
    std::memset(gc.wg.data(), 0, gc.wg.numel() * sizeof(double));
    auto x = uniform<double>(rng, Shape{1, 2, 6, 6}, -1.0, 1.0);
    auto out = gc.forward(nullptr, x);
    auto feat = ops::conv2d<double>(nullptr, x, gc.wf, gc.bf, 1, 1);
    REQUIRE(out.shape() == feat.shape());
    for (std::size_t i = 0; i < out.numel(); ++i)
        CHECK(out.data()[i] == doctest::Approx(0.5 * feat.data()[i]).epsilon(1e-12));
}

TEST_CASE("gated deconv doubles the spatial extents") {
    Rng rng(9);
    auto gd = model::GatedDeconv<float>::init(rng, 4, 2);
    auto x = uniform<float>(rng, Shape{2, 4, 5, 7}, -1.f, 1.f);
    auto out = gd.forward(nullptr, x);
    REQUIRE(out.shape() == Shape{2, 2, 10, 14});
}

TEST_CASE("temporal unit with a single frame and no neighbours acts frame-locally") {
    // With T = 1 the shift bands have no neighbour in either direction, so both
    // the plain-shift and aligned paths must reduce to the same per-frame op.
    Rng rng(11);
    auto tg = model::TemporalGatedConv<double>::init(rng, 8, 8, 3, 1, 0.125);
    auto pyr = trivial_pyramid<double>(1, 8, 8, {1});
    auto x = uniform<double>(rng, Shape{1, 8, 8, 8}, -1.0, 1.0);
    auto aligned = tg.forward(nullptr, x, TemporalMode::aligned, pyr);

    // Plain shift zero-fills the bands instead; build the reference by hand.
    auto ref_in = x.clone();
    const std::size_t plane = 8 * 8;
    std::memset(ref_in.data(), 0, 2 * tg.band * plane * sizeof(double));
    auto feat = ops::conv2d<double>(nullptr, ref_in, tg.wf, tg.bf, 1, 1);
    auto gate = ops::sigmoid<double>(nullptr, ops::conv2d<double>(nullptr, x, tg.wg, tg.bg, 1, 1));
    auto shift_ref = ops::mul<double>(nullptr, feat, gate);
    auto shifted = tg.forward(nullptr, x, TemporalMode::shift_only, pyr);
    CHECK(std::memcmp(shifted.data(), shift_ref.data(), shifted.numel() * sizeof(double)) == 0);

    // Aligned path keeps the frame's own band content (fallback), so it equals
    // the gated conv of the unmodified input.
    auto feat_own = ops::conv2d<double>(nullptr, x, tg.wf, tg.bf, 1, 1);
    auto own_ref = ops::mul<double>(nullptr, feat_own, gate);
    CHECK(std::memcmp(aligned.data(), own_ref.data(), aligned.numel() * sizeof(double)) == 0);
}

TEST_CASE("generator walk: shapes, composite pass-through, bounded output") {
    Rng rng(21);
    model::GeneratorConfig cfg;
    cfg.base_channels = 4;
    model::Generator<float> gen(cfg, rng);
    CHECK(cfg.temporal_units() == 12);
    CHECK(cfg.pyramid_strides() == std::vector<std::int64_t>{1, 2, 4, 8});

    const std::size_t Tn = 4, H = 32, W = 32;
    auto frames = uniform<float>(rng, Shape{Tn, 3, H, W}, -1.f, 1.f);
    Tensor<float> mask(Shape{Tn, 1, H, W}, 1.f);
    for (std::size_t t = 0; t < Tn; ++t)
        for (std::size_t y = 8; y < 20; ++y)
            for (std::size_t x = 10; x < 22; ++x) mask.at(t, std::size_t(0), y, x) = 0.f;

    auto pyr = trivial_pyramid<float>(Tn, H, W, cfg.pyramid_strides());
    auto out = gen.forward(nullptr, frames, mask, pyr, TemporalMode::aligned);
    REQUIRE(out.shape() == frames.shape());

    std::size_t holes = 0;
    for (std::size_t t = 0; t < Tn; ++t)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t x = 0; x < W; ++x) {
                    const float o = out.at(t, c, y, x);
                    if (mask.at(t, std::size_t(0), y, x) != 0.f) {
                        CHECK(o == frames.at(t, c, y, x)); // known pixels copied exactly
                    } else {
                        ++holes;
                        CHECK(o >= -1.f);
                        CHECK(o <= 1.f); // tanh head bounds predictions
                    }
                }
    CHECK(holes == Tn * 3 * 12 * 12);
}

TEST_CASE("composite pass-through holds for many random inits when mask is all ones") {
    model::GeneratorConfig cfg;
    cfg.base_channels = 2;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        model::Generator<float> gen(cfg, rng);
        auto frames = uniform<float>(rng, Shape{2, 3, 16, 16}, -1.f, 1.f);
        Tensor<float> mask(Shape{2, 1, 16, 16}, 1.f);
        auto pyr = trivial_pyramid<float>(2, 16, 16, cfg.pyramid_strides());
        auto out = gen.forward(nullptr, frames, mask, pyr, TemporalMode::shift_only);
        CHECK(std::memcmp(out.data(), frames.data(), out.numel() * sizeof(float)) == 0);
    }
}

TEST_CASE("generator rejects malformed inputs and missing pyramid levels") {
    Rng rng(3);
    model::GeneratorConfig cfg;
    cfg.base_channels = 2;
    model::Generator<float> gen(cfg, rng);
    auto pyr = trivial_pyramid<float>(2, 16, 16, cfg.pyramid_strides());
    Tensor<float> frames(Shape{2, 3, 16, 16}), mask(Shape{2, 1, 16, 16}, 1.f);

    CHECK_THROWS_AS(gen.forward(nullptr, Tensor<float>(Shape{2, 4, 16, 16}), mask, pyr,
                                TemporalMode::aligned),
                    dim_error);
    CHECK_THROWS_AS(gen.forward(nullptr, frames, Tensor<float>(Shape{2, 1, 8, 8}), pyr,
                                TemporalMode::aligned),
                    dim_error);
    CHECK_THROWS_AS(gen.forward(nullptr, Tensor<float>(Shape{2, 3, 12, 12}),
                                Tensor<float>(Shape{2, 1, 12, 12}), pyr, TemporalMode::aligned),
                    dim_error);

    auto thin = trivial_pyramid<float>(2, 16, 16, {1, 2});
    CHECK_THROWS_WITH_AS(gen.forward(nullptr, frames, mask, thin, TemporalMode::aligned),
                         doctest::Contains("stride 4"), dim_error);
    // plain shift never touches the pyramid
    CHECK_NOTHROW(gen.forward(nullptr, frames, mask, thin, TemporalMode::shift_only));
}

TEST_CASE("every generator parameter receives gradient") {
    Rng rng(5);
    model::GeneratorConfig cfg;
    cfg.base_channels = 2;
    model::Generator<float> gen(cfg, rng);
    auto params = gen.parameters();
    CHECK(params.size() > 40);
    for (auto& [name, p] : params) {
        p.set_requires_grad(true);
        p.zero_grad();
    }

    auto frames = uniform<float>(rng, Shape{3, 3, 16, 16}, -1.f, 1.f);
    Tensor<float> mask(Shape{3, 1, 16, 16}, 1.f);
    // poke holes so the composite actually exposes the prediction
    for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t y = 2; y < 14; ++y)
            for (std::size_t x = 2; x < 14; ++x) mask.at(t, std::size_t(0), y, x) = 0.f;
    auto pyr = trivial_pyramid<float>(3, 16, 16, cfg.pyramid_strides());

    Tape tape;
    auto out = gen.forward(&tape, frames, mask, pyr, TemporalMode::aligned);
    auto loss = ops::mean(&tape, ops::abs(&tape, out));
    backward(tape, loss);

    for (auto& [name, p] : params) {
        float asum = 0.f;
        for (std::size_t i = 0; i < p.numel(); ++i) asum += std::fabs(p.grad()[i]);
        INFO("parameter ", name);
        CHECK(asum > 0.f);
    }
}

TEST_CASE("generator construction and forward are deterministic in the seed") {
    model::GeneratorConfig cfg;
    cfg.base_channels = 2;
    auto run = [&] {
        Rng rng(77);
        model::Generator<float> gen(cfg, rng);
        auto frames = uniform<float>(rng, Shape{2, 3, 16, 16}, -1.f, 1.f);
        Tensor<float> mask(Shape{2, 1, 16, 16}); // all holes
        auto pyr = trivial_pyramid<float>(2, 16, 16, cfg.pyramid_strides());
        return gen.forward(nullptr, frames, mask, pyr, TemporalMode::aligned);
    };
    auto a = run(), b = run();
    CHECK(std::memcmp(a.data(), b.data(), a.numel() * sizeof(float)) == 0);
}

TEST_CASE("gradient check through a temporal gated conv block") {
    Rng rng(13);
    auto tg = model::TemporalGatedConv<double>::init(rng, 4, 4, 3, 1, 0.25);
    auto pyr = trivial_pyramid<double>(3, 6, 6, {1});
    auto x = uniform<double>(rng, Shape{3, 4, 6, 6}, -1.0, 1.0);
    auto f = [&](Tape* tape) {
        return ops::mean(tape, ops::abs(tape, tg.forward(tape, x, TemporalMode::aligned, pyr)));
    };
    auto res = ops::grad_check<double>(f, {x}, 1e-5, 1e-4);
    CHECK(res.ok);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("discriminator walk and shortness guard") {
    Rng rng(31);
    model::Discriminator<float> disc(rng, 8);
    CHECK(disc.parameters().size() == 8);
    auto video = uniform<float>(rng, Shape{8, 3, 64, 64}, -1.f, 1.f);
    auto scores = disc.forward(nullptr, video);
    REQUIRE(scores.shape() == Shape{8, 1, 4, 4});

    CHECK_THROWS_AS(disc.forward(nullptr, Tensor<float>(Shape{2, 3, 64, 64})), dim_error);
    CHECK_THROWS_AS(disc.forward(nullptr, Tensor<float>(Shape{8, 1, 64, 64})), dim_error);
}

TEST_CASE("discriminator parameters all receive gradient") {
    Rng rng(33);
    model::Discriminator<float> disc(rng, 2);
    auto params = disc.parameters();
    for (auto& [name, p] : params) {
        p.set_requires_grad(true);
        p.zero_grad();
    }
    auto video = uniform<float>(rng, Shape{3, 3, 16, 16}, -1.f, 1.f);
    Tape tape;
    auto loss = ops::mean(&tape, ops::abs(&tape, disc.forward(&tape, video)));
    backward(tape, loss);
    for (auto& [name, p] : params) {
        float asum = 0.f;
        for (std::size_t i = 0; i < p.numel(); ++i) asum += std::fabs(p.grad()[i]);
        INFO("parameter ", name);
        CHECK(asum > 0.f);
    }
}

TEST_CASE("build_flow_pyramid computes every requested level") {
    Rng rng(41);
    const std::size_t H = 16, W = 16;
    flow::Motion<double> m;
    m.kind = flow::MotionKind::constant;
    m.dx = 1.0;
    m.dy = 0.0;
    std::vector<Tensor<double>> fwd, bwd;
    for (int i = 0; i < 2; ++i) {
        fwd.push_back(flow::synth_flow(m, H, W, /*to_prev=*/false));
        bwd.push_back(flow::synth_flow(m, H, W, /*to_prev=*/true));
    }
    auto pyr = model::build_flow_pyramid<double>(fwd, bwd, {1, 2, 4});
    CHECK(pyr.levels.size() == 3);
    for (std::int64_t s : {1, 2, 4}) {
        const auto& d = pyr.at(s);
        REQUIRE(d.flow_to_prev.size() == 3);
        REQUIRE(d.valid_prev[1].shape() == Shape{H / s, W / s});
        // constant translation halves per downsample
        CHECK(d.flow_to_next[0].at(std::size_t(0), std::size_t(0), std::size_t(0)) ==
              doctest::Approx(1.0 / s));
    }
    CHECK_THROWS_AS(pyr.at(8), dim_error);
}

TEST_CASE("checkpoint round-trip restores values and validates strictly") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "vinpaint_ckpt_test";
    fs::remove_all(dir);

    Rng rng(55);
    model::GeneratorConfig cfg;
    cfg.base_channels = 2;
    model::Generator<float> a(cfg, rng), b(cfg, rng); // b gets different draws
    auto pa = a.parameters(), pb = b.parameters();
    REQUIRE(pa.size() == pb.size());
    bool differ = false;
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (std::memcmp(pa[i].second.data(), pb[i].second.data(),
                        pa[i].second.numel() * sizeof(float)) != 0)
            differ = true;
    REQUIRE(differ);

    model::save_params(dir.string(), pa, {{"step", "42"}, {"stage", "1"}});
    model::load_params(dir.string(), pb);
    for (std::size_t i = 0; i < pa.size(); ++i)
        CHECK(std::memcmp(pa[i].second.data(), pb[i].second.data(),
                          pa[i].second.numel() * sizeof(float)) == 0);

    auto meta = model::read_meta(dir.string());
    REQUIRE(meta.size() == 2);
    CHECK(meta[0].first == "step");
    CHECK(meta[0].second == "42");

    // missing a parameter
    auto fewer = pb;
    fewer.pop_back();
    fewer.emplace_back("made.up", Tensor<float>(Shape{1}));
    CHECK_THROWS_AS(model::load_params(dir.string(), fewer), config_error);

    // shape mismatch
    auto wrong = pb;
    wrong[0].second = Tensor<float>(Shape{1, 2, 3});
    CHECK_THROWS_AS(model::load_params(dir.string(), wrong), config_error);

    CHECK_THROWS_AS(model::load_params((dir / "nope").string(), pb), config_error);
    fs::remove_all(dir);
}
