#include "vinpaint/losses.hpp"

#include <cmath>
#include <string>

#include "vinpaint/ops.hpp"
#include "vinpaint/rng.hpp"

namespace vinpaint::losses {

namespace op = vinpaint::ops;

namespace {

template <typename T>
void check_video(const Tensor<T>& v, const char* who) {
    if (v.rank() != 4 || v.extent(1) != 3)
        throw dim_error(std::string(who) + ": expected [T, 3, H, W], got " + shape_str(v.shape()));
}

} // namespace

// --- feature extractor -----------------------------------------------------------

template <typename T>
FeatureExtractor<T>::FeatureExtractor(std::uint64_t seed) {
    Rng rng(seed);
    std::int64_t cin = 3;
    for (std::int64_t cout : tap_channels()) {
        const T stddev = std::sqrt(T(2) / static_cast<T>(cin * 9));
        w_.push_back(op::randn<T>(rng,
                                  Shape{static_cast<std::size_t>(cout),
                                        static_cast<std::size_t>(cin), 3, 3},
                                  stddev));
        b_.push_back(Tensor<T>(Shape{static_cast<std::size_t>(cout)}));
        cin = cout;
    }
}

template <typename T>
std::vector<Tensor<T>> FeatureExtractor<T>::features(Tape* tape, const Tensor<T>& frames) const {
    check_video(frames, "feature extractor");
    if (frames.extent(2) % 16 != 0 || frames.extent(3) % 16 != 0)
        throw dim_error("feature extractor: H and W must be divisible by 16, got " +
                        shape_str(frames.shape()));
    std::vector<Tensor<T>> taps;
    Tensor<T> h = frames;
    for (std::size_t i = 0; i < w_.size(); ++i) {
        h = op::tanh(tape, op::conv2d(tape, h, w_[i], b_[i], std::int64_t(2), std::int64_t(1)));
        taps.push_back(h);
    }
    return taps;
}

// --- reconstruction --------------------------------------------------------------

template <typename T>
Tensor<T> recon_loss(Tape* tape, const Tensor<T>& pred, const Tensor<T>& gt,
                     const Tensor<T>& mask, T lambda_a, T lambda_c) {
    if (pred.shape() != gt.shape())
        throw dim_error("recon_loss: pred " + shape_str(pred.shape()) + " vs gt " +
                        shape_str(gt.shape()));
    if (lambda_a < 0 || lambda_c < 0) throw config_error("recon_loss: negative weight");
    const bool per_channel = mask.shape() == pred.shape();
    if (!per_channel &&
        (mask.rank() != 4 || mask.extent(1) != 1 || mask.extent(0) != pred.extent(0) ||
         mask.extent(2) != pred.extent(2) || mask.extent(3) != pred.extent(3)))
        throw dim_error("recon_loss: mask " + shape_str(mask.shape()) + " does not match pred " +
                        shape_str(pred.shape()));

    auto d = op::abs(tape, op::sub(tape, pred, gt));
    auto loss = op::mul_scalar(tape, op::mean(tape, d), lambda_a);

    // corrupted-region mean: weight tensor carries no gradient
    Tensor<T> inv(pred.shape());
    const Tensor<T> m3 = per_channel ? mask : op::repeat_ch(mask, pred.extent(1));
    T count = 0;
    for (std::size_t i = 0; i < inv.numel(); ++i) {
        const T v = m3.data()[i] == T(0) ? T(1) : T(0);
        inv.data()[i] = v;
        count += v;
    }
    if (lambda_c > 0 && count > 0) {
        auto hole = op::sum(tape, op::mul(tape, d, inv));
        loss = op::add(tape, loss, op::mul_scalar(tape, hole, lambda_c / count));
    }
    return loss;
}

// --- perceptual ------------------------------------------------------------------

template <typename T>
Tensor<T> perceptual_from_taps(Tape* tape, const std::vector<Tensor<T>>& fp,
                               const std::vector<Tensor<T>>& fg) {
    if (fp.size() != fg.size() || fp.empty())
        throw dim_error("perceptual_from_taps: need matching non-empty tap lists");
    Tensor<T> loss;
    for (std::size_t p = 0; p < fp.size(); ++p) {
        if (fp[p].shape() != fg[p].shape() || fp[p].rank() < 1)
            throw dim_error("perceptual_from_taps: tap " + std::to_string(p) +
                            " must be matching tensors of rank >= 1");
        // N_p: per-frame tap element count
        const T np = static_cast<T>(fp[p].numel() / fp[p].extent(0));
        auto term = op::mul_scalar(
            tape, op::sum(tape, op::abs(tape, op::sub(tape, fp[p], fg[p]))), T(1) / np);
        loss = loss.defined() ? op::add(tape, loss, term) : term;
    }
    return loss;
}

template <typename T>
Tensor<T> perceptual_loss(Tape* tape, const FeatureExtractor<T>& ex, const Tensor<T>& pred,
                          const Tensor<T>& gt) {
    if (pred.shape() != gt.shape())
        throw dim_error("perceptual_loss: pred " + shape_str(pred.shape()) + " vs gt " +
                        shape_str(gt.shape()));
    return perceptual_from_taps(tape, ex.features(tape, pred), ex.features(tape, gt));
}

// --- style -----------------------------------------------------------------------

template <typename T>
Tensor<T> style_from_taps(Tape* tape, const std::vector<Tensor<T>>& fp,
                          const std::vector<Tensor<T>>& fg) {
    if (fp.size() != fg.size() || fp.empty())
        throw dim_error("style_from_taps: need matching non-empty tap lists");

    auto gram = [&](const Tensor<T>& tap, std::size_t t) {
        const Shape flat{tap.extent(1), tap.extent(2) * tap.extent(3)};
        auto f = op::reshape(tape, op::slice0(tape, tap, t), flat);
        return op::matmul(tape, f, op::swap01(tape, f));
    };

    Tensor<T> loss;
    for (std::size_t p = 0; p < fp.size(); ++p) {
        if (fp[p].shape() != fg[p].shape() || fp[p].rank() != 4)
            throw dim_error("style_from_taps: tap " + std::to_string(p) +
                            " must be matching rank-4 tensors");
        const T c = static_cast<T>(fp[p].extent(1));
        const T hw = static_cast<T>(fp[p].extent(2) * fp[p].extent(3));
        const T norm = T(1) / (c * c * hw);
        for (std::size_t t = 0; t < fp[p].extent(0); ++t) {
            auto diff = op::sub(tape, gram(fp[p], t), gram(fg[p], t));
            auto term = op::mul_scalar(tape, op::sum(tape, op::abs(tape, diff)), norm);
            loss = loss.defined() ? op::add(tape, loss, term) : term;
        }
    }
    return loss;
}

template <typename T>
Tensor<T> style_loss(Tape* tape, const FeatureExtractor<T>& ex, const Tensor<T>& pred,
                     const Tensor<T>& gt) {
    if (pred.shape() != gt.shape())
        throw dim_error("style_loss: pred " + shape_str(pred.shape()) + " vs gt " +
                        shape_str(gt.shape()));
    return style_from_taps(tape, ex.features(tape, pred), ex.features(tape, gt));
}

// --- adversarial -----------------------------------------------------------------

template <typename T>
std::pair<Tensor<T>, Tensor<T>> adversarial_losses(Tape* tape, const Tensor<T>& disc_real,
                                                   const Tensor<T>& disc_fake) {
    if (disc_real.shape() != disc_fake.shape())
        throw dim_error("adversarial_losses: real " + shape_str(disc_real.shape()) + " vs fake " +
                        shape_str(disc_fake.shape()));
    auto d_real = op::mean(tape, op::relu(tape, op::add_scalar(tape, op::neg(tape, disc_real),
                                                               T(1))));
    auto d_fake = op::mean(tape, op::relu(tape, op::add_scalar(tape, disc_fake, T(1))));
    auto d_loss = op::add(tape, d_real, d_fake);
    auto g_loss = op::neg(tape, op::mean(tape, disc_fake));
    return {d_loss, g_loss};
}

// --- total -----------------------------------------------------------------------

template <typename T>
Tensor<T> total_loss(Tape* tape, const LossParts<T>& parts, const LossWeights& w) {
    if (w.lambda_a < 0 || w.lambda_c < 0 || w.lambda_p < 0 || w.lambda_s < 0 || w.lambda_g < 0)
        throw config_error("total_loss: loss weights must be >= 0");
    if (!parts.recon.defined() || !parts.perceptual.defined() || !parts.style.defined())
        throw config_error("total_loss: recon, perceptual and style parts are required");
    if (!parts.adversarial.defined() && w.lambda_g != 0)
        throw config_error("total_loss: lambda_g > 0 but no adversarial part given");

    ensure_finite(parts.recon, "recon term");
    ensure_finite(parts.perceptual, "perceptual term");
    ensure_finite(parts.style, "style term");
    if (parts.adversarial.defined()) ensure_finite(parts.adversarial, "adversarial term");

    auto loss = op::add(tape, parts.recon,
                        op::mul_scalar(tape, parts.perceptual, static_cast<T>(w.lambda_p)));
    loss = op::add(tape, loss, op::mul_scalar(tape, parts.style, static_cast<T>(w.lambda_s)));
    if (parts.adversarial.defined() && w.lambda_g != 0)
        loss = op::add(tape, loss,
                       op::mul_scalar(tape, parts.adversarial, static_cast<T>(w.lambda_g)));
    return loss;
}

#define VINPAINT_LOSSES_INSTANTIATE(T)                                                            \
    template class FeatureExtractor<T>;                                                           \
    template Tensor<T> recon_loss<T>(Tape*, const Tensor<T>&, const Tensor<T>&,                   \
                                     const Tensor<T>&, T, T);                                     \
    template Tensor<T> perceptual_from_taps<T>(Tape*, const std::vector<Tensor<T>>&,              \
                                               const std::vector<Tensor<T>>&);                    \
    template Tensor<T> perceptual_loss<T>(Tape*, const FeatureExtractor<T>&, const Tensor<T>&,    \
                                          const Tensor<T>&);                                      \
    template Tensor<T> style_from_taps<T>(Tape*, const std::vector<Tensor<T>>&,                   \
                                          const std::vector<Tensor<T>>&);                         \
    template Tensor<T> style_loss<T>(Tape*, const FeatureExtractor<T>&, const Tensor<T>&,         \
                                     const Tensor<T>&);                                           \
    template std::pair<Tensor<T>, Tensor<T>> adversarial_losses<T>(Tape*, const Tensor<T>&,       \
                                                                   const Tensor<T>&);             \
    template Tensor<T> total_loss<T>(Tape*, const LossParts<T>&, const LossWeights&);

VINPAINT_LOSSES_INSTANTIATE(float)
VINPAINT_LOSSES_INSTANTIATE(double)

#undef VINPAINT_LOSSES_INSTANTIATE

} // namespace vinpaint::losses
