#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vinpaint/tape.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint::losses {

/// Coefficients of the training objective. Defaults are the first-stage
/// values; the second stage turns on lambda_c = 6 and lambda_g = 0.1.
struct LossWeights {
    double lambda_a = 1.0; // L1 over all pixels
    double lambda_c = 0.0; // L1 over corrupted pixels
    double lambda_p = 1.0; // feature-space L1
    double lambda_s = 2.0; // Gram-matrix L1
    double lambda_g = 0.0; // generator adversarial term
};

/// Frozen random conv pyramid used as the feature space for the perceptual and
/// style terms and for clip embeddings: four stride-2 conv+tanh stages with
/// channels 8, 16, 32, 64. Weights are a pure function of the seed (bit-identical
/// across instantiations) and never receive gradients; inputs do.
template <typename T>
class FeatureExtractor {
  public:
    explicit FeatureExtractor(std::uint64_t seed = 0x5eedf00d);

    /// frames [N, 3, H, W] with H, W divisible by 16 -> one tap per stage,
    /// tap p has shape [N, C_p, H/2^(p+1), W/2^(p+1)].
    std::vector<Tensor<T>> features(Tape* tape, const Tensor<T>& frames) const;

    std::vector<std::int64_t> tap_channels() const { return {8, 16, 32, 64}; }

  private:
    std::vector<Tensor<T>> w_, b_;
};

/// lambda_a * mean over all pixels of |pred - gt| + lambda_c * mean over the
/// corrupted pixels (mask == 0). An empty corrupted set contributes 0.
template <typename T>
Tensor<T> recon_loss(Tape* tape, const Tensor<T>& pred, const Tensor<T>& gt,
                     const Tensor<T>& mask, T lambda_a, T lambda_c);

/// Sum over frames and taps of ||phi_p(pred_t) - phi_p(gt_t)||_1 / N_p where
/// N_p is the per-frame tap element count. The tap-level overload lets callers
/// substitute any feature stack (e.g. the identity) for the extractor.
template <typename T>
Tensor<T> perceptual_from_taps(Tape* tape, const std::vector<Tensor<T>>& pred_taps,
                               const std::vector<Tensor<T>>& gt_taps);
template <typename T>
Tensor<T> perceptual_loss(Tape* tape, const FeatureExtractor<T>& ex, const Tensor<T>& pred,
                          const Tensor<T>& gt);

/// Sum over frames and taps of ||G_p(pred_t) - G_p(gt_t)||_1 / (C_p^2 * H_p * W_p)
/// where G = phi phi^T over flattened spatial dims, one Gram per frame.
template <typename T>
Tensor<T> style_from_taps(Tape* tape, const std::vector<Tensor<T>>& pred_taps,
                          const std::vector<Tensor<T>>& gt_taps);
template <typename T>
Tensor<T> style_loss(Tape* tape, const FeatureExtractor<T>& ex, const Tensor<T>& pred,
                     const Tensor<T>& gt);

/// Hinge losses on critic score maps: d_loss = mean(relu(1 - real)) +
/// mean(relu(1 + fake)); g_loss = -mean(fake).
template <typename T>
std::pair<Tensor<T>, Tensor<T>> adversarial_losses(Tape* tape, const Tensor<T>& disc_real,
                                                   const Tensor<T>& disc_fake);

template <typename T>
struct LossParts {
    Tensor<T> recon, perceptual, style;
    Tensor<T> adversarial; // generator hinge term; leave undefined when lambda_g == 0
};

/// recon + lambda_p * perceptual + lambda_s * style + lambda_g * adversarial.
/// Throws numeric_error naming the offending term if any part is not finite,
/// config_error on negative weights or a missing part that has weight > 0.
template <typename T>
Tensor<T> total_loss(Tape* tape, const LossParts<T>& parts, const LossWeights& w);

} // namespace vinpaint::losses
