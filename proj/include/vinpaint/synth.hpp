#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vinpaint/flow.hpp"
#include "vinpaint/rng.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint::synth {

enum class MaskKind { object_like, curve, stationary };

struct MaskSpec {
    MaskKind kind = MaskKind::object_like;
    double cover_lo = 0.0;     // corrupted-area fraction band, inclusive
    double cover_hi = 0.7;
    double step_sigma = 2.0;   // random-walk step stddev, pixels per frame
    double animate_prob = 0.5; // chance a stationary mask moves anyway (0 for eval)
};

/// Binary corruption masks [T, 1, H, W]: 0 = corrupted, 1 = known, values
/// exactly {0, 1}. Every frame's corrupted fraction lies inside the band.
/// Shapes translate frame-to-frame by an integer random walk (toroidal, so
/// coverage stays constant); stationary masks move only with animate_prob.
/// Throws config_error when the band cannot be hit (e.g. tiny frames).
template <typename T>
Tensor<T> gen_mask(const MaskSpec& spec, std::size_t t, std::size_t h, std::size_t w,
                   std::uint64_t seed);

enum class TextureKind { checker, gradient, noise_blobs };

const char* texture_name(TextureKind k);
const char* mask_kind_name(MaskKind k);
const char* motion_kind_name(flow::MotionKind k);

template <typename T>
struct SyntheticClip {
    Tensor<T> frames;                // [T, 3, H, W], values within (-1, 1)
    Tensor<T> masks;                 // [T, 1, H, W], binary; all-ones until attached
    std::vector<Tensor<T>> pair_fwd; // T-1 flows, defined on frame i pointing to i+1
    std::vector<Tensor<T>> pair_bwd; // T-1 flows, defined on frame i+1 pointing to i
    flow::Motion<T> motion;
    TextureKind texture = TextureKind::checker;
    std::uint64_t seed = 0;
};

/// Renders T frames by transporting one analytic textured canvas under the
/// motion map frame by frame, with the matching analytic flows from
/// synth_flow. Masks start all-ones; pair with gen_mask to corrupt.
template <typename T>
SyntheticClip<T> gen_clip(const flow::Motion<T>& motion, TextureKind texture, std::size_t t,
                          std::size_t h, std::size_t w, std::uint64_t seed);

struct DatasetSpec {
    std::size_t clips = 4;
    std::size_t frames = 8;
    std::size_t height = 64;
    std::size_t width = 64;
    MaskSpec mask;
    std::uint64_t seed = 1;
    double motion_scale = 1.0; // multiplies the drawn per-frame motion; translations stay whole-pixel
};

/// Deterministic clip `index` of the procedural dataset: texture, motion and
/// mask are drawn from streams forked off (spec.seed, index). Gradient
/// textures may rotate or zoom; the other textures translate by whole pixels
/// so bilinear warps of the result stay exact.
template <typename T>
SyntheticClip<T> sample_clip(const DatasetSpec& spec, std::size_t index);

/// TSR1 tensors plus a plain-text manifest under `dir`.
template <typename T>
void save_clip(const std::string& dir, const SyntheticClip<T>& clip);

template <typename T>
SyntheticClip<T> load_clip(const std::string& dir);

/// frame_%03d.ppm and mask_%03d.pgm under `dir`.
template <typename T>
void export_images(const std::string& dir, const SyntheticClip<T>& clip);

} // namespace vinpaint::synth
