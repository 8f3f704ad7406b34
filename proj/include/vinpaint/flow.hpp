#pragma once

#include <cstdint>

#include "vinpaint/rng.hpp"
#include "vinpaint/tape.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint::flow {

/// Dense optical flow between two frames, stored [H, W, 2] with the last axis
/// holding (dx, dy) in pixels. flow[y][x] is the displacement to ADD to (x, y)
/// when sampling the other frame, matching the bilinear warp convention.

/// Throws dim_error on bad shape, numeric_error on non-finite values or
/// displacements larger than the frame itself.
template <typename T>
void validate_flow(const Tensor<T>& flow, const char* name);

/// Bilinearly warps src [C, H, W] by flow [H, W, 2]: out(x, y) = src(x + dx, y + dy),
/// zero where the sampling position leaves [0, W-1] x [0, H-1]. Differentiable
/// w.r.t. src only; the flow is treated as data. If in_bounds is non-null it
/// receives an [H, W] mask of 1 where the sample position was inside the frame.
template <typename T>
Tensor<T> warp_bilinear(Tape* tape, const Tensor<T>& src, const Tensor<T>& flow,
                        Tensor<T>* in_bounds = nullptr);

struct ValidityConfig {
    double delta = 1.0;      // hard threshold on the round-trip error, in pixels
    bool soft = false;       // exp(-err^2 / soft_scale^2) instead of a 0/1 cut
    double soft_scale = 1.0;
};

/// Cycle-consistency mask for warping frame t-1 into frame t.
/// fwd is the flow defined on frame t-1 pointing to t; bwd is defined on frame t
/// pointing to t-1. For each target pixel p the round trip p -> p+bwd(p) ->
/// +fwd(sampled) must land back within `delta` pixels of p, and the backward
/// landing point must lie inside the frame; otherwise the pixel is 0.
/// Returns [H, W]; hard masks are exactly 0 or 1.
template <typename T>
Tensor<T> cycle_validity(const Tensor<T>& fwd, const Tensor<T>& bwd,
                         const ValidityConfig& cfg = {});

/// Downsamples flow [H, W, 2] by an integer stride (H, W divisible by it):
/// each output vector is the box average of its s x s block divided by s, which
/// is exact for flows linear in position. stride 1 returns a copy.
template <typename T>
Tensor<T> rescale_flow(const Tensor<T>& flow, std::int64_t stride);

enum class MotionKind { none, constant, rotation, zoom };

/// Rigid per-frame motion of the whole frame about its centre.
template <typename T>
struct Motion {
    MotionKind kind = MotionKind::none;
    T dx = 0, dy = 0; // constant: pixels per frame
    T angle = 0;      // rotation: radians per frame
    T scale = 1;      // zoom: magnification per frame
};

/// Analytic flow field for the motion. to_prev=true gives the flow defined on
/// the later frame pointing back to the earlier one (what warping a previous
/// frame forward needs); to_prev=false gives the earlier frame's flow into the
/// later one. Both are linear in position, so bilinear resampling is exact.
template <typename T>
Tensor<T> synth_flow(const Motion<T>& m, std::int64_t H, std::int64_t W, bool to_prev);

/// Smooth random flow: i.i.d. normal vectors with stddev sigma on a coarse
/// grid (one node every `cell` pixels) bilinearly upsampled to [H, W, 2].
template <typename T>
Tensor<T> synth_noise_flow(Rng& rng, std::int64_t H, std::int64_t W, T sigma,
                           std::int64_t cell = 8);

} // namespace vinpaint::flow
