#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "vinpaint/flow.hpp"
#include "vinpaint/tape.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint::align {

/// Number of channels per shifted band for a C-channel feature map. The first
/// band borrows from the previous frame, the second from the next, the rest
/// stay put, so 2 * f must fit in C.
inline std::int64_t shift_channels(std::int64_t C, double fraction = 0.125) {
    if (fraction <= 0.0 || C < 1)
        throw dim_error("shift_channels: need positive fraction and channels");
    const auto f = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor(fraction * static_cast<double>(C))));
    if (2 * f > C)
        throw dim_error("shift_channels: 2 * " + std::to_string(f) + " bands exceed " +
                        std::to_string(C) + " channels");
    return f;
}

/// Frames credited to a stack of n single-step temporal modules; grows by two
/// per module, with a single frame for a stack of zero.
inline std::int64_t temporal_receptive_field(std::int64_t modules) {
    if (modules < 0) throw dim_error("temporal_receptive_field: negative module count");
    return modules == 0 ? 1 : 2 * modules - 1;
}

/// Per-frame alignment inputs at one feature resolution. Index t describes the
/// neighbour relations of frame t: entries that have no neighbour (to_prev at
/// t = 0, to_next at t = T-1) stay default-constructed and are never read.
template <typename T>
struct AlignData {
    std::vector<Tensor<T>> flow_to_prev; // [H, W, 2], frame t -> t-1
    std::vector<Tensor<T>> flow_to_next; // [H, W, 2], frame t -> t+1
    std::vector<Tensor<T>> valid_prev;   // [H, W], cycle-consistency of warping t-1 into t
    std::vector<Tensor<T>> valid_next;   // [H, W], same for t+1 into t
};

/// Builds AlignData at a pyramid level from full-resolution neighbour-pair
/// flows: pair_fwd[i] maps frame i to i+1 (on frame i's grid), pair_bwd[i]
/// maps frame i+1 to i. Flows are box-downsampled by `stride` and the validity
/// thresholds shrink with it, since displacements do too.
template <typename T>
AlignData<T> build_align_data(const std::vector<Tensor<T>>& pair_fwd,
                              const std::vector<Tensor<T>>& pair_bwd, std::int64_t stride,
                              const flow::ValidityConfig& cfg = {});

/// Temporal channel shift with flow-guided alignment on x [T, C, H, W]:
/// channels [0, f) of frame t are replaced by the previous frame's band warped
/// onto frame t, channels [f, 2f) by the next frame's band warped back, and the
/// remaining channels pass through bit-for-bit. Wherever a warp is not
/// cycle-consistent (validity 0) — including clip boundaries, which have no
/// neighbour — the frame keeps its own features instead. Soft validity blends.
/// Differentiable w.r.t. x; flows and masks are data.
template <typename T>
Tensor<T> shift_and_align(Tape* tape, const Tensor<T>& x, const AlignData<T>& data,
                          std::int64_t f);

} // namespace vinpaint::align
