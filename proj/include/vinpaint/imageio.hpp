#pragma once

#include <string>

#include "vinpaint/tensor.hpp"

namespace vinpaint::imageio {

/// Binary PPM (P6, maxval 255). Frames are [3, H, W] in [-1, 1]; values are
/// mapped to bytes by round((v + 1) / 2 * 255) with clamping.
template <typename T>
void save_ppm(const std::string& path, const Tensor<T>& frame);
template <typename T>
Tensor<T> load_ppm(const std::string& path);

/// Binary PGM (P5, maxval 255). Masks are [H, W] or [1, H, W] in [0, 1];
/// bytes are round(v * 255) with clamping, so binary masks come out 0/255.
template <typename T>
void save_pgm(const std::string& path, const Tensor<T>& mask);
template <typename T>
Tensor<T> load_pgm(const std::string& path);

} // namespace vinpaint::imageio
