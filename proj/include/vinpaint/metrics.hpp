#pragma once

#include <cstddef>
#include <vector>

#include "vinpaint/losses.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint::metrics {

/// 20 log10(peak) - 10 log10(MSE), capped at 100 dB when MSE == 0.
template <typename T>
double psnr(const Tensor<T>& pred, const Tensor<T>& gt, double peak);

struct SsimConfig {
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 2.0; // frames live in [-1, 1]
};

/// Mean local structural similarity over valid 11x11 Gaussian windows
/// (sigma 1.5), channels averaged. Accepts [H, W] or [C, H, W] with C in
/// {1, 3}; throws if the image is smaller than the window.
template <typename T>
double ssim(const Tensor<T>& pred, const Tensor<T>& gt, const SsimConfig& cfg = {});

/// Sample mean and unbiased covariance of a feature-vector population.
struct FidStats {
    std::vector<double> mu;    // d
    std::vector<double> sigma; // d x d, row-major
    std::size_t n = 0;

    std::size_t dim() const { return mu.size(); }
};

/// Requires at least two samples of equal dimension.
FidStats fid_stats(const std::vector<std::vector<double>>& samples);

/// Frechet distance between Gaussians: |mu - mu'|^2 + tr(S + S' - 2 sqrt(S^1/2 S' S^1/2)).
/// Negative eigenvalues of the product are clamped at zero; a result below
/// -1e-6 is a numeric failure, small negatives clamp to 0.
double fid(const FidStats& a, const FidStats& b);

/// Jacobi eigendecomposition of a symmetric d x d matrix (row-major).
/// Returns eigenvalues and column eigenvectors: A = V diag(w) V^T.
void sym_eig(const std::vector<double>& a, std::size_t d, std::vector<double>& evals,
             std::vector<double>& evecs);

/// Symmetric PSD square root via sym_eig with negative-eigenvalue clamping.
std::vector<double> sqrtm_psd(const std::vector<double>& a, std::size_t d);

/// One embedding vector per clip: extractor taps mean-pooled over T, H, W per
/// channel. Dimension = sum of tap channel counts.
template <typename T>
std::vector<double> video_embed(const losses::FeatureExtractor<T>& ex, const Tensor<T>& video);

/// One embedding per frame (pooled over H, W only) so a single clip still
/// yields a population for FidStats.
template <typename T>
std::vector<std::vector<double>> frame_embeds(const losses::FeatureExtractor<T>& ex,
                                              const Tensor<T>& video);

/// Mean absolute error over corrupted pixels (mask == 0); 0 if none.
template <typename T>
double hole_l1(const Tensor<T>& pred, const Tensor<T>& gt, const Tensor<T>& mask);

/// PSNR restricted to corrupted pixels; 100 dB when the hole is empty or exact.
template <typename T>
double hole_psnr(const Tensor<T>& pred, const Tensor<T>& gt, const Tensor<T>& mask, double peak);

} // namespace vinpaint::metrics
