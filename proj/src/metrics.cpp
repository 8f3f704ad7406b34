#include "vinpaint/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace vinpaint::metrics {

using std::int64_t;

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;

const double* gaussian_window() {
    static const auto w = [] {
        std::array<double, kWin * kWin> win{};
        double total = 0;
        for (int i = 0; i < kWin; ++i)
            for (int j = 0; j < kWin; ++j) {
                const double dy = i - (kWin - 1) / 2.0, dx = j - (kWin - 1) / 2.0;
                win[i * kWin + j] = std::exp(-(dy * dy + dx * dx) / (2 * kSigma * kSigma));
                total += win[i * kWin + j];
            }
        for (double& v : win) v /= total;
        return win;
    }();
    return w.data();
}

template <typename T>
double mse_of(const Tensor<T>& pred, const Tensor<T>& gt) {
    double acc = 0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const double d = static_cast<double>(pred.data()[i]) - static_cast<double>(gt.data()[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(pred.numel());
}

double psnr_from_mse(double mse, double peak) {
    if (mse == 0) return 100.0;
    return 20.0 * std::log10(peak) - 10.0 * std::log10(mse);
}

// SSIM over one [H, W] plane; returns the sum of window scores and their count.
template <typename T>
void ssim_plane(const T* p, const T* g, int64_t h, int64_t w, double e1, double e2, double& total,
                int64_t& count) {
    const double* win = gaussian_window();
    const int64_t oh = h - kWin + 1, ow = w - kWin + 1;
    std::vector<double> scores(static_cast<std::size_t>(oh * ow));
#pragma omp parallel for schedule(static)
    for (int64_t y = 0; y < oh; ++y)
        for (int64_t x = 0; x < ow; ++x) {
            double mp = 0, mg = 0, spp = 0, sgg = 0, spg = 0;
            for (int i = 0; i < kWin; ++i)
                for (int j = 0; j < kWin; ++j) {
                    const double wv = win[i * kWin + j];
                    const double pv = p[(y + i) * w + x + j], gv = g[(y + i) * w + x + j];
                    mp += wv * pv;
                    mg += wv * gv;
                    spp += wv * pv * pv;
                    sgg += wv * gv * gv;
                    spg += wv * pv * gv;
                }
            const double vp = spp - mp * mp, vg = sgg - mg * mg, cov = spg - mp * mg;
            scores[y * ow + x] = ((2 * mp * mg + e1) * (2 * cov + e2)) /
                                 ((mp * mp + mg * mg + e1) * (vp + vg + e2));
        }
    for (double s : scores) total += s; // fixed-order reduction
    count += oh * ow;
}

void matmul_sq(const std::vector<double>& a, const std::vector<double>& b, std::size_t d,
               std::vector<double>& out) {
    out.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const double av = a[i * d + k];
            if (av == 0) continue;
            for (std::size_t j = 0; j < d; ++j) out[i * d + j] += av * b[k * d + j];
        }
}

void check_stats(const FidStats& s, const char* who) {
    const std::size_t d = s.dim();
    if (s.sigma.size() != d * d)
        throw dim_error(std::string(who) + ": sigma is not d x d for d = " + std::to_string(d));
    for (double v : s.mu)
        if (!std::isfinite(v)) throw numeric_error(std::string(who) + ": non-finite mean");
    for (double v : s.sigma)
        if (!std::isfinite(v)) throw numeric_error(std::string(who) + ": non-finite covariance");
}

} // namespace

// --- psnr ------------------------------------------------------------------------

template <typename T>
double psnr(const Tensor<T>& pred, const Tensor<T>& gt, double peak) {
    if (pred.shape() != gt.shape())
        throw dim_error("psnr: pred " + shape_str(pred.shape()) + " vs gt " +
                        shape_str(gt.shape()));
    if (peak <= 0) throw config_error("psnr: peak must be > 0");
    return psnr_from_mse(mse_of(pred, gt), peak);
}

// --- ssim ------------------------------------------------------------------------

template <typename T>
double ssim(const Tensor<T>& pred, const Tensor<T>& gt, const SsimConfig& cfg) {
    if (pred.shape() != gt.shape())
        throw dim_error("ssim: pred " + shape_str(pred.shape()) + " vs gt " +
                        shape_str(gt.shape()));
    if (cfg.k1 <= 0 || cfg.k2 <= 0 || cfg.dynamic_range <= 0)
        throw config_error("ssim: k1, k2 and dynamic_range must be > 0");
    std::size_t channels, h, w;
    if (pred.rank() == 2) {
        channels = 1;
        h = pred.extent(0);
        w = pred.extent(1);
    } else if (pred.rank() == 3 && (pred.extent(0) == 1 || pred.extent(0) == 3)) {
        channels = pred.extent(0);
        h = pred.extent(1);
        w = pred.extent(2);
    } else {
        throw dim_error("ssim: expected [H, W] or [C, H, W] with C in {1, 3}, got " +
                        shape_str(pred.shape()));
    }
    if (h < kWin || w < kWin)
        throw dim_error("ssim: image " + shape_str(pred.shape()) + " smaller than the " +
                        std::to_string(kWin) + "x" + std::to_string(kWin) + " window");

    const double e1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    const double e2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
    double acc = 0;
    for (std::size_t c = 0; c < channels; ++c) {
        double total = 0;
        int64_t count = 0;
        ssim_plane(pred.data() + c * h * w, gt.data() + c * h * w, static_cast<int64_t>(h),
                   static_cast<int64_t>(w), e1, e2, total, count);
        acc += total / static_cast<double>(count);
    }
    return acc / static_cast<double>(channels);
}

// --- fid -------------------------------------------------------------------------

FidStats fid_stats(const std::vector<std::vector<double>>& samples) {
    if (samples.size() < 2) throw config_error("fid_stats: need at least 2 samples");
    const std::size_t n = samples.size(), d = samples[0].size();
    if (d == 0) throw dim_error("fid_stats: empty feature vectors");
    for (const auto& s : samples)
        if (s.size() != d) throw dim_error("fid_stats: inconsistent feature dimensions");

    FidStats st;
    st.n = n;
    st.mu.assign(d, 0.0);
    for (const auto& s : samples)
        for (std::size_t i = 0; i < d; ++i) st.mu[i] += s[i];
    for (double& v : st.mu) v /= static_cast<double>(n);

    st.sigma.assign(d * d, 0.0);
    for (const auto& s : samples)
        for (std::size_t i = 0; i < d; ++i) {
            const double di = s[i] - st.mu[i];
            for (std::size_t j = 0; j < d; ++j) st.sigma[i * d + j] += di * (s[j] - st.mu[j]);
        }
    for (double& v : st.sigma) v /= static_cast<double>(n - 1);
    return st;
}

void sym_eig(const std::vector<double>& a, std::size_t d, std::vector<double>& evals,
             std::vector<double>& evecs) {
    if (a.size() != d * d) throw dim_error("sym_eig: matrix is not d x d");
    std::vector<double> m = a;
    evecs.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) evecs[i * d + i] = 1.0;

    // cyclic Jacobi rotations until the off-diagonal mass is negligible
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += m[p * d + q] * m[p * d + q];
        if (off < 1e-26 * static_cast<double>(d * d)) break;
        for (std::size_t p = 0; p + 1 < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = m[p * d + q];
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (m[q * d + q] - m[p * d + p]) / (2 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double mkp = m[k * d + p], mkq = m[k * d + q];
                    m[k * d + p] = c * mkp - s * mkq;
                    m[k * d + q] = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double mpk = m[p * d + k], mqk = m[q * d + k];
                    m[p * d + k] = c * mpk - s * mqk;
                    m[q * d + k] = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = evecs[k * d + p], vkq = evecs[k * d + q];
                    evecs[k * d + p] = c * vkp - s * vkq;
                    evecs[k * d + q] = s * vkp + c * vkq;
                }
            }
    }
    evals.resize(d);
    for (std::size_t i = 0; i < d; ++i) evals[i] = m[i * d + i];
}

std::vector<double> sqrtm_psd(const std::vector<double>& a, std::size_t d) {
    std::vector<double> evals, v;
    sym_eig(a, d, evals, v);
    std::vector<double> root(d * d, 0.0);
    // V diag(sqrt(max(w, 0))) V^T
    for (std::size_t k = 0; k < d; ++k) {
        const double s = std::sqrt(std::max(evals[k], 0.0));
        if (s == 0) continue;
        for (std::size_t i = 0; i < d; ++i) {
            const double vis = v[i * d + k] * s;
            if (vis == 0) continue;
            for (std::size_t j = 0; j < d; ++j) root[i * d + j] += vis * v[j * d + k];
        }
    }
    return root;
}

double fid(const FidStats& a, const FidStats& b) {
    if (a.dim() != b.dim() || a.dim() == 0)
        throw dim_error("fid: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()) + ")");
    check_stats(a, "fid: first stats");
    check_stats(b, "fid: second stats");
    const std::size_t d = a.dim();

    double mean_sq = 0;
    for (std::size_t i = 0; i < d; ++i) {
        const double dm = a.mu[i] - b.mu[i];
        mean_sq += dm * dm;
    }

    const auto sqrt_a = sqrtm_psd(a.sigma, d);
    std::vector<double> tmp, prod;
    matmul_sq(sqrt_a, b.sigma, d, tmp);
    matmul_sq(tmp, sqrt_a, d, prod);
    // symmetrize against rounding before taking the root
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double s = 0.5 * (prod[i * d + j] + prod[j * d + i]);
            prod[i * d + j] = prod[j * d + i] = s;
        }
    const auto root = sqrtm_psd(prod, d);

    double trace = 0;
    for (std::size_t i = 0; i < d; ++i)
        trace += a.sigma[i * d + i] + b.sigma[i * d + i] - 2 * root[i * d + i];

    const double v = mean_sq + trace;
    if (v < -1e-6) throw numeric_error("fid: distance " + std::to_string(v) + " below -1e-6");
    return std::max(0.0, v);
}

// --- embeddings ------------------------------------------------------------------

template <typename T>
std::vector<std::vector<double>> frame_embeds(const losses::FeatureExtractor<T>& ex,
                                              const Tensor<T>& video) {
    auto taps = ex.features(nullptr, video);
    const std::size_t frames = video.extent(0);
    std::vector<std::vector<double>> out(frames);
    for (const auto& tap : taps) {
        const std::size_t c = tap.extent(1), hw = tap.extent(2) * tap.extent(3);
        for (std::size_t t = 0; t < frames; ++t)
            for (std::size_t ch = 0; ch < c; ++ch) {
                double acc = 0;
                const T* p = tap.data() + (t * c + ch) * hw;
                for (std::size_t i = 0; i < hw; ++i) acc += static_cast<double>(p[i]);
                out[t].push_back(acc / static_cast<double>(hw));
            }
    }
    return out;
}

template <typename T>
std::vector<double> video_embed(const losses::FeatureExtractor<T>& ex, const Tensor<T>& video) {
    const auto per_frame = frame_embeds(ex, video);
    std::vector<double> out(per_frame[0].size(), 0.0);
    for (const auto& f : per_frame)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += f[i];
    for (double& v : out) v /= static_cast<double>(per_frame.size());
    return out;
}

// --- hole metrics ----------------------------------------------------------------

namespace {

template <typename T>
void check_hole_args(const Tensor<T>& pred, const Tensor<T>& gt, const Tensor<T>& mask) {
    if (pred.shape() != gt.shape())
        throw dim_error("hole metric: pred " + shape_str(pred.shape()) + " vs gt " +
                        shape_str(gt.shape()));
    if (mask.rank() != 4 || pred.rank() != 4 || mask.extent(1) != 1 ||
        mask.extent(0) != pred.extent(0) || mask.extent(2) != pred.extent(2) ||
        mask.extent(3) != pred.extent(3))
        throw dim_error("hole metric: mask " + shape_str(mask.shape()) +
                        " does not match videos " + shape_str(pred.shape()));
}

} // namespace

template <typename T>
double hole_l1(const Tensor<T>& pred, const Tensor<T>& gt, const Tensor<T>& mask) {
    check_hole_args(pred, gt, mask);
    const std::size_t c = pred.extent(1), hw = pred.extent(2) * pred.extent(3);
    double acc = 0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < pred.extent(0); ++t)
        for (std::size_t i = 0; i < hw; ++i) {
            if (mask.data()[t * hw + i] != T(0)) continue;
            for (std::size_t ch = 0; ch < c; ++ch) {
                const std::size_t at = (t * c + ch) * hw + i;
                acc += std::fabs(static_cast<double>(pred.data()[at]) -
                                 static_cast<double>(gt.data()[at]));
                ++count;
            }
        }
    return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

template <typename T>
double hole_psnr(const Tensor<T>& pred, const Tensor<T>& gt, const Tensor<T>& mask, double peak) {
    check_hole_args(pred, gt, mask);
    if (peak <= 0) throw config_error("hole_psnr: peak must be > 0");
    const std::size_t c = pred.extent(1), hw = pred.extent(2) * pred.extent(3);
    double acc = 0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < pred.extent(0); ++t)
        for (std::size_t i = 0; i < hw; ++i) {
            if (mask.data()[t * hw + i] != T(0)) continue;
            for (std::size_t ch = 0; ch < c; ++ch) {
                const std::size_t at = (t * c + ch) * hw + i;
                const double d = static_cast<double>(pred.data()[at]) -
                                 static_cast<double>(gt.data()[at]);
                acc += d * d;
                ++count;
            }
        }
    if (count == 0) return 100.0;
    return psnr_from_mse(acc / static_cast<double>(count), peak);
}

#define VINPAINT_METRICS_INSTANTIATE(T)                                                           \
    template double psnr<T>(const Tensor<T>&, const Tensor<T>&, double);                          \
    template double ssim<T>(const Tensor<T>&, const Tensor<T>&, const SsimConfig&);               \
    template std::vector<double> video_embed<T>(const losses::FeatureExtractor<T>&,               \
                                                const Tensor<T>&);                               \
    template std::vector<std::vector<double>> frame_embeds<T>(const losses::FeatureExtractor<T>&, \
                                                              const Tensor<T>&);                 \
    template double hole_l1<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);             \
    template double hole_psnr<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double);

VINPAINT_METRICS_INSTANTIATE(float)
VINPAINT_METRICS_INSTANTIATE(double)

#undef VINPAINT_METRICS_INSTANTIATE

} // namespace vinpaint::metrics
