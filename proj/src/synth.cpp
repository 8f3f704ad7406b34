#include "vinpaint/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "vinpaint/imageio.hpp"

namespace vinpaint::synth {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Corrupted-pixel budget: a target count inside [lo_px, hi_px]; the band is
// unreachable when it contains no whole pixel count.
std::size_t pick_target(const MaskSpec& spec, std::size_t hw, Rng& rng) {
    if (spec.cover_lo < 0 || spec.cover_hi > 1 || spec.cover_lo > spec.cover_hi)
        throw config_error("mask coverage band must satisfy 0 <= lo <= hi <= 1");
    if (spec.animate_prob < 0 || spec.animate_prob > 1)
        throw config_error("animate_prob must lie in [0, 1]");
    if (spec.step_sigma < 0) throw config_error("step_sigma must be >= 0");
    const double n = static_cast<double>(hw);
    const auto lo_px = static_cast<std::size_t>(std::ceil(spec.cover_lo * n - 1e-9));
    const auto hi_px = static_cast<std::size_t>(std::floor(spec.cover_hi * n + 1e-9));
    if (lo_px > hi_px) throw config_error("coverage band unreachable at this frame size");
    const auto k = static_cast<std::size_t>(std::llround(rng.uniform(spec.cover_lo, spec.cover_hi) * n));
    return std::clamp(k, lo_px, hi_px);
}

// Exactly k cells: the k largest values of a random smooth bump field, ties
// broken in row-major order.
std::vector<std::uint8_t> blob_mask(std::size_t h, std::size_t w, std::size_t k, Rng& rng) {
    const std::size_t hw = h * w;
    std::vector<std::uint8_t> hole(hw, 0);
    if (k == 0) return hole;
    std::vector<double> field(hw, 0.0);
    const double side = static_cast<double>(std::min(h, w));
    const std::int64_t bumps = rng.uniform_int(2, 4);
    for (std::int64_t b = 0; b < bumps; ++b) {
        const double cx = rng.uniform(0.0, static_cast<double>(w - 1));
        const double cy = rng.uniform(0.0, static_cast<double>(h - 1));
        const double sg = std::max(rng.uniform(side / 10.0, side / 3.5), 0.5);
        const double amp = rng.uniform(0.5, 1.0);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const double dx = static_cast<double>(x) - cx;
                const double dy = static_cast<double>(y) - cy;
                field[y * w + x] += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sg * sg));
            }
    }
    std::vector<double> vals(field);
    std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(k - 1), vals.end(),
                     std::greater<>());
    const double thr = vals[k - 1];
    std::size_t above = 0;
    for (double v : field)
        if (v > thr) ++above;
    std::size_t ties = k - above;
    for (std::size_t i = 0; i < hw; ++i) {
        if (field[i] > thr) {
            hole[i] = 1;
        } else if (field[i] == thr && ties > 0) {
            hole[i] = 1;
            --ties;
        }
    }
    return hole;
}

// Discs of the stroke width stamped along random walks; stamping stops the
// moment the k-th cell is marked, so the count is exact.
std::vector<std::uint8_t> curve_mask(std::size_t h, std::size_t w, std::size_t k, Rng& rng) {
    std::vector<std::uint8_t> hole(h * w, 0);
    std::size_t count = 0;
    const auto ih = static_cast<std::int64_t>(h), iw = static_cast<std::int64_t>(w);
    auto stamp = [&](double cx, double cy, double r) {
        const auto y0 = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(cy - r)), 0);
        const auto y1 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(cy + r)), ih - 1);
        for (std::int64_t y = y0; y <= y1; ++y) {
            const auto x0 = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(cx - r)), 0);
            const auto x1 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(cx + r)), iw - 1);
            for (std::int64_t x = x0; x <= x1; ++x) {
                if (count == k) return;
                const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
                if (dx * dx + dy * dy > r * r) continue;
                auto& cell = hole[static_cast<std::size_t>(y * iw + x)];
                if (!cell) {
                    cell = 1;
                    ++count;
                }
            }
        }
    };
    int strokes = 0;
    while (count < k && strokes++ < 10000) {
        const double r = static_cast<double>(rng.uniform_int(3, 8)) / 2.0;
        double x = rng.uniform(0.0, static_cast<double>(w - 1));
        double y = rng.uniform(0.0, static_cast<double>(h - 1));
        double th = rng.uniform(0.0, 2.0 * kPi);
        const std::int64_t steps =
            rng.uniform_int(static_cast<std::int64_t>((h + w) / 4), static_cast<std::int64_t>(h + w));
        for (std::int64_t s = 0; s < steps && count < k; ++s) {
            stamp(x, y, r);
            x += 1.5 * std::cos(th);
            y += 1.5 * std::sin(th);
            th += rng.normal(0.0, 0.25);
            if (x < 0 || x > static_cast<double>(w - 1) || y < 0 || y > static_cast<double>(h - 1))
                break;
        }
    }
    if (count < k) throw config_error("curve mask could not reach the requested coverage");
    return hole;
}

// Axis-aligned rectangle of exactly k cells (the last row may be partial).
std::vector<std::uint8_t> rect_mask(std::size_t h, std::size_t w, std::size_t k, Rng& rng) {
    std::vector<std::uint8_t> hole(h * w, 0);
    if (k == 0) return hole;
    const double aspect = rng.uniform(0.5, 2.0);
    const std::size_t min_w = (k + h - 1) / h; // keeps the shape within h rows
    auto rw = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(k) * aspect)));
    rw = std::clamp(rw, std::max<std::size_t>(min_w, 1), w);
    const std::size_t full = k / rw, rem = k % rw;
    const std::size_t rows = full + (rem ? 1 : 0);
    const auto x0 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(w - rw)));
    const auto y0 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(h - rows)));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t len = (r + 1 == rows && rem) ? rem : rw;
        for (std::size_t c = 0; c < len; ++c) hole[(y0 + r) * w + x0 + c] = 1;
    }
    return hole;
}

struct Blob {
    double cx, cy, sigma;
    std::array<double, 3> amp;
};

struct TexParams {
    TextureKind kind = TextureKind::checker;
    std::array<double, 3> amp{}, px{}, py{}, phx{}, phy{}; // checker
    std::array<double, 3> base{}, gx{}, gy{};              // gradient
    std::vector<Blob> blobs;                               // noise_blobs
    double cx0 = 0, cy0 = 0, wd = 1, ht = 1;

    double eval(std::size_t c, double x, double y) const {
        switch (kind) {
        case TextureKind::checker:
            return amp[c] * std::sin(2.0 * kPi * (x + phx[c]) / px[c]) *
                   std::sin(2.0 * kPi * (y + phy[c]) / py[c]);
        case TextureKind::gradient:
            return base[c] + gx[c] * (x - cx0) / wd + gy[c] * (y - cy0) / ht;
        case TextureKind::noise_blobs: {
            double v = 0.0;
            for (const auto& b : blobs) {
                const double dx = x - b.cx, dy = y - b.cy;
                v += b.amp[c] * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
            }
            return v;
        }
        }
        return 0.0;
    }
};

TexParams draw_texture(TextureKind kind, std::size_t h, std::size_t w, Rng& rng) {
    TexParams p;
    p.kind = kind;
    p.wd = static_cast<double>(w);
    p.ht = static_cast<double>(h);
    p.cx0 = (static_cast<double>(w) - 1.0) / 2.0;
    p.cy0 = (static_cast<double>(h) - 1.0) / 2.0;
    switch (kind) {
    case TextureKind::checker:
        for (std::size_t c = 0; c < 3; ++c) {
            p.amp[c] = rng.uniform(0.5, 0.85);
            p.px[c] = rng.uniform(8.0, 24.0);
            p.py[c] = rng.uniform(8.0, 24.0);
            p.phx[c] = rng.uniform(0.0, p.px[c]);
            p.phy[c] = rng.uniform(0.0, p.py[c]);
        }
        break;
    case TextureKind::gradient:
        // Slopes stay small enough that the value is bounded well inside
        // (-1, 1) even after the motion map stretches the sampling domain.
        for (std::size_t c = 0; c < 3; ++c) {
            p.base[c] = rng.uniform(-0.15, 0.15);
            p.gx[c] = rng.uniform(-0.25, 0.25);
            p.gy[c] = rng.uniform(-0.25, 0.25);
        }
        break;
    case TextureKind::noise_blobs: {
        const std::int64_t n = rng.uniform_int(4, 8);
        const double side = static_cast<double>(std::min(h, w));
        p.blobs.resize(static_cast<std::size_t>(n));
        for (auto& b : p.blobs) {
            b.cx = rng.uniform(0.0, static_cast<double>(w - 1));
            b.cy = rng.uniform(0.0, static_cast<double>(h - 1));
            b.sigma = std::max(rng.uniform(side / 8.0, side / 3.0), 0.5);
            for (auto& a : b.amp) a = rng.uniform(-1.0, 1.0);
        }
        for (std::size_t c = 0; c < 3; ++c) {
            double sum = 0.0;
            for (const auto& b : p.blobs) sum += std::abs(b.amp[c]);
            const double scale = sum > 0.0 ? 0.9 / sum : 0.0;
            for (auto& b : p.blobs) b.amp[c] *= scale;
        }
        break;
    }
    }
    return p;
}

// Inverse of t applications of the per-frame step map; the step map matches
// the analytic flow (delta(p) = A (p - c) + t_vec about the frame centre).
template <typename T>
void inv_map(const flow::Motion<T>& m, double cx, double cy, std::int64_t t, double x, double y,
             double& u, double& v) {
    switch (m.kind) {
    case flow::MotionKind::none:
        u = x;
        v = y;
        break;
    case flow::MotionKind::constant:
        u = x - static_cast<double>(t) * static_cast<double>(m.dx);
        v = y - static_cast<double>(t) * static_cast<double>(m.dy);
        break;
    case flow::MotionKind::rotation: {
        const double a = -static_cast<double>(t) * static_cast<double>(m.angle);
        const double ca = std::cos(a), sa = std::sin(a);
        const double px = x - cx, py = y - cy;
        u = cx + ca * px - sa * py;
        v = cy + sa * px + ca * py;
        break;
    }
    case flow::MotionKind::zoom: {
        const double f = std::pow(static_cast<double>(m.scale), -static_cast<double>(t));
        u = cx + (x - cx) * f;
        v = cy + (y - cy) * f;
        break;
    }
    }
}

TextureKind texture_from_name(const std::string& s) {
    if (s == "checker") return TextureKind::checker;
    if (s == "gradient") return TextureKind::gradient;
    if (s == "noise_blobs") return TextureKind::noise_blobs;
    throw config_error("unknown texture kind: " + s);
}

flow::MotionKind motion_from_name(const std::string& s) {
    if (s == "none") return flow::MotionKind::none;
    if (s == "constant") return flow::MotionKind::constant;
    if (s == "rotation") return flow::MotionKind::rotation;
    if (s == "zoom") return flow::MotionKind::zoom;
    throw config_error("unknown motion kind: " + s);
}

} // namespace

const char* texture_name(TextureKind k) {
    switch (k) {
    case TextureKind::checker: return "checker";
    case TextureKind::gradient: return "gradient";
    case TextureKind::noise_blobs: return "noise_blobs";
    }
    return "?";
}

const char* mask_kind_name(MaskKind k) {
    switch (k) {
    case MaskKind::object_like: return "object_like";
    case MaskKind::curve: return "curve";
    case MaskKind::stationary: return "stationary";
    }
    return "?";
}

const char* motion_kind_name(flow::MotionKind k) {
    switch (k) {
    case flow::MotionKind::none: return "none";
    case flow::MotionKind::constant: return "constant";
    case flow::MotionKind::rotation: return "rotation";
    case flow::MotionKind::zoom: return "zoom";
    }
    return "?";
}

template <typename T>
Tensor<T> gen_mask(const MaskSpec& spec, std::size_t t, std::size_t h, std::size_t w,
                   std::uint64_t seed) {
    if (t < 1 || h < 1 || w < 1) throw dim_error("gen_mask: empty clip");
    Rng rng(seed);
    const std::size_t k = pick_target(spec, h * w, rng);
    std::vector<std::uint8_t> base;
    switch (spec.kind) {
    case MaskKind::object_like: base = blob_mask(h, w, k, rng); break;
    case MaskKind::curve: base = curve_mask(h, w, k, rng); break;
    case MaskKind::stationary: base = rect_mask(h, w, k, rng); break;
    }
    const bool moving =
        spec.kind == MaskKind::stationary ? rng.uniform() < spec.animate_prob : true;
    Tensor<T> out(Shape{t, 1, h, w});
    T* o = out.data();
    const auto ih = static_cast<std::int64_t>(h), iw = static_cast<std::int64_t>(w);
    std::int64_t ox = 0, oy = 0;
    for (std::size_t f = 0; f < t; ++f) {
        if (f > 0 && moving) {
            ox += std::llround(rng.normal(0.0, spec.step_sigma));
            oy += std::llround(rng.normal(0.0, spec.step_sigma));
        }
        for (std::int64_t y = 0; y < ih; ++y) {
            const std::int64_t sy = ((y - oy) % ih + ih) % ih;
            for (std::int64_t x = 0; x < iw; ++x) {
                const std::int64_t sx = ((x - ox) % iw + iw) % iw;
                o[(static_cast<std::int64_t>(f) * ih + y) * iw + x] =
                    base[static_cast<std::size_t>(sy * iw + sx)] ? T(0) : T(1);
            }
        }
    }
    return out;
}

template <typename T>
SyntheticClip<T> gen_clip(const flow::Motion<T>& motion, TextureKind texture, std::size_t t,
                          std::size_t h, std::size_t w, std::uint64_t seed) {
    if (t < 1 || h < 2 || w < 2) throw dim_error("gen_clip: clip must be at least 1 x 2 x 2");
    if (motion.kind == flow::MotionKind::zoom && motion.scale <= T(0))
        throw dim_error("gen_clip: zoom scale must be positive");
    Rng rng(seed);
    const TexParams tex = draw_texture(texture, h, w, rng);

    SyntheticClip<T> clip;
    clip.motion = motion;
    clip.texture = texture;
    clip.seed = seed;
    clip.frames = Tensor<T>(Shape{t, 3, h, w});
    clip.masks = Tensor<T>(Shape{t, 1, h, w}, T(1));
    const double cx = (static_cast<double>(w) - 1.0) / 2.0;
    const double cy = (static_cast<double>(h) - 1.0) / 2.0;
    T* f = clip.frames.data();
    for (std::size_t ft = 0; ft < t; ++ft)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    double u = 0.0, v = 0.0;
                    inv_map(motion, cx, cy, static_cast<std::int64_t>(ft),
                            static_cast<double>(x), static_cast<double>(y), u, v);
                    f[((ft * 3 + c) * h + y) * w + x] = static_cast<T>(tex.eval(c, u, v));
                }
    if (t > 1) {
        const auto fwd = flow::synth_flow(motion, static_cast<std::int64_t>(h),
                                          static_cast<std::int64_t>(w), false);
        const auto bwd = flow::synth_flow(motion, static_cast<std::int64_t>(h),
                                          static_cast<std::int64_t>(w), true);
        clip.pair_fwd.assign(t - 1, fwd);
        clip.pair_bwd.assign(t - 1, bwd);
    }
    return clip;
}

template <typename T>
SyntheticClip<T> sample_clip(const DatasetSpec& spec, std::size_t index) {
    if (spec.frames < 1 || spec.height < 8 || spec.width < 8)
        throw dim_error("sample_clip: dataset clip dimensions too small");
    if (spec.motion_scale <= 0) throw dim_error("sample_clip: motion_scale must be positive");
    Rng pick = Rng(spec.seed).fork(index);
    const auto texture = static_cast<TextureKind>(pick.uniform_int(0, 2));

    // Bilinear warps are exact for whole-pixel translations of any texture and
    // for any motion of an affine texture, so rotation/zoom only ever pairs
    // with the gradient texture; everything else translates by whole pixels
    // (motion_scale included, hence the rounding).
    flow::Motion<T> m;
    const std::int64_t choice =
        texture == TextureKind::gradient ? pick.uniform_int(0, 2) : 0;
    if (choice == 1) {
        m.kind = flow::MotionKind::rotation;
        const double sign = pick.uniform() < 0.5 ? -1.0 : 1.0;
        m.angle = static_cast<T>(sign * pick.uniform(0.02, 0.05) * spec.motion_scale);
    } else if (choice == 2) {
        m.kind = flow::MotionKind::zoom;
        m.scale = static_cast<T>(1.0 + (pick.uniform(0.97, 1.03) - 1.0) * spec.motion_scale);
    } else {
        m.kind = flow::MotionKind::constant;
        const double s = spec.motion_scale;
        m.dx = static_cast<T>(std::llround(static_cast<double>(pick.uniform_int(-2, 2)) * s));
        m.dy = static_cast<T>(std::llround(static_cast<double>(pick.uniform_int(-2, 2)) * s));
        if (m.dx == T(0) && m.dy == T(0)) m.dx = static_cast<T>(std::max<long long>(1, std::llround(s)));
    }
    auto clip = gen_clip<T>(m, texture, spec.frames, spec.height, spec.width, pick.fork(1).seed());
    clip.masks = gen_mask<T>(spec.mask, spec.frames, spec.height, spec.width, pick.fork(2).seed());
    return clip;
}

template <typename T>
void save_clip(const std::string& dir, const SyntheticClip<T>& clip) {
    if (!clip.frames.defined() || !clip.masks.defined() || clip.frames.rank() != 4)
        throw dim_error("save_clip: clip tensors missing or malformed");
    const std::size_t t = clip.frames.extent(0);
    if (clip.pair_fwd.size() != t - 1 || clip.pair_bwd.size() != t - 1)
        throw dim_error("save_clip: flow count does not match frame count");
    fs::create_directories(dir);
    save_tsr((fs::path(dir) / "frames.tsr").string(), clip.frames);
    save_tsr((fs::path(dir) / "masks.tsr").string(), clip.masks);
    char name[48];
    for (std::size_t i = 0; i + 1 < t; ++i) {
        std::snprintf(name, sizeof name, "flow_fwd_%03zu.tsr", i);
        save_tsr((fs::path(dir) / name).string(), clip.pair_fwd[i]);
        std::snprintf(name, sizeof name, "flow_bwd_%03zu.tsr", i);
        save_tsr((fs::path(dir) / name).string(), clip.pair_bwd[i]);
    }
    std::ostringstream man;
    man.precision(17);
    man << "frames=" << t << "\n"
        << "height=" << clip.frames.extent(2) << "\n"
        << "width=" << clip.frames.extent(3) << "\n"
        << "seed=" << clip.seed << "\n"
        << "texture=" << texture_name(clip.texture) << "\n"
        << "motion=" << motion_kind_name(clip.motion.kind) << "\n"
        << "dx=" << static_cast<double>(clip.motion.dx) << "\n"
        << "dy=" << static_cast<double>(clip.motion.dy) << "\n"
        << "angle=" << static_cast<double>(clip.motion.angle) << "\n"
        << "scale=" << static_cast<double>(clip.motion.scale) << "\n";
    std::ofstream out(fs::path(dir) / "manifest.txt");
    if (!out) throw config_error("cannot write clip manifest in " + dir);
    out << man.str();
    if (!out) throw config_error("write failed for clip manifest in " + dir);
}

template <typename T>
SyntheticClip<T> load_clip(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.txt");
    if (!in) throw config_error("cannot read clip manifest in " + dir);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error("malformed manifest line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const char* key) -> std::string {
        const auto it = kv.find(key);
        if (it == kv.end()) throw config_error("manifest missing key: " + std::string(key));
        return it->second;
    };
    SyntheticClip<T> clip;
    const auto t = static_cast<std::size_t>(std::stoull(need("frames")));
    const auto h = static_cast<std::size_t>(std::stoull(need("height")));
    const auto w = static_cast<std::size_t>(std::stoull(need("width")));
    clip.seed = std::stoull(need("seed"));
    clip.texture = texture_from_name(need("texture"));
    clip.motion.kind = motion_from_name(need("motion"));
    clip.motion.dx = static_cast<T>(std::stod(need("dx")));
    clip.motion.dy = static_cast<T>(std::stod(need("dy")));
    clip.motion.angle = static_cast<T>(std::stod(need("angle")));
    clip.motion.scale = static_cast<T>(std::stod(need("scale")));
    static const std::array<std::string, 10> keys = {"frames",  "height", "width", "seed",
                                                     "texture", "motion", "dx",    "dy",
                                                     "angle",   "scale"};
    for (const auto& [key, value] : kv) {
        (void)value;
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw config_error("unknown manifest key: " + key);
    }
    clip.frames = load_tsr<T>((fs::path(dir) / "frames.tsr").string());
    if (clip.frames.shape() != Shape{t, 3, h, w})
        throw config_error("frames tensor does not match the manifest");
    clip.masks = load_tsr<T>((fs::path(dir) / "masks.tsr").string());
    if (clip.masks.shape() != Shape{t, 1, h, w})
        throw config_error("masks tensor does not match the manifest");
    char name[48];
    for (std::size_t i = 0; i + 1 < t; ++i) {
        std::snprintf(name, sizeof name, "flow_fwd_%03zu.tsr", i);
        clip.pair_fwd.push_back(load_tsr<T>((fs::path(dir) / name).string()));
        std::snprintf(name, sizeof name, "flow_bwd_%03zu.tsr", i);
        clip.pair_bwd.push_back(load_tsr<T>((fs::path(dir) / name).string()));
        if (clip.pair_fwd.back().shape() != Shape{h, w, 2} ||
            clip.pair_bwd.back().shape() != Shape{h, w, 2})
            throw config_error("flow tensor does not match the manifest");
    }
    return clip;
}

template <typename T>
void export_images(const std::string& dir, const SyntheticClip<T>& clip) {
    if (!clip.frames.defined() || clip.frames.rank() != 4 || clip.frames.extent(1) != 3)
        throw dim_error("export_images: frames must be [T, 3, H, W]");
    const std::size_t t = clip.frames.extent(0);
    const std::size_t h = clip.frames.extent(2), w = clip.frames.extent(3);
    if (!clip.masks.defined() || clip.masks.shape() != Shape{t, 1, h, w})
        throw dim_error("export_images: masks must be [T, 1, H, W] matching the frames");
    fs::create_directories(dir);
    const std::size_t fsz = 3 * h * w, msz = h * w;
    char name[48];
    for (std::size_t i = 0; i < t; ++i) {
        const T* fp = clip.frames.data() + i * fsz;
        Tensor<T> frame(Shape{3, h, w}, std::vector<T>(fp, fp + fsz));
        std::snprintf(name, sizeof name, "frame_%03zu.ppm", i);
        imageio::save_ppm((fs::path(dir) / name).string(), frame);
        const T* mp = clip.masks.data() + i * msz;
        Tensor<T> mask(Shape{h, w}, std::vector<T>(mp, mp + msz));
        std::snprintf(name, sizeof name, "mask_%03zu.pgm", i);
        imageio::save_pgm((fs::path(dir) / name).string(), mask);
    }
}

#define VINPAINT_SYNTH_INSTANTIATE(T)                                                             \
    template Tensor<T> gen_mask<T>(const MaskSpec&, std::size_t, std::size_t, std::size_t,        \
                                   std::uint64_t);                                                \
    template SyntheticClip<T> gen_clip<T>(const flow::Motion<T>&, TextureKind, std::size_t,       \
                                          std::size_t, std::size_t, std::uint64_t);               \
    template SyntheticClip<T> sample_clip<T>(const DatasetSpec&, std::size_t);                    \
    template void save_clip<T>(const std::string&, const SyntheticClip<T>&);                      \
    template SyntheticClip<T> load_clip<T>(const std::string&);                                   \
    template void export_images<T>(const std::string&, const SyntheticClip<T>&);

VINPAINT_SYNTH_INSTANTIATE(float)
VINPAINT_SYNTH_INSTANTIATE(double)

#undef VINPAINT_SYNTH_INSTANTIATE

} // namespace vinpaint::synth
