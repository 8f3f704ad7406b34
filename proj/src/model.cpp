#include "vinpaint/model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vinpaint/ops.hpp"

namespace vinpaint::model {

namespace fs = std::filesystem;
namespace op = vinpaint::ops;
using std::int64_t;

namespace {

template <typename T>
Tensor<T> conv_weight(Rng& rng, int64_t cout, int64_t cin, int64_t k) {
    const T stddev = std::sqrt(T(2) / static_cast<T>(cin * k * k));
    return op::randn<T>(rng, Shape{static_cast<std::size_t>(cout), static_cast<std::size_t>(cin),
                                   static_cast<std::size_t>(k), static_cast<std::size_t>(k)},
                        stddev);
}

template <typename T>
Tensor<T> leaky(Tape* tape, const Tensor<T>& x) {
    return op::leaky_relu(tape, x, T(0.2));
}

std::string file_for(const std::string& name) {
    std::string f = name;
    for (char& c : f)
        if (c == '/' || c == '.') c = '_';
    return f + ".tsr";
}

} // namespace

// --- flow pyramid ----------------------------------------------------------------

template <typename T>
FlowPyramid<T> build_flow_pyramid(const std::vector<Tensor<T>>& pair_fwd,
                                  const std::vector<Tensor<T>>& pair_bwd,
                                  const std::vector<int64_t>& strides,
                                  const flow::ValidityConfig& cfg) {
    FlowPyramid<T> p;
    for (int64_t s : strides) p.levels[s] = align::build_align_data(pair_fwd, pair_bwd, s, cfg);
    return p;
}

// --- gated conv ------------------------------------------------------------------

template <typename T>
GatedConv<T> GatedConv<T>::init(Rng& rng, int64_t cin, int64_t cout, int64_t k, int64_t stride,
                                int64_t pad, bool activate) {
    GatedConv<T> c;
    c.wf = conv_weight<T>(rng, cout, cin, k);
    c.bf = Tensor<T>(Shape{static_cast<std::size_t>(cout)});
    c.wg = conv_weight<T>(rng, cout, cin, k);
    c.bg = Tensor<T>(Shape{static_cast<std::size_t>(cout)});
    c.stride = stride;
    c.pad = pad;
    c.activate = activate;
    return c;
}

template <typename T>
Tensor<T> GatedConv<T>::forward(Tape* tape, const Tensor<T>& x) const {
    auto feat = op::conv2d(tape, x, wf, bf, stride, pad);
    if (activate) feat = leaky(tape, feat);
    auto gate = op::sigmoid(tape, op::conv2d(tape, x, wg, bg, stride, pad));
    return op::mul(tape, feat, gate);
}

template <typename T>
void GatedConv<T>::collect(const std::string& prefix, NamedParams<T>& out) {
    out.emplace_back(prefix + ".wf", wf);
    out.emplace_back(prefix + ".bf", bf);
    out.emplace_back(prefix + ".wg", wg);
    out.emplace_back(prefix + ".bg", bg);
}

// --- gated deconv ----------------------------------------------------------------

template <typename T>
GatedDeconv<T> GatedDeconv<T>::init(Rng& rng, int64_t cin, int64_t cout) {
    GatedDeconv<T> c;
    const T stddev = std::sqrt(T(2) / static_cast<T>(cin * 4)); // 4 taps reach each output
    const Shape ws{static_cast<std::size_t>(cin), static_cast<std::size_t>(cout), 4, 4};
    c.wf = op::randn<T>(rng, ws, stddev);
    c.bf = Tensor<T>(Shape{static_cast<std::size_t>(cout)});
    c.wg = op::randn<T>(rng, ws, stddev);
    c.bg = Tensor<T>(Shape{static_cast<std::size_t>(cout)});
    return c;
}

template <typename T>
Tensor<T> GatedDeconv<T>::forward(Tape* tape, const Tensor<T>& x) const {
    auto feat = leaky(tape, op::conv_transpose2d(tape, x, wf, bf, 2, 1));
    auto gate = op::sigmoid(tape, op::conv_transpose2d(tape, x, wg, bg, 2, 1));
    return op::mul(tape, feat, gate);
}

template <typename T>
void GatedDeconv<T>::collect(const std::string& prefix, NamedParams<T>& out) {
    out.emplace_back(prefix + ".wf", wf);
    out.emplace_back(prefix + ".bf", bf);
    out.emplace_back(prefix + ".wg", wg);
    out.emplace_back(prefix + ".bg", bg);
}

// --- temporal gated conv ---------------------------------------------------------

template <typename T>
TemporalGatedConv<T> TemporalGatedConv<T>::init(Rng& rng, int64_t cin, int64_t cout, int64_t k,
                                                int64_t level_stride, double shift_fraction) {
    TemporalGatedConv<T> c;
    c.wf = conv_weight<T>(rng, cout, cin, k);
    c.bf = Tensor<T>(Shape{static_cast<std::size_t>(cout)});
    c.wg = conv_weight<T>(rng, cout, cin, k);
    c.bg = Tensor<T>(Shape{static_cast<std::size_t>(cout)});
    c.pad = (k - 1) / 2;
    c.band = align::shift_channels(cin, shift_fraction);
    c.level_stride = level_stride;
    return c;
}

template <typename T>
Tensor<T> TemporalGatedConv<T>::forward(Tape* tape, const Tensor<T>& x, TemporalMode mode,
                                        const FlowPyramid<T>& pyramid) const {
    Tensor<T> mixed = mode == TemporalMode::shift_only
                          ? op::temporal_shift(tape, x, band)
                          : align::shift_and_align(tape, x, pyramid.at(level_stride), band);
    auto feat = op::conv2d(tape, mixed, wf, bf, int64_t(1), pad);
    auto gate = op::sigmoid(tape, op::conv2d(tape, x, wg, bg, int64_t(1), pad));
    return op::mul(tape, feat, gate);
}

template <typename T>
void TemporalGatedConv<T>::collect(const std::string& prefix, NamedParams<T>& out) {
    out.emplace_back(prefix + ".wf", wf);
    out.emplace_back(prefix + ".bf", bf);
    out.emplace_back(prefix + ".wg", wg);
    out.emplace_back(prefix + ".bg", bg);
}

// --- bottleneck ------------------------------------------------------------------

template <typename T>
Bottleneck<T> Bottleneck<T>::init(Rng& rng, int64_t cin, int64_t cout, int64_t stride,
                                  int64_t level_stride, double shift_fraction) {
    if (cout < 2) throw dim_error("bottleneck: need at least 2 output channels");
    Bottleneck<T> b;
    const int64_t mid = cout / 2;
    b.tconv = TemporalGatedConv<T>::init(rng, cin, mid, 1, level_stride, shift_fraction);
    b.w2 = conv_weight<T>(rng, mid, mid, 3);
    b.b2 = Tensor<T>(Shape{static_cast<std::size_t>(mid)});
    b.w3 = conv_weight<T>(rng, cout, mid, 1);
    b.b3 = Tensor<T>(Shape{static_cast<std::size_t>(cout)});
    b.stride = stride;
    b.has_proj = stride != 1 || cin != cout;
    if (b.has_proj) {
        b.wp = conv_weight<T>(rng, cout, cin, 1);
        b.bp = Tensor<T>(Shape{static_cast<std::size_t>(cout)});
    }
    return b;
}

template <typename T>
Tensor<T> Bottleneck<T>::forward(Tape* tape, const Tensor<T>& x, TemporalMode mode,
                                 const FlowPyramid<T>& pyramid) const {
    auto h = tconv.forward(tape, x, mode, pyramid);
    h = leaky(tape, op::conv2d(tape, h, w2, b2, stride, int64_t(1)));
    h = op::conv2d(tape, h, w3, b3, int64_t(1), int64_t(0));
    auto skip = has_proj ? op::conv2d(tape, x, wp, bp, stride, int64_t(0)) : x;
    return leaky(tape, op::add(tape, h, skip));
}

template <typename T>
void Bottleneck<T>::collect(const std::string& prefix, NamedParams<T>& out) {
    tconv.collect(prefix + ".t", out);
    out.emplace_back(prefix + ".w2", w2);
    out.emplace_back(prefix + ".b2", b2);
    out.emplace_back(prefix + ".w3", w3);
    out.emplace_back(prefix + ".b3", b3);
    if (has_proj) {
        out.emplace_back(prefix + ".wp", wp);
        out.emplace_back(prefix + ".bp", bp);
    }
}

// --- generator config ------------------------------------------------------------

std::vector<StageSpec> GeneratorConfig::resolved_stages() const {
    if (!stages.empty()) return stages;
    const int64_t b = base_channels;
    return {{1, b, 1}, {2, 2 * b, 2}, {2, 4 * b, 2}, {2, 4 * b, 2}};
}

std::int64_t GeneratorConfig::temporal_units() const {
    int64_t n = 5; // decoder units
    for (const auto& s : resolved_stages()) n += s.blocks;
    return n;
}

std::vector<std::int64_t> GeneratorConfig::pyramid_strides() const {
    std::set<int64_t> used;
    int64_t cur = 1;
    for (const auto& st : resolved_stages()) {
        used.insert(cur); // first block's temporal unit sees the stage input
        cur *= st.stride;
        if (st.blocks > 1) used.insert(cur);
    }
    used.insert(cur);     // decoder bottleneck units
    for (int64_t s = cur / 2; s >= 1; s /= 2) used.insert(s); // one unit after each upsample
    return {used.begin(), used.end()};
}

// --- generator -------------------------------------------------------------------

template <typename T>
Generator<T>::Generator(const GeneratorConfig& cfg, Rng& rng) : cfg_(cfg) {
    const auto stages = cfg_.resolved_stages();
    if (stages.size() != 4)
        throw dim_error("generator expects 4 encoder stages, got " +
                        std::to_string(stages.size()));
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const int64_t want = i == 0 ? 1 : 2;
        if (stages[i].stride != want || stages[i].blocks < 1)
            throw dim_error("generator stage " + std::to_string(i) +
                            " must have stride " + std::to_string(want) + " and >= 1 block");
    }
    const int64_t b = stages[0].channels;

    stem_ = GatedConv<T>::init(rng, 4, b, 3, 1, 1);
    int64_t cin = b;
    int64_t stride_in = 1;
    for (std::size_t si = 0; si < stages.size(); ++si) {
        const auto& st = stages[si];
        for (int64_t blk = 0; blk < st.blocks; ++blk) {
            const int64_t s = blk == 0 ? st.stride : 1;
            blocks_.push_back(
                Bottleneck<T>::init(rng, cin, st.channels, s, stride_in, cfg_.shift_fraction));
            cin = st.channels;
            stride_in *= s;
        }
        if (si == 1 || si == 2) skip_after_.push_back(blocks_.size() - 1);
    }

    const int64_t c1 = stages[1].channels, c2 = stages[2].channels, c3 = stages[3].channels;
    dec_t1_ = TemporalGatedConv<T>::init(rng, c3, c3, 3, 8, cfg_.shift_fraction);
    dec_t2_ = TemporalGatedConv<T>::init(rng, c3, c3, 3, 8, cfg_.shift_fraction);
    up1_ = GatedDeconv<T>::init(rng, c3, c1);
    red1_w_ = conv_weight<T>(rng, c1, c1 + c2, 1);
    red1_b_ = Tensor<T>(Shape{static_cast<std::size_t>(c1)});
    dec_t3_ = TemporalGatedConv<T>::init(rng, c1, c1, 3, 4, cfg_.shift_fraction);
    up2_ = GatedDeconv<T>::init(rng, c1, b);
    red2_w_ = conv_weight<T>(rng, b, b + c1, 1);
    red2_b_ = Tensor<T>(Shape{static_cast<std::size_t>(b)});
    dec_t4_ = TemporalGatedConv<T>::init(rng, b, b, 3, 2, cfg_.shift_fraction);
    up3_ = GatedDeconv<T>::init(rng, b, b);
    dec_t5_ = TemporalGatedConv<T>::init(rng, b, b, 3, 1, cfg_.shift_fraction);
    out_w_ = conv_weight<T>(rng, 3, b, 3);
    out_b_ = Tensor<T>(Shape{3});
}

template <typename T>
NamedParams<T> Generator<T>::parameters() {
    NamedParams<T> p;
    stem_.collect("stem", p);
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        blocks_[i].collect("enc" + std::to_string(i), p);
    dec_t1_.collect("dec.t1", p);
    dec_t2_.collect("dec.t2", p);
    up1_.collect("dec.up1", p);
    p.emplace_back("dec.red1.w", red1_w_);
    p.emplace_back("dec.red1.b", red1_b_);
    dec_t3_.collect("dec.t3", p);
    up2_.collect("dec.up2", p);
    p.emplace_back("dec.red2.w", red2_w_);
    p.emplace_back("dec.red2.b", red2_b_);
    dec_t4_.collect("dec.t4", p);
    up3_.collect("dec.up3", p);
    dec_t5_.collect("dec.t5", p);
    p.emplace_back("out.w", out_w_);
    p.emplace_back("out.b", out_b_);
    return p;
}

template <typename T>
Tensor<T> Generator<T>::forward(Tape* tape, const Tensor<T>& frames, const Tensor<T>& mask,
                                const FlowPyramid<T>& pyramid, TemporalMode mode) const {
    if (frames.rank() != 4 || frames.extent(1) != 3)
        throw dim_error("generator: frames must be [T, 3, H, W], got " +
                        shape_str(frames.shape()));
    if (mask.rank() != 4 || mask.extent(1) != 1 || mask.extent(0) != frames.extent(0) ||
        mask.extent(2) != frames.extent(2) || mask.extent(3) != frames.extent(3))
        throw dim_error("generator: mask must be [T, 1, H, W] matching the frames, got " +
                        shape_str(mask.shape()));
    if (frames.extent(2) % 8 != 0 || frames.extent(3) % 8 != 0)
        throw dim_error("generator: H and W must be divisible by 8, got " +
                        shape_str(frames.shape()));

    auto mask3 = op::repeat_ch(mask, 3);
    auto x = op::concat_ch(tape, op::mul(tape, frames, mask3), mask);
    auto h = stem_.forward(tape, x);
    Tensor<T> skip_a, skip_b; // stride-4 and stride-2 encoder outputs
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        h = blocks_[i].forward(tape, h, mode, pyramid);
        if (i == skip_after_[0]) skip_b = h;
        if (i == skip_after_[1]) skip_a = h;
    }
    h = dec_t1_.forward(tape, h, mode, pyramid);
    h = dec_t2_.forward(tape, h, mode, pyramid);
    h = up1_.forward(tape, h);
    h = op::concat_ch(tape, h, skip_a);
    h = leaky(tape, op::conv2d(tape, h, red1_w_, red1_b_, int64_t(1), int64_t(0)));
    h = dec_t3_.forward(tape, h, mode, pyramid);
    h = up2_.forward(tape, h);
    h = op::concat_ch(tape, h, skip_b);
    h = leaky(tape, op::conv2d(tape, h, red2_w_, red2_b_, int64_t(1), int64_t(0)));
    h = dec_t4_.forward(tape, h, mode, pyramid);
    h = up3_.forward(tape, h);
    h = dec_t5_.forward(tape, h, mode, pyramid);
    auto yhat = op::tanh(tape, op::conv2d(tape, h, out_w_, out_b_, int64_t(1), int64_t(1)));
    return op::where(tape, mask3, frames, yhat);
}

// --- discriminator ---------------------------------------------------------------

template <typename T>
Discriminator<T>::Discriminator(Rng& rng, int64_t base_channels) {
    const int64_t b = base_channels;
    const std::vector<std::pair<int64_t, int64_t>> io = {
        {3, b}, {b, 2 * b}, {2 * b, 4 * b}, {4 * b, 1}};
    for (const auto& [cin, cout] : io) {
        const T stddev = std::sqrt(T(2) / static_cast<T>(cin * 3 * 5 * 5));
        w_.push_back(op::randn<T>(rng,
                                  Shape{static_cast<std::size_t>(cout),
                                        static_cast<std::size_t>(cin), 3, 5, 5},
                                  stddev));
        b_.push_back(Tensor<T>(Shape{static_cast<std::size_t>(cout)}));
    }
}

template <typename T>
NamedParams<T> Discriminator<T>::parameters() {
    NamedParams<T> p;
    for (std::size_t i = 0; i < w_.size(); ++i) {
        p.emplace_back("d" + std::to_string(i) + ".w", w_[i]);
        p.emplace_back("d" + std::to_string(i) + ".b", b_[i]);
    }
    return p;
}

template <typename T>
Tensor<T> Discriminator<T>::forward(Tape* tape, const Tensor<T>& video) const {
    if (video.rank() != 4 || video.extent(1) != 3)
        throw dim_error("discriminator: video must be [T, 3, H, W], got " +
                        shape_str(video.shape()));
    if (video.extent(0) < 3)
        throw dim_error("discriminator: clip shorter than the temporal kernel (need T >= 3)");
    const std::size_t Tn = video.extent(0);
    auto h = op::reshape(tape, op::swap01(tape, video),
                         Shape{1, 3, Tn, video.extent(2), video.extent(3)});
    for (std::size_t i = 0; i < w_.size(); ++i) {
        h = op::conv3d(tape, h, w_[i], b_[i], {1, 2, 2}, {1, 2, 2});
        if (i + 1 < w_.size()) h = leaky(tape, h);
    }
    return op::reshape(tape, h, Shape{Tn, 1, h.extent(3), h.extent(4)});
}

// --- checkpoints -----------------------------------------------------------------

template <typename T>
void save_params(const std::string& dir, const NamedParams<T>& params,
                 const std::vector<std::pair<std::string, std::string>>& meta) {
    fs::create_directories(dir);
    std::ofstream man(fs::path(dir) / "manifest.txt");
    if (!man) throw config_error("cannot write manifest in " + dir);
    for (const auto& [name, tensor] : params) {
        const std::string file = file_for(name);
        save_tsr((fs::path(dir) / file).string(), tensor);
        man << name << '\t' << file;
        for (std::size_t d = 0; d < tensor.rank(); ++d) man << '\t' << tensor.extent(d);
        man << '\n';
    }
    std::ofstream mt(fs::path(dir) / "meta.txt");
    if (!mt) throw config_error("cannot write meta in " + dir);
    for (const auto& [k, v] : meta) mt << k << '=' << v << '\n';
}

template <typename T>
void load_params(const std::string& dir, NamedParams<T>& params) {
    std::ifstream man(fs::path(dir) / "manifest.txt");
    if (!man) throw config_error("no manifest in " + dir);
    std::map<std::string, std::string> files;
    std::string line;
    while (std::getline(man, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string name, file;
        if (!(ss >> name >> file)) throw config_error("malformed manifest line: " + line);
        files[name] = file;
    }
    for (auto& [name, tensor] : params) {
        auto it = files.find(name);
        if (it == files.end()) throw config_error("checkpoint is missing parameter " + name);
        auto loaded = load_tsr<T>((fs::path(dir) / it->second).string());
        if (loaded.shape() != tensor.shape())
            throw config_error("checkpoint shape mismatch for " + name + ": file has " +
                               shape_str(loaded.shape()) + ", model expects " +
                               shape_str(tensor.shape()));
        std::copy(loaded.data(), loaded.data() + loaded.numel(), tensor.data());
        files.erase(it);
    }
    if (!files.empty())
        throw config_error("checkpoint has unknown parameter " + files.begin()->first);
}

std::vector<std::pair<std::string, std::string>> read_meta(const std::string& dir) {
    std::ifstream mt(fs::path(dir) / "meta.txt");
    if (!mt) throw config_error("no meta in " + dir);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(mt, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error("malformed meta line: " + line);
        out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return out;
}

#define VINPAINT_MODEL_INSTANTIATE(T)                                                             \
    template FlowPyramid<T> build_flow_pyramid<T>(                                                \
        const std::vector<Tensor<T>>&, const std::vector<Tensor<T>>&,                             \
        const std::vector<std::int64_t>&, const flow::ValidityConfig&);                           \
    template struct GatedConv<T>;                                                                 \
    template struct GatedDeconv<T>;                                                               \
    template struct TemporalGatedConv<T>;                                                         \
    template struct Bottleneck<T>;                                                                \
    template class Generator<T>;                                                                  \
    template class Discriminator<T>;                                                              \
    template void save_params<T>(const std::string&, const NamedParams<T>&,                       \
                                 const std::vector<std::pair<std::string, std::string>>&);        \
    template void load_params<T>(const std::string&, NamedParams<T>&);

VINPAINT_MODEL_INSTANTIATE(float)
VINPAINT_MODEL_INSTANTIATE(double)

#undef VINPAINT_MODEL_INSTANTIATE

} // namespace vinpaint::model
