#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vinpaint/align.hpp"
#include "vinpaint/rng.hpp"
#include "vinpaint/tape.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint::model {

/// How the temporal units mix neighbouring frames: plain channel shift, or
/// shift with flow-guided warping and validity fusion.
enum class TemporalMode { shift_only, aligned };

template <typename T>
using NamedParams = std::vector<std::pair<std::string, Tensor<T>>>;

/// Per-feature-resolution alignment inputs, keyed by stride w.r.t. the input.
template <typename T>
struct FlowPyramid {
    std::map<std::int64_t, align::AlignData<T>> levels;

    const align::AlignData<T>& at(std::int64_t stride) const {
        auto it = levels.find(stride);
        if (it == levels.end())
            throw dim_error("flow pyramid level for stride " + std::to_string(stride) +
                            " is missing");
        return it->second;
    }
};

/// Downsamples neighbour-pair flows to every requested stride and computes the
/// per-direction validity masks there. pair_fwd[i] maps frame i to i+1,
/// pair_bwd[i] maps frame i+1 to i, both at full resolution.
template <typename T>
FlowPyramid<T> build_flow_pyramid(const std::vector<Tensor<T>>& pair_fwd,
                                  const std::vector<Tensor<T>>& pair_bwd,
                                  const std::vector<std::int64_t>& strides,
                                  const flow::ValidityConfig& cfg = {});

/// Convolution gated by a learned sigmoid mask: leaky_relu(conv(x)) * sigmoid(conv_g(x)).
/// The activation is skipped when `activate` is false (used by the output head).
template <typename T>
struct GatedConv {
    Tensor<T> wf, bf, wg, bg;
    std::int64_t stride = 1, pad = 1;
    bool activate = true;

    static GatedConv init(Rng& rng, std::int64_t cin, std::int64_t cout, std::int64_t k,
                          std::int64_t stride, std::int64_t pad, bool activate = true);
    Tensor<T> forward(Tape* tape, const Tensor<T>& x) const;
    void collect(const std::string& prefix, NamedParams<T>& out);
};

/// Transposed-convolution twin of GatedConv (kernel 4, stride 2, pad 1 doubles H and W).
template <typename T>
struct GatedDeconv {
    Tensor<T> wf, bf, wg, bg;

    static GatedDeconv init(Rng& rng, std::int64_t cin, std::int64_t cout);
    Tensor<T> forward(Tape* tape, const Tensor<T>& x) const;
    void collect(const std::string& prefix, NamedParams<T>& out);
};

/// The temporal unit: the feature convolution consumes temporally mixed
/// features (plain shift or shift-and-align at this layer's pyramid stride)
/// while the gate convolution reads the unmixed input. No activation inside.
template <typename T>
struct TemporalGatedConv {
    Tensor<T> wf, bf, wg, bg;
    std::int64_t pad = 1;
    std::int64_t band = 1;         // shifted channels per direction
    std::int64_t level_stride = 1; // feature stride w.r.t. the network input

    static TemporalGatedConv init(Rng& rng, std::int64_t cin, std::int64_t cout, std::int64_t k,
                                  std::int64_t level_stride, double shift_fraction);
    Tensor<T> forward(Tape* tape, const Tensor<T>& x, TemporalMode mode,
                      const FlowPyramid<T>& pyramid) const;
    void collect(const std::string& prefix, NamedParams<T>& out);
};

/// Residual bottleneck whose first convolution is a temporal unit:
/// 1x1 temporal gated conv to cout/2, 3x3 (optionally strided), 1x1 expand,
/// plus an identity or strided-1x1 projection skip.
template <typename T>
struct Bottleneck {
    TemporalGatedConv<T> tconv;
    Tensor<T> w2, b2, w3, b3; // 3x3 mid->mid, 1x1 mid->cout
    Tensor<T> wp, bp;         // projection when geometry changes
    std::int64_t stride = 1;
    bool has_proj = false;

    static Bottleneck init(Rng& rng, std::int64_t cin, std::int64_t cout, std::int64_t stride,
                           std::int64_t level_stride, double shift_fraction);
    Tensor<T> forward(Tape* tape, const Tensor<T>& x, TemporalMode mode,
                      const FlowPyramid<T>& pyramid) const;
    void collect(const std::string& prefix, NamedParams<T>& out);
};

struct StageSpec {
    std::int64_t blocks = 1;
    std::int64_t channels = 16;
    std::int64_t stride = 1;
};

struct GeneratorConfig {
    std::int64_t base_channels = 16;
    double shift_fraction = 0.125;
    std::vector<StageSpec> stages; // empty -> default {1,b,1} {2,2b,2} {2,4b,2} {2,4b,2}

    std::vector<StageSpec> resolved_stages() const;
    std::int64_t temporal_units() const;              // encoder blocks + 5 decoder units
    std::vector<std::int64_t> pyramid_strides() const; // distinct feature strides used
};

/// Encoder-decoder inpainting network. Input frames are in [-1, 1] with
/// corrupted pixels anywhere; the mask (1 = valid) is applied to the frames and
/// concatenated as a fourth channel. The decoder upsamples three times with
/// skip concatenations reduced by 1x1 convs, runs five temporal units, and
/// ends in a tanh head. The returned tensor is the composite: known pixels are
/// copied from the input bit-for-bit, only holes carry the prediction.
template <typename T>
class Generator {
  public:
    Generator(const GeneratorConfig& cfg, Rng& rng);

    const GeneratorConfig& config() const { return cfg_; }
    NamedParams<T> parameters();
    Tensor<T> forward(Tape* tape, const Tensor<T>& frames, const Tensor<T>& mask,
                      const FlowPyramid<T>& pyramid, TemporalMode mode) const;

  private:
    GeneratorConfig cfg_;
    GatedConv<T> stem_;
    std::vector<Bottleneck<T>> blocks_;          // flattened encoder stages
    std::vector<std::size_t> skip_after_;        // block indices whose output feeds a skip
    TemporalGatedConv<T> dec_t1_, dec_t2_;       // two units at the bottleneck stride
    GatedDeconv<T> up1_, up2_, up3_;
    Tensor<T> red1_w_, red1_b_, red2_w_, red2_b_; // channel-reduction 1x1 convs
    TemporalGatedConv<T> dec_t3_, dec_t4_, dec_t5_;
    Tensor<T> out_w_, out_b_;
};

/// Spatio-temporal patch critic: four 3x5x5 convolutions with stride (1,2,2)
/// and leaky ReLU between them, scoring overlapping video patches.
template <typename T>
class Discriminator {
  public:
    explicit Discriminator(Rng& rng, std::int64_t base_channels = 8);

    NamedParams<T> parameters();
    /// video [T, 3, H, W] with T >= 3 and H, W >= 16 -> scores [T, 1, H/16, W/16]
    Tensor<T> forward(Tape* tape, const Tensor<T>& video) const;

  private:
    std::vector<Tensor<T>> w_, b_;
};

/// Writes every named tensor as TSR1 under dir plus a manifest and a key=value
/// meta echo; load restores values into the given handles, validating names and
/// shapes against the manifest (config_error on any mismatch).
template <typename T>
void save_params(const std::string& dir, const NamedParams<T>& params,
                 const std::vector<std::pair<std::string, std::string>>& meta);
template <typename T>
void load_params(const std::string& dir, NamedParams<T>& params);
std::vector<std::pair<std::string, std::string>> read_meta(const std::string& dir);

} // namespace vinpaint::model
