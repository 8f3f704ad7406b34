#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vinpaint/losses.hpp"
#include "vinpaint/model.hpp"
#include "vinpaint/synth.hpp"

namespace vinpaint::trainer {

/// Two-stage plan. Stage 1 trains the generator alone on reconstruction +
/// perceptual + style; stage 2 adds the corrupted-region term and the
/// adversarial game (one critic step, then one generator step, per step).
struct Schedule {
    std::size_t stage1_steps = 0;
    std::size_t stage2_steps = 0;
    double lr = 1e-4;
    double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::uint64_t seed = 1;
    losses::LossWeights stage1; // defaults are already the stage-1 weights
    losses::LossWeights stage2; // filled by the constructor

    Schedule() {
        stage2.lambda_c = 6.0;
        stage2.lambda_g = 0.1;
    }
};

/// Adam over a fixed set of named parameters. Gradients live on the tensors;
/// call zero_grad() before backward and step() after.
template <typename T>
class Adam {
  public:
    Adam(model::NamedParams<T> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void zero_grad();
    void step();

  private:
    model::NamedParams<T> params_;
    std::vector<std::vector<T>> m_, v_;
    double lr_, b1_, b2_, eps_;
    std::int64_t t_ = 0;
};

struct CurveRow {
    std::size_t step = 0;
    int stage = 1;
    double l_r = 0, l_p = 0, l_s = 0, l_g = 0, total = 0;
};

struct TrainResult {
    std::vector<CurveRow> curve;
    std::size_t steps_done = 0;
    bool aborted = false; // non-finite loss; parameters restored to the last good step
};

/// Runs the schedule over the clips in round-robin order, mutating the models
/// in place. `disc` may be null when stage2_steps == 0. Deterministic given
/// the schedule seed; a non-finite loss aborts with the last good parameters
/// restored. Stage-1 totals are verified against recon + lambda_p * perceptual
/// + lambda_s * style exactly.
template <typename T>
TrainResult train(model::Generator<T>& gen, model::Discriminator<T>* disc,
                  const std::vector<synth::SyntheticClip<T>>& clips, const Schedule& sched,
                  model::TemporalMode mode, const flow::ValidityConfig& vcfg = {});

/// CSV `step,stage,L_r,L_p,L_s,L_G,total`.
void write_curve_csv(const std::string& path, const std::vector<CurveRow>& curve);

struct EvalScores {
    double psnr = 0, ssim = 0, hole_l1 = 0;
};

/// Mean composite-vs-ground-truth scores over the clips (PSNR over the clip,
/// SSIM per frame, L1 over corrupted pixels; peak / dynamic range 2).
template <typename T>
EvalScores evaluate(const model::Generator<T>& gen,
                    const std::vector<synth::SyntheticClip<T>>& clips, model::TemporalMode mode,
                    const flow::ValidityConfig& vcfg = {});

/// Copy of the clip with i.i.d. smooth noise added to every flow field;
/// stands in for imperfect predicted flow.
template <typename T>
synth::SyntheticClip<T> perturb_flows(const synth::SyntheticClip<T>& clip, double sigma,
                                      std::uint64_t seed);

enum class Alignment { shift_only, aligned_exact, aligned_perturbed };

const char* alignment_name(Alignment a);

struct AblationArm {
    std::string name;
    Alignment alignment = Alignment::shift_only;
};

struct AblationConfig {
    std::uint64_t seed = 1;
    std::size_t train_clips = 3, eval_clips = 2;
    std::size_t frames = 6, height = 32, width = 32;
    std::size_t steps = 150;
    double lr = 2e-3;
    double perturb_sigma = 0.6;
    std::int64_t base_channels = 8;
    double delta = 1.0;                     // validity threshold at full resolution
    double cover_lo = 0.1, cover_hi = 0.4;  // corrupted-area band, train and eval
    double motion_scale = 1.0;              // dataset motion multiplier
};

struct AblationRow {
    std::string arm;
    std::string mask_kind;
    double psnr = 0, ssim = 0, hole_l1 = 0;
};

/// Trains one generator per arm from a shared initialization on shared data
/// (arms differ only in their alignment setting) and scores each on held-out
/// clips corrupted by every requested mask kind. Rows are sorted by arm name,
/// then mask kind.
template <typename T>
std::vector<AblationRow> run_ablation(const std::vector<AblationArm>& arms,
                                      const std::vector<synth::MaskKind>& eval_masks,
                                      const AblationConfig& cfg);

/// CSV `arm,mask,psnr,ssim,hole_l1`.
void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows);

} // namespace vinpaint::trainer
