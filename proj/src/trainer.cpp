#include "vinpaint/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "vinpaint/kernels.hpp"
#include "vinpaint/metrics.hpp"
#include "vinpaint/ops.hpp"

namespace vinpaint::trainer {

namespace {

template <typename T>
Tensor<T> frame_of(const Tensor<T>& clip, std::size_t t) {
    const std::size_t c = clip.extent(1), h = clip.extent(2), w = clip.extent(3);
    const T* p = clip.data() + t * c * h * w;
    return Tensor<T>(Shape{c, h, w}, std::vector<T>(p, p + c * h * w));
}

template <typename T>
void check_clips(const std::vector<synth::SyntheticClip<T>>& clips, const char* who) {
    if (clips.empty()) throw config_error(std::string(who) + ": no clips given");
    for (const auto& c : clips) {
        if (!c.frames.defined() || c.frames.rank() != 4 || !c.masks.defined())
            throw dim_error(std::string(who) + ": clip tensors missing or malformed");
        if (c.frames.extent(2) % 8 != 0 || c.frames.extent(3) % 8 != 0)
            throw dim_error(std::string(who) + ": clip resolution must be divisible by 8");
    }
}

template <typename T>
std::vector<std::vector<T>> snapshot_values(const model::NamedParams<T>& a,
                                            const model::NamedParams<T>& b) {
    std::vector<std::vector<T>> out;
    out.reserve(a.size() + b.size());
    for (const auto& [name, t] : a) (void)name, out.push_back(t.vec());
    for (const auto& [name, t] : b) (void)name, out.push_back(t.vec());
    return out;
}

template <typename T>
void restore_values(model::NamedParams<T>& a, model::NamedParams<T>& b,
                    const std::vector<std::vector<T>>& snap) {
    std::size_t i = 0;
    for (auto& [name, t] : a) (void)name, t.vec() = snap[i++];
    for (auto& [name, t] : b) (void)name, t.vec() = snap[i++];
}

} // namespace

template <typename T>
Adam<T>::Adam(model::NamedParams<T> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
    if (lr <= 0 || beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1 || eps <= 0)
        throw config_error("Adam: hyperparameters out of range");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& [name, t] : params_) {
        (void)name;
        m_.emplace_back(t.numel(), T(0));
        v_.emplace_back(t.numel(), T(0));
    }
}

template <typename T>
void Adam<T>::zero_grad() {
    for (auto& [name, t] : params_) {
        (void)name;
        t.ensure_grad();
        t.zero_grad();
    }
}

template <typename T>
void Adam<T>::step() {
    ++t_;
    const T bias1 = T(1) - static_cast<T>(std::pow(b1_, static_cast<double>(t_)));
    const T bias2 = T(1) - static_cast<T>(std::pow(b2_, static_cast<double>(t_)));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i].second;
        p.ensure_grad();
        const auto n = static_cast<std::int64_t>(p.numel());
        if (parallel_kernels())
            kernels::adam_update_omp(n, p.data(), p.grad(), m_[i].data(), v_[i].data(),
                                     static_cast<T>(lr_), static_cast<T>(b1_),
                                     static_cast<T>(b2_), static_cast<T>(eps_), bias1, bias2);
        else
            kernels::adam_update_serial(n, p.data(), p.grad(), m_[i].data(), v_[i].data(),
                                        static_cast<T>(lr_), static_cast<T>(b1_),
                                        static_cast<T>(b2_), static_cast<T>(eps_), bias1, bias2);
    }
}

template <typename T>
TrainResult train(model::Generator<T>& gen, model::Discriminator<T>* disc,
                  const std::vector<synth::SyntheticClip<T>>& clips, const Schedule& sched,
                  model::TemporalMode mode, const flow::ValidityConfig& vcfg) {
    check_clips(clips, "train");
    if (sched.stage2_steps > 0 && disc == nullptr)
        throw config_error("train: stage 2 requires a discriminator");

    auto gparams = gen.parameters();
    for (auto& [name, t] : gparams) (void)name, t.set_requires_grad(true);
    model::NamedParams<T> dparams;
    if (disc != nullptr) {
        dparams = disc->parameters();
        for (auto& [name, t] : dparams) (void)name, t.set_requires_grad(true);
    }

    std::vector<model::FlowPyramid<T>> pyramids;
    const model::FlowPyramid<T> no_pyramid;
    if (mode == model::TemporalMode::aligned) {
        pyramids.reserve(clips.size());
        for (const auto& c : clips)
            pyramids.push_back(
                model::build_flow_pyramid(c.pair_fwd, c.pair_bwd, gen.config().pyramid_strides(), vcfg));
    }

    const losses::FeatureExtractor<T> ex;
    Adam<T> opt_g(gparams, sched.lr, sched.beta1, sched.beta2, sched.adam_eps);
    Adam<T> opt_d(disc != nullptr ? dparams : model::NamedParams<T>{}, sched.lr, sched.beta1,
                  sched.beta2, sched.adam_eps);

    TrainResult result;
    auto good = snapshot_values(gparams, dparams);
    const std::size_t total_steps = sched.stage1_steps + sched.stage2_steps;
    for (std::size_t step = 1; step <= total_steps; ++step) {
        const int stage = step <= sched.stage1_steps ? 1 : 2;
        const losses::LossWeights& weights = stage == 1 ? sched.stage1 : sched.stage2;
        const auto& clip = clips[(step - 1) % clips.size()];
        const auto& pyr =
            mode == model::TemporalMode::aligned ? pyramids[(step - 1) % clips.size()] : no_pyramid;
        try {
            if (stage == 2) {
                // Critic step on detached generator output.
                const auto fake = gen.forward(nullptr, clip.frames, clip.masks, pyr, mode);
                Tape td;
                const auto real_scores = disc->forward(&td, clip.frames);
                const auto fake_scores = disc->forward(&td, fake);
                auto d_loss = losses::adversarial_losses(&td, real_scores, fake_scores).first;
                if (!std::isfinite(static_cast<double>(d_loss.data()[0])))
                    throw numeric_error("critic loss is not finite");
                opt_d.zero_grad();
                backward(td, d_loss);
                opt_d.step();
            }

            Tape tg;
            const auto composite = gen.forward(&tg, clip.frames, clip.masks, pyr, mode);
            losses::LossParts<T> parts;
            parts.recon =
                losses::recon_loss(&tg, composite, clip.frames, clip.masks,
                                   static_cast<T>(weights.lambda_a), static_cast<T>(weights.lambda_c));
            const auto pred_taps = ex.features(&tg, composite);
            const auto gt_taps = ex.features(nullptr, clip.frames);
            parts.perceptual = losses::perceptual_from_taps(&tg, pred_taps, gt_taps);
            parts.style = losses::style_from_taps(&tg, pred_taps, gt_taps);
            if (stage == 2 && weights.lambda_g != 0) {
                const auto real_scores = disc->forward(nullptr, clip.frames);
                const auto fake_scores = disc->forward(&tg, composite);
                parts.adversarial =
                    losses::adversarial_losses(&tg, real_scores, fake_scores).second;
            }
            const auto total = losses::total_loss(&tg, parts, weights);

            const T rv = parts.recon.data()[0];
            const T pv = parts.perceptual.data()[0];
            const T sv = parts.style.data()[0];
            if (stage == 1) {
                // Mirrors total_loss element arithmetic exactly; any lambda_c or
                // lambda_g leakage into stage 1 shows up as an inequality here.
                const T expect = (rv + static_cast<T>(weights.lambda_p) * pv) +
                                 static_cast<T>(weights.lambda_s) * sv;
                if (total.data()[0] != expect)
                    throw numeric_error("stage-1 total departs from recon + perceptual + style");
            }

            opt_g.zero_grad();
            backward(tg, total);
            opt_g.step();

            CurveRow row;
            row.step = step;
            row.stage = stage;
            row.l_r = static_cast<double>(rv);
            row.l_p = static_cast<double>(pv);
            row.l_s = static_cast<double>(sv);
            row.l_g = parts.adversarial.defined()
                          ? static_cast<double>(parts.adversarial.data()[0])
                          : 0.0;
            row.total = static_cast<double>(total.data()[0]);
            result.curve.push_back(row);
            result.steps_done = step;
            good = snapshot_values(gparams, dparams);
        } catch (const numeric_error&) {
            restore_values(gparams, dparams, good);
            result.aborted = true;
            break;
        }
    }
    return result;
}

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& curve) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write loss curve to " + path);
    out << "step,stage,L_r,L_p,L_s,L_G,total\n";
    out << std::setprecision(10);
    for (const auto& r : curve)
        out << r.step << ',' << r.stage << ',' << r.l_r << ',' << r.l_p << ',' << r.l_s << ','
            << r.l_g << ',' << r.total << '\n';
    if (!out) throw config_error("write failed for " + path);
}

template <typename T>
EvalScores evaluate(const model::Generator<T>& gen,
                    const std::vector<synth::SyntheticClip<T>>& clips, model::TemporalMode mode,
                    const flow::ValidityConfig& vcfg) {
    check_clips(clips, "evaluate");
    EvalScores scores;
    std::size_t frame_count = 0;
    for (const auto& clip : clips) {
        model::FlowPyramid<T> pyr;
        if (mode == model::TemporalMode::aligned)
            pyr = model::build_flow_pyramid(clip.pair_fwd, clip.pair_bwd,
                                            gen.config().pyramid_strides(), vcfg);
        const auto composite = gen.forward(nullptr, clip.frames, clip.masks, pyr, mode);
        scores.psnr += metrics::psnr(composite, clip.frames, 2.0);
        scores.hole_l1 += metrics::hole_l1(composite, clip.frames, clip.masks);
        for (std::size_t t = 0; t < clip.frames.extent(0); ++t) {
            scores.ssim += metrics::ssim(frame_of(composite, t), frame_of(clip.frames, t));
            ++frame_count;
        }
    }
    scores.psnr /= static_cast<double>(clips.size());
    scores.hole_l1 /= static_cast<double>(clips.size());
    scores.ssim /= static_cast<double>(frame_count);
    return scores;
}

template <typename T>
synth::SyntheticClip<T> perturb_flows(const synth::SyntheticClip<T>& clip, double sigma,
                                      std::uint64_t seed) {
    if (sigma < 0) throw config_error("perturb_flows: sigma must be >= 0");
    synth::SyntheticClip<T> out = clip;
    Rng rng(seed);
    const auto h = static_cast<std::int64_t>(clip.frames.extent(2));
    const auto w = static_cast<std::int64_t>(clip.frames.extent(3));
    out.pair_fwd.clear();
    out.pair_bwd.clear();
    auto noisy = [&](const Tensor<T>& fl) {
        Tensor<T> copy(fl.shape(), fl.vec());
        const auto noise = flow::synth_noise_flow<T>(rng, h, w, static_cast<T>(sigma));
        for (std::size_t i = 0; i < copy.numel(); ++i) copy.data()[i] += noise.data()[i];
        return copy;
    };
    for (const auto& fl : clip.pair_fwd) out.pair_fwd.push_back(noisy(fl));
    for (const auto& fl : clip.pair_bwd) out.pair_bwd.push_back(noisy(fl));
    return out;
}

const char* alignment_name(Alignment a) {
    switch (a) {
    case Alignment::shift_only: return "shift_only";
    case Alignment::aligned_exact: return "aligned_exact";
    case Alignment::aligned_perturbed: return "aligned_perturbed";
    }
    return "?";
}

template <typename T>
std::vector<AblationRow> run_ablation(const std::vector<AblationArm>& arms,
                                      const std::vector<synth::MaskKind>& eval_masks,
                                      const AblationConfig& cfg) {
    if (arms.size() < 2) throw config_error("run_ablation: need at least two arms");
    if (eval_masks.empty()) throw config_error("run_ablation: need at least one mask kind");

    synth::DatasetSpec tspec;
    tspec.clips = cfg.train_clips;
    tspec.frames = cfg.frames;
    tspec.height = cfg.height;
    tspec.width = cfg.width;
    tspec.seed = cfg.seed;
    tspec.mask.kind = synth::MaskKind::object_like;
    tspec.mask.cover_lo = cfg.cover_lo;
    tspec.mask.cover_hi = cfg.cover_hi;
    tspec.motion_scale = cfg.motion_scale;
    std::vector<synth::SyntheticClip<T>> train_clips;
    for (std::size_t i = 0; i < cfg.train_clips; ++i)
        train_clips.push_back(synth::sample_clip<T>(tspec, i));

    // Held-out clips, one set per mask kind, masks static at evaluation.
    std::vector<std::vector<synth::SyntheticClip<T>>> eval_sets;
    for (std::size_t k = 0; k < eval_masks.size(); ++k) {
        synth::DatasetSpec espec = tspec;
        espec.clips = cfg.eval_clips;
        espec.seed = Rng(cfg.seed).fork(0xE7A1 + k).seed();
        espec.mask.kind = eval_masks[k];
        espec.mask.animate_prob = 0.0;
        std::vector<synth::SyntheticClip<T>> set;
        for (std::size_t i = 0; i < cfg.eval_clips; ++i)
            set.push_back(synth::sample_clip<T>(espec, i));
        eval_sets.push_back(std::move(set));
    }

    flow::ValidityConfig vc;
    vc.delta = cfg.delta;
    std::vector<AblationRow> rows;
    for (const auto& arm : arms) {
        // Shared initialization: arms must differ only in alignment.
        Rng init_rng = Rng(cfg.seed).fork(0x171);
        model::GeneratorConfig gc;
        gc.base_channels = cfg.base_channels;
        model::Generator<T> gen(gc, init_rng);

        auto clips_arm = train_clips;
        if (arm.alignment == Alignment::aligned_perturbed)
            for (std::size_t i = 0; i < clips_arm.size(); ++i)
                clips_arm[i] = perturb_flows(clips_arm[i], cfg.perturb_sigma,
                                             Rng(cfg.seed).fork(0xBAD0 + i).seed());
        const auto mode = arm.alignment == Alignment::shift_only
                              ? model::TemporalMode::shift_only
                              : model::TemporalMode::aligned;
        Schedule sched;
        sched.stage1_steps = cfg.steps;
        sched.lr = cfg.lr;
        sched.seed = cfg.seed;
        train<T>(gen, nullptr, clips_arm, sched, mode, vc);

        for (std::size_t k = 0; k < eval_masks.size(); ++k) {
            auto eclips = eval_sets[k];
            if (arm.alignment == Alignment::aligned_perturbed)
                for (std::size_t i = 0; i < eclips.size(); ++i)
                    eclips[i] = perturb_flows(eclips[i], cfg.perturb_sigma,
                                              Rng(cfg.seed).fork(0xEBAD + k * 97 + i).seed());
            const auto scores = evaluate(gen, eclips, mode, vc);
            AblationRow row;
            row.arm = arm.name;
            row.mask_kind = synth::mask_kind_name(eval_masks[k]);
            row.psnr = scores.psnr;
            row.ssim = scores.ssim;
            row.hole_l1 = scores.hole_l1;
            rows.push_back(std::move(row));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const AblationRow& a, const AblationRow& b) {
        return a.arm != b.arm ? a.arm < b.arm : a.mask_kind < b.mask_kind;
    });
    return rows;
}

void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write ablation table to " + path);
    out << "arm,mask,psnr,ssim,hole_l1\n";
    out << std::setprecision(10);
    for (const auto& r : rows)
        out << r.arm << ',' << r.mask_kind << ',' << r.psnr << ',' << r.ssim << ',' << r.hole_l1
            << '\n';
    if (!out) throw config_error("write failed for " + path);
}

#define VINPAINT_TRAINER_INSTANTIATE(T)                                                           \
    template class Adam<T>;                                                                       \
    template TrainResult train<T>(model::Generator<T>&, model::Discriminator<T>*,                 \
                                  const std::vector<synth::SyntheticClip<T>>&, const Schedule&,   \
                                  model::TemporalMode, const flow::ValidityConfig&);              \
    template EvalScores evaluate<T>(const model::Generator<T>&,                                   \
                                    const std::vector<synth::SyntheticClip<T>>&,                  \
                                    model::TemporalMode, const flow::ValidityConfig&);            \
    template synth::SyntheticClip<T> perturb_flows<T>(const synth::SyntheticClip<T>&, double,     \
                                                      std::uint64_t);                             \
    template std::vector<AblationRow> run_ablation<T>(const std::vector<AblationArm>&,            \
                                                      const std::vector<synth::MaskKind>&,        \
                                                      const AblationConfig&);

VINPAINT_TRAINER_INSTANTIATE(float)
VINPAINT_TRAINER_INSTANTIATE(double)

#undef VINPAINT_TRAINER_INSTANTIATE

} // namespace vinpaint::trainer
