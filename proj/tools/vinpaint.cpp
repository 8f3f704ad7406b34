#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vinpaint/config.hpp"
#include "vinpaint/imageio.hpp"
#include "vinpaint/metrics.hpp"

namespace fs = std::filesystem;
using namespace vinpaint;

namespace {

// Fixed init streams so `train` and a params-less `inpaint` start from the
// same weights for a given seed.
constexpr std::uint64_t kGenStream = 0x9001;
constexpr std::uint64_t kDiscStream = 0xd15c;

config::RunConfig load_cfg(const std::string& path) {
    return path.empty() ? config::RunConfig{} : config::parse_file(path);
}

std::string clip_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "clip_%03zu", i);
    return buf;
}

std::vector<fs::path> clip_dirs(const std::string& dir) {
    if (!fs::is_directory(dir)) throw config_error("not a directory: " + dir);
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && e.path().filename().string().rfind("clip_", 0) == 0)
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw config_error("no clip_* directories under " + dir);
    return out;
}

Tensor<float> frame_of(const Tensor<float>& clip, std::size_t t) {
    const std::size_t c = clip.extent(1), h = clip.extent(2), w = clip.extent(3);
    const float* p = clip.data() + t * c * h * w;
    return Tensor<float>(Shape{c, h, w}, std::vector<float>(p, p + c * h * w));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

model::Generator<float> make_generator(const config::RunConfig& cfg) {
    Rng rng = Rng(cfg.seed).fork(kGenStream);
    return model::Generator<float>(config::generator_config(cfg), rng);
}

void save_generator(const std::string& dir, model::Generator<float>& gen,
                    const config::RunConfig& cfg) {
    model::save_params(dir, gen.parameters(),
                       {{"base_channels", std::to_string(cfg.base_channels)},
                        {"shift_fraction", fmt(cfg.shift_fraction)}});
}

void load_generator(const std::string& dir, model::Generator<float>& gen,
                    const config::RunConfig& cfg) {
    for (const auto& [k, v] : model::read_meta(dir)) {
        if (k == "base_channels" && v != std::to_string(cfg.base_channels))
            throw config_error("checkpoint trained with base_channels=" + v +
                               " but config says " + std::to_string(cfg.base_channels));
        if (k == "shift_fraction" && v != fmt(cfg.shift_fraction))
            throw config_error("checkpoint trained with shift_fraction=" + v +
                               " but config says " + fmt(cfg.shift_fraction));
    }
    auto params = gen.parameters();
    model::load_params(dir, params);
}

model::FlowPyramid<float> pyramid_for(const synth::SyntheticClip<float>& clip,
                                      const model::Generator<float>& gen,
                                      const config::RunConfig& cfg) {
    if (cfg.temporal_mode != model::TemporalMode::aligned) return {};
    return model::build_flow_pyramid(clip.pair_fwd, clip.pair_bwd, gen.config().pyramid_strides(),
                                     config::validity_config(cfg));
}

int cmd_gen_data(const std::string& cfg_path, std::string out) {
    const auto cfg = load_cfg(cfg_path);
    if (out.empty()) out = cfg.out_dir;
    const auto spec = config::dataset_spec(cfg);
    fs::create_directories(out);
    for (std::size_t i = 0; i < cfg.clips; ++i) {
        const auto clip = synth::sample_clip<float>(spec, i);
        synth::save_clip(out + "/" + clip_name(i), clip);
    }
    config::write_file(out + "/config.resolved.txt", cfg);
    std::cout << "wrote " << cfg.clips << " clips under " << out << "\n";
    return 0;
}

int cmd_flow_validity(const std::string& fwd_path, const std::string& bwd_path, double delta,
                      const std::string& out) {
    const auto fwd = load_tsr<float>(fwd_path);
    const auto bwd = load_tsr<float>(bwd_path);
    flow::ValidityConfig vc;
    vc.delta = delta;
    const auto mask = flow::cycle_validity(fwd, bwd, vc);
    if (const auto parent = fs::path(out).parent_path(); !parent.empty())
        fs::create_directories(parent);
    save_tsr(out + ".tsr", mask);
    imageio::save_pgm(out + ".pgm", mask);
    std::cout << "wrote " << out << ".tsr and " << out << ".pgm\n";
    return 0;
}

int cmd_train(const std::string& cfg_path, const std::string& data, std::string out) {
    const auto cfg = load_cfg(cfg_path);
    if (out.empty()) out = cfg.out_dir;
    std::vector<synth::SyntheticClip<float>> clips;
    for (const auto& d : clip_dirs(data)) clips.push_back(synth::load_clip<float>(d.string()));

    auto gen = make_generator(cfg);
    std::optional<model::Discriminator<float>> disc;
    if (cfg.stage2_steps > 0) {
        Rng drng = Rng(cfg.seed).fork(kDiscStream);
        disc.emplace(drng, cfg.base_channels);
    }
    const auto res = trainer::train(gen, disc ? &*disc : nullptr, clips, config::schedule(cfg),
                                    cfg.temporal_mode, config::validity_config(cfg));

    fs::create_directories(out);
    trainer::write_curve_csv(out + "/curve.csv", res.curve);
    save_generator(out + "/generator", gen, cfg);
    if (disc) model::save_params(out + "/discriminator", disc->parameters(), {});
    config::write_file(out + "/config.resolved.txt", cfg);
    if (res.aborted)
        throw numeric_error("training hit a non-finite loss after " +
                            std::to_string(res.steps_done) +
                            " steps; last good parameters are saved under " + out);
    std::cout << "trained " << res.steps_done << " steps; artifacts under " << out << "\n";
    return 0;
}

int cmd_ablate(const std::string& cfg_path, std::string out) {
    const auto cfg = load_cfg(cfg_path);
    if (out.empty()) out = cfg.out_dir;
    const std::vector<trainer::AblationArm> arms{
        {"shift_only", trainer::Alignment::shift_only},
        {"aligned_exact", trainer::Alignment::aligned_exact},
        {"aligned_perturbed", trainer::Alignment::aligned_perturbed},
    };
    const std::vector<synth::MaskKind> masks{synth::MaskKind::object_like, synth::MaskKind::curve,
                                             synth::MaskKind::stationary};
    const auto rows = trainer::run_ablation<float>(arms, masks, config::ablation_config(cfg));
    fs::create_directories(out);
    trainer::write_ablation_csv(out + "/ablation.csv", rows);
    config::write_file(out + "/config.resolved.txt", cfg);
    std::cout << "wrote " << rows.size() << " rows to " << out << "/ablation.csv\n";
    return 0;
}

int cmd_inpaint(const std::string& cfg_path, const std::string& data, const std::string& params,
                std::string out) {
    const auto cfg = load_cfg(cfg_path);
    if (out.empty()) out = cfg.out_dir;
    const auto clip = synth::load_clip<float>(data);
    auto gen = make_generator(cfg);
    if (!params.empty()) load_generator(params, gen, cfg);
    const auto pyr = pyramid_for(clip, gen, cfg);
    const auto comp = gen.forward(nullptr, clip.frames, clip.masks, pyr, cfg.temporal_mode);

    fs::create_directories(out);
    save_tsr(out + "/composite.tsr", comp);
    const std::size_t t = comp.extent(0);
    for (std::size_t i = 0; i < t; ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "/frame_%03zu.ppm", i);
        imageio::save_ppm(out + name, frame_of(comp, i));
        std::snprintf(name, sizeof name, "/input_%03zu.ppm", i);
        imageio::save_ppm(out + name, frame_of(clip.frames, i));
        std::snprintf(name, sizeof name, "/mask_%03zu.pgm", i);
        imageio::save_pgm(out + name, frame_of(clip.masks, i));
    }
    config::write_file(out + "/config.resolved.txt", cfg);
    std::cout << "inpainted " << t << " frames into " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& cfg_path, const std::string& data, std::string pred,
             const std::string& out) {
    if (pred.empty()) pred = data;
    // Prefer the label the dataset was generated with.
    config::RunConfig cfg;
    if (fs::exists(fs::path(data) / "config.resolved.txt"))
        cfg = config::parse_file((fs::path(data) / "config.resolved.txt").string());
    else
        cfg = load_cfg(cfg_path);

    const losses::FeatureExtractor<float> ex;
    double psnr_sum = 0, ssim_sum = 0;
    std::size_t ssim_n = 0;
    std::vector<std::vector<double>> real_embeds, pred_embeds;
    const auto dirs = clip_dirs(data);
    for (const auto& d : dirs) {
        const auto gt = synth::load_clip<float>(d.string());
        const fs::path pdir = fs::path(pred) / d.filename();
        fs::path ptensor = pdir / "composite.tsr";
        if (!fs::exists(ptensor)) ptensor = pdir / "frames.tsr";
        if (!fs::exists(ptensor))
            throw config_error("no composite.tsr or frames.tsr under " + pdir.string());
        const auto pr = load_tsr<float>(ptensor.string());
        if (pr.shape() != gt.frames.shape())
            throw dim_error("prediction for " + d.filename().string() +
                            " does not match the clip: " + shape_str(pr.shape()) + " vs " +
                            shape_str(gt.frames.shape()));
        psnr_sum += std::min(100.0, metrics::psnr(pr, gt.frames, 2.0));
        for (std::size_t i = 0; i < gt.frames.extent(0); ++i) {
            ssim_sum += metrics::ssim(frame_of(pr, i), frame_of(gt.frames, i));
            ++ssim_n;
        }
        if (dirs.size() >= 2) {
            real_embeds.push_back(metrics::video_embed(ex, gt.frames));
            pred_embeds.push_back(metrics::video_embed(ex, pr));
        } else {
            real_embeds = metrics::frame_embeds(ex, gt.frames);
            pred_embeds = metrics::frame_embeds(ex, pr);
        }
    }
    // Embedding dim far exceeds the sample count, so the covariances are
    // rank-deficient and the matrix root is noise-dominated near zero; a small
    // diagonal ridge on both sides keeps the distance stable (and still exactly
    // zero for identical inputs) at negligible bias.
    auto lite_stats = [](const std::vector<std::vector<double>>& s) {
        auto st = metrics::fid_stats(s);
        const std::size_t d = st.dim();
        for (std::size_t i = 0; i < d; ++i) st.sigma[i * d + i] += 1e-5;
        return st;
    };
    const double vfid = std::max(0.0, metrics::fid(lite_stats(real_embeds), lite_stats(pred_embeds)));

    std::string report = "mask,psnr,ssim,vfid\n";
    report += std::string(synth::mask_kind_name(cfg.mask_kind)) + "," +
              fmt(psnr_sum / static_cast<double>(dirs.size())) + "," +
              fmt(ssim_sum / static_cast<double>(ssim_n)) + "," + fmt(vfid) + "\n";
    std::cout << report;
    if (!out.empty()) {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw config_error("cannot write report to " + out);
        f << report;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flow-guided video inpainting toolkit"};
    app.require_subcommand(1);

    std::string cfg_path, data, params, pred, out, fwd_path, bwd_path;
    double delta = 1.0;

    auto* gen_data = app.add_subcommand("gen-data", "render synthetic clips with flows and masks");
    gen_data->add_option("--config", cfg_path, "key=value config file");
    gen_data->add_option("--out", out, "output directory (default: out_dir from config)");

    auto* fv = app.add_subcommand("flow-validity", "cycle-consistency mask for a flow pair");
    fv->add_option("--fwd", fwd_path, "forward flow TSR1 [H,W,2]")->required();
    fv->add_option("--bwd", bwd_path, "backward flow TSR1 [H,W,2]")->required();
    fv->add_option("--delta", delta, "round-trip tolerance in pixels");
    fv->add_option("--out", out, "output stem; writes <stem>.tsr and <stem>.pgm")->required();

    auto* train = app.add_subcommand("train", "train the inpainting generator on a dataset");
    train->add_option("--config", cfg_path, "key=value config file");
    train->add_option("--data", data, "dataset directory from gen-data")->required();
    train->add_option("--out", out, "output directory (default: out_dir from config)");

    auto* ablate = app.add_subcommand("ablate", "compare alignment variants on shared data");
    ablate->add_option("--config", cfg_path, "key=value config file");
    ablate->add_option("--out", out, "output directory (default: out_dir from config)");

    auto* inpaint = app.add_subcommand("inpaint", "composite one clip through the generator");
    inpaint->add_option("--config", cfg_path, "key=value config file");
    inpaint->add_option("--data", data, "one clip directory")->required();
    inpaint->add_option("--params", params, "generator checkpoint from train (optional)");
    inpaint->add_option("--out", out, "output directory (default: out_dir from config)");

    auto* eval = app.add_subcommand("eval", "score predictions against ground-truth clips");
    eval->add_option("--config", cfg_path, "key=value config file");
    eval->add_option("--data", data, "dataset directory from gen-data")->required();
    eval->add_option("--pred", pred, "directory of per-clip predictions (default: --data)");
    eval->add_option("--out", out, "also write the report to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen_data->parsed()) return cmd_gen_data(cfg_path, out);
        if (fv->parsed()) return cmd_flow_validity(fwd_path, bwd_path, delta, out);
        if (train->parsed()) return cmd_train(cfg_path, data, out);
        if (ablate->parsed()) return cmd_ablate(cfg_path, out);
        if (inpaint->parsed()) return cmd_inpaint(cfg_path, data, params, out);
        if (eval->parsed()) return cmd_eval(cfg_path, data, pred, out);
    } catch (const numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
