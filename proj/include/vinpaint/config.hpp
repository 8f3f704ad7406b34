#pragma once

#include <cstdint>
#include <string>

#include "vinpaint/flow.hpp"
#include "vinpaint/model.hpp"
#include "vinpaint/synth.hpp"
#include "vinpaint/trainer.hpp"

namespace vinpaint::config {

/// Every knob a command can consume, with working defaults. Parsed from a
/// plain-text key=value file; unknown and duplicate keys are rejected so a
/// typo can never silently fall back to a default.
struct RunConfig {
    std::uint64_t seed = 1;

    // dataset shape
    std::size_t clips = 4;
    std::size_t frames = 8;
    std::size_t height = 64;
    std::size_t width = 64;
    double motion_scale = 1.0;

    // corruption masks
    synth::MaskKind mask_kind = synth::MaskKind::object_like;
    double cover_lo = 0.0;
    double cover_hi = 0.7;
    double step_sigma = 2.0;
    double animate_prob = 0.5;

    // flow validity
    double delta = 1.0;
    bool soft_validity = false;
    double soft_scale = 1.0;

    // model
    std::int64_t base_channels = 16;
    double shift_fraction = 0.125;
    model::TemporalMode temporal_mode = model::TemporalMode::aligned;

    // training schedule
    std::size_t stage1_steps = 200;
    std::size_t stage2_steps = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    // ablation harness
    std::size_t train_clips = 3;
    std::size_t eval_clips = 2;
    std::size_t ablate_steps = 150;
    double ablate_lr = 2e-3;
    double perturb_sigma = 0.6;

    std::string out_dir = "out";
};

/// Parses key=value text ('#' comments, blank lines allowed). Throws
/// config_error naming the offending key on unknown keys, duplicates, or
/// unparseable values.
RunConfig parse_text(const std::string& text);
RunConfig parse_file(const std::string& path);

/// Canonical rendering: every key in a fixed order, full float precision.
/// parse_text(render(c)) reproduces c, and render is byte-stable.
std::string render(const RunConfig& cfg);
void write_file(const std::string& path, const RunConfig& cfg);

// Views of the config in each module's own vocabulary.
synth::DatasetSpec dataset_spec(const RunConfig& cfg);
flow::ValidityConfig validity_config(const RunConfig& cfg);
model::GeneratorConfig generator_config(const RunConfig& cfg);
trainer::Schedule schedule(const RunConfig& cfg);
trainer::AblationConfig ablation_config(const RunConfig& cfg);

} // namespace vinpaint::config
