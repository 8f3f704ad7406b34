#include "vinpaint/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace vinpaint::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty() || v[0] == '-')
        throw config_error("invalid value for " + key + ": " + v);
    return out;
}

double parse_f64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw config_error("invalid value for " + key + ": " + v);
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error("invalid value for " + key + ": " + v);
}

synth::MaskKind parse_mask_kind(const std::string& key, const std::string& v) {
    if (v == "object_like") return synth::MaskKind::object_like;
    if (v == "curve") return synth::MaskKind::curve;
    if (v == "stationary") return synth::MaskKind::stationary;
    throw config_error("invalid value for " + key + ": " + v);
}

model::TemporalMode parse_mode(const std::string& key, const std::string& v) {
    if (v == "aligned") return model::TemporalMode::aligned;
    if (v == "shift_only") return model::TemporalMode::shift_only;
    throw config_error("invalid value for " + key + ": " + v);
}

std::string fmt_f64(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

RunConfig parse_text(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error("malformed config line: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("malformed config line: " + line);
        if (!seen.insert(key).second) throw config_error("duplicate config key: " + key);

        if (key == "seed") cfg.seed = parse_u64(key, val);
        else if (key == "clips") cfg.clips = parse_u64(key, val);
        else if (key == "frames") cfg.frames = parse_u64(key, val);
        else if (key == "height") cfg.height = parse_u64(key, val);
        else if (key == "width") cfg.width = parse_u64(key, val);
        else if (key == "motion_scale") cfg.motion_scale = parse_f64(key, val);
        else if (key == "mask_kind") cfg.mask_kind = parse_mask_kind(key, val);
        else if (key == "cover_lo") cfg.cover_lo = parse_f64(key, val);
        else if (key == "cover_hi") cfg.cover_hi = parse_f64(key, val);
        else if (key == "step_sigma") cfg.step_sigma = parse_f64(key, val);
        else if (key == "animate_prob") cfg.animate_prob = parse_f64(key, val);
        else if (key == "delta") cfg.delta = parse_f64(key, val);
        else if (key == "soft_validity") cfg.soft_validity = parse_bool(key, val);
        else if (key == "soft_scale") cfg.soft_scale = parse_f64(key, val);
        else if (key == "base_channels") cfg.base_channels = static_cast<std::int64_t>(parse_u64(key, val));
        else if (key == "shift_fraction") cfg.shift_fraction = parse_f64(key, val);
        else if (key == "temporal_mode") cfg.temporal_mode = parse_mode(key, val);
        else if (key == "stage1_steps") cfg.stage1_steps = parse_u64(key, val);
        else if (key == "stage2_steps") cfg.stage2_steps = parse_u64(key, val);
        else if (key == "lr") cfg.lr = parse_f64(key, val);
        else if (key == "beta1") cfg.beta1 = parse_f64(key, val);
        else if (key == "beta2") cfg.beta2 = parse_f64(key, val);
        else if (key == "adam_eps") cfg.adam_eps = parse_f64(key, val);
        else if (key == "train_clips") cfg.train_clips = parse_u64(key, val);
        else if (key == "eval_clips") cfg.eval_clips = parse_u64(key, val);
        else if (key == "ablate_steps") cfg.ablate_steps = parse_u64(key, val);
        else if (key == "ablate_lr") cfg.ablate_lr = parse_f64(key, val);
        else if (key == "perturb_sigma") cfg.perturb_sigma = parse_f64(key, val);
        else if (key == "out_dir") cfg.out_dir = val;
        else throw config_error("unknown config key: " + key);
    }
    return cfg;
}

RunConfig parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

std::string render(const RunConfig& c) {
    std::ostringstream out;
    out << "seed = " << c.seed << '\n';
    out << "clips = " << c.clips << '\n';
    out << "frames = " << c.frames << '\n';
    out << "height = " << c.height << '\n';
    out << "width = " << c.width << '\n';
    out << "motion_scale = " << fmt_f64(c.motion_scale) << '\n';
    out << "mask_kind = " << synth::mask_kind_name(c.mask_kind) << '\n';
    out << "cover_lo = " << fmt_f64(c.cover_lo) << '\n';
    out << "cover_hi = " << fmt_f64(c.cover_hi) << '\n';
    out << "step_sigma = " << fmt_f64(c.step_sigma) << '\n';
    out << "animate_prob = " << fmt_f64(c.animate_prob) << '\n';
    out << "delta = " << fmt_f64(c.delta) << '\n';
    out << "soft_validity = " << (c.soft_validity ? "true" : "false") << '\n';
    out << "soft_scale = " << fmt_f64(c.soft_scale) << '\n';
    out << "base_channels = " << c.base_channels << '\n';
    out << "shift_fraction = " << fmt_f64(c.shift_fraction) << '\n';
    out << "temporal_mode = "
        << (c.temporal_mode == model::TemporalMode::aligned ? "aligned" : "shift_only") << '\n';
    out << "stage1_steps = " << c.stage1_steps << '\n';
    out << "stage2_steps = " << c.stage2_steps << '\n';
    out << "lr = " << fmt_f64(c.lr) << '\n';
    out << "beta1 = " << fmt_f64(c.beta1) << '\n';
    out << "beta2 = " << fmt_f64(c.beta2) << '\n';
    out << "adam_eps = " << fmt_f64(c.adam_eps) << '\n';
    out << "train_clips = " << c.train_clips << '\n';
    out << "eval_clips = " << c.eval_clips << '\n';
    out << "ablate_steps = " << c.ablate_steps << '\n';
    out << "ablate_lr = " << fmt_f64(c.ablate_lr) << '\n';
    out << "perturb_sigma = " << fmt_f64(c.perturb_sigma) << '\n';
    out << "out_dir = " << c.out_dir << '\n';
    return out.str();
}

void write_file(const std::string& path, const RunConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write config file " + path);
    out << render(cfg);
    if (!out) throw config_error("write failed for " + path);
}

synth::DatasetSpec dataset_spec(const RunConfig& c) {
    synth::DatasetSpec spec;
    spec.clips = c.clips;
    spec.frames = c.frames;
    spec.height = c.height;
    spec.width = c.width;
    spec.seed = c.seed;
    spec.mask.kind = c.mask_kind;
    spec.mask.cover_lo = c.cover_lo;
    spec.mask.cover_hi = c.cover_hi;
    spec.mask.step_sigma = c.step_sigma;
    spec.mask.animate_prob = c.animate_prob;
    return spec;
}

flow::ValidityConfig validity_config(const RunConfig& c) {
    flow::ValidityConfig v;
    v.delta = c.delta;
    v.soft = c.soft_validity;
    v.soft_scale = c.soft_scale;
    return v;
}

model::GeneratorConfig generator_config(const RunConfig& c) {
    model::GeneratorConfig g;
    g.base_channels = c.base_channels;
    g.shift_fraction = c.shift_fraction;
    return g;
}

trainer::Schedule schedule(const RunConfig& c) {
    trainer::Schedule s;
    s.stage1_steps = c.stage1_steps;
    s.stage2_steps = c.stage2_steps;
    s.lr = c.lr;
    s.beta1 = c.beta1;
    s.beta2 = c.beta2;
    s.adam_eps = c.adam_eps;
    s.seed = c.seed;
    return s;
}

trainer::AblationConfig ablation_config(const RunConfig& c) {
    trainer::AblationConfig a;
    a.seed = c.seed;
    a.train_clips = c.train_clips;
    a.eval_clips = c.eval_clips;
    a.frames = c.frames;
    a.height = c.height;
    a.width = c.width;
    a.steps = c.ablate_steps;
    a.lr = c.ablate_lr;
    a.perturb_sigma = c.perturb_sigma;
    a.base_channels = c.base_channels;
    a.delta = c.delta;
    return a;
}

} // namespace vinpaint::config
