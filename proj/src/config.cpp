#include "aif/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aif {

void RunConfig::validate() const {
    static const char* experiments[] = {"posner", "ctoa-sweep", "reach", "single-trial"};
    if (std::find(std::begin(experiments), std::end(experiments), experiment) == std::end(experiments))
        throw UsageError("unknown experiment: " + experiment);
    if (n_trials <= 0) throw UsageError("n must be positive");
    if (ctoa < 0) throw UsageError("ctoa must be non-negative");
    if (ctoas.empty()) throw UsageError("ctoas must not be empty");
    for (int c : ctoas)
        if (c < 0) throw UsageError("ctoas must be non-negative");
    if (cue != "endogenous" && cue != "exogenous" && cue != "both") throw UsageError("cue: endogenous|exogenous|both");
    if (validity != "valid" && validity != "invalid" && validity != "both")
        throw UsageError("validity: valid|invalid|both");
    if (mode != "top_down" && mode != "bottom_up" && mode != "both") throw UsageError("mode: top_down|bottom_up|both");
    if (task != "posner" && task != "reach" && task != "static") throw UsageError("task: posner|reach|static");
    if (!(eccentricity_px >= 0 && eccentricity_px <= kImageSize / 2.0))
        throw UsageError("eccentricity must lie inside the frame");
    if (static_steps <= 0) throw UsageError("static_steps must be positive");
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::vector<Param> params(RunConfig& rc) {
    AgentConfig& a = rc.model.agent;
    IntentionGains& g = a.gains;
    AttentionConfig& at = a.attention;
    BlobRendererConfig& r = rc.model.renderer;
    CameraModel& c = rc.model.camera;
    TaskConfig& t = rc.model.task;
    return {
        {"run.experiment", &rc.experiment},
        {"run.n", &rc.n_trials},
        {"run.seed", &rc.seed},
        {"run.ctoa", &rc.ctoa},
        {"run.ctoas", &rc.ctoas},
        {"run.cue", &rc.cue},
        {"run.validity", &rc.validity},
        {"run.mode", &rc.mode},
        {"run.task", &rc.task},
        {"run.eccentricity_px", &rc.eccentricity_px},
        {"run.angle", &rc.angle},
        {"run.static_steps", &rc.static_steps},
        {"run.static_fixed_precision", &rc.static_fixed_precision},
        {"run.trace", &rc.trace},
        {"model.visual_dim", &rc.model.visual_dim},
        {"agent.k_mu", &a.k_mu},
        {"agent.eta_cue", &a.eta_cue},
        {"agent.eta_proprio", &a.eta_proprio},
        {"agent.eta_vis_pos", &a.eta_vis_pos},
        {"agent.eta_presence", &a.eta_presence},
        {"agent.eta_latent", &a.eta_latent},
        {"agent.eta_amp", &a.eta_amp},
        {"agent.eta_focus", &a.eta_focus},
        {"agent.pimu_cue", &a.pimu_cue},
        {"agent.pimu_proprio", &a.pimu_proprio},
        {"agent.pimu_vis_pos", &a.pimu_vis_pos},
        {"agent.pimu_presence", &a.pimu_presence},
        {"agent.pimu_latent", &a.pimu_latent},
        {"agent.pimu_amp", &a.pimu_amp},
        {"agent.pimu_focus", &a.pimu_focus},
        {"agent.pi_cue", &a.pi_cue},
        {"agent.pi_proprio", &a.pi_proprio},
        {"agent.gamma_vis", &a.gamma_vis},
        {"agent.k_a", &a.k_a},
        {"agent.bu_gain", &a.bu_gain},
        {"agent.dt", &a.dt},
        {"agent.focus_error_sign", &a.focus_error_sign},
        {"agent.fixed_precision", &a.fixed_precision},
        {"intent.cue_focus", &g.cue_focus},
        {"intent.cue_visual", &g.cue_visual},
        {"intent.home", &g.home},
        {"intent.search", &g.search},
        {"intent.track", &g.track},
        {"intent.amp", &g.amp},
        {"intent.amp_prior", &g.amp_prior},
        {"intent.orient", &g.orient},
        {"attention.b", &at.b},
        {"attention.c", &at.c},
        {"attention.eps_ln", &at.eps_ln},
        {"attention.floor", &at.floor},
        {"attention.tau_mass", &at.tau_mass},
        {"renderer.blob_sigma", &r.blob_sigma},
        {"renderer.background_r", &r.background[0]},
        {"renderer.background_g", &r.background[1]},
        {"renderer.background_b", &r.background[2]},
        {"renderer.blob_r", &r.blob_color[0]},
        {"renderer.blob_g", &r.blob_color[1]},
        {"renderer.blob_b", &r.blob_color[2]},
        {"camera.focal", &c.focal},
        {"camera.pitch_limit", &c.pitch_limit},
        {"camera.yaw_limit", &c.yaw_limit},
        {"task.init_steps", &t.init_steps},
        {"task.cue_steps", &t.cue_steps},
        {"task.max_steps", &t.max_steps},
        {"task.det_radius", &t.det_radius},
        {"task.det_presence", &t.det_presence},
        {"task.reach_radius", &t.reach_radius},
        {"task.reach_dwell", &t.reach_dwell},
        {"task.ecc_min_px", &t.ecc_min_px},
        {"task.ecc_max_px", &t.ecc_max_px},
        {"task.precedence_radius", &t.precedence_radius},
    };
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw UsageError("bad value for " + key + ": '" + v + "'");
    return out;
}

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void set_param(RunConfig& rc, const std::string& key, const std::string& value) {
    for (auto& p : params(rc)) {
        if (p.key != key) continue;
        std::visit(
            [&](auto* ptr) {
                using T = std::remove_pointer_t<decltype(ptr)>;
                if constexpr (std::is_same_v<T, double>) {
                    *ptr = parse_number<double>(key, value);
                } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
                    *ptr = parse_number<T>(key, value);
                } else if constexpr (std::is_same_v<T, bool>) {
                    if (value == "true" || value == "1") *ptr = true;
                    else if (value == "false" || value == "0") *ptr = false;
                    else throw UsageError("bad value for " + key + ": '" + value + "'");
                } else if constexpr (std::is_same_v<T, std::string>) {
                    *ptr = value;
                } else {
                    std::vector<int> xs;
                    std::stringstream ss(value);
                    std::string tok;
                    while (std::getline(ss, tok, ',')) xs.push_back(parse_number<int>(key, trim(tok)));
                    if (xs.empty()) throw UsageError("empty list for " + key);
                    *ptr = std::move(xs);
                }
            },
            p.ref);
        return;
    }
    throw UsageError("unknown config key: " + key);
}

void apply_config_text(RunConfig& rc, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0, entries = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError(origin + ":" + std::to_string(lineno) + ": empty key");
        ++entries;
        if (key.rfind("meta.", 0) == 0) continue;
        try {
            set_param(rc, key, value);
        } catch (const UsageError& e) {
            throw UsageError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (entries == 0) throw UsageError(origin + ": no settings found");
}

void apply_config_file(RunConfig& rc, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    apply_config_text(rc, ss.str(), path);
}

std::string serialize(RunConfig rc) {
    std::ostringstream os;
    for (auto& p : params(rc)) {
        os << p.key << " = ";
        std::visit(
            [&](auto* ptr) {
                using T = std::remove_pointer_t<decltype(ptr)>;
                if constexpr (std::is_same_v<T, double>) os << fmt_double(*ptr);
                else if constexpr (std::is_same_v<T, bool>) os << (*ptr ? "true" : "false");
                else if constexpr (std::is_same_v<T, std::vector<int>>) {
                    for (std::size_t i = 0; i < ptr->size(); ++i) os << (i ? "," : "") << (*ptr)[i];
                } else os << *ptr;
            },
            p.ref);
        os << '\n';
    }
    return os.str();
}

}  // namespace aif
