#include "aif/tasks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace aif {

void TaskConfig::validate() const {
    if (init_steps < 0 || cue_steps < 0 || max_steps <= 0) throw std::invalid_argument("task: bad phase lengths");
    if (!(det_radius > 0 && reach_radius > 0 && precedence_radius > 0))
        throw std::invalid_argument("task: radii must be positive");
    if (reach_dwell <= 0) throw std::invalid_argument("task: reach_dwell must be positive");
    if (!(ecc_min_px >= 0 && ecc_max_px >= ecc_min_px && ecc_max_px <= kImageSize / 2.0))
        throw std::invalid_argument("task: eccentricity range must lie inside the frame");
}

void ModelConfig::validate() const {
    agent.validate();
    renderer.validate();
    camera.validate();
    task.validate();
    if (visual_dim < 3 || visual_dim > 8) throw std::invalid_argument("visual_dim must lie in [3, 8]");
}

const char* to_string(CueType c) { return c == CueType::endogenous ? "endogenous" : "exogenous"; }
const char* to_string(Validity v) { return v == Validity::valid ? "valid" : "invalid"; }

Geometry draw_geometry(std::uint64_t seed, const TaskConfig& t) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ecc(t.ecc_min_px, t.ecc_max_px);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    Geometry g;
    g.eccentricity_px = ecc(rng);
    g.angle = ang(rng);
    return g;
}

std::array<double, 2> image_position(double ecc_px, double angle) {
    const double r = ecc_px * kPixelWidth;
    return {r * std::cos(angle), r * std::sin(angle)};
}

namespace {

double dist(double a0, double a1, double b0, double b1) { return std::hypot(a0 - b0, a1 - b1); }

Agent make_agent(const ModelConfig& cfg, std::vector<Intention> intents, ActionMode mode) {
    AgentConfig ac = cfg.agent;
    ac.action_mode = mode;
    return Agent(ac, std::move(intents), std::make_shared<BlobRenderer>(cfg.renderer), BeliefLayout(cfg.visual_dim));
}

}  // namespace

TrialRecord run_posner_trial(const PosnerTrialSpec& spec, const ModelConfig& cfg, bool keep_trace) {
    const BeliefLayout L(cfg.visual_dim);
    Agent agent = make_agent(cfg, make_posner_intentions(L, cfg.agent.gains), ActionMode::disabled);
    const TaskConfig& T = cfg.task;

    TrialRecord rec;
    rec.experiment = "posner";
    rec.condition = to_string(spec.cue_type);
    rec.validity = to_string(spec.validity);
    rec.ctoa = spec.ctoa;
    rec.eccentricity_px = spec.eccentricity_px;
    rec.angle = spec.angle;
    rec.seed = spec.seed;

    const auto cue = image_position(spec.eccentricity_px, spec.angle);
    const std::array<double, 2> tgt =
        spec.validity == Validity::valid ? cue : std::array<double, 2>{-cue[0], -cue[1]};

    SceneState scene;
    int t = 0;
    auto tick = [&]() {
        SensoryBundle s = observe(scene, cfg.camera, cfg.renderer);
        StepTrace tr = agent.step(s, cfg.camera);
        ++t;
        const auto& mu = agent.belief().mu;
        if (rec.focus_first < 0 && dist(mu[L.foc_u()], mu[L.foc_v()], cue[0], cue[1]) < T.precedence_radius)
            rec.focus_first = t;
        if (rec.belief_first < 0 && dist(mu[L.vis_u()], mu[L.vis_v()], cue[0], cue[1]) < T.precedence_radius)
            rec.belief_first = t;
        if (keep_trace) rec.trace.push_back(std::move(tr));
    };

    for (int k = 0; k < T.init_steps; ++k) tick();

    if (spec.cue_type == CueType::endogenous) {
        scene.cue_pos = cue;
    } else {
        scene.target_dir = direction_for(cue[0], cue[1], cfg.camera);
        scene.target_visible = true;
    }
    for (int k = 0; k < T.cue_steps; ++k) tick();

    scene = SceneState{};
    for (int k = 0; k < spec.ctoa; ++k) tick();

    scene.target_dir = direction_for(tgt[0], tgt[1], cfg.camera);
    scene.target_visible = true;
    for (int k = 0; k < T.max_steps; ++k) {
        tick();
        const auto& mu = agent.belief().mu;
        if (dist(mu[L.vis_u()], mu[L.vis_v()], tgt[0], tgt[1]) < T.det_radius && mu[L.presence()] > T.det_presence) {
            rec.detected = true;
            rec.rt = k + 1;
            break;
        }
    }
    return rec;
}

TrialRecord run_reach_trial(const ReachTrialSpec& spec, const ModelConfig& cfg, bool keep_trace) {
    if (spec.mode == ActionMode::disabled) throw std::invalid_argument("reach trial needs an action mode");
    const BeliefLayout L(cfg.visual_dim);
    Agent agent = make_agent(cfg, make_reach_intentions(L, cfg.agent.gains, cfg.camera), spec.mode);
    const TaskConfig& T = cfg.task;

    TrialRecord rec;
    rec.experiment = "reach";
    rec.condition = to_string(spec.mode);
    rec.validity = "-";
    rec.eccentricity_px = spec.eccentricity_px;
    rec.angle = spec.angle;
    rec.seed = spec.seed;

    SceneState scene;
    auto tick = [&]() {
        SensoryBundle s = observe(scene, cfg.camera, cfg.renderer);
        StepTrace tr = agent.step(s, cfg.camera);
        scene = apply_action(scene, tr.action, cfg.camera, cfg.agent.dt).state;
        if (keep_trace) rec.trace.push_back(std::move(tr));
    };
    for (int k = 0; k < T.init_steps; ++k) tick();

    const auto pos = image_position(spec.eccentricity_px, spec.angle);
    scene.target_dir = direction_for(pos[0], pos[1], cfg.camera);
    // the init phase may have nudged the camera; the target is placed relative to the world
    scene.target_visible = true;
    int dwell = 0;
    for (int k = 0; k < T.max_steps; ++k) {
        const auto uv = project(scene, cfg.camera);
        dwell = std::hypot(uv[0], uv[1]) < T.reach_radius ? dwell + 1 : 0;
        if (dwell >= T.reach_dwell) {
            rec.detected = true;
            rec.rt = k + 1;
            break;
        }
        tick();
    }
    return rec;
}

TrialRecord run_static_trial(double ecc_px, double angle, std::uint64_t seed, int steps, const ModelConfig& cfg) {
    const BeliefLayout L(cfg.visual_dim);
    Agent agent = make_agent(cfg, make_posner_intentions(L, cfg.agent.gains), ActionMode::disabled);
    TrialRecord rec;
    rec.experiment = "static";
    rec.condition = "perception";
    rec.validity = "-";
    rec.eccentricity_px = ecc_px;
    rec.angle = angle;
    rec.seed = seed;
    const auto pos = image_position(ecc_px, angle);
    SceneState scene;
    scene.target_dir = direction_for(pos[0], pos[1], cfg.camera);
    scene.target_visible = true;
    const SensoryBundle s = observe(scene, cfg.camera, cfg.renderer);
    for (int k = 0; k < steps; ++k) {
        rec.trace.push_back(agent.step(s, cfg.camera));
        const auto& mu = agent.belief().mu;
        if (!rec.detected && std::hypot(mu[L.vis_u()] - pos[0], mu[L.vis_v()] - pos[1]) < cfg.task.det_radius &&
            mu[L.presence()] > cfg.task.det_presence) {
            rec.detected = true;
            rec.rt = k + 1;
        }
    }
    return rec;
}

namespace {
template <class Spec, class Fn>
std::vector<TrialRecord> run_parallel(const std::vector<Spec>& specs, int jobs, Fn fn) {
    std::vector<TrialRecord> out(specs.size());
    if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(1, specs.size())));
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (std::size_t i; !failed && (i = next.fetch_add(1)) < specs.size();) {
            try {
                out[i] = fn(specs[i]);
            } catch (...) {
                if (!failed.exchange(true)) err = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);
    return out;
}
}  // namespace

std::vector<TrialRecord> run_posner_batch(const std::vector<PosnerTrialSpec>& specs, const ModelConfig& cfg, int jobs) {
    return run_parallel(specs, jobs, [&](const PosnerTrialSpec& s) { return run_posner_trial(s, cfg); });
}

std::vector<TrialRecord> run_reach_batch(const std::vector<ReachTrialSpec>& specs, const ModelConfig& cfg, int jobs) {
    return run_parallel(specs, jobs, [&](const ReachTrialSpec& s) { return run_reach_trial(s, cfg); });
}

std::vector<PosnerTrialSpec> posner_specs(const std::vector<PosnerVariant>& variants, int ctoa, int n,
                                          std::uint64_t base_seed, const TaskConfig& t) {
    std::vector<PosnerTrialSpec> out;
    for (const auto& v : variants) {
        for (int i = 0; i < n; ++i) {
            const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
            const Geometry g = draw_geometry(seed, t);
            out.push_back({v.cue_type, v.validity, ctoa, g.eccentricity_px, g.angle, seed});
        }
    }
    return out;
}

std::vector<ReachTrialSpec> reach_specs(const std::vector<ActionMode>& modes, int n, std::uint64_t base_seed,
                                        const TaskConfig& t) {
    std::vector<ReachTrialSpec> out;
    for (ActionMode m : modes) {
        for (int i = 0; i < n; ++i) {
            const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
            const Geometry g = draw_geometry(seed, t);
            out.push_back({m, g.eccentricity_px, g.angle, seed});
        }
    }
    return out;
}

double mean(const std::vector<double>& x) {
    if (x.empty()) return std::nan("");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median(std::vector<double> x) {
    if (x.empty()) return std::nan("");
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double stddev(const std::vector<double>& x) {
    if (x.size() < 2) return x.empty() ? std::nan("") : 0.0;
    const double m = mean(x);
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

namespace {
std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return std::nan("");
    return sxy / std::sqrt(sxx * syy);
}
}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
    if (x.size() < 2) return std::nan("");
    return pearson(ranks(x), ranks(y));
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("ols_slope: length mismatch");
    if (x.size() < 2) return std::nan("");
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx == 0 ? std::nan("") : sxy / sxx;
}

double sign_test_p(int wins, int losses) {
    const int n = wins + losses;
    if (n == 0) return 1.0;
    double p = 0;
    for (int k = wins; k <= n; ++k)
        p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
    return std::min(1.0, p);
}

Stats summarize(const std::vector<TrialRecord>& records) {
    if (records.empty()) throw std::invalid_argument("summarize: empty batch");
    Stats st;
    st.n = static_cast<int>(records.size());
    std::vector<double> rt, ecc;
    for (const auto& r : records) {
        if (!r.detected) continue;
        rt.push_back(r.rt);
        ecc.push_back(r.eccentricity_px);
        st.series.emplace_back(r.eccentricity_px, r.rt);
    }
    st.detected = static_cast<int>(rt.size());
    st.timeout_rate = 1.0 - static_cast<double>(st.detected) / st.n;
    st.mean = mean(rt);
    st.median = median(rt);
    st.stddev = stddev(rt);
    st.spearman = rt.size() >= 2 ? spearman(ecc, rt) : std::nan("");
    st.slope = rt.size() >= 2 ? ols_slope(ecc, rt) : std::nan("");
    return st;
}

std::optional<int> find_crossover(const std::vector<int>& ctoas, const std::vector<double>& valid_mean,
                                  const std::vector<double>& invalid_mean) {
    bool valid_ahead = false;
    for (std::size_t i = 0; i < ctoas.size(); ++i) {
        if (valid_mean[i] < invalid_mean[i]) valid_ahead = true;
        else if (valid_ahead && invalid_mean[i] < valid_mean[i]) return ctoas[i];
    }
    return std::nullopt;
}

SweepTable run_ctoa_sweep(const std::vector<PosnerVariant>& variants, const std::vector<int>& ctoas, int n_per_cell,
                          std::uint64_t base_seed, const ModelConfig& cfg, int jobs,
                          std::vector<TrialRecord>* records) {
    SweepTable table;
    for (int c : ctoas) {
        auto specs = posner_specs(variants, c, n_per_cell, base_seed, cfg.task);
        auto recs = run_posner_batch(specs, cfg, jobs);
        for (std::size_t v = 0; v < variants.size(); ++v) {
            std::vector<TrialRecord> cell(recs.begin() + v * n_per_cell, recs.begin() + (v + 1) * n_per_cell);
            table.cells.push_back({variants[v], c, summarize(cell)});
        }
        if (records) records->insert(records->end(), recs.begin(), recs.end());
    }
    for (CueType ct : {CueType::endogenous, CueType::exogenous}) {
        std::vector<double> vm, im;
        for (int c : ctoas) {
            double a = std::nan(""), b = std::nan("");
            for (const auto& cell : table.cells) {
                if (cell.ctoa != c || cell.variant.cue_type != ct) continue;
                (cell.variant.validity == Validity::valid ? a : b) = cell.stats.mean;
            }
            vm.push_back(a);
            im.push_back(b);
        }
        auto x = find_crossover(ctoas, vm, im);
        (ct == CueType::endogenous ? table.crossover_endogenous : table.crossover_exogenous) = x;
    }
    return table;
}

}  // namespace aif
