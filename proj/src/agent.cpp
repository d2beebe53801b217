#include "aif/agent.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "aif/kernels.hpp"

namespace aif {

double Intention::target_value(const Row& r, std::span<const double> mu) const {
    double h = r.offset;
    for (auto& [j, c] : r.coef) h += c * mu[j];
    return h;
}

const char* to_string(ActionMode m) {
    switch (m) {
        case ActionMode::disabled: return "disabled";
        case ActionMode::top_down: return "top_down";
        case ActionMode::bottom_up: return "bottom_up";
        case ActionMode::both: return "both";
    }
    return "?";
}

ActionMode action_mode_from(const std::string& s) {
    if (s == "disabled") return ActionMode::disabled;
    if (s == "top_down") return ActionMode::top_down;
    if (s == "bottom_up") return ActionMode::bottom_up;
    if (s == "both") return ActionMode::both;
    throw std::invalid_argument("unknown action mode: " + s);
}

void AgentConfig::validate() const {
    const double pos[] = {k_mu, eta_cue, eta_proprio, eta_vis_pos, eta_presence, eta_latent, eta_amp, eta_focus,
                          pimu_cue, pimu_proprio, pimu_vis_pos, pimu_presence, pimu_latent, pimu_amp, pimu_focus,
                          pi_cue, pi_proprio, gamma_vis, k_a, dt};
    for (double x : pos)
        if (!(x > 0) || !std::isfinite(x)) throw std::invalid_argument("agent: rates, precisions and dt must be positive");
    if (!(bu_gain >= 0)) throw std::invalid_argument("agent: bu_gain must be non-negative");
    if (focus_error_sign != 1.0 && focus_error_sign != -1.0)
        throw std::invalid_argument("agent: focus_error_sign must be +1 or -1");
    attention.validate();
}

std::vector<double> AgentConfig::eta(const BeliefLayout& L) const {
    std::vector<double> e(L.size(), k_mu * eta_latent);
    for (int i = 0; i < L.cue_dim; ++i) e[L.cue() + i] = k_mu * eta_cue;
    for (int i = 0; i < L.proprio_dim; ++i) e[L.proprio() + i] = k_mu * eta_proprio;
    e[L.vis_u()] = e[L.vis_v()] = k_mu * eta_vis_pos;
    e[L.presence()] = k_mu * eta_presence;
    e[L.amp()] = k_mu * eta_amp;
    e[L.foc_u()] = e[L.foc_v()] = k_mu * eta_focus;
    return e;
}

DiagonalPrecision AgentConfig::pi_mu(const BeliefLayout& L) const {
    std::vector<double> d(L.size(), pimu_latent);
    for (int i = 0; i < L.cue_dim; ++i) d[L.cue() + i] = pimu_cue;
    for (int i = 0; i < L.proprio_dim; ++i) d[L.proprio() + i] = pimu_proprio;
    d[L.vis_u()] = d[L.vis_v()] = pimu_vis_pos;
    d[L.presence()] = pimu_presence;
    d[L.amp()] = pimu_amp;
    d[L.foc_u()] = d[L.foc_v()] = pimu_focus;
    return DiagonalPrecision(std::move(d));
}

namespace {

bool cue_in_frame(std::span<const double> mu, int c) {
    return std::abs(mu[c]) <= 1.0 && std::abs(mu[c + 1]) <= 1.0;
}

Intention pair_intention(std::string id, double gain, int t0, int t1, int s0, int s1, double scale = 1.0) {
    Intention in;
    in.id = std::move(id);
    in.gain = gain;
    in.rows = {{t0, 0.0, {{s0, scale}}}, {t1, 0.0, {{s1, scale}}}};
    return in;
}

}  // namespace

std::vector<Intention> make_posner_intentions(const BeliefLayout& L, const IntentionGains& g) {
    std::vector<Intention> out;
    const int cue = L.cue(), pres = L.presence();
    auto cue_on = [cue](std::span<const double> mu) { return cue_in_frame(mu, cue); };
    auto idle = [cue, pres](std::span<const double> mu) { return !cue_in_frame(mu, cue) && mu[pres] < 0.5; };
    auto seen = [pres](std::span<const double> mu) { return mu[pres] >= 0.5; };

    if (g.cue_focus > 0) {
        auto in = pair_intention("cue_focus", g.cue_focus, L.foc_u(), L.foc_v(), cue, cue + 1);
        in.gate = cue_on;
        out.push_back(std::move(in));
    }
    if (g.cue_visual > 0) {
        auto in = pair_intention("cue_visual", g.cue_visual, L.vis_u(), L.vis_v(), cue, cue + 1);
        in.gate = cue_on;
        out.push_back(std::move(in));
    }
    if (g.home > 0) {
        Intention in{"home", g.home, {{L.foc_u(), 0.0, {}}, {L.foc_v(), 0.0, {}}}, idle};
        out.push_back(std::move(in));
    }
    if (g.search > 0) {
        auto in = pair_intention("search", g.search, L.vis_u(), L.vis_v(), L.foc_u(), L.foc_v());
        in.gate = idle;
        out.push_back(std::move(in));
    }
    if (g.track > 0) {
        auto in = pair_intention("track", g.track, L.foc_u(), L.foc_v(), L.vis_u(), L.vis_v());
        in.gate = seen;
        out.push_back(std::move(in));
    }
    if (g.amp > 0) out.push_back(Intention{"amp", g.amp, {{L.amp(), g.amp_prior, {}}}, {}});
    return out;
}

std::vector<Intention> make_reach_intentions(const BeliefLayout& L, const IntentionGains& g, const CameraModel& cam) {
    auto out = make_posner_intentions(L, g);
    if (g.orient > 0) {
        // the seen target's image offset, converted to the camera angles that would center it
        const int pitch = L.proprio(), yaw = L.proprio() + 1, pres = L.presence();
        Intention in;
        in.id = "orient";
        in.gain = g.orient;
        in.rows = {{pitch, 0.0, {{pitch, 1.0}, {L.vis_v(), 1.0 / cam.focal}}},
                   {yaw, 0.0, {{yaw, 1.0}, {L.vis_u(), 1.0 / cam.focal}}}};
        in.gate = [pres](std::span<const double> mu) { return mu[pres] >= 0.5; };
        out.push_back(std::move(in));
    }
    return out;
}

void intention_dynamics(std::span<const double> mu, const std::vector<Intention>& intents, std::vector<double>& f,
                        std::vector<double>& Jf) {
    const int M = static_cast<int>(mu.size());
    f.assign(M, 0.0);
    Jf.assign(static_cast<std::size_t>(M) * M, 0.0);
    for (const auto& in : intents) {
        if (!in.active(mu)) continue;
        for (const auto& r : in.rows) {
            f[r.target] += in.gain * (in.target_value(r, mu) - mu[r.target]);
            Jf[r.target * M + r.target] -= in.gain;
            for (auto& [j, c] : r.coef) Jf[r.target * M + j] += in.gain * c;
        }
    }
}

GeneralizedBelief initial_belief(const BeliefLayout& L, const AgentConfig& cfg) {
    GeneralizedBelief gb(L);
    gb.mu[L.cue()] = gb.mu[L.cue() + 1] = kCueSentinel;
    gb.mu[L.amp()] = cfg.gains.amp_prior;
    return gb;
}

Evaluation evaluate(const GeneralizedBelief& gb, const SensoryBundle& s, const std::vector<Intention>& intents,
                    const AgentConfig& cfg, const VisualModel& model) {
    const BeliefLayout& L = gb.layout;
    const int M = L.size();
    const auto& mu = gb.mu;
    Evaluation ev;

    ev.pred = model.predict(std::span<const double>(mu).subspan(L.visual(), L.visual_dim));
    if (ev.pred.cols > kernels::kMaxCols) throw std::invalid_argument("visual block too wide for the reduction kernel");
    CovertFocus focus{mu[L.amp()], mu[L.foc_u()], mu[L.foc_v()]};
    ev.field = precision_field(focus, s.visual, cfg.attention);

    kernels::VisualReduceIn in{ev.field.pi.data(), ev.field.dpi_dmu.data(), ev.field.dpi_dr.data(), s.visual.data(),
                               ev.pred.pixels.data(), ev.pred.jacobian.data(), ev.pred.cols, cfg.gamma_vis};
    kernels::VisualReduceOut red;
    kernels::visual_reduce(in, red);

    ev.err.e_cue = {s.cue[0] - mu[L.cue()], s.cue[1] - mu[L.cue() + 1]};
    ev.err.e_proprio = {s.proprio[0] - mu[L.proprio()], s.proprio[1] - mu[L.proprio() + 1]};
    ev.err.e_visual.resize(kVisualLen);
    for (int i = 0; i < kVisualLen; ++i) ev.err.e_visual[i] = s.visual[i] - ev.pred.pixels[i];

    intention_dynamics(mu, intents, ev.f, ev.Jf);
    const DiagonalPrecision pimu = cfg.pi_mu(L);
    ev.err.e_mu.resize(M);
    for (int i = 0; i < M; ++i) ev.err.e_mu[i] = gb.mu_prime[i] - ev.f[i];

    ev.likelihood.assign(M, 0.0);
    for (int i = 0; i < 2; ++i) {
        ev.likelihood[L.cue() + i] = cfg.pi_cue * ev.err.e_cue[i];
        ev.likelihood[L.proprio() + i] = cfg.pi_proprio * ev.err.e_proprio[i];
    }
    for (int k = 0; k < ev.pred.cols; ++k) ev.likelihood[L.visual() + k] = red.grad[k];

    ev.backward.assign(M, 0.0);
    ev.forward.assign(M, 0.0);
    for (int i = 0; i < M; ++i) {
        const double w = pimu.diag[i] * ev.err.e_mu[i];
        ev.forward[i] = -w;
        for (int j = 0; j < M; ++j) ev.backward[j] += ev.Jf[i * M + j] * w;
    }

    ev.trace_term.assign(M, 0.0);
    ev.error_term.assign(M, 0.0);
    for (int j = 0; j < 3; ++j) {
        // one precision per pixel is shared by the three channels
        ev.trace_term[L.focus() + j] = 0.5 * kChannels * red.tr_f[j];
        ev.error_term[L.focus() + j] = cfg.focus_error_sign * 0.5 * cfg.gamma_vis * red.q_f[j];
    }

    double F = cfg.pi_cue * (ev.err.e_cue[0] * ev.err.e_cue[0] + ev.err.e_cue[1] * ev.err.e_cue[1]) -
               2.0 * std::log(cfg.pi_cue);
    F += cfg.pi_proprio * (ev.err.e_proprio[0] * ev.err.e_proprio[0] + ev.err.e_proprio[1] * ev.err.e_proprio[1]) -
         2.0 * std::log(cfg.pi_proprio);
    F += cfg.gamma_vis * red.pi_e2 - kChannels * (ev.field.sum_log_pi + kPixels * std::log(cfg.gamma_vis));
    F += weighted_sq_error(ev.err.e_mu, pimu) - pimu.log_det();
    ev.free_energy = 0.5 * F;
    return ev;
}

namespace {
double norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}
}  // namespace

BeliefStep belief_step(const GeneralizedBelief& gb, const SensoryBundle& s, const std::vector<Intention>& intents,
                       const AgentConfig& cfg, const VisualModel& model) {
    const BeliefLayout& L = gb.layout;
    const int M = L.size();
    BeliefStep out{gb, {}, evaluate(gb, s, intents, cfg, model)};
    const Evaluation& ev = out.eval;
    const auto eta = cfg.eta(L);

    std::vector<double> grad(M);
    for (int i = 0; i < M; ++i) grad[i] = ev.likelihood[i] + ev.backward[i] + ev.trace_term[i] + ev.error_term[i];
    for (int i = 0; i < M; ++i) {
        if (!std::isfinite(grad[i]) || !std::isfinite(ev.forward[i])) {
            std::ostringstream os;
            os << "belief_step: non-finite gradient at component " << i << " (lik " << ev.likelihood[i] << ", bwd "
               << ev.backward[i] << ", tr " << ev.trace_term[i] << ", err " << ev.error_term[i] << ")";
            throw NumericError(os.str());
        }
    }

    GeneralizedBelief& nx = out.next;
    for (int i = 0; i < M; ++i) {
        nx.mu[i] = gb.mu[i] + cfg.dt * (gb.mu_prime[i] + eta[i] * grad[i]);
        nx.mu_prime[i] = gb.mu_prime[i] + cfg.dt * eta[i] * ev.forward[i];
    }
    if (cfg.fixed_precision) {
        for (int j = 0; j < L.focus_dim; ++j) {
            nx.mu[L.focus() + j] = gb.mu[L.focus() + j];
            nx.mu_prime[L.focus() + j] = gb.mu_prime[L.focus() + j];
        }
    }
    nx.enforce_bounds();

    StepTrace& t = out.trace;
    t.free_energy = ev.free_energy;
    t.mu = gb.mu;
    t.likelihood = norm(ev.likelihood);
    t.backward = norm(ev.backward);
    t.forward = norm(gb.mu_prime);
    std::vector<double> sp(M);
    for (int i = 0; i < M; ++i) sp[i] = ev.trace_term[i] + ev.error_term[i];
    t.sensory_precision = norm(sp);
    t.dynamics_precision = 0.0;  // constant dynamics precision
    t.render_clamped = ev.pred.clamped;
    return out;
}

ActionOut action_step(const GeneralizedBelief& gb, const SensoryBundle& s, const PrecisionField& field,
                      const VisualPrediction& pred, const AgentConfig& cfg, const CameraModel& cam) {
    ActionOut out;
    if (cfg.action_mode == ActionMode::disabled) return out;
    const BeliefLayout& L = gb.layout;
    const bool td = cfg.action_mode == ActionMode::top_down || cfg.action_mode == ActionMode::both;
    const bool bu = cfg.action_mode == ActionMode::bottom_up || cfg.action_mode == ActionMode::both;

    if (td) {
        // d proprio / d a = dt * I
        for (int k = 0; k < 2; ++k)
            out.top_down[k] = -cfg.k_a * cfg.dt * cfg.pi_proprio * (s.proprio[k] - gb.mu[L.proprio() + k]);
    }
    if (bu) {
        if (!field.centroid.present) {
            out.no_visual = true;
        } else {
            kernels::VisualReduceIn in{field.pi.data(), field.dpi_dmu.data(), field.dpi_dr.data(), s.visual.data(),
                                       pred.pixels.data(), pred.jacobian.data(), 0, cfg.gamma_vis};
            kernels::VisualReduceOut red;
            kernels::visual_reduce(in, red);
            double phi[2];
            for (int k = 0; k < 2; ++k)
                phi[k] = 0.5 * kChannels * red.tr_r[k] - 0.5 * cfg.gamma_vis * red.q_r[k];
            // centroid moves opposite to the camera: d r_u / d yaw = d r_v / d pitch = -focal
            const double g = cfg.k_a * cfg.bu_gain * -cam.focal;
            out.bottom_up = {g * phi[1], g * phi[0]};
        }
    }
    for (int k = 0; k < 2; ++k) out.a_dot[k] = out.top_down[k] + out.bottom_up[k];
    return out;
}

Agent::Agent(AgentConfig cfg, std::vector<Intention> intents, std::shared_ptr<const VisualModel> model,
             BeliefLayout layout)
    : cfg_(std::move(cfg)), intents_(std::move(intents)), model_(std::move(model)), gb_(initial_belief(layout, cfg_)) {
    cfg_.validate();
    if (!model_) throw std::invalid_argument("agent needs a visual model");
}

StepTrace Agent::step(const SensoryBundle& s, const CameraModel& cam) {
    BeliefStep bs = belief_step(gb_, s, intents_, cfg_, *model_);
    if (cfg_.action_mode != ActionMode::disabled) {
        ActionOut a = action_step(gb_, s, bs.eval.field, bs.eval.pred, cfg_, cam);
        bs.trace.action = a.a_dot;
    }
    gb_ = std::move(bs.next);
    return bs.trace;
}

}  // namespace aif
