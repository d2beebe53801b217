#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aif/agent.hpp"
#include "aif/tasks.hpp"
#include "helpers.hpp"

using namespace aif;

namespace {

const BlobRenderer kModel;

// visual model with zero Jacobian and a flat prediction: the visual block feels no data
class FlatModel final : public VisualModel {
public:
    VisualPrediction predict(std::span<const double> vb) const override {
        VisualPrediction p;
        p.cols = static_cast<int>(vb.size());
        p.pixels.assign(kVisualLen, 0.5);
        p.jacobian.assign(static_cast<std::size_t>(p.cols) * kVisualLen, 0.0);
        return p;
    }
};

SensoryBundle scene_at(double u, double v, std::array<double, 2> prop = {0, 0}) {
    SensoryBundle s;
    s.visual = render_image(u, v, 1.0, kModel.config());
    s.proprio = prop;
    s.cue = {kCueSentinel, kCueSentinel};
    return s;
}

// A belief well inside every gate and clamp, with a nonzero mu'.
GeneralizedBelief interior_belief(std::mt19937_64& rng, const AgentConfig& cfg) {
    const BeliefLayout L;
    std::uniform_real_distribution<double> pos(-0.4, 0.4), small(-1e-3, 1e-3);
    auto gb = initial_belief(L, cfg);
    gb.mu[L.proprio()] = 0.1 * pos(rng);
    gb.mu[L.proprio() + 1] = 0.1 * pos(rng);
    gb.mu[L.vis_u()] = pos(rng);
    gb.mu[L.vis_v()] = pos(rng);
    gb.mu[L.presence()] = 0.75 + 0.1 * pos(rng);
    gb.mu[L.amp()] = 1.0 + pos(rng);
    gb.mu[L.foc_u()] = pos(rng);
    gb.mu[L.foc_v()] = pos(rng);
    for (double& x : gb.mu_prime) x = small(rng);
    return gb;
}

double F_at(const GeneralizedBelief& gb, const SensoryBundle& s, const std::vector<Intention>& in,
            const AgentConfig& cfg) {
    return evaluate(gb, s, in, cfg, kModel).free_energy;
}

}  // namespace

TEST_CASE("belief consistent with the data is a fixed point") {
    const BeliefLayout L;
    AgentConfig cfg;
    cfg.fixed_precision = true;
    auto gb = initial_belief(L, cfg);
    gb.mu[L.vis_u()] = 0.25;
    gb.mu[L.vis_v()] = -0.1;
    gb.mu[L.presence()] = 1.0;
    gb.mu[L.proprio()] = 0.05;
    SensoryBundle s = scene_at(0.25, -0.1, {0.05, 0.0});
    auto step = belief_step(gb, s, {}, cfg, kModel);
    for (int i = 0; i < L.size(); ++i) {
        CHECK(step.next.mu[i] == doctest::Approx(gb.mu[i]).epsilon(1e-12));
        CHECK(step.next.mu_prime[i] == 0.0);
    }
}

TEST_CASE("exact-descent update equals minus the free-energy gradient") {
    AgentConfig cfg;
    cfg.focus_error_sign = -1.0;
    const BeliefLayout L;
    const auto intents = make_posner_intentions(L, cfg.gains);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> pos(-0.5, 0.5);
    for (int t = 0; t < 10; ++t) {
        auto gb = interior_belief(rng, cfg);
        auto s = scene_at(pos(rng), pos(rng), {0.01, -0.02});
        auto ev = evaluate(gb, s, intents, cfg, kModel);
        std::vector<double> an(L.size()), fd(L.size()), an2(L.size()), fd2(L.size());
        for (int i = 0; i < L.size(); ++i) {
            an[i] = ev.likelihood[i] + ev.backward[i] + ev.trace_term[i] + ev.error_term[i];
            an2[i] = ev.forward[i];
            const double h = 1e-6;
            auto up = gb, dn = gb;
            up.mu[i] += h;
            dn.mu[i] -= h;
            fd[i] = -(F_at(up, s, intents, cfg) - F_at(dn, s, intents, cfg)) / (2 * h);
            up = gb, dn = gb;
            up.mu_prime[i] += h;
            dn.mu_prime[i] -= h;
            fd2[i] = -(F_at(up, s, intents, cfg) - F_at(dn, s, intents, cfg)) / (2 * h);
        }
        CHECK_MESSAGE(th::close_rel(an, fd, 1e-3), "config " << t);
        CHECK_MESSAGE(th::close_rel(an2, fd2, 1e-3), "config " << t);
    }
}

TEST_CASE("each gradient term matches its own finite difference") {
    AgentConfig cfg;
    const BeliefLayout L;
    const auto intents = make_posner_intentions(L, cfg.gains);
    std::mt19937_64 rng(42);
    auto gb = interior_belief(rng, cfg);
    auto s = scene_at(0.2, -0.3);
    auto ev = evaluate(gb, s, intents, cfg, kModel);
    const auto pimu = cfg.pi_mu(L);
    const double h = 1e-6;

    // likelihood: -d/dmu of 1/2 gamma sum pi (s - g(mu))^2, precision held fixed
    for (int k = 0; k < 3; ++k) {
        auto part = [&](double dx) {
            auto vb = std::vector<double>(gb.mu.begin() + L.visual(), gb.mu.begin() + L.visual() + L.visual_dim);
            vb[k] += dx;
            auto pred = render(vb, kModel.config());
            double acc = 0;
            for (int i = 0; i < kVisualLen; ++i)
                acc += ev.field.pi[i % kPixels] * std::pow(s.visual[i] - pred.pixels[i], 2);
            return 0.5 * cfg.gamma_vis * acc;
        };
        const double fd = -(part(h) - part(-h)) / (2 * h);
        CHECK(ev.likelihood[L.visual() + k] == doctest::Approx(fd).epsilon(1e-4));
    }

    // backward: -d/dmu of 1/2 sum Pi_mu (mu' - f(mu))^2
    std::vector<double> an(L.size()), fd(L.size());
    for (int j = 0; j < L.size(); ++j) {
        auto part = [&](double dx) {
            auto mu = gb.mu;
            mu[j] += dx;
            std::vector<double> f, Jf;
            intention_dynamics(mu, intents, f, Jf);
            double acc = 0;
            for (int i = 0; i < L.size(); ++i) acc += pimu.diag[i] * std::pow(gb.mu_prime[i] - f[i], 2);
            return 0.5 * acc;
        };
        an[j] = ev.backward[j];
        fd[j] = -(part(h) - part(-h)) / (2 * h);
    }
    CHECK(th::close_rel(an, fd, 1e-5));

    // trace and error terms through the precision field
    for (int j = 0; j < 3; ++j) {
        auto field_at = [&](double dx) {
            CovertFocus f{gb.mu[L.amp()], gb.mu[L.foc_u()], gb.mu[L.foc_v()]};
            (j == 0 ? f.amp : j == 1 ? f.u : f.v) += dx;
            return precision_field(f, s.visual, cfg.attention);
        };
        auto up = field_at(h), dn = field_at(-h);
        const double tr = 0.5 * kChannels * (up.sum_log_pi - dn.sum_log_pi) / (2 * h);
        double q = 0;
        for (int i = 0; i < kVisualLen; ++i)
            q += std::pow(ev.err.e_visual[i], 2) * (up.pi[i % kPixels] - dn.pi[i % kPixels]) / (2 * h);
        CHECK(ev.trace_term[L.focus() + j] == doctest::Approx(tr).epsilon(1e-4));
        CHECK(ev.error_term[L.focus() + j] == doctest::Approx(cfg.focus_error_sign * 0.5 * cfg.gamma_vis * q).epsilon(1e-4));
    }
}

TEST_CASE("intentions") {
    const BeliefLayout L;
    IntentionGains g;
    const auto intents = make_posner_intentions(L, g);
    AgentConfig cfg;
    auto gb = initial_belief(L, cfg);
    gb.mu[L.foc_u()] = 0.3;
    std::vector<double> f, Jf;

    SUBCASE("no cue: the cue intention is off and the focus drifts home") {
        intention_dynamics(gb.mu, intents, f, Jf);
        CHECK(f[L.foc_u()] == doctest::Approx(-g.home * 0.3));
        CHECK(f[L.cue()] == 0.0);
    }
    SUBCASE("cue in frame: the focus is pulled to the cue") {
        gb.mu[L.cue()] = 0.5;
        gb.mu[L.cue() + 1] = 0.0;
        intention_dynamics(gb.mu, intents, f, Jf);
        CHECK(f[L.foc_u()] == doctest::Approx(g.cue_focus * (0.5 - 0.3)));
        CHECK(f[L.foc_v()] == doctest::Approx(0.0));
    }
    SUBCASE("intentions on the same component add") {
        Intention a{"a", 0.2, {{L.vis_u(), 0.5, {}}}, {}};
        Intention b{"b", 0.1, {{L.vis_u(), -0.4, {}}}, {}};
        intention_dynamics(gb.mu, {a, b}, f, Jf);
        CHECK(f[L.vis_u()] == doctest::Approx(0.2 * 0.5 + 0.1 * (-0.4)));
        CHECK(Jf[L.vis_u() * L.size() + L.vis_u()] == doctest::Approx(-0.3));
    }
    SUBCASE("Jacobian matches finite differences") {
        CameraModel cam;
        auto reach = make_reach_intentions(L, g, cam);
        std::mt19937_64 rng(43);
        auto b = interior_belief(rng, cfg);
        intention_dynamics(b.mu, reach, f, Jf);
        const int M = L.size();
        for (int j = 0; j < M; ++j) {
            auto up = b.mu, dn = b.mu;
            up[j] += 1e-6;
            dn[j] -= 1e-6;
            std::vector<double> fu, fdn, tmp;
            intention_dynamics(up, reach, fu, tmp);
            intention_dynamics(dn, reach, fdn, tmp);
            for (int i = 0; i < M; ++i)
                CHECK(Jf[i * M + j] == doctest::Approx((fu[i] - fdn[i]) / 2e-6).epsilon(1e-6));
        }
    }
}

TEST_CASE("an endogenous cue moves the focus before the position belief") {
    ModelConfig mc;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        PosnerTrialSpec spec{CueType::endogenous, Validity::valid, 100, 5.0, 0.0, seed};
        auto r = run_posner_trial(spec, mc);
        CHECK(r.focus_first >= 0);
        CHECK(r.focus_first < mc.task.init_steps + mc.task.cue_steps + spec.ctoa);
        CHECK((r.belief_first < 0 || r.focus_first < r.belief_first));
    }
}

TEST_CASE("action") {
    const BeliefLayout L;
    const CameraModel cam;
    AgentConfig cfg;
    auto gb = initial_belief(L, cfg);

    SUBCASE("no action once the target is centered and proprio is predicted") {
        cfg.action_mode = ActionMode::both;
        gb.mu[L.presence()] = 1.0;
        auto s = scene_at(0.0, 0.0);
        auto ev = evaluate(gb, s, {}, cfg, kModel);
        auto a = action_step(gb, s, ev.field, ev.pred, cfg, cam);
        CHECK(std::abs(a.a_dot[0]) < 1e-12);
        CHECK(std::abs(a.a_dot[1]) < 1e-12);
    }
    SUBCASE("top-down action follows the proprio prediction error") {
        cfg.action_mode = ActionMode::top_down;
        gb.mu[L.proprio()] = 0.1;   // expected pitch above the sensed one
        gb.mu[L.proprio() + 1] = -0.05;
        auto s = scene_at(0.3, 0.0);
        auto ev = evaluate(gb, s, {}, cfg, kModel);
        auto a = action_step(gb, s, ev.field, ev.pred, cfg, cam);
        CHECK(a.a_dot[0] > 0.0);
        CHECK(a.a_dot[1] < 0.0);
        CHECK(a.bottom_up == std::array<double, 2>{0.0, 0.0});
    }
    SUBCASE("bottom-up action turns toward the red blob") {
        cfg.action_mode = ActionMode::bottom_up;
        for (auto [u, v] : {std::pair{0.4, 0.0}, {-0.4, 0.0}, {0.0, 0.4}, {0.0, -0.4}, {0.3, -0.2}}) {
            SceneState st;
            st.target_visible = true;
            st.target_dir = direction_for(u, v, cam);
            auto s = observe(st, cam, kModel.config());
            auto ev = evaluate(gb, s, {}, cfg, kModel);
            auto a = action_step(gb, s, ev.field, ev.pred, cfg, cam);
            CHECK(a.top_down == std::array<double, 2>{0.0, 0.0});
            auto moved = apply_action(st, a.a_dot, cam, cfg.dt).state;
            auto p0 = project(st, cam), p1 = project(moved, cam);
            CHECK(std::hypot(p1[0], p1[1]) < std::hypot(p0[0], p0[1]));
        }
    }
    SUBCASE("bottom-up with nothing red in view does nothing") {
        cfg.action_mode = ActionMode::bottom_up;
        SensoryBundle s;
        s.visual.assign(kVisualLen, 0.5);
        auto ev = evaluate(gb, s, {}, cfg, kModel);
        auto a = action_step(gb, s, ev.field, ev.pred, cfg, cam);
        CHECK(a.no_visual);
        CHECK(a.a_dot == std::array<double, 2>{0.0, 0.0});
    }
    SUBCASE("disabled mode never acts") {
        cfg.action_mode = ActionMode::disabled;
        gb.mu[L.proprio()] = 0.2;
        auto s = scene_at(0.3, 0.3);
        auto ev = evaluate(gb, s, {}, cfg, kModel);
        auto a = action_step(gb, s, ev.field, ev.pred, cfg, cam);
        CHECK(a.a_dot == std::array<double, 2>{0.0, 0.0});
    }
}

TEST_CASE("a single attractor converges geometrically without sensory input") {
    const BeliefLayout L;
    AgentConfig cfg;
    cfg.fixed_precision = true;
    cfg.eta_vis_pos = 0.3 / cfg.pimu_vis_pos;  // eta * Pi_mu = 0.3
    Intention pull{"pull", 0.1, {{L.vis_u(), 0.4, {}}}, {}};
    auto gb = initial_belief(L, cfg);
    SensoryBundle s;
    s.visual.assign(kVisualLen, 0.5);
    FlatModel flat;
    std::vector<double> err;
    for (int k = 0; k < 400; ++k) {
        err.push_back(std::abs(gb.mu[L.vis_u()] - 0.4));
        gb = belief_step(gb, s, {pull}, cfg, flat).next;
    }
    CHECK(err.back() < 1e-6 * err.front());
    // error envelope over successive 20-step windows shrinks by a steady factor
    std::vector<double> env;
    for (int w = 0; w + 20 <= 400; w += 20) {
        const double m = *std::max_element(err.begin() + w, err.begin() + w + 20);
        if (m < 1e-10) break;  // rounding floor
        env.push_back(m);
    }
    CHECK(env.size() >= 3);
    for (std::size_t i = 1; i + 1 < env.size(); ++i) {
        CHECK(env[i] < env[i - 1]);
        const double r0 = env[i] / env[i - 1], r1 = env[i + 1] / env[i];
        CHECK(r1 == doctest::Approx(r0).epsilon(0.5));
    }
}

TEST_CASE("non-finite input is reported") {
    const BeliefLayout L;
    AgentConfig cfg;
    auto gb = initial_belief(L, cfg);
    auto s = scene_at(0.0, 0.0);
    s.proprio[0] = std::nan("");
    CHECK_THROWS_AS(belief_step(gb, s, {}, cfg, kModel), NumericError);
}

TEST_CASE("configuration checks") {
    AgentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.focus_error_sign = 0.5;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.eta_focus = -1;
    CHECK_THROWS(cfg.validate());
    CHECK_THROWS(Agent(AgentConfig{}, {}, nullptr));
    CHECK(action_mode_from("bottom_up") == ActionMode::bottom_up);
    CHECK_THROWS(action_mode_from("sideways"));
}
