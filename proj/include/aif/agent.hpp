#pragma once
// Belief and action updates of the active-inference agent.

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aif/attention.hpp"
#include "aif/gencoords.hpp"
#include "aif/genmodels.hpp"
#include "aif/world.hpp"

namespace aif {

// Affine attractor: on each masked row i, h_i = offset + sum_j coef_j * mu_j,
// and the intention contributes f_i = gain * (h_i - mu_i). The gate reads the
// current belief and switches the whole intention on or off.
struct Intention {
    struct Row {
        int target;
        double offset = 0.0;
        std::vector<std::pair<int, double>> coef;
    };
    std::string id;
    double gain = 0.3;
    std::vector<Row> rows;
    std::function<bool(std::span<const double>)> gate;  // empty: always on

    bool active(std::span<const double> mu) const { return !gate || gate(mu); }
    double target_value(const Row& r, std::span<const double> mu) const;
};

enum class ActionMode { disabled, top_down, bottom_up, both };
const char* to_string(ActionMode m);
ActionMode action_mode_from(const std::string& s);

struct IntentionGains {
    double cue_focus = 0.1;   // cue -> covert focus
    double cue_visual = 0.0;  // cue -> target-position belief
    double home = 0.008;      // focus back to the image center when idle
    double search = 0.05;     // position belief follows the focus while nothing is seen
    double track = 0.06;      // focus follows the position belief once something is seen
    double amp = 0.003;       // amplitude prior
    double amp_prior = 1.0;
    double orient = 0.05;     // proprio belief toward the seen target (reach only)
};

struct AgentConfig {
    // per-block step sizes (a diagonal preconditioner), all scaled by k_mu
    double k_mu = 1.0;
    double eta_cue = 5e-6, eta_proprio = 5e-6, eta_vis_pos = 1e-7, eta_presence = 1e-7, eta_latent = 1e-7;
    double eta_amp = 5e-6, eta_focus = 2e-5;
    // dynamics precisions, constant
    double pimu_cue = 6e4, pimu_proprio = 6e4, pimu_vis_pos = 3e6, pimu_presence = 1e5, pimu_latent = 3e6;
    double pimu_amp = 3e5, pimu_focus = 600;
    double pi_cue = 1e5, pi_proprio = 1e5;
    double gamma_vis = 1e4;  // gain on the RBF precision field
    double k_a = 1e-6;
    double bu_gain = 10.0;   // bottom-up action gain relative to k_a
    double dt = 1.0;
    // +1: error-weighted precision term attracts the focus toward errors; -1: exact descent
    double focus_error_sign = 1.0;
    bool fixed_precision = false;  // freeze the focus block (precisions held constant)
    ActionMode action_mode = ActionMode::disabled;
    IntentionGains gains;
    AttentionConfig attention;

    void validate() const;
    std::vector<double> eta(const BeliefLayout& L) const;
    DiagonalPrecision pi_mu(const BeliefLayout& L) const;
};

std::vector<Intention> make_posner_intentions(const BeliefLayout& L, const IntentionGains& g);
// Posner set plus the orienting intention on the proprio belief
std::vector<Intention> make_reach_intentions(const BeliefLayout& L, const IntentionGains& g, const CameraModel& cam);

// f(mu) summed over active intentions, and its Jacobian (row-major M x M)
void intention_dynamics(std::span<const double> mu, const std::vector<Intention>& intents, std::vector<double>& f,
                        std::vector<double>& Jf);

struct StepTrace {
    double free_energy = 0.0;
    std::vector<double> mu;
    std::array<double, 2> action{0.0, 0.0};
    // Euclidean norms of the update terms
    double likelihood = 0, backward = 0, forward = 0, sensory_precision = 0, dynamics_precision = 0;
    bool render_clamped = false;
};

// Everything the update laws need at the current belief.
struct Evaluation {
    VisualPrediction pred;
    PrecisionField field;
    PredictionError err;
    std::vector<double> f, Jf;
    double free_energy = 0.0;
    // split gradient terms, each of length M, already signed as they enter mu-dot
    std::vector<double> likelihood, backward, trace_term, error_term;
    std::vector<double> forward;  // mu' slot: -Pi_mu e_mu
};

Evaluation evaluate(const GeneralizedBelief& gb, const SensoryBundle& s, const std::vector<Intention>& intents,
                    const AgentConfig& cfg, const VisualModel& model);

struct BeliefStep {
    GeneralizedBelief next;
    StepTrace trace;
    Evaluation eval;
};

BeliefStep belief_step(const GeneralizedBelief& gb, const SensoryBundle& s, const std::vector<Intention>& intents,
                       const AgentConfig& cfg, const VisualModel& model);

struct ActionOut {
    std::array<double, 2> a_dot{0.0, 0.0};  // pitch, yaw
    std::array<double, 2> top_down{0.0, 0.0};
    std::array<double, 2> bottom_up{0.0, 0.0};
    bool no_visual = false;  // bottom-up requested but nothing red in view
};

ActionOut action_step(const GeneralizedBelief& gb, const SensoryBundle& s, const PrecisionField& field,
                      const VisualPrediction& pred, const AgentConfig& cfg, const CameraModel& cam);

// Stateful wrapper used by the task harness.
class Agent {
public:
    Agent(AgentConfig cfg, std::vector<Intention> intents, std::shared_ptr<const VisualModel> model,
          BeliefLayout layout = BeliefLayout{});

    GeneralizedBelief& belief() { return gb_; }
    const GeneralizedBelief& belief() const { return gb_; }
    const AgentConfig& config() const { return cfg_; }

    // one belief update, plus an action if the mode asks for one
    StepTrace step(const SensoryBundle& s, const CameraModel& cam);

private:
    AgentConfig cfg_;
    std::vector<Intention> intents_;
    std::shared_ptr<const VisualModel> model_;
    GeneralizedBelief gb_;
};

GeneralizedBelief initial_belief(const BeliefLayout& L, const AgentConfig& cfg);

}  // namespace aif
