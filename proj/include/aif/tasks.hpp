#pragma once
// Posner cueing and overt reach harnesses, plus batch statistics.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aif/agent.hpp"
#include "aif/genmodels.hpp"
#include "aif/world.hpp"

namespace aif {

struct TaskConfig {
    int init_steps = 10;
    int cue_steps = 50;
    int max_steps = 1000;          // after target onset
    double det_radius = 0.0625;    // one pixel
    double det_presence = 0.5;
    double reach_radius = 0.0625;
    int reach_dwell = 5;
    double ecc_min_px = 2.0;
    double ecc_max_px = 10.0;
    double precedence_radius = 0.1;

    void validate() const;
};

// Everything a run depends on.
struct ModelConfig {
    AgentConfig agent;
    BlobRendererConfig renderer;
    CameraModel camera;
    TaskConfig task;
    int visual_dim = 3;

    void validate() const;
};

enum class CueType { endogenous, exogenous };
enum class Validity { valid, invalid };
const char* to_string(CueType c);
const char* to_string(Validity v);

struct PosnerTrialSpec {
    CueType cue_type = CueType::endogenous;
    Validity validity = Validity::valid;
    int ctoa = 100;
    double eccentricity_px = 5.0;
    double angle = 0.0;
    std::uint64_t seed = 0;
};

struct ReachTrialSpec {
    ActionMode mode = ActionMode::top_down;
    double eccentricity_px = 5.0;
    double angle = 0.0;
    std::uint64_t seed = 0;
};

struct TrialRecord {
    std::string experiment;  // "posner" or "reach"
    std::string condition;   // cue type or action mode
    std::string validity;    // "valid", "invalid" or "-" for reach
    int ctoa = 0;
    double eccentricity_px = 0;
    double angle = 0;
    std::uint64_t seed = 0;
    bool detected = false;
    int rt = 0;              // steps from target onset
    // first step (from trial start) at which focus / position belief came within
    // precedence_radius of the cued location; -1 if never
    int focus_first = -1;
    int belief_first = -1;
    std::vector<StepTrace> trace;
};

// eccentricity and angle drawn from a trial seed
struct Geometry {
    double eccentricity_px, angle;
};
Geometry draw_geometry(std::uint64_t seed, const TaskConfig& t);

// image position (normalized) for a px eccentricity and angle
std::array<double, 2> image_position(double ecc_px, double angle);

TrialRecord run_posner_trial(const PosnerTrialSpec& spec, const ModelConfig& cfg, bool keep_trace = false);
TrialRecord run_reach_trial(const ReachTrialSpec& spec, const ModelConfig& cfg, bool keep_trace = false);

// Perception on a static scene: target visible from step 0, no cue, no action.
TrialRecord run_static_trial(double ecc_px, double angle, std::uint64_t seed, int steps, const ModelConfig& cfg);

struct PosnerVariant {
    CueType cue_type;
    Validity validity;
};

// Run jobs in parallel; results come back in submission order.
std::vector<TrialRecord> run_posner_batch(const std::vector<PosnerTrialSpec>& specs, const ModelConfig& cfg, int jobs);
std::vector<TrialRecord> run_reach_batch(const std::vector<ReachTrialSpec>& specs, const ModelConfig& cfg, int jobs);

// n trials per variant at one CTOA; trial i uses seed base_seed + i for every variant
std::vector<PosnerTrialSpec> posner_specs(const std::vector<PosnerVariant>& variants, int ctoa, int n,
                                          std::uint64_t base_seed, const TaskConfig& t);
std::vector<ReachTrialSpec> reach_specs(const std::vector<ActionMode>& modes, int n, std::uint64_t base_seed,
                                        const TaskConfig& t);

struct Stats {
    int n = 0;
    int detected = 0;
    double timeout_rate = 0;
    double mean = 0, median = 0, stddev = 0;
    double spearman = 0;  // eccentricity vs RT over detected trials
    double slope = 0;     // least-squares RT per px
    std::vector<std::pair<double, double>> series;  // (eccentricity, rt), detected only
};

Stats summarize(const std::vector<TrialRecord>& records);

struct SweepCell {
    PosnerVariant variant;
    int ctoa;
    Stats stats;
};

struct SweepTable {
    std::vector<SweepCell> cells;
    // per cue type: first CTOA where invalid beats valid after valid was ahead
    std::optional<int> crossover_endogenous, crossover_exogenous;
};

SweepTable run_ctoa_sweep(const std::vector<PosnerVariant>& variants, const std::vector<int>& ctoas, int n_per_cell,
                          std::uint64_t base_seed, const ModelConfig& cfg, int jobs,
                          std::vector<TrialRecord>* records = nullptr);

// first CTOA (in list order) where invalid < valid, preceded by a CTOA where valid < invalid
std::optional<int> find_crossover(const std::vector<int>& ctoas, const std::vector<double>& valid_mean,
                                  const std::vector<double>& invalid_mean);

// small statistics helpers
double mean(const std::vector<double>& x);
double median(std::vector<double> x);
double stddev(const std::vector<double>& x);
double spearman(const std::vector<double>& x, const std::vector<double>& y);
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);
// one-sided sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2)
double sign_test_p(int wins, int losses);

}  // namespace aif
