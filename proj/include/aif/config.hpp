#pragma once
// Run configuration and its key=value text form.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "aif/tasks.hpp"

namespace aif {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string experiment = "posner";  // posner | ctoa-sweep | reach | single-trial
    ModelConfig model;
    int n_trials = 200;
    std::uint64_t seed = 7;
    int ctoa = 100;
    std::vector<int> ctoas{50, 100, 150, 200, 250, 300, 350, 400, 450, 500, 550, 600};
    std::string cue = "both";        // endogenous | exogenous | both
    std::string validity = "both";   // valid | invalid | both
    std::string mode = "both";       // top_down | bottom_up | both (reach)
    std::string task = "static";     // single-trial: posner | reach | static
    double eccentricity_px = 5.0;    // single-trial
    double angle = 0.0;
    int static_steps = 300;
    bool static_fixed_precision = true;  // static perception runs hold the precision field fixed
    bool trace = true;

    void validate() const;
};

using ParamRef = std::variant<double*, int*, bool*, std::uint64_t*, std::string*, std::vector<int>*>;
struct Param {
    std::string key;
    ParamRef ref;
};

std::vector<Param> params(RunConfig& rc);

// key=value, '#' comments; keys under "meta." are accepted and ignored
void apply_config_text(RunConfig& rc, const std::string& text, const std::string& origin = "config");
void apply_config_file(RunConfig& rc, const std::string& path);
void set_param(RunConfig& rc, const std::string& key, const std::string& value);

std::string serialize(RunConfig rc);

}  // namespace aif
