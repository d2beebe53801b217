// aif-sim: run Posner / CTOA-sweep / reach / single-trial experiments.
//
// Exit status: 0 success, 1 usage error, 2 runtime error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "aif/kernels.hpp"
#include "aif/runner.hpp"

namespace {

struct Common {
    std::string config_file;
    std::vector<std::string> sets;
    std::string out;
    int jobs = 1;
    bool scalar = false;
};

void add_common(CLI::App* sub, Common& c, aif::RunConfig& rc) {
    sub->add_option("--config", c.config_file, "key=value config file (a previous manifest.txt works)");
    sub->add_option("--set", c.sets, "override one key, e.g. --set agent.gamma_vis=2e4");
    sub->add_option("--out", c.out, "output directory (default: $AIF_OUT_DIR or ./aif-out)");
    sub->add_option("--jobs", c.jobs, "parallel worker threads (outputs do not depend on it)")->check(CLI::PositiveNumber);
    sub->add_flag("--scalar", c.scalar, "use the scalar reference kernels");
    sub->add_option("--n", rc.n_trials, "trials per condition cell");
    sub->add_option("--seed", rc.seed, "base seed; trial i uses seed+i");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active-inference covert/overt attention simulator"};
    app.require_subcommand(1);

    aif::RunConfig rc;  // flag defaults; the file/--set values are applied underneath explicit flags
    Common common;
    std::string ctoas_arg;

    auto* posner = app.add_subcommand("posner", "Posner cueing batch at one CTOA");
    add_common(posner, common, rc);
    posner->add_option("--cue", rc.cue, "endogenous|exogenous|both");
    posner->add_option("--validity", rc.validity, "valid|invalid|both");
    posner->add_option("--ctoa", rc.ctoa, "cue-target onset asynchrony (steps)");

    auto* sweep = app.add_subcommand("ctoa-sweep", "Posner batches over a list of CTOAs");
    add_common(sweep, common, rc);
    sweep->add_option("--cue", rc.cue, "endogenous|exogenous|both");
    sweep->add_option("--validity", rc.validity, "valid|invalid|both");
    sweep->add_option("--ctoas", ctoas_arg, "comma-separated CTOA list (default 50,100,...,600)");

    auto* reach = app.add_subcommand("reach", "Overt reach batch");
    add_common(reach, common, rc);
    reach->add_option("--mode", rc.mode, "top_down|bottom_up|both");

    auto* single = app.add_subcommand("single-trial", "One trial with a per-step trace");
    add_common(single, common, rc);
    single->add_option("--task", rc.task, "static|posner|reach");
    single->add_option("--cue", rc.cue, "endogenous|exogenous");
    single->add_option("--validity", rc.validity, "valid|invalid");
    single->add_option("--ctoa", rc.ctoa, "CTOA (posner task)");
    single->add_option("--mode", rc.mode, "top_down|bottom_up (reach task)");
    single->add_option("--ecc", rc.eccentricity_px, "target eccentricity in px");
    single->add_option("--angle", rc.angle, "target angle in radians");
    single->add_option("--steps", rc.static_steps, "length of a static run");
    bool no_trace = false;
    single->add_flag("--no-trace", no_trace, "skip trace.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        // precedence: defaults < config file < --set < explicit flags
        aif::RunConfig base;
        base.experiment = sub->get_name();
        if (!common.config_file.empty()) aif::apply_config_file(base, common.config_file);
        base.experiment = sub->get_name();
        for (const auto& kv : common.sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw aif::UsageError("--set expects key=value, got '" + kv + "'");
            aif::set_param(base, kv.substr(0, eq), kv.substr(eq + 1));
        }
        auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
        if (given("--n")) base.n_trials = rc.n_trials;
        if (given("--seed")) base.seed = rc.seed;
        if (given("--cue")) base.cue = rc.cue;
        if (given("--validity")) base.validity = rc.validity;
        if (given("--ctoa")) base.ctoa = rc.ctoa;
        if (given("--mode")) base.mode = rc.mode;
        if (given("--task")) base.task = rc.task;
        if (given("--ecc")) base.eccentricity_px = rc.eccentricity_px;
        if (given("--angle")) base.angle = rc.angle;
        if (given("--steps")) base.static_steps = rc.static_steps;
        if (no_trace) base.trace = false;
        if (!ctoas_arg.empty()) aif::set_param(base, "run.ctoas", ctoas_arg);
        base.validate();

        std::string dir = common.out;
        if (dir.empty()) {
            const char* env = std::getenv("AIF_OUT_DIR");
            dir = env && *env ? env : "aif-out";
        }
        aif::kernels::force_scalar(common.scalar);

        aif::RunOutputs out = aif::execute(base, common.jobs);
        aif::write_outputs(out, dir);
        std::cout << out.summary_csv;
        std::cout << "wrote " << dir << "/trials.csv, summary.csv, manifest.txt"
                  << (out.trace_csv.empty() ? "" : ", trace.csv") << '\n';
    } catch (const aif::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
