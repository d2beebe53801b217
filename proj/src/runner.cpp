#include "aif/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aif/kernels.hpp"

#ifndef AIF_VERSION
#define AIF_VERSION "dev"
#endif
#ifndef AIF_GIT_REV
#define AIF_GIT_REV "unknown"
#endif

namespace aif {
namespace fs = std::filesystem;

std::string code_version() { return std::string(AIF_VERSION) + "+" + AIF_GIT_REV; }

namespace {

std::string num(double x, const char* fmt = "%.6f") {
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, x);
    return buf;
}

std::vector<PosnerVariant> variants_of(const RunConfig& rc) {
    std::vector<PosnerVariant> out;
    for (CueType c : {CueType::endogenous, CueType::exogenous}) {
        if (rc.cue != "both" && rc.cue != to_string(c)) continue;
        for (Validity v : {Validity::valid, Validity::invalid}) {
            if (rc.validity != "both" && rc.validity != to_string(v)) continue;
            out.push_back({c, v});
        }
    }
    return out;
}

std::vector<ActionMode> modes_of(const RunConfig& rc) {
    if (rc.mode == "both") return {ActionMode::top_down, ActionMode::bottom_up};
    return {action_mode_from(rc.mode)};
}

const char* summary_header =
    "experiment,cue_type,validity,ctoa,n,detected,timeout_rate,mean_rt,median_rt,sd_rt,spearman_ecc_rt,slope_rt_per_px\n";

std::string summary_row(const std::string& exp, const std::string& cond, const std::string& val, int ctoa,
                        const Stats& s) {
    std::ostringstream os;
    os << exp << ',' << cond << ',' << val << ',' << ctoa << ',' << s.n << ',' << s.detected << ','
       << num(s.timeout_rate) << ',' << num(s.mean, "%.4f") << ',' << num(s.median, "%.4f") << ','
       << num(s.stddev, "%.4f") << ',' << num(s.spearman, "%.6f") << ',' << num(s.slope, "%.6f") << '\n';
    return os.str();
}

// group consecutive records sharing (condition, validity, ctoa)
std::string summaries(const std::vector<TrialRecord>& recs) {
    std::string out;
    std::size_t i = 0;
    while (i < recs.size()) {
        std::size_t j = i;
        while (j < recs.size() && recs[j].condition == recs[i].condition && recs[j].validity == recs[i].validity &&
               recs[j].ctoa == recs[i].ctoa)
            ++j;
        std::vector<TrialRecord> cell(recs.begin() + i, recs.begin() + j);
        out += summary_row(recs[i].experiment, recs[i].condition, recs[i].validity, recs[i].ctoa, summarize(cell));
        i = j;
    }
    return out;
}

}  // namespace

std::string trials_header() { return "experiment,cue_type,validity,ctoa,eccentricity_px,angle,seed,outcome,rt_steps\n"; }

std::string trial_row(const TrialRecord& r) {
    std::ostringstream os;
    os << r.experiment << ',' << r.condition << ',' << r.validity << ',' << r.ctoa << ',' << num(r.eccentricity_px)
       << ',' << num(r.angle) << ',' << r.seed << ',' << (r.detected ? "detected" : "timeout") << ',';
    if (r.detected) os << r.rt;
    os << '\n';
    return os.str();
}

std::string trace_csv(const std::vector<StepTrace>& trace, const BeliefLayout& L) {
    std::ostringstream os;
    os << "step,free_energy,cue_u,cue_v,pitch,yaw,vis_u,vis_v,presence";
    for (int k = 3; k < L.visual_dim; ++k) os << ",latent_" << (k - 3);
    os << ",amp,focus_u,focus_v,a_pitch,a_yaw\n";
    for (std::size_t t = 0; t < trace.size(); ++t) {
        const StepTrace& s = trace[t];
        os << t << ',' << num(s.free_energy, "%.10e");
        for (double x : s.mu) os << ',' << num(x, "%.10e");
        os << ',' << num(s.action[0], "%.10e") << ',' << num(s.action[1], "%.10e") << '\n';
    }
    return os.str();
}

RunOutputs execute(const RunConfig& rc, int jobs) {
    rc.validate();
    const ModelConfig& M = rc.model;
    RunOutputs out;
    std::vector<TrialRecord> recs;
    std::ostringstream meta;

    if (rc.experiment == "posner") {
        recs = run_posner_batch(posner_specs(variants_of(rc), rc.ctoa, rc.n_trials, rc.seed, M.task), M, jobs);
        out.summary_csv = summaries(recs);
    } else if (rc.experiment == "ctoa-sweep") {
        SweepTable tab = run_ctoa_sweep(variants_of(rc), rc.ctoas, rc.n_trials, rc.seed, M, jobs, &recs);
        for (const auto& c : tab.cells)
            out.summary_csv += summary_row("posner", to_string(c.variant.cue_type), to_string(c.variant.validity),
                                           c.ctoa, c.stats);
        auto show = [](const std::optional<int>& x) { return x ? std::to_string(*x) : std::string("none"); };
        meta << "meta.crossover_endogenous = " << show(tab.crossover_endogenous) << '\n'
             << "meta.crossover_exogenous = " << show(tab.crossover_exogenous) << '\n';
    } else if (rc.experiment == "reach") {
        recs = run_reach_batch(reach_specs(modes_of(rc), rc.n_trials, rc.seed, M.task), M, jobs);
        out.summary_csv = summaries(recs);
    } else {  // single-trial
        TrialRecord r;
        const BeliefLayout L(M.visual_dim);
        if (rc.task == "posner") {
            auto vs = variants_of(rc);
            if (vs.size() != 1) throw UsageError("single-trial posner needs one cue type and one validity");
            r = run_posner_trial({vs[0].cue_type, vs[0].validity, rc.ctoa, rc.eccentricity_px, rc.angle, rc.seed}, M,
                                 rc.trace);
        } else if (rc.task == "reach") {
            auto ms = modes_of(rc);
            if (ms.size() != 1) throw UsageError("single-trial reach needs one mode");
            r = run_reach_trial({ms[0], rc.eccentricity_px, rc.angle, rc.seed}, M, rc.trace);
        } else {
            ModelConfig sm = M;
            sm.agent.fixed_precision = sm.agent.fixed_precision || rc.static_fixed_precision;
            r = run_static_trial(rc.eccentricity_px, rc.angle, rc.seed, rc.static_steps, sm);
            if (!rc.trace) r.trace.clear();
        }
        if (rc.trace) out.trace_csv = trace_csv(r.trace, L);
        recs.push_back(std::move(r));
        out.summary_csv = summaries(recs);
    }

    out.trials_csv = trials_header();
    for (const auto& r : recs) out.trials_csv += trial_row(r);
    out.summary_csv = summary_header + out.summary_csv;

    std::ostringstream man;
    man << "# run manifest; usable as --config to reproduce the run\n"
        << "meta.code_version = " << code_version() << '\n'
        << "meta.schema_trials = " << kTrialsSchema << '\n'
        << "meta.schema_summary = " << kSummarySchema << '\n'
        << "meta.schema_trace = " << kTraceSchema << '\n'
        << "meta.kernel_backend = " << kernels::active_backend() << '\n'
        << "meta.trial_seeds = " << rc.seed << ".." << rc.seed + (rc.experiment == "single-trial" ? 0 : rc.n_trials - 1)
        << '\n'
        << meta.str() << serialize(rc);
    out.manifest = man.str();
    return out;
}

void write_outputs(const RunOutputs& out, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    std::vector<std::pair<std::string, const std::string*>> files = {
        {"trials.csv", &out.trials_csv}, {"summary.csv", &out.summary_csv}, {"manifest.txt", &out.manifest}};
    if (!out.trace_csv.empty()) files.push_back({"trace.csv", &out.trace_csv});

    std::vector<fs::path> staged;
    auto cleanup = [&]() {
        for (auto& p : staged) fs::remove(p, ec);
    };
    for (auto& [name, body] : files) {
        fs::path tmp = fs::path(dir) / (name + ".tmp");
        std::ofstream f(tmp, std::ios::binary);
        if (f) staged.push_back(tmp);
        if (!f || !(f << *body) || !(f.flush())) {
            cleanup();
            throw IoError("cannot write " + tmp.string());
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        fs::rename(staged[i], fs::path(dir) / files[i].first, ec);
        if (ec) {
            cleanup();
            throw IoError("cannot finalize " + files[i].first + ": " + ec.message());
        }
    }
}

}  // namespace aif
