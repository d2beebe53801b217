#pragma once
// Executes a RunConfig and renders its CSV / manifest outputs.

#include <string>
#include <vector>

#include "aif/config.hpp"

namespace aif {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kTrialsSchema = "trials/v1";
inline constexpr const char* kSummarySchema = "summary/v1";
inline constexpr const char* kTraceSchema = "trace/v1";

struct RunOutputs {
    std::string trials_csv;
    std::string summary_csv;
    std::string trace_csv;  // empty unless a single-trial run asked for it
    std::string manifest;
};

// --jobs only changes wall time; outputs are identical for any value
RunOutputs execute(const RunConfig& rc, int jobs);

// Writes every file or none of them (staged under temporary names first).
void write_outputs(const RunOutputs& out, const std::string& dir);

std::string trials_header();
std::string trial_row(const TrialRecord& r);
std::string trace_csv(const std::vector<StepTrace>& trace, const BeliefLayout& L);

std::string code_version();

}  // namespace aif
