#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "apklab/filters.hpp"
#include "apklab/registry.hpp"
#include "apklab/run.hpp"
#include "apklab/simscript.hpp"
#include "apklab/target.hpp"

namespace apklab {

enum class RunVerdict { Completed, Aborted };

std::string_view to_string(RunVerdict v);

struct StageOutcome {
    std::string stage;
    bool ok = true;
    std::string detail;
};

struct RunOutcome {
    RunVerdict verdict = RunVerdict::Aborted;
    std::string failure;  // set when aborted

    std::string run_id;
    std::filesystem::path result_dir;
    std::filesystem::path store_path;
    std::filesystem::path report_path;
    std::map<std::string, std::filesystem::path> raw_paths;

    std::vector<StageOutcome> stages;
    std::vector<DispatchReport> dispatches;  // lifecycle order
    SimulationLog sim_log;
    bool install_ok = true;
    std::string install_detail;
};

// Drives one analysis end to end:
//   dispatch(before_emulator_start) → target.start →
//   dispatch(before_app_install) → target.install_app →
//   dispatch(before_simulation_start) → script execution →
//   dispatch(before_emulator_stop) → collect_artifacts → target.stop →
//   dispatch(before_database) [plugins emit records] → core meta records →
//   persist → dispatch(before_report) → generate_report.
//
// Target start, persist, or report failure aborts the run. Plugin errors
// never do: a failing callback disables that plugin and the run continues.
// An install failure is recorded and the run continues — observing a sample
// that refuses to install is itself a result. Records emitted at
// before_report land in the raw logs only; the report reads purely from
// the store, so they can never appear in it.
RunOutcome execute_run(AnalysisRun& run, PluginRegistry& registry, AnalysisTarget& target,
                       const SimScript& script, const FilterRuleSet& rules,
                       std::string_view sample_bytes);

}  // namespace apklab
