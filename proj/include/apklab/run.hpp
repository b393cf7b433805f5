#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "apklab/config.hpp"
#include "apklab/sample.hpp"

namespace apklab {

enum class RunStage {
    Created,
    EmulatorStart,
    AppInstall,
    Simulation,
    EmulatorStop,
    Database,
    Report,
    Completed,
    Failed,
};

std::string_view to_string(RunStage s);

// One analysis lifecycle. The result directory is unique per run and holds
// every output: sample.apk, config.snapshot, raw/<plugin>.jsonl, store.db,
// report.xml, screenshots/.
struct AnalysisRun {
    std::string run_id;
    std::filesystem::path result_dir;
    SampleMeta sample;
    FrameworkConfig config;
    std::map<std::string, std::string> disabled_plugins;  // name -> recorded error
    std::map<std::string, std::string> degraded_plugins;  // name -> self-reported note
    RunStage stage = RunStage::Created;
    std::string started_at;
    std::string finished_at;

    std::filesystem::path sample_path() const { return result_dir / "sample.apk"; }
    std::filesystem::path config_snapshot_path() const { return result_dir / "config.snapshot"; }
    std::filesystem::path raw_dir() const { return result_dir / "raw"; }
    std::filesystem::path store_path() const { return result_dir / "store.db"; }
    std::filesystem::path report_path() const { return result_dir / "report.xml"; }
    std::filesystem::path screenshots_dir() const { return result_dir / "screenshots"; }
    std::filesystem::path scratch_dir(const std::string& plugin) const {
        return result_dir / "scratch" / plugin;
    }
};

// Creates the unique run directory, copies the sample into it, computes the
// sample digests, and snapshots the effective configuration.
AnalysisRun create_run(const FrameworkConfig& config, std::string_view sample_bytes,
                       const std::string& filename);

}  // namespace apklab
