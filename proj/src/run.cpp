#include "apklab/run.hpp"

#include "apklab/errors.hpp"
#include "apklab/textutil.hpp"

namespace apklab {

std::string_view to_string(RunStage s) {
    switch (s) {
        case RunStage::Created: return "created";
        case RunStage::EmulatorStart: return "emulator_start";
        case RunStage::AppInstall: return "app_install";
        case RunStage::Simulation: return "simulation";
        case RunStage::EmulatorStop: return "emulator_stop";
        case RunStage::Database: return "database";
        case RunStage::Report: return "report";
        case RunStage::Completed: return "completed";
        case RunStage::Failed: return "failed";
    }
    return "?";
}

static std::string new_run_id() { return utc_timestamp_compact() + "-" + random_hex(8); }

AnalysisRun create_run(const FrameworkConfig& config, std::string_view sample_bytes,
                       const std::string& filename) {
    namespace fs = std::filesystem;
    fs::create_directories(config.result_root);

    AnalysisRun run;
    run.config = config;

    // A colliding directory means an id clash; retry with a fresh id.
    for (int attempt = 0;; ++attempt) {
        run.run_id = new_run_id();
        run.result_dir = config.result_root / run.run_id;
        std::error_code ec;
        if (fs::create_directory(run.result_dir, ec) && !ec) break;
        if (attempt >= 16) throw Error("cannot create run directory under " +
                                       config.result_root.string());
    }

    fs::create_directories(run.raw_dir());
    fs::create_directories(run.screenshots_dir());

    run.sample = make_sample_meta(sample_bytes, filename);
    write_file(run.sample_path().string(), sample_bytes);
    write_file(run.config_snapshot_path().string(), config.merged.serialize());

    run.stage = RunStage::Created;
    return run;
}

}  // namespace apklab
