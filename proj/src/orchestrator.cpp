#include "apklab/orchestrator.hpp"

#include <sstream>

#include "apklab/errors.hpp"
#include "apklab/report.hpp"
#include "apklab/store.hpp"
#include "apklab/textutil.hpp"

namespace apklab {
namespace {

std::string dispatch_detail(const DispatchReport& rep) {
    int failed = 0;
    for (const auto& e : rep.entries)
        if (e.failed) ++failed;
    std::string out = std::to_string(rep.entries.size()) + " callbacks";
    if (failed > 0) {
        out += ", " + std::to_string(failed) + " failed (";
        bool first = true;
        for (const auto& e : rep.entries) {
            if (!e.failed) continue;
            if (!first) out += ", ";
            out += e.plugin;
            first = false;
        }
        out += ")";
    }
    return out;
}

std::string render_sim_log(const SimulationLog& log) {
    std::ostringstream out;
    for (const auto& e : log.entries) {
        out << (e.ok ? "ok" : "failed") << " line=" << e.line << " clock=" << e.clock_ms << " "
            << e.statement;
        if (!e.note.empty()) out << "  # " << e.note;
        out << '\n';
    }
    out << (log.completed ? "completed" : "stopped") << '\n';
    return out.str();
}

// Statuses reflect everything up to and including the before_database
// callbacks; disabled wins over degraded.
void emit_core_records(RecordBook& records, const AnalysisRun& run) {
    records.emit("core", "sample_meta", 0,
                 {{"filename", run.sample.filename},
                  {"size", static_cast<std::int64_t>(run.sample.size)},
                  {"md5", run.sample.md5},
                  {"sha1", run.sample.sha1},
                  {"sha256", run.sample.sha256}});
    for (const auto& name : run.config.enabled_plugins) {
        std::string status = "ok";
        std::string detail;
        if (auto it = run.disabled_plugins.find(name); it != run.disabled_plugins.end()) {
            status = "disabled";
            detail = it->second;
        } else if (auto dg = run.degraded_plugins.find(name); dg != run.degraded_plugins.end()) {
            status = "degraded";
            detail = dg->second;
        }
        FieldMap fields{{"plugin", name}, {"status", status}};
        if (!detail.empty()) fields["detail"] = detail;
        records.emit("core", "plugin_status", 0, std::move(fields));
    }
}

}  // namespace

std::string_view to_string(RunVerdict v) {
    return v == RunVerdict::Completed ? "completed" : "aborted";
}

RunOutcome execute_run(AnalysisRun& run, PluginRegistry& registry, AnalysisTarget& target,
                       const SimScript& script, const FilterRuleSet& rules,
                       std::string_view sample_bytes) {
    RunOutcome outcome;
    outcome.run_id = run.run_id;
    outcome.result_dir = run.result_dir;
    outcome.store_path = run.store_path();
    outcome.report_path = run.report_path();

    RecordBook records(run.raw_dir());
    StageContext ctx{run, run.config, records, HookEvent::BeforeEmulatorStart, nullptr,
                     sample_bytes};

    auto stage = [&](std::string name, bool ok, std::string detail = "") {
        outcome.stages.push_back({std::move(name), ok, std::move(detail)});
    };
    auto fire = [&](HookEvent event) {
        ctx.event = event;
        DispatchReport rep = registry.dispatch(event, ctx);
        stage("dispatch:" + std::string(to_string(event)), true, dispatch_detail(rep));
        outcome.dispatches.push_back(std::move(rep));
    };

    run.started_at = iso8601_now_utc();

    fire(HookEvent::BeforeEmulatorStart);
    run.stage = RunStage::EmulatorStart;
    try {
        target.start(run.config.image_source, run);
        stage("target:start", true);
    } catch (const std::exception& e) {
        stage("target:start", false, e.what());
        run.stage = RunStage::Failed;
        run.finished_at = iso8601_now_utc();
        outcome.verdict = RunVerdict::Aborted;
        outcome.failure = std::string("target start: ") + e.what();
        return outcome;
    }

    run.stage = RunStage::AppInstall;
    fire(HookEvent::BeforeAppInstall);
    try {
        InstallResult ir = target.install_app(run.sample);
        outcome.install_ok = ir.ok;
        outcome.install_detail = ir.detail;
        stage("target:install", ir.ok, ir.detail);
    } catch (const std::exception& e) {
        outcome.install_ok = false;
        outcome.install_detail = e.what();
        stage("target:install", false, e.what());
    }

    run.stage = RunStage::Simulation;
    fire(HookEvent::BeforeSimulationStart);
    outcome.sim_log = execute_script(script, target);
    stage("simulation",
          outcome.sim_log.completed,
          std::to_string(outcome.sim_log.entries.size()) + " statements");
    try {
        write_file(run.result_dir / "simulation.log", render_sim_log(outcome.sim_log));
    } catch (const std::exception& e) {
        stage("simulation:log", false, e.what());
    }

    run.stage = RunStage::EmulatorStop;
    fire(HookEvent::BeforeEmulatorStop);
    ArtifactBundle bundle;
    try {
        bundle = target.collect_artifacts();
        ctx.bundle = &bundle;
        stage("target:collect", true);
    } catch (const std::exception& e) {
        stage("target:collect", false, e.what());
    }
    try {
        target.stop();
        stage("target:stop", true);
    } catch (const std::exception& e) {
        stage("target:stop", false, e.what());
    }

    run.stage = RunStage::Database;
    fire(HookEvent::BeforeDatabase);
    emit_core_records(records, run);
    run.finished_at = iso8601_now_utc();

    RunMetaRow meta{run.run_id,
                    run.sample.filename,
                    run.sample.md5,
                    run.sample.sha1,
                    run.sample.sha256,
                    run.started_at,
                    run.finished_at,
                    std::string(to_string(run.config.android_version))};
    try {
        ResultStore store(run.store_path());
        store.persist(meta, records.records());
        stage("persist", true, std::to_string(records.records().size()) + " records");

        run.stage = RunStage::Report;
        fire(HookEvent::BeforeReport);
        generate_report(store, run.run_id, rules, run.report_path());
        stage("report", true);
    } catch (const std::exception& e) {
        stage("pipeline", false, e.what());
        run.stage = RunStage::Failed;
        outcome.verdict = RunVerdict::Aborted;
        outcome.failure = std::string("pipeline: ") + e.what();
        return outcome;
    }

    run.stage = RunStage::Completed;
    outcome.raw_paths = records.raw_paths();
    if (records.degraded())
        stage("raw_log", false, std::to_string(records.io_errors().size()) + " write errors");
    outcome.verdict = RunVerdict::Completed;
    return outcome;
}

}  // namespace apklab
