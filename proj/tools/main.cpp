#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "apklab/config.hpp"
#include "apklab/errors.hpp"
#include "apklab/filters.hpp"
#include "apklab/fixture.hpp"
#include "apklab/orchestrator.hpp"
#include "apklab/plugins.hpp"
#include "apklab/report.hpp"
#include "apklab/simdevice.hpp"
#include "apklab/simscript.hpp"
#include "apklab/store.hpp"
#include "apklab/textutil.hpp"

namespace {

namespace fs = std::filesystem;
using namespace apklab;

constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kRunAborted = 2;

struct AnalyzeArgs {
    std::string sample;
    std::string config;
    std::string sim_script;
    std::string filters;
    std::string android_version;
    std::string output_dir;
    std::optional<std::string> plugins;
    std::string fixture;
};

int fail(const std::string& message) {
    std::fprintf(stderr, "error: %s\n", message.c_str());
    return kValidationError;
}

int run_analyze(const AnalyzeArgs& args) {
    std::string sample_bytes;
    try {
        sample_bytes = read_file(args.sample);
    } catch (const std::exception& e) {
        return fail(e.what());
    }

    FrameworkConfig config;
    try {
        std::optional<std::string> override_text;
        if (!args.config.empty()) override_text = read_file(args.config);
        config = load_config(default_config_text(),
                             override_text ? std::optional<std::string_view>(*override_text)
                                           : std::nullopt);
    } catch (const std::exception& e) {
        return fail(e.what());
    }

    if (!args.android_version.empty()) {
        auto v = android_version_from_string(args.android_version);
        if (!v) return fail("unsupported android_version '" + args.android_version + "'");
        config.android_version = *v;
    }
    if (!args.output_dir.empty()) config.result_root = args.output_dir;
    if (!args.sim_script.empty()) config.sim_script_path = args.sim_script;
    if (!args.filters.empty()) config.filter_rules_path = args.filters;
    if (!args.fixture.empty()) config.image_source = args.fixture;
    if (args.plugins) config.enabled_plugins = split_trimmed(*args.plugins, ',');

    // Everything that can be validated happens before the run directory is
    // created, so a precondition failure leaves no partial run state.
    if (config.image_source.empty()) return fail("no device fixture: pass --fixture");

    SimScript script;
    try {
        script = parse_script(read_file(config.sim_script_path));
    } catch (const std::exception& e) {
        return fail(std::string("sim script: ") + e.what());
    }

    FilterRuleSet rules;
    if (!config.filter_rules_path.empty()) {
        try {
            rules = load_rules_file(config.filter_rules_path);
        } catch (const std::exception& e) {
            return fail(e.what());
        }
    }

    try {
        load_fixture(config.image_source);
    } catch (const std::exception& e) {
        return fail(e.what());
    }

    AnalysisRun run;
    try {
        run = create_run(config, sample_bytes, fs::path(args.sample).filename().string());
    } catch (const std::exception& e) {
        return fail(e.what());
    }

    PluginRegistry registry;
    registry.load(builtin_catalog(), config, run);
    SimulatedDevice device;
    RunOutcome outcome = execute_run(run, registry, device, script, rules, sample_bytes);

    std::printf("run_id: %s\n", outcome.run_id.c_str());
    std::printf("result_dir: %s\n", outcome.result_dir.string().c_str());
    if (!outcome.install_ok)
        std::printf("install: failed (%s)\n", outcome.install_detail.c_str());
    for (const auto& [name, err] : run.disabled_plugins)
        std::printf("plugin %s: disabled (%s)\n", name.c_str(), err.c_str());
    for (const auto& [name, note] : run.degraded_plugins)
        if (!run.disabled_plugins.count(name))
            std::printf("plugin %s: degraded (%s)\n", name.c_str(), note.c_str());

    if (outcome.verdict != RunVerdict::Completed) {
        std::fprintf(stderr, "run aborted: %s\n", outcome.failure.c_str());
        return kRunAborted;
    }
    std::printf("report: %s\n", outcome.report_path.string().c_str());
    return kOk;
}

int run_report(const std::string& run_dir_flag, const std::string& run_id_flag,
               const std::string& output_dir, const std::string& filters_path) {
    fs::path run_dir;
    if (!run_dir_flag.empty()) {
        run_dir = run_dir_flag;
    } else if (!run_id_flag.empty()) {
        run_dir = fs::path(output_dir.empty() ? "results" : output_dir) / run_id_flag;
    } else {
        return fail("pass --run-dir or --run-id");
    }

    fs::path store_path = run_dir / "store.db";
    if (!fs::exists(store_path)) return fail("store not found: " + store_path.string());

    FilterRuleSet rules;
    if (!filters_path.empty()) {
        try {
            rules = load_rules_file(filters_path);
        } catch (const std::exception& e) {
            return fail(e.what());
        }
    }

    try {
        ResultStore store(store_path);
        std::string run_id = run_id_flag;
        if (run_id.empty()) {
            auto ids = store.run_ids();
            if (ids.size() != 1)
                return fail("store holds " + std::to_string(ids.size()) +
                            " runs; pass --run-id");
            run_id = ids.front();
        }
        fs::path report_path = run_dir / "report.xml";
        generate_report(store, run_id, rules, report_path);
        std::printf("report: %s\n", report_path.string().c_str());
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return kOk;
}

int run_check(const std::string& filters_path, const std::string& script_path) {
    if (filters_path.empty() && script_path.empty())
        return fail("pass --filters and/or --sim-script");
    bool clean = true;

    if (!filters_path.empty()) {
        try {
            FilterRuleSet rules = load_rules_file(filters_path);
            std::printf("ok: %s (%zu rules)\n", filters_path.c_str(), rules.rules.size());
        } catch (const std::exception& e) {
            std::printf("%s: %s\n", filters_path.c_str(), e.what());
            clean = false;
        }
    }

    if (!script_path.empty()) {
        try {
            std::string text = read_file(script_path);
            auto problems = check_script(text);
            if (problems.empty()) {
                std::printf("ok: %s\n", script_path.c_str());
            } else {
                for (const auto& p : problems)
                    std::printf("%s: %s\n", script_path.c_str(), p.c_str());
                clean = false;
            }
        } catch (const std::exception& e) {
            std::printf("%s: %s\n", script_path.c_str(), e.what());
            clean = false;
        }
    }
    return clean ? kOk : kValidationError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sandboxed mobile-app behavior analysis"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    std::string plugins_csv;
    CLI::App* analyze = app.add_subcommand("analyze", "Run a full analysis of one sample");
    analyze->add_option("sample", analyze_args.sample, "Sample file (APK)")->required();
    analyze->add_option("--config", analyze_args.config, "Config file overriding defaults");
    analyze->add_option("--sim-script", analyze_args.sim_script, "Device simulation script");
    analyze->add_option("--filters", analyze_args.filters, "Filter rules file");
    analyze->add_option("--android-version", analyze_args.android_version,
                        "Android version (2.3, 4.0, 4.1, 4.2)");
    analyze->add_option("--output-dir", analyze_args.output_dir, "Result root directory");
    CLI::Option* plugins_opt =
        analyze->add_option("--plugins", plugins_csv, "Comma-separated plugin list");
    analyze->add_option("--fixture", analyze_args.fixture, "Device scenario fixture");

    std::string report_run_dir, report_run_id, report_output_dir, report_filters;
    CLI::App* report = app.add_subcommand("report", "Regenerate a report from a run's store");
    report->add_option("--run-dir", report_run_dir, "Run directory holding store.db");
    report->add_option("--run-id", report_run_id, "Run id under the result root");
    report->add_option("--output-dir", report_output_dir, "Result root (with --run-id)");
    report->add_option("--filters", report_filters, "Filter rules file");

    std::string check_filters, check_script_path;
    CLI::App* check = app.add_subcommand("check", "Validate rule or script files");
    check->add_option("--filters", check_filters, "Filter rules file to validate");
    check->add_option("--sim-script", check_script_path, "Simulation script to validate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidationError;
    }

    if (analyze->parsed()) {
        if (plugins_opt->count() > 0) analyze_args.plugins = plugins_csv;
        return run_analyze(analyze_args);
    }
    if (report->parsed())
        return run_report(report_run_dir, report_run_id, report_output_dir, report_filters);
    if (check->parsed()) return run_check(check_filters, check_script_path);
    return kValidationError;
}
