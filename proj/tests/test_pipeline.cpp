#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "apklab/actions.hpp"
#include "apklab/config.hpp"
#include "apklab/errors.hpp"
#include "apklab/filters.hpp"
#include "apklab/orchestrator.hpp"
#include "apklab/rawlog.hpp"
#include "apklab/record.hpp"
#include "apklab/registry.hpp"
#include "apklab/report.hpp"
#include "apklab/run.hpp"
#include "apklab/simscript.hpp"
#include "apklab/store.hpp"
#include "apklab/target.hpp"
#include "apklab/textutil.hpp"
#include "apklab/xmlwriter.hpp"
#include "support/testutil.hpp"

using namespace apklab;
using testsupport::make_record;

namespace {

RunMetaRow meta_row(const std::string& run_id) {
    RunMetaRow m;
    m.run_id = run_id;
    m.filename = "sample.apk";
    m.md5 = "9a8b7c";
    m.sha1 = "1122334455";
    m.sha256 = std::string(64, 'e');
    m.started_at = "2013-09-02T10:00:00Z";
    m.finished_at = "2013-09-02T10:01:40Z";
    m.android_version = "4.1";
    return m;
}

// Target stub: no fixtures, no artifact files. Ack clocks advance by 100 ms;
// action validation still applies so a range violation stops the script.
class FakeTarget : public AnalysisTarget {
public:
    bool fail_start = false;
    InstallResult install_result{true, "installed fake.pkg"};
    int actions = 0;

    void start(const std::filesystem::path&, AnalysisRun&) override {
        if (fail_start) throw DeviceError("image copy failed: no such image");
        started_ = true;
    }
    InstallResult install_app(const SampleMeta&) override { return install_result; }
    ActionAck apply_action(const DeviceAction& action) override {
        validate_action(action);
        ++actions;
        clock_ += 100;
        return {clock_, ""};
    }
    ArtifactBundle collect_artifacts() override { return {}; }
    void stop() override { started_ = false; }

private:
    bool started_ = false;
    std::int64_t clock_ = 0;
};

// Emits one record during before_database and one during before_report. The
// second can only ever exist in the raw log.
class EmitterPlugin : public Plugin {
public:
    std::string name() const override { return "syscall"; }
    void initialize(Registrar& reg, const PluginSettings&) override {
        reg.add(HookEvent::BeforeDatabase, 0, [](StageContext& ctx) {
            ctx.emit("syscall", "syscall", 1,
                     {{"syscall", std::string("open")},
                      {"path", std::string("/data/data/com.foo/db")},
                      {"ret", std::int64_t{3}}});
        });
        reg.add(HookEvent::BeforeReport, 0, [](StageContext& ctx) {
            ctx.emit("syscall", "too_late", 2, {{"note", std::string("after persist")}});
        });
    }
};

class ThrowingPlugin : public Plugin {
public:
    std::string name() const override { return "throwy"; }
    void initialize(Registrar& reg, const PluginSettings&) override {
        reg.add(HookEvent::BeforeEmulatorStart, 0,
                [](StageContext&) { throw Error("callback blew up"); });
        reg.add(HookEvent::BeforeDatabase, 0, [](StageContext& ctx) {
            ctx.emit("throwy", "never", 0, {});
        });
    }
};

struct PipelineHarness {
    testsupport::TempDir tmp;
    FrameworkConfig config;
    AnalysisRun run;

    explicit PipelineHarness(std::vector<std::string> enabled)
        : config(make_config(tmp.path(), std::move(enabled))),
          run(create_run(config, "bytes", "t.apk")) {}

private:
    static FrameworkConfig make_config(const std::filesystem::path& root,
                                       std::vector<std::string> enabled) {
        FrameworkConfig c = load_config(default_config_text());
        c.result_root = root;
        c.enabled_plugins = std::move(enabled);
        return c;
    }
};

const StageOutcome* find_stage(const RunOutcome& out, const std::string& name) {
    for (const auto& s : out.stages)
        if (s.stage == name) return &s;
    return nullptr;
}

}  // namespace

TEST_CASE("canonical field payloads sort keys and trim whitespace") {
    FieldMap fields{{"zeta", std::int64_t{1}}, {"alpha", std::string("x")},
                    {"mid", std::string("a b")}};
    CHECK(canonical_fields_json(fields) == R"({"alpha":"x","mid":"a b","zeta":1})");

    PluginRecord rec = make_record("network", "connection", fields, 7, 1234);
    std::string line = record_to_line(rec);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(record_from_line(line) == rec);

    CHECK_THROWS_WITH_AS(record_from_line(R"({"plugin":"p","event_type":"e","seq":1,"ts":0,)"
                                          R"("fields":{"bad":1.5}})"),
                         doctest::Contains("must be a string or integer"), ParseError);
}

TEST_CASE("store round trips meta and records in canonical order") {
    testsupport::TempDir tmp;
    ResultStore store(tmp.path() / "store.db");
    RunMetaRow meta = meta_row("run-1");

    std::vector<PluginRecord> records;
    for (int seq = 5; seq >= 1; --seq) {
        records.push_back(make_record("network", "connection",
                                      {{"bytes", std::int64_t{seq * 10}}}, seq, seq));
    }
    records.push_back(make_record("core", "sample_meta", {{"size", std::int64_t{5}}}, 1, 0));
    records.push_back(make_record("core", "plugin_status",
                                  {{"plugin", std::string("network")},
                                   {"status", std::string("ok")}},
                                  2, 0));
    store.persist(meta, records);

    auto got_meta = store.run_meta("run-1");
    REQUIRE(got_meta.has_value());
    CHECK(*got_meta == meta);
    CHECK_FALSE(store.run_meta("missing").has_value());

    CHECK(store.record_count("run-1") == 7);
    CHECK(store.record_count("run-1", "network") == 5);
    CHECK(store.record_count("run-1", "ghost") == 0);
    CHECK(store.record_count("run-1", "core") == 2);

    std::vector<PluginRecord> back = store.records_for_run("run-1");
    REQUIRE(back.size() == 7);
    CHECK(back[0].plugin == "core");  // plugin ascending
    CHECK(back[1].plugin == "core");
    for (int i = 2; i < 7; ++i) {
        CHECK(back[i].plugin == "network");
        CHECK(back[i].seq == i - 1);  // seq ascending within plugin
    }
    // Types survive the payload round trip.
    CHECK(std::get<std::int64_t>(back[2].fields.at("bytes")) == 10);
    CHECK(std::get<std::string>(back[1].fields.at("status")) == "ok");
}

TEST_CASE("persist is idempotent and replaces a rerun wholesale") {
    testsupport::TempDir tmp;
    ResultStore store(tmp.path() / "store.db");
    RunMetaRow meta = meta_row("run-1");
    std::vector<PluginRecord> records = {
        make_record("syscall", "syscall", {{"ret", std::int64_t{0}}}, 1, 1),
        make_record("syscall", "syscall", {{"ret", std::int64_t{-1}}}, 2, 2),
    };

    store.persist(meta, records);
    store.persist(meta, records);
    CHECK(store.record_count("run-1") == 2);
    CHECK(store.records_for_run("run-1") == records);
    CHECK(store.run_ids() == std::vector<std::string>{"run-1"});

    // A rerun with fewer records leaves no stale rows behind.
    std::vector<PluginRecord> fewer = {records[0]};
    meta.finished_at = "2013-09-02T11:00:00Z";
    store.persist(meta, fewer);
    CHECK(store.record_count("run-1") == 1);
    CHECK(store.run_meta("run-1")->finished_at == "2013-09-02T11:00:00Z");

    RunMetaRow second = meta_row("run-0");
    store.persist(second, records);
    CHECK(store.run_ids() == std::vector<std::string>{"run-0", "run-1"});
    CHECK(store.record_count("run-0") == 2);
    CHECK(store.record_count("run-1") == 1);
}

TEST_CASE("store surfaces open failures") {
    testsupport::TempDir tmp;
    std::filesystem::create_directory(tmp.path() / "taken");
    CHECK_THROWS_WITH_AS(ResultStore(tmp.path() / "taken"), doctest::Contains("store:"),
                         StoreError);
}

TEST_CASE("xml escaping keeps documents well formed") {
    CHECK(xml_escape("a & b < c > d", false) == "a &amp; b &lt; c &gt; d");
    CHECK(xml_escape("say \"hi\"", false) == "say \"hi\"");
    CHECK(xml_escape("say \"hi\"", true) == "say &quot;hi&quot;");
    CHECK(xml_escape(std::string("a\x01") + "b", false) == "a\xef\xbf\xbd" "b");
    CHECK(xml_escape("tab\there\nnl", false) == "tab\there\nnl");
}

TEST_CASE("xml writer emits a deterministic indented document") {
    XmlWriter xml;
    xml.open("a", {{"k", "v&"}});
    xml.text_element("b", {}, "x < y");
    xml.self_close("c", {{"q", "\""}});
    xml.close();
    CHECK(xml.str() ==
          "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
          "<a k=\"v&amp;\">\n"
          "  <b>x &lt; y</b>\n"
          "  <c q=\"&quot;\"/>\n"
          "</a>\n");

    XmlWriter bad;
    CHECK_THROWS_AS(bad.close(), Error);
}

TEST_CASE("report renders meta, statuses, and only the kept records") {
    testsupport::TempDir tmp;
    ResultStore store(tmp.path() / "store.db");
    RunMetaRow meta = meta_row("run-x");

    std::vector<PluginRecord> records = {
        make_record("core", "sample_meta",
                    {{"filename", std::string("sample.apk")}, {"size", std::int64_t{1024}}}, 1,
                    0),
        make_record("core", "plugin_status",
                    {{"plugin", std::string("syscall")}, {"status", std::string("ok")}}, 2, 0),
        make_record("core", "plugin_status",
                    {{"plugin", std::string("network")},
                     {"status", std::string("disabled")},
                     {"detail", std::string("before_database: pcap missing")}},
                    3, 0),
        make_record("syscall", "syscall",
                    {{"syscall", std::string("open")}, {"path", std::string("/data/app/x.apk")},
                     {"ret", std::int64_t{3}}},
                    1, 10),
        make_record("syscall", "syscall",
                    {{"syscall", std::string("open")},
                     {"path", std::string("/data/data/com.foo/db")},
                     {"ret", std::int64_t{4}}},
                    2, 11),
    };
    store.persist(meta, records);

    FilterRuleSet rules = load_rules(R"([
  {"id": "app-reads", "plugin": "syscall", "kind": "substring", "field": "path",
   "pattern": "/data/app/"}
])");
    std::string doc = generate_report(store, "run-x", rules, tmp.path() / "report.xml");

    CHECK(doc.find("<analysis run_id=\"run-x\" android_version=\"4.1\">") != std::string::npos);
    CHECK(doc.find("filename=\"sample.apk\" size=\"1024\"") != std::string::npos);
    CHECK(doc.find("sha256=\"" + std::string(64, 'e') + "\"") != std::string::npos);
    CHECK(doc.find("started_at=\"2013-09-02T10:00:00Z\"") != std::string::npos);
    CHECK(doc.find("<plugin name=\"network\" status=\"disabled\" "
                   "detail=\"before_database: pcap missing\"/>") != std::string::npos);
    CHECK(doc.find("<plugin name=\"syscall\" status=\"ok\"/>") != std::string::npos);

    // Section totals count the suppressed record; its body is absent.
    CHECK(doc.find("<result plugin=\"syscall\" total=\"2\" suppressed=\"1\" "
                   "expr_faults=\"0\">") != std::string::npos);
    CHECK(doc.find("<filter rule=\"app-reads\" suppressed=\"1\"/>") != std::string::npos);
    CHECK(doc.find("/data/data/com.foo/db") != std::string::npos);
    CHECK(doc.find("/data/app/x.apk") == std::string::npos);

    // The disabled plugin still gets a section, with nothing in it.
    CHECK(doc.find("<result plugin=\"network\" total=\"0\" suppressed=\"0\" "
                   "expr_faults=\"0\">") != std::string::npos);

    // Regeneration from the same store is byte-identical, in memory and on disk.
    std::string again = generate_report(store, "run-x", rules, tmp.path() / "report2.xml");
    CHECK(doc == again);
    CHECK(read_file(tmp.path() / "report.xml") == read_file(tmp.path() / "report2.xml"));

    CHECK_THROWS_WITH_AS(generate_report(store, "ghost", rules, tmp.path() / "r.xml"),
                         doctest::Contains("no analysis_run row for 'ghost'"), StoreError);
}

TEST_CASE("execute_run drives the whole lifecycle to a report") {
    PipelineHarness h({"syscall"});
    PluginRegistry registry;
    registry.load({std::make_shared<EmitterPlugin>()}, h.config, h.run);
    FakeTarget target;
    SimScript script = parse_script("unlock\nwait 50\nmonkey 3\n");

    RunOutcome out = execute_run(h.run, registry, target, script, FilterRuleSet{}, "bytes");

    CHECK(out.verdict == RunVerdict::Completed);
    CHECK(to_string(out.verdict) == "completed");
    CHECK(out.failure.empty());
    CHECK(out.install_ok);
    CHECK(out.install_detail == "installed fake.pkg");
    CHECK(out.dispatches.size() == 6);
    CHECK(target.actions == 3);
    CHECK(out.sim_log.completed);
    REQUIRE(find_stage(out, "persist") != nullptr);
    CHECK(find_stage(out, "persist")->ok);
    REQUIRE(find_stage(out, "report") != nullptr);
    CHECK(find_stage(out, "report")->ok);
    CHECK(h.run.stage == RunStage::Completed);

    CHECK(std::filesystem::exists(out.report_path));
    CHECK(std::filesystem::exists(out.store_path));
    CHECK(std::filesystem::exists(h.run.result_dir / "simulation.log"));
    CHECK(read_file(h.run.result_dir / "simulation.log").find("completed") !=
          std::string::npos);

    // Everything before persist is in the store; the before_report record is
    // only in the raw log.
    ResultStore store(out.store_path);
    CHECK(store.record_count(out.run_id, "syscall") == 1);
    std::vector<PluginRecord> raw = read_raw_log(out.raw_paths.at("syscall"));
    REQUIRE(raw.size() == 2);
    CHECK(raw[0].event_type == "syscall");
    CHECK(raw[1].event_type == "too_late");

    std::string report = read_file(out.report_path);
    CHECK(report.find("event_type=\"syscall\"") != std::string::npos);
    CHECK(report.find("too_late") == std::string::npos);
    CHECK(report.find("<plugin name=\"syscall\" status=\"ok\"/>") != std::string::npos);
    CHECK(report.find("filename=\"t.apk\" size=\"5\"") != std::string::npos);
}

TEST_CASE("a plugin failure disables it but the run still reports") {
    PipelineHarness h({"throwy"});
    PluginRegistry registry;
    registry.load({std::make_shared<ThrowingPlugin>()}, h.config, h.run);
    FakeTarget target;
    SimScript script = parse_script("");

    RunOutcome out = execute_run(h.run, registry, target, script, FilterRuleSet{}, "bytes");

    CHECK(out.verdict == RunVerdict::Completed);
    REQUIRE(h.run.disabled_plugins.count("throwy") == 1);
    CHECK(h.run.disabled_plugins.at("throwy") ==
          "before_emulator_start: callback blew up");

    // Its later callback never ran, so it emitted nothing anywhere.
    ResultStore store(out.store_path);
    CHECK(store.record_count(out.run_id, "throwy") == 0);

    std::string report = read_file(out.report_path);
    CHECK(report.find("<plugin name=\"throwy\" status=\"disabled\" "
                      "detail=\"before_emulator_start: callback blew up\"/>") !=
          std::string::npos);
}

TEST_CASE("install refusal is a result, not an abort") {
    PipelineHarness h({});
    PluginRegistry registry;
    FakeTarget target;
    target.install_result = {false, "package parse failure"};
    SimScript script = parse_script("unlock\n");

    RunOutcome out = execute_run(h.run, registry, target, script, FilterRuleSet{}, "bytes");
    CHECK(out.verdict == RunVerdict::Completed);
    CHECK_FALSE(out.install_ok);
    CHECK(out.install_detail == "package parse failure");
    CHECK(std::filesystem::exists(out.report_path));
    REQUIRE(find_stage(out, "target:install") != nullptr);
    CHECK_FALSE(find_stage(out, "target:install")->ok);
}

TEST_CASE("target start failure aborts before any artifacts") {
    PipelineHarness h({});
    PluginRegistry registry;
    FakeTarget target;
    target.fail_start = true;

    RunOutcome out =
        execute_run(h.run, registry, target, parse_script(""), FilterRuleSet{}, "bytes");
    CHECK(out.verdict == RunVerdict::Aborted);
    CHECK(out.failure == "target start: image copy failed: no such image");
    CHECK(out.dispatches.size() == 1);
    CHECK(h.run.stage == RunStage::Failed);
    CHECK_FALSE(std::filesystem::exists(out.report_path));
    CHECK_FALSE(std::filesystem::exists(out.store_path));
}

TEST_CASE("a script fault stops the simulation, not the run") {
    PipelineHarness h({});
    PluginRegistry registry;
    FakeTarget target;
    SimScript script = parse_script("unlock\nbattery 'charging' 150\nlock\n");

    RunOutcome out = execute_run(h.run, registry, target, script, FilterRuleSet{}, "bytes");
    CHECK(out.verdict == RunVerdict::Completed);
    CHECK_FALSE(out.sim_log.completed);
    CHECK(target.actions == 1);  // the violating action and everything after never applied
    REQUIRE(find_stage(out, "simulation") != nullptr);
    CHECK_FALSE(find_stage(out, "simulation")->ok);
    CHECK(read_file(h.run.result_dir / "simulation.log").find("stopped") != std::string::npos);
    CHECK(std::filesystem::exists(out.report_path));
}

TEST_CASE("persist failure aborts the run after raw logs exist") {
    PipelineHarness h({"syscall"});
    PluginRegistry registry;
    registry.load({std::make_shared<EmitterPlugin>()}, h.config, h.run);
    FakeTarget target;
    std::filesystem::create_directory(h.run.store_path());  // database cannot be created

    RunOutcome out =
        execute_run(h.run, registry, target, parse_script(""), FilterRuleSet{}, "bytes");
    CHECK(out.verdict == RunVerdict::Aborted);
    CHECK(out.failure.rfind("pipeline: ", 0) == 0);
    CHECK(h.run.stage == RunStage::Failed);
    CHECK(out.dispatches.size() == 5);  // before_report never fired
    CHECK_FALSE(std::filesystem::exists(out.report_path));

    // The raw log survives as the most detailed record of what happened.
    std::vector<PluginRecord> raw = read_raw_log(h.run.raw_dir() / "syscall.jsonl");
    CHECK(raw.size() == 1);
}
