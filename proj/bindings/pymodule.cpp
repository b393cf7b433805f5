#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "apklab/config.hpp"
#include "apklab/errors.hpp"
#include "apklab/filters.hpp"
#include "apklab/fixture.hpp"
#include "apklab/hashing.hpp"
#include "apklab/netparse.hpp"
#include "apklab/orchestrator.hpp"
#include "apklab/plugins.hpp"
#include "apklab/record.hpp"
#include "apklab/registry.hpp"
#include "apklab/run.hpp"
#include "apklab/simdevice.hpp"
#include "apklab/simscript.hpp"
#include "apklab/staticapk.hpp"
#include "apklab/store.hpp"
#include "apklab/textutil.hpp"

namespace py = pybind11;
using namespace apklab;

namespace {

py::dict fields_to_dict(const FieldMap& fields) {
    py::dict out;
    for (const auto& [key, value] : fields) {
        if (std::holds_alternative<std::int64_t>(value))
            out[py::str(key)] = std::get<std::int64_t>(value);
        else
            out[py::str(key)] = std::get<std::string>(value);
    }
    return out;
}

py::dict record_to_dict(const PluginRecord& rec) {
    py::dict out;
    out["plugin"] = rec.plugin;
    out["event_type"] = rec.event_type;
    out["seq"] = rec.seq;
    out["ts"] = rec.ts;
    out["fields"] = fields_to_dict(rec.fields);
    return out;
}

py::dict analyze(const std::filesystem::path& sample_path,
                 const std::filesystem::path& fixture_path,
                 const std::filesystem::path& script_path,
                 const std::optional<std::filesystem::path>& filters_path,
                 const std::filesystem::path& output_dir,
                 const std::optional<std::string>& config_text) {
    std::string sample_bytes = read_file(sample_path);
    FrameworkConfig config = load_config(
        default_config_text(),
        config_text ? std::optional<std::string_view>(*config_text) : std::nullopt);
    config.image_source = fixture_path.string();
    config.result_root = output_dir.string();

    SimScript script = parse_script(read_file(script_path));
    FilterRuleSet rules;
    if (filters_path) rules = load_rules_file(*filters_path);
    load_fixture(config.image_source);

    AnalysisRun run = create_run(config, sample_bytes, sample_path.filename().string());
    PluginRegistry registry;
    registry.load(builtin_catalog(), config, run);
    SimulatedDevice device;
    RunOutcome outcome = execute_run(run, registry, device, script, rules, sample_bytes);

    py::dict out;
    out["run_id"] = outcome.run_id;
    out["verdict"] = to_string(outcome.verdict);
    out["result_dir"] = outcome.result_dir.string();
    out["store_path"] = outcome.store_path.string();
    out["report_path"] = outcome.report_path.string();
    out["install_ok"] = outcome.install_ok;
    if (!outcome.failure.empty()) out["failure"] = outcome.failure;
    py::dict disabled;
    for (const auto& [name, err] : run.disabled_plugins) disabled[py::str(name)] = err;
    out["disabled_plugins"] = disabled;
    py::dict degraded;
    for (const auto& [name, note] : run.degraded_plugins) degraded[py::str(name)] = note;
    out["degraded_plugins"] = degraded;
    return out;
}

py::dict pcap_summary(py::bytes data) {
    std::string bytes = data;
    net::CaptureStats stats;
    auto packets = net::parse_pcap(bytes, &stats);
    auto connections = net::extract_connections(packets);
    auto dns = net::extract_dns(packets);
    auto http = net::extract_http(packets);

    py::list conn_rows;
    for (const auto& [key, cs] : connections) {
        py::dict row;
        row["initiator"] = key.initiator.ip;
        row["responder"] = key.responder.ip;
        row["proto"] = key.proto;
        if (key.has_ports) {
            row["initiator_port"] = key.initiator.port;
            row["responder_port"] = key.responder.port;
        }
        row["packets"] = cs.packet_count;
        row["bytes"] = cs.byte_count;
        conn_rows.append(row);
    }
    py::list dns_rows;
    for (const auto& rec : dns.records) {
        py::dict row;
        row["qname"] = rec.qname;
        row["qtype"] = rec.qtype;
        row["nxdomain"] = rec.nxdomain;
        py::list answers;
        for (const auto& a : rec.answers) {
            py::dict ans;
            ans["name"] = a.name;
            ans["type"] = a.type;
            ans["rdata"] = a.rdata;
            answers.append(ans);
        }
        row["answers"] = answers;
        dns_rows.append(row);
    }
    py::list http_rows;
    for (const auto& t : http.transactions) {
        py::dict row;
        row["method"] = t.method;
        row["url"] = t.url;
        row["host"] = t.host;
        row["path"] = t.path;
        py::dict get_params, post_params;
        for (const auto& [k, v] : t.get_params) get_params[py::str(k)] = v;
        for (const auto& [k, v] : t.post_params) post_params[py::str(k)] = v;
        row["get_params"] = get_params;
        row["post_params"] = post_params;
        http_rows.append(row);
    }

    py::dict out;
    out["packet_count"] = packets.size();
    out["connections"] = conn_rows;
    out["dns"] = dns_rows;
    out["http"] = http_rows;
    return out;
}

py::dict manifest_summary(py::bytes apk_bytes) {
    ApkArchive apk{std::string(apk_bytes)};
    auto entry = apk.find("AndroidManifest.xml");
    if (!entry) throw std::runtime_error("archive has no AndroidManifest.xml");
    ManifestInfo info = decode_manifest(apk.read(*entry));
    py::dict out;
    out["package"] = info.package;
    out["permissions"] = info.permissions;
    out["services"] = info.services;
    out["receivers"] = info.receivers;
    out["activities"] = info.activities;
    return out;
}

py::list apk_urls(py::bytes apk_bytes, std::size_t min_run) {
    ApkArchive apk{std::string(apk_bytes)};
    py::list out;
    for (const auto& f : extract_urls(apk, min_run)) {
        py::dict row;
        row["entry"] = f.entry;
        row["url"] = f.url;
        out.append(row);
    }
    return out;
}

py::dict filter_record(const std::string& rules_json, const std::string& record_line) {
    FilterRuleSet rules = load_rules(rules_json);
    PluginRecord rec = record_from_line(record_line);
    Verdict v = evaluate(rules, rec);
    py::dict out;
    out["suppress"] = v.suppress;
    if (!v.rule_id.empty()) out["rule_id"] = v.rule_id;
    return out;
}

py::list store_records(const std::filesystem::path& store_path, const std::string& run_id) {
    ResultStore store(store_path);
    py::list out;
    for (const auto& rec : store.records_for_run(run_id)) out.append(record_to_dict(rec));
    return out;
}

}  // namespace

PYBIND11_MODULE(_apklab, m) {
    m.doc() = "Sandboxed mobile-app behavior analysis core";

    m.def("sha256_hex", [](py::bytes b) { return sha256_hex(std::string(b)); },
          py::arg("data"), "Hex SHA-256 of a byte string");
    m.def("md5_hex", [](py::bytes b) { return md5_hex(std::string(b)); }, py::arg("data"));
    m.def("sha1_hex", [](py::bytes b) { return sha1_hex(std::string(b)); }, py::arg("data"));

    m.def("check_sim_script", &check_script, py::arg("text"),
          "Validate a simulation script; returns a list of diagnostics (empty when clean)");
    m.def("default_config", &default_config_text, "Built-in configuration defaults (INI)");

    m.def("analyze", &analyze, py::arg("sample_path"), py::arg("fixture_path"),
          py::arg("script_path"), py::arg("filters_path") = std::nullopt,
          py::arg("output_dir") = "results", py::arg("config_text") = std::nullopt,
          "Run a full analysis of one sample against a device fixture");

    m.def("pcap_summary", &pcap_summary, py::arg("data"),
          "Parse a capture file: connections, DNS queries, HTTP transactions");
    m.def("manifest_summary", &manifest_summary, py::arg("apk_bytes"),
          "Decode the manifest of an app archive (plain or binary form)");
    m.def("apk_urls", &apk_urls, py::arg("apk_bytes"), py::arg("min_run") = 6,
          "Printable URL strings found in the archive's entries");

    m.def("filter_record", &filter_record, py::arg("rules_json"), py::arg("record_line"),
          "Evaluate one JSON record line against a rules document");
    m.def("store_records", &store_records, py::arg("store_path"), py::arg("run_id"),
          "Load all persisted records of a run from its store");

    py::register_exception<Error>(m, "AnalysisError");
}
