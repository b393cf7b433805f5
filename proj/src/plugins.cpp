#include "apklab/plugins.hpp"

#include <charconv>
#include <future>
#include <map>
#include <set>

#include "apklab/apilog.hpp"
#include "apklab/errors.hpp"
#include "apklab/fsdiff.hpp"
#include "apklab/lookup.hpp"
#include "apklab/netparse.hpp"
#include "apklab/staticapk.hpp"
#include "apklab/syscalls.hpp"
#include "apklab/target.hpp"
#include "apklab/textutil.hpp"
#include "apklab/wirebuild.hpp"

namespace apklab {
namespace {

// Dispatch priorities. before_database runs heavyweight parsers first and
// the possibly-still-polling lookup client last.
constexpr int kStaticScanPrio = 20;    // before_emulator_start
constexpr int kLookupStartPrio = 10;   // before_emulator_start
constexpr int kStaticEmitPrio = 60;    // before_database
constexpr int kNetworkEmitPrio = 50;
constexpr int kSyscallEmitPrio = 40;
constexpr int kFsdiffEmitPrio = 30;
constexpr int kApilogEmitPrio = 20;
constexpr int kLookupEmitPrio = 10;

std::int64_t int_setting(const PluginSettings& settings, const std::string& key,
                         std::int64_t fallback) {
    auto it = settings.find(key);
    if (it == settings.end() || it->second.empty()) return fallback;
    const std::string& text = it->second;
    std::int64_t value = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw ConfigError("bad integer for '" + key + "': '" + text + "'");
    return value;
}

bool bool_setting(const PluginSettings& settings, const std::string& key, bool fallback) {
    auto it = settings.find(key);
    if (it == settings.end() || it->second.empty()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad boolean for '" + key + "': '" + v + "'");
}

// nullopt when the bundle or the file is unusable; the plugin degrades
// instead of failing the run.
std::optional<std::string> read_artifact(StageContext& ctx, const std::filesystem::path& path,
                                         const std::string& plugin, const char* what) {
    if (!ctx.bundle || path.empty()) {
        ctx.mark_degraded(plugin, std::string(what) + " not collected");
        return std::nullopt;
    }
    try {
        return read_file(path);
    } catch (const std::exception& e) {
        ctx.mark_degraded(plugin, e.what());
        return std::nullopt;
    }
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// ---------------------------------------------------------------- fsdiff

class FsdiffPlugin : public Plugin {
public:
    std::string name() const override { return "fsdiff"; }

    void initialize(Registrar& reg, const PluginSettings&) override {
        reg.add(HookEvent::BeforeDatabase, kFsdiffEmitPrio,
                [this](StageContext& ctx) { emit_diff(ctx); });
    }

private:
    static void add_entry_fields(FieldMap& fields, const ManifestEntry& entry) {
        fields["kind"] = entry.kind;
        fields["mode"] = entry.mode;
        if (!entry.sha256.empty()) fields["sha256"] = entry.sha256;
        if (!entry.target.empty()) fields["target"] = entry.target;
    }

    void emit_diff(StageContext& ctx) {
        if (!ctx.bundle || ctx.bundle->pre_snapshot_path.empty() ||
            ctx.bundle->post_snapshot_path.empty()) {
            ctx.mark_degraded(name(), "snapshots not collected");
            return;
        }
        SnapshotManifest pre = read_manifest(ctx.bundle->pre_snapshot_path);
        SnapshotManifest post = read_manifest(ctx.bundle->post_snapshot_path);
        FsDiff diff = diff_manifests(pre, post);

        std::map<std::string, const ManifestEntry*> pre_by_path, post_by_path;
        for (const auto& e : pre.entries) pre_by_path[e.path] = &e;
        for (const auto& e : post.entries) post_by_path[e.path] = &e;

        for (const auto& path : diff.created) {
            FieldMap fields{{"path", path}};
            if (auto it = post_by_path.find(path); it != post_by_path.end())
                add_entry_fields(fields, *it->second);
            ctx.emit(name(), "fs_created", 0, std::move(fields));
        }
        for (const auto& path : diff.deleted) {
            FieldMap fields{{"path", path}};
            if (auto it = pre_by_path.find(path); it != pre_by_path.end())
                add_entry_fields(fields, *it->second);
            ctx.emit(name(), "fs_deleted", 0, std::move(fields));
        }
        for (const auto& m : diff.modified)
            ctx.emit(name(), "fs_modified", 0,
                     {{"path", m.path},
                      {"pre_sha256", m.pre_sha256},
                      {"post_sha256", m.post_sha256}});
        for (const auto& m : diff.mode_changed)
            ctx.emit(name(), "fs_mode_changed", 0,
                     {{"path", m.path}, {"pre_mode", m.pre_mode}, {"post_mode", m.post_mode}});
    }
};

// --------------------------------------------------------------- network

class NetworkPlugin : public Plugin {
public:
    std::string name() const override { return "network"; }

    void initialize(Registrar& reg, const PluginSettings& settings) override {
        if (auto it = settings.find("http_ports"); it != settings.end()) {
            ports_.clear();
            for (const auto& piece : split_trimmed(it->second, ',')) {
                std::int64_t port = 0;
                auto [p, ec] =
                    std::from_chars(piece.data(), piece.data() + piece.size(), port);
                if (ec != std::errc{} || p != piece.data() + piece.size() || port < 1 ||
                    port > 65535)
                    throw ConfigError("bad http_ports entry '" + piece + "'");
                ports_.insert(static_cast<std::uint16_t>(port));
            }
        }
        reg.add(HookEvent::BeforeDatabase, kNetworkEmitPrio,
                [this](StageContext& ctx) { emit_traffic(ctx); });
    }

private:
    static std::string proto_name(std::uint8_t proto) {
        switch (proto) {
            case 1: return "icmp";
            case 6: return "tcp";
            case 17: return "udp";
            default: return "proto_" + std::to_string(proto);
        }
    }

    static std::string endpoint_text(const net::Endpoint& ep) {
        return wire::ipv4_to_string(ep.ip) + ":" + std::to_string(ep.port);
    }

    void emit_traffic(StageContext& ctx) {
        auto bytes = read_artifact(ctx, ctx.bundle ? ctx.bundle->pcap_path : "", name(),
                                   "capture");
        if (!bytes) return;
        std::vector<net::Packet> packets = net::parse_pcap(*bytes);

        for (const auto& [key, stats] : net::extract_connections(packets)) {
            FieldMap fields{{"proto", proto_name(key.proto)},
                            {"initiator_ip", wire::ipv4_to_string(key.initiator.ip)},
                            {"responder_ip", wire::ipv4_to_string(key.responder.ip)},
                            {"packets", static_cast<std::int64_t>(stats.packet_count)},
                            {"bytes", static_cast<std::int64_t>(stats.byte_count)},
                            {"first_us", stats.first_us},
                            {"last_us", stats.last_us}};
            if (key.has_ports) {
                fields["initiator_port"] = static_cast<std::int64_t>(key.initiator.port);
                fields["responder_port"] = static_cast<std::int64_t>(key.responder.port);
            }
            ctx.emit(name(), "connection", stats.first_us / 1000, std::move(fields));
        }

        for (const auto& rec : net::extract_dns(packets).records) {
            if (rec.parse_error) {
                ctx.emit(name(), "dns_query", 0, {{"parse_error", rec.raw_hex}});
                continue;
            }
            FieldMap fields{{"txid", static_cast<std::int64_t>(rec.txid)},
                            {"qname", rec.qname},
                            {"qtype", rec.qtype},
                            {"nxdomain", static_cast<std::int64_t>(rec.nxdomain ? 1 : 0)}};
            if (!rec.answers.empty()) {
                std::vector<std::string> parts;
                for (const auto& a : rec.answers) parts.push_back(a.type + " " + a.rdata);
                fields["answers"] = join(parts, ", ");
            }
            ctx.emit(name(), "dns_query", 0, std::move(fields));
        }

        for (const auto& tx : net::extract_http(packets, ports_).transactions) {
            FieldMap fields{{"method", tx.method},
                            {"url", tx.url},
                            {"version", tx.version},
                            {"path", tx.path},
                            {"client", endpoint_text(tx.client)},
                            {"server", endpoint_text(tx.server)}};
            if (!tx.host_missing) fields["host"] = tx.host;
            std::vector<std::string> header_lines;
            for (const auto& [k, v] : tx.headers) {
                header_lines.push_back(k + ": " + v);
                fields["header." + to_lower(k)] = v;
            }
            fields["headers"] = join(header_lines, "\n");
            for (const auto& [k, v] : tx.get_params) fields["get." + k] = v;
            for (const auto& [k, v] : tx.post_params) fields["post." + k] = v;
            if (!tx.body_excerpt.empty()) fields["body_excerpt"] = tx.body_excerpt;
            ctx.emit(name(), "http_request", 0, std::move(fields));
        }
    }

    std::set<std::uint16_t> ports_{80};
};

// --------------------------------------------------------------- syscall

class SyscallPlugin : public Plugin {
public:
    std::string name() const override { return "syscall"; }

    void initialize(Registrar& reg, const PluginSettings& settings) override {
        if (auto it = settings.find("indicators"); it != settings.end() && !it->second.empty())
            indicators_ = indicators_from_json(read_file(it->second));
        else
            indicators_ = default_indicators();
        reg.add(HookEvent::BeforeDatabase, kSyscallEmitPrio,
                [this](StageContext& ctx) { emit_trace(ctx); });
    }

private:
    static FieldMap record_fields(const SyscallRecord& rec) {
        FieldMap fields{{"syscall", rec.syscall},
                        {"pid", rec.pid},
                        {"comm", rec.comm},
                        {"ret", rec.ret}};
        const SyscallSpec* spec = syscall_spec(rec.syscall);
        for (std::size_t i = 0; i < rec.args.size() && spec && i < spec->args.size(); ++i) {
            const std::string key(spec->args[i].name);
            if (auto* s = std::get_if<std::string>(&rec.args[i]))
                fields[key] = *s;
            else
                fields[key] = std::get<std::int64_t>(rec.args[i]);
        }
        return fields;
    }

    void emit_trace(StageContext& ctx) {
        auto bytes = read_artifact(ctx, ctx.bundle ? ctx.bundle->syscall_trace_path : "",
                                   name(), "syscall trace");
        if (!bytes) return;
        TraceParse parsed = parse_trace(*bytes);

        for (const auto& rec : parsed.records)
            ctx.emit(name(), "syscall", rec.ts, record_fields(rec));
        for (const auto& d : parsed.diagnostics)
            ctx.emit(name(), "parse_diagnostic", 0,
                     {{"line", static_cast<std::int64_t>(d.line)}, {"message", d.message}});

        SyscallSummary summary = summarize(parsed.records, indicators_);
        for (const auto& [index, indicator] : summary.suspicious) {
            FieldMap fields = record_fields(parsed.records[index]);
            fields["indicator"] = indicator;
            ctx.emit(name(), "syscall_suspicious", parsed.records[index].ts, std::move(fields));
        }
        ctx.emit(name(), "syscall_summary", 0,
                 {{"processes", static_cast<std::int64_t>(summary.per_process.size())},
                  {"total_calls", static_cast<std::int64_t>(parsed.records.size())},
                  {"suspicious", static_cast<std::int64_t>(summary.suspicious.size())}});
    }

    std::vector<ExploitIndicator> indicators_;
};

// ---------------------------------------------------------------- static

struct StaticFindings {
    bool archive_ok = false;
    std::string error;           // archive-level failure
    std::string manifest_error;  // manifest-level failure, findings still usable
    std::optional<ManifestInfo> manifest;
    std::vector<UrlFinding> urls;
    std::vector<FiletypeReport> filetypes;
};

StaticFindings scan_sample(std::string bytes, std::size_t min_run) {
    StaticFindings f;
    try {
        ApkArchive apk(std::move(bytes));
        f.archive_ok = true;
        if (const ApkEntry* entry = apk.find("AndroidManifest.xml")) {
            try {
                f.manifest = decode_manifest(apk.read(*entry));
            } catch (const std::exception& e) {
                f.manifest_error = e.what();
            }
        } else {
            f.manifest_error = "AndroidManifest.xml not present";
        }
        f.urls = extract_urls(apk, min_run);
        f.filetypes = identify_filetypes(apk);
    } catch (const std::exception& e) {
        f.error = e.what();
    }
    return f;
}

class StaticPlugin : public Plugin {
public:
    std::string name() const override { return "static"; }

    void initialize(Registrar& reg, const PluginSettings& settings) override {
        min_run_ = static_cast<std::size_t>(int_setting(settings, "min_string_run", 6));
        // The scan is pure over sample bytes, so it runs in the background
        // across the whole simulation and joins before records are due.
        reg.add(HookEvent::BeforeEmulatorStart, kStaticScanPrio, [this](StageContext& ctx) {
            scan_ = std::async(std::launch::async, scan_sample, std::string(ctx.sample_bytes),
                               min_run_);
        });
        reg.add(HookEvent::BeforeDatabase, kStaticEmitPrio,
                [this](StageContext& ctx) { emit_findings(ctx); });
    }

private:
    void emit_findings(StageContext& ctx) {
        if (!scan_.valid()) {
            ctx.mark_degraded(name(), "scan never started");
            return;
        }
        StaticFindings f = scan_.get();
        if (!f.archive_ok) {
            ctx.mark_degraded(name(), f.error);
            return;
        }
        if (f.manifest) {
            ctx.emit(name(), "manifest", 0,
                     {{"package", f.manifest->package},
                      {"permissions", join(f.manifest->permissions, ",")},
                      {"services", join(f.manifest->services, ",")},
                      {"receivers", join(f.manifest->receivers, ",")},
                      {"activities", join(f.manifest->activities, ",")}});
        } else {
            ctx.mark_degraded(name(), "manifest: " + f.manifest_error);
        }
        for (const auto& u : f.urls)
            ctx.emit(name(), "url_string", 0, {{"entry", u.entry}, {"url", u.url}});
        for (const auto& ft : f.filetypes)
            ctx.emit(name(), "filetype", 0,
                     {{"entry", ft.entry},
                      {"detected", ft.detected},
                      {"implied", ft.implied},
                      {"mismatch", static_cast<std::int64_t>(ft.mismatch ? 1 : 0)}});
    }

    std::size_t min_run_ = 6;
    std::future<StaticFindings> scan_;
};

// ---------------------------------------------------------------- apilog

class ApilogPlugin : public Plugin {
public:
    std::string name() const override { return "apilog"; }

    void initialize(Registrar& reg, const PluginSettings& settings) override {
        if (auto it = settings.find("monitor_tag"); it != settings.end() && !it->second.empty())
            monitor_tag_ = it->second;
        reg.add(HookEvent::BeforeDatabase, kApilogEmitPrio,
                [this](StageContext& ctx) { emit_calls(ctx); });
    }

private:
    void emit_calls(StageContext& ctx) {
        auto bytes =
            read_artifact(ctx, ctx.bundle ? ctx.bundle->logcat_path : "", name(), "logcat");
        if (!bytes) return;
        LogcatParse parsed = parse_logcat(*bytes);

        for (const auto& call : extract_api_calls(parsed, monitor_tag_))
            ctx.emit(name(), "api_call", call.line,
                     {{"line", static_cast<std::int64_t>(call.line)},
                      {"pid", call.pid},
                      {"tag", call.tag},
                      {"class_name", call.class_name},
                      {"method", call.method},
                      {"args_text", call.args_text},
                      {"flagged", static_cast<std::int64_t>(call.flagged ? 1 : 0)}});
        for (const auto& d : parsed.diagnostics)
            ctx.emit(name(), "parse_diagnostic", d.line,
                     {{"line", static_cast<std::int64_t>(d.line)}, {"text", d.text}});
    }

    std::string monitor_tag_ = "ApiMonitor";
};

// ------------------------------------------------------------ hashlookup

class HashlookupPlugin : public Plugin {
public:
    std::string name() const override { return "hashlookup"; }

    void initialize(Registrar& reg, const PluginSettings& settings) override {
        retries_ = static_cast<int>(int_setting(settings, "retries", 2));
        policy_.interval_ms = static_cast<int>(int_setting(settings, "poll_interval_ms", 50));
        policy_.max_attempts = static_cast<int>(int_setting(settings, "poll_max_attempts", 3));
        upload_if_unknown_ = bool_setting(settings, "upload_if_unknown", true);

        reg.add(HookEvent::BeforeEmulatorStart, kLookupStartPrio,
                [this](StageContext& ctx) { begin_lookup(ctx); });
        reg.add(HookEvent::BeforeDatabase, kLookupEmitPrio,
                [this](StageContext& ctx) { emit_outcome(ctx); });
    }

private:
    void begin_lookup(StageContext& ctx) {
        std::string endpoint = ctx.shared_config.lookup_endpoint;
        if (endpoint.empty()) {
            immediate_ = LookupOutcome{LookupStatus::Unavailable, std::nullopt, std::nullopt,
                                       "no lookup endpoint configured"};
            return;
        }
        // The query (and possible upload) overlaps the simulation phase and
        // quiesces at before_database.
        std::string sha256 = ctx.run.sample.sha256;
        std::string bytes(ctx.sample_bytes);
        bool upload = upload_if_unknown_;
        int retries = retries_;
        PollPolicy policy = policy_;
        pending_ = std::async(std::launch::async, [=]() {
            LookupClient client(endpoint, retries);
            LookupOutcome outcome = client.query_hash(sha256);
            if (outcome.status == LookupStatus::NotFound && upload)
                outcome = client.submit_and_poll(sha256, bytes, policy);
            return outcome;
        });
    }

    void emit_outcome(StageContext& ctx) {
        LookupOutcome outcome;
        if (pending_.valid())
            outcome = pending_.get();
        else if (immediate_)
            outcome = *immediate_;
        else {
            ctx.mark_degraded(name(), "lookup never started");
            return;
        }

        FieldMap fields{{"sha256", ctx.run.sample.sha256},
                        {"status", std::string(to_string(outcome.status))}};
        if (!outcome.detail.empty()) fields["detail"] = outcome.detail;
        if (outcome.ticket) fields["ticket"] = outcome.ticket->id;
        if (outcome.result) {
            fields["positives"] = static_cast<std::int64_t>(outcome.result->positives());
            fields["total_engines"] = static_cast<std::int64_t>(outcome.result->total_engines);
            if (!outcome.result->scanned_at.empty())
                fields["scanned_at"] = outcome.result->scanned_at;
        }
        ctx.emit(name(), "hash_lookup", 0, std::move(fields));

        if (outcome.result)
            for (const auto& d : outcome.result->detections)
                ctx.emit(name(), "engine_result", 0,
                         {{"engine", d.engine},
                          {"detected", static_cast<std::int64_t>(d.detected ? 1 : 0)},
                          {"label", d.label}});

        if (outcome.status == LookupStatus::Unavailable)
            ctx.mark_degraded(name(), outcome.detail.empty() ? "service unavailable"
                                                             : outcome.detail);
    }

    int retries_ = 2;
    PollPolicy policy_;
    bool upload_if_unknown_ = true;
    std::future<LookupOutcome> pending_;
    std::optional<LookupOutcome> immediate_;
};

}  // namespace

PluginPtr make_fsdiff_plugin() { return std::make_shared<FsdiffPlugin>(); }
PluginPtr make_network_plugin() { return std::make_shared<NetworkPlugin>(); }
PluginPtr make_syscall_plugin() { return std::make_shared<SyscallPlugin>(); }
PluginPtr make_static_plugin() { return std::make_shared<StaticPlugin>(); }
PluginPtr make_apilog_plugin() { return std::make_shared<ApilogPlugin>(); }
PluginPtr make_hashlookup_plugin() { return std::make_shared<HashlookupPlugin>(); }

std::vector<PluginPtr> builtin_catalog() {
    return {make_fsdiff_plugin(),  make_network_plugin(), make_syscall_plugin(),
            make_static_plugin(), make_apilog_plugin(),  make_hashlookup_plugin()};
}

}  // namespace apklab
