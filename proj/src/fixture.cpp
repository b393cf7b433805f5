#include "apklab/fixture.hpp"

#include <json.hpp>

#include "apklab/errors.hpp"
#include "apklab/textutil.hpp"

namespace apklab {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ParseError("fixture: " + where + ": " + what);
}

std::string require_string(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) bad(where, "missing '" + key + "'");
    if (!j[key].is_string()) bad(where, "'" + key + "' must be a string");
    return j[key].get<std::string>();
}

std::string string_or(const json& j, const std::string& key, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    return j[key].get<std::string>();
}

EffectKind effect_kind(const std::string& type, const std::string& where) {
    if (type == "http") return EffectKind::Http;
    if (type == "dns") return EffectKind::Dns;
    if (type == "icmp") return EffectKind::Icmp;
    if (type == "syscall") return EffectKind::Syscall;
    if (type == "logcat") return EffectKind::Logcat;
    if (type == "fs_create") return EffectKind::FsCreate;
    if (type == "fs_write") return EffectKind::FsWrite;
    if (type == "fs_delete") return EffectKind::FsDelete;
    if (type == "fs_chmod") return EffectKind::FsChmod;
    if (type == "fs_mkdir") return EffectKind::FsMkdir;
    bad(where, "unknown effect type '" + type + "'");
}

FixtureEffect parse_effect(const json& j, const std::string& where) {
    if (!j.is_object()) bad(where, "effect must be an object");
    FixtureEffect e;
    e.kind = effect_kind(require_string(j, "type", where), where);
    switch (e.kind) {
        case EffectKind::Http:
            e.host = require_string(j, "host", where);
            e.method = string_or(j, "method", "GET");
            e.path = string_or(j, "path", "/");
            if (j.contains("headers")) {
                for (auto& [k, v] : j["headers"].items()) {
                    e.headers.emplace_back(k, v.get<std::string>());
                }
            }
            e.body = string_or(j, "body", "");
            e.response_status = j.value("response_status", 200);
            e.response_body = string_or(j, "response_body", "");
            e.port = static_cast<std::uint16_t>(j.value("port", 0));
            break;
        case EffectKind::Dns:
            e.host = require_string(j, "host", where);
            e.qtype = string_or(j, "qtype", "A");
            break;
        case EffectKind::Icmp:
            e.host = require_string(j, "host", where);
            break;
        case EffectKind::Syscall:
            e.syscall = require_string(j, "syscall", where);
            if (!j.contains("args") || !j["args"].is_array()) {
                bad(where, "syscall effect needs an 'args' array");
            }
            for (const auto& a : j["args"]) {
                if (a.is_string()) {
                    e.sys_args.emplace_back(a.get<std::string>());
                } else if (a.is_number_integer()) {
                    e.sys_args.emplace_back(a.get<std::int64_t>());
                } else {
                    bad(where, "syscall args must be strings or integers");
                }
            }
            e.ret = j.value("ret", 0);
            if (j.contains("pid")) e.pid = j["pid"].get<std::int64_t>();
            if (j.contains("comm")) e.comm = j["comm"].get<std::string>();
            break;
        case EffectKind::Logcat:
            e.level = string_or(j, "level", "I");
            e.tag = require_string(j, "tag", where);
            e.message = require_string(j, "message", where);
            break;
        case EffectKind::FsCreate:
        case EffectKind::FsWrite:
            e.fs_path = require_string(j, "path", where);
            e.content = string_or(j, "content", "");
            e.mode = string_or(j, "mode", "0644");
            break;
        case EffectKind::FsDelete:
            e.fs_path = require_string(j, "path", where);
            break;
        case EffectKind::FsChmod:
            e.fs_path = require_string(j, "path", where);
            e.mode = require_string(j, "mode", where);
            break;
        case EffectKind::FsMkdir:
            e.fs_path = require_string(j, "path", where);
            e.mode = string_or(j, "mode", "0755");
            break;
    }
    return e;
}

std::vector<FixtureEffect> parse_effect_list(const json& j, const std::string& where) {
    std::vector<FixtureEffect> out;
    if (!j.is_array()) bad(where, "must be an array");
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse_effect(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

const char* kRuleKinds[] = {"app_start", "app_stop", "sms",    "call",  "call_cancel",
                            "gsm",       "battery",  "location", "monkey", "unlock",
                            "lock",      "shell",    "adb",    "screenshot"};

FixtureRule parse_rule(const json& j, const std::string& where) {
    FixtureRule r;
    r.on = require_string(j, "on", where);
    bool known = false;
    for (const char* k : kRuleKinds) known = known || r.on == k;
    if (!known) bad(where, "unknown trigger '" + r.on + "'");
    if (j.contains("package")) r.package = j["package"].get<std::string>();
    if (j.contains("from")) r.from = j["from"].get<std::string>();
    if (j.contains("text_contains")) r.text_contains = j["text_contains"].get<std::string>();
    if (j.contains("command_contains")) {
        r.command_contains = j["command_contains"].get<std::string>();
    }
    if (!j.contains("do")) bad(where, "missing 'do'");
    r.effects = parse_effect_list(j["do"], where + ".do");
    return r;
}

BaselineEntry parse_baseline(const json& j, const std::string& where) {
    BaselineEntry b;
    b.path = require_string(j, "path", where);
    if (b.path.empty() || b.path[0] != '/') bad(where, "path must be absolute");
    b.kind = string_or(j, "kind", "file");
    if (b.kind != "file" && b.kind != "dir" && b.kind != "symlink") {
        bad(where, "kind must be file, dir or symlink");
    }
    b.content = string_or(j, "content", "");
    b.mode = string_or(j, "mode", b.kind == "dir" ? "0755" : "0644");
    b.target = string_or(j, "target", "");
    if (b.kind == "symlink" && b.target.empty()) bad(where, "symlink needs 'target'");
    return b;
}

}  // namespace

ScenarioFixture parse_fixture(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("fixture: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("fixture: top level must be an object");

    ScenarioFixture f;
    f.name = require_string(j, "name", "top level");
    f.package = require_string(j, "package", "top level");
    f.corrupt_install = j.value("corrupt_install", false);
    if (j.contains("device")) {
        const json& d = j["device"];
        f.device.ip = string_or(d, "ip", f.device.ip);
        f.device.dns_server = string_or(d, "dns_server", f.device.dns_server);
        f.device.gateway = string_or(d, "gateway", f.device.gateway);
        f.device.phone_number = string_or(d, "phone_number", f.device.phone_number);
        f.device.pid = d.value("pid", f.device.pid);
        f.device.comm = string_or(d, "comm", f.device.comm);
    }
    for (const char* key : {"redirect", "hosts"}) {
        if (!j.contains(key)) continue;
        auto& dst = std::string(key) == "redirect" ? f.redirect : f.hosts;
        for (auto& [domain, addr] : j[key].items()) {
            dst[to_lower(domain)] = addr.get<std::string>();
        }
    }
    if (j.contains("baseline_fs")) {
        const json& arr = j["baseline_fs"];
        if (!arr.is_array()) throw ParseError("fixture: baseline_fs must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            f.baseline_fs.push_back(parse_baseline(arr[i], "baseline_fs[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("boot")) f.boot = parse_effect_list(j["boot"], "boot");
    if (j.contains("install")) f.install = parse_effect_list(j["install"], "install");
    if (j.contains("rules")) {
        const json& arr = j["rules"];
        if (!arr.is_array()) throw ParseError("fixture: rules must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            f.rules.push_back(parse_rule(arr[i], "rules[" + std::to_string(i) + "]"));
        }
    }
    return f;
}

ScenarioFixture load_fixture(const std::string& path) {
    return parse_fixture(read_file(path));
}

}  // namespace apklab
