#include "apklab/syscalls.hpp"

#include <sstream>

#include <json.hpp>

#include "apklab/errors.hpp"
#include "apklab/textutil.hpp"

namespace apklab {
namespace {

using nlohmann::json;

std::vector<SyscallSpec> build_table() {
    auto s = [](std::string_view n) { return ArgSpec{n, ArgKind::String}; };
    auto i = [](std::string_view n) { return ArgSpec{n, ArgKind::Int}; };
    return {
        {"open", {s("path"), s("flags")}},
        {"creat", {s("path"), i("mode")}},
        {"read", {i("fd"), i("count")}},
        {"write", {i("fd"), i("count")}},
        {"unlink", {s("path")}},
        {"mkdir", {s("path"), i("mode")}},
        {"rmdir", {s("path")}},
        {"rename", {s("old_path"), s("new_path")}},
        {"chmod", {s("path"), i("mode")}},
        {"chown", {s("path"), i("uid"), i("gid")}},
        {"setuid", {i("uid")}},
        {"setgid", {i("gid")}},
        {"setreuid", {i("ruid"), i("euid")}},
        {"setregid", {i("rgid"), i("egid")}},
        {"execve", {s("path"), s("argv")}},
    };
}

}  // namespace

const std::vector<SyscallSpec>& hooked_syscalls() {
    static const std::vector<SyscallSpec> table = build_table();
    return table;
}

const SyscallSpec* syscall_spec(std::string_view name) {
    for (const auto& spec : hooked_syscalls()) {
        if (spec.name == name) return &spec;
    }
    return nullptr;
}

TraceParse parse_trace(const std::string& text) {
    TraceParse out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++out.total_lines;
        auto diag = [&](const std::string& msg) {
            out.diagnostics.push_back({line_no, msg});
        };

        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            diag(std::string("invalid JSON: ") + e.what());
            continue;
        }
        if (!j.is_object()) {
            diag("line is not a JSON object");
            continue;
        }
        bool shape_ok = j.contains("ts") && j.contains("pid") && j.contains("comm") &&
                        j.contains("syscall") && j.contains("args") && j.contains("ret") &&
                        j["args"].is_array() && j["syscall"].is_string() &&
                        j["comm"].is_string() && j["ts"].is_number_integer() &&
                        j["pid"].is_number_integer() && j["ret"].is_number_integer();
        if (!shape_ok) {
            diag("missing or mistyped field");
            continue;
        }

        SyscallRecord rec;
        rec.ts = j["ts"].get<std::int64_t>();
        rec.pid = j["pid"].get<std::int64_t>();
        rec.comm = j["comm"].get<std::string>();
        rec.syscall = j["syscall"].get<std::string>();
        rec.ret = j["ret"].get<std::int64_t>();

        const SyscallSpec* spec = syscall_spec(rec.syscall);
        if (!spec) {
            diag("unknown syscall '" + rec.syscall + "'");
            continue;
        }
        if (j["args"].size() != spec->args.size()) {
            diag("'" + rec.syscall + "' expects " + std::to_string(spec->args.size()) +
                 " args, got " + std::to_string(j["args"].size()));
            continue;
        }
        bool args_ok = true;
        for (std::size_t n = 0; n < spec->args.size(); ++n) {
            const json& a = j["args"][n];
            if (spec->args[n].kind == ArgKind::String && a.is_string()) {
                rec.args.emplace_back(a.get<std::string>());
            } else if (spec->args[n].kind == ArgKind::Int && a.is_number_integer()) {
                rec.args.emplace_back(a.get<std::int64_t>());
            } else {
                diag("arg '" + std::string(spec->args[n].name) + "' of '" + rec.syscall +
                     "' has the wrong type");
                args_ok = false;
                break;
            }
        }
        if (!args_ok) continue;
        out.records.push_back(std::move(rec));
    }
    return out;
}

const std::vector<ExploitIndicator>& default_indicators() {
    static const std::vector<ExploitIndicator> table = [] {
        std::vector<ExploitIndicator> v;
        ExploitIndicator setuid_root;
        setuid_root.id = "setuid-root";
        setuid_root.syscall = "setuid";
        setuid_root.arg_index = 0;
        setuid_root.int_arg_equals = 0;
        setuid_root.ret_equals = 0;
        v.push_back(setuid_root);

        ExploitIndicator setgid_root = setuid_root;
        setgid_root.id = "setgid-root";
        setgid_root.syscall = "setgid";
        v.push_back(setgid_root);

        ExploitIndicator suid_chmod;
        suid_chmod.id = "setuid-bit-chmod";
        suid_chmod.syscall = "chmod";
        suid_chmod.arg_index = 1;
        suid_chmod.mode_mask = 04000;
        suid_chmod.path_prefixes = {"/system", "/data/local"};
        suid_chmod.ret_equals = 0;
        v.push_back(suid_chmod);
        return v;
    }();
    return table;
}

std::vector<ExploitIndicator> indicators_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("indicators: invalid JSON: ") + e.what());
    }
    if (!j.is_array()) throw ParseError("indicators: top level must be an array");
    std::vector<ExploitIndicator> out;
    for (const auto& item : j) {
        ExploitIndicator ind;
        if (!item.contains("id") || !item.contains("syscall")) {
            throw ParseError("indicators: entries need 'id' and 'syscall'");
        }
        ind.id = item["id"].get<std::string>();
        ind.syscall = item["syscall"].get<std::string>();
        if (!syscall_spec(ind.syscall)) {
            throw ParseError("indicators: '" + ind.syscall + "' is not a hooked syscall");
        }
        if (item.contains("arg_index")) ind.arg_index = item["arg_index"].get<int>();
        if (item.contains("int_arg_equals")) {
            ind.int_arg_equals = item["int_arg_equals"].get<std::int64_t>();
        }
        if (item.contains("mode_mask")) ind.mode_mask = item["mode_mask"].get<std::int64_t>();
        if (item.contains("path_prefixes")) {
            for (const auto& p : item["path_prefixes"]) {
                ind.path_prefixes.push_back(p.get<std::string>());
            }
        }
        if (item.contains("ret_equals")) ind.ret_equals = item["ret_equals"].get<std::int64_t>();
        out.push_back(std::move(ind));
    }
    return out;
}

bool indicator_matches(const ExploitIndicator& ind, const SyscallRecord& rec) {
    if (rec.syscall != ind.syscall) return false;
    if (ind.ret_equals && rec.ret != *ind.ret_equals) return false;

    if (ind.int_arg_equals || ind.mode_mask) {
        int idx = ind.arg_index.value_or(0);
        if (idx < 0 || static_cast<std::size_t>(idx) >= rec.args.size()) return false;
        const std::int64_t* v = std::get_if<std::int64_t>(&rec.args[idx]);
        if (!v) return false;
        if (ind.int_arg_equals && *v != *ind.int_arg_equals) return false;
        if (ind.mode_mask && (*v & *ind.mode_mask) == 0) return false;
    }
    if (!ind.path_prefixes.empty()) {
        const std::string* path = nullptr;
        for (const auto& a : rec.args) {
            if ((path = std::get_if<std::string>(&a))) break;
        }
        if (!path) return false;
        bool hit = false;
        for (const auto& prefix : ind.path_prefixes) {
            if (path->rfind(prefix, 0) == 0) {
                hit = true;
                break;
            }
        }
        if (!hit) return false;
    }
    return true;
}

SyscallSummary summarize(const std::vector<SyscallRecord>& records,
                         const std::vector<ExploitIndicator>& indicators) {
    SyscallSummary s;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const SyscallRecord& rec = records[i];
        ++s.per_process[{rec.pid, rec.comm}][rec.syscall];
        ++s.per_syscall[rec.syscall];
        for (const auto& ind : indicators) {
            if (indicator_matches(ind, rec)) s.suspicious.emplace_back(i, ind.id);
        }
    }
    return s;
}

}  // namespace apklab
