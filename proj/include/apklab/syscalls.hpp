#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace apklab {

using SyscallArg = std::variant<std::string, std::int64_t>;

// One line of the kernel-trace file. Whole-system: every process appears,
// never just the analyzed app's pid.
struct SyscallRecord {
    std::int64_t ts = 0;
    std::int64_t pid = 0;
    std::string comm;
    std::string syscall;
    std::vector<SyscallArg> args;
    std::int64_t ret = 0;

    bool operator==(const SyscallRecord&) const = default;
};

enum class ArgKind { String, Int };

struct ArgSpec {
    std::string_view name;
    ArgKind kind;
};

struct SyscallSpec {
    std::string_view name;
    std::vector<ArgSpec> args;
};

// Hooked set; a trace line naming any other syscall is a diagnostic.
const std::vector<SyscallSpec>& hooked_syscalls();
const SyscallSpec* syscall_spec(std::string_view name);

struct TraceDiagnostic {
    int line = 0;
    std::string message;
};

struct TraceParse {
    std::vector<SyscallRecord> records;
    std::vector<TraceDiagnostic> diagnostics;
    int total_lines = 0;  // non-blank; records + diagnostics = total_lines
};

// JSON-lines trace: {"ts":..,"pid":..,"comm":..,"syscall":..,"args":[..],"ret":..}.
// Malformed lines become diagnostics, never silent drops.
TraceParse parse_trace(const std::string& text);

// Root-exploit indicator, shipped as data so analysts can extend the table.
struct ExploitIndicator {
    std::string id;
    std::string syscall;
    std::optional<int> arg_index;
    std::optional<std::int64_t> int_arg_equals;  // args[arg_index] == value
    std::optional<std::int64_t> mode_mask;       // args[arg_index] & mask != 0
    std::vector<std::string> path_prefixes;      // first string arg starts with any
    std::optional<std::int64_t> ret_equals;
};

const std::vector<ExploitIndicator>& default_indicators();
std::vector<ExploitIndicator> indicators_from_json(const std::string& text);
bool indicator_matches(const ExploitIndicator& ind, const SyscallRecord& rec);

struct SyscallSummary {
    // (pid, comm) → syscall → count
    std::map<std::pair<std::int64_t, std::string>, std::map<std::string, std::uint64_t>>
        per_process;
    std::map<std::string, std::uint64_t> per_syscall;
    // (record index, indicator id) pairs, in record order
    std::vector<std::pair<std::size_t, std::string>> suspicious;
};

SyscallSummary summarize(const std::vector<SyscallRecord>& records,
                         const std::vector<ExploitIndicator>& indicators);

}  // namespace apklab
