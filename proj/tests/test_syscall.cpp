#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "apklab/errors.hpp"
#include "apklab/syscalls.hpp"
#include "apklab/textutil.hpp"

using namespace apklab;

namespace {

std::string trace_line(std::int64_t ts, std::int64_t pid, const std::string& comm,
                       const std::string& syscall, const nlohmann::json& args,
                       std::int64_t ret) {
    nlohmann::json j;
    j["ts"] = ts;
    j["pid"] = pid;
    j["comm"] = comm;
    j["syscall"] = syscall;
    j["args"] = args;
    j["ret"] = ret;
    return j.dump() + "\n";
}

SyscallRecord record(const std::string& syscall, std::vector<SyscallArg> args,
                     std::int64_t ret = 0, std::int64_t pid = 421,
                     const std::string& comm = "app_process") {
    SyscallRecord r;
    r.ts = 1;
    r.pid = pid;
    r.comm = comm;
    r.syscall = syscall;
    r.args = std::move(args);
    r.ret = ret;
    return r;
}

bool flagged(const SyscallRecord& rec, const std::string& indicator_id) {
    for (const auto& ind : default_indicators()) {
        if (ind.id == indicator_id) return indicator_matches(ind, rec);
    }
    FAIL(("no such indicator: " + indicator_id));
    return false;
}

}  // namespace

TEST_CASE("the hooked set covers fifteen file, id, and exec calls") {
    CHECK(hooked_syscalls().size() == 15);
    const SyscallSpec* open = syscall_spec("open");
    REQUIRE(open != nullptr);
    REQUIRE(open->args.size() == 2);
    CHECK(open->args[0].name == "path");
    CHECK(open->args[0].kind == ArgKind::String);
    CHECK(open->args[1].name == "flags");
    CHECK(syscall_spec("ioctl") == nullptr);
}

TEST_CASE("a well-formed trace line round-trips") {
    std::string text =
        trace_line(1370000, 421, "app_process", "open",
                   {"/data/data/t4t.power.management/shared_prefs/phone.xml", "O_RDONLY"}, 3);
    TraceParse parsed = parse_trace(text);
    REQUIRE(parsed.records.size() == 1);
    CHECK(parsed.diagnostics.empty());
    CHECK(parsed.total_lines == 1);

    const SyscallRecord& r = parsed.records[0];
    CHECK(r.ts == 1370000);
    CHECK(r.pid == 421);
    CHECK(r.comm == "app_process");
    CHECK(r.syscall == "open");
    REQUIRE(r.args.size() == 2);
    CHECK(std::get<std::string>(r.args[0]) ==
          "/data/data/t4t.power.management/shared_prefs/phone.xml");
    CHECK(r.ret == 3);
}

TEST_CASE("malformed lines become diagnostics, never silent drops") {
    std::string text;
    text += trace_line(1, 10, "a", "open", {"/x", "O_RDONLY"}, 0);     // fine
    text += trace_line(2, 10, "a", "frobnicate", {"/x"}, 0);           // unknown
    text += trace_line(3, 10, "a", "open", {"/x"}, 0);                 // arity
    text += trace_line(4, 10, "a", "open", {"/x", 7}, 0);              // type
    text += "{\"ts\": 5}\n";                                           // missing fields
    text += "not json\n";                                              // invalid
    text += "[1,2,3]\n";                                               // not an object
    text += "\n";                                                      // blank: ignored

    TraceParse parsed = parse_trace(text);
    CHECK(parsed.records.size() == 1);
    REQUIRE(parsed.diagnostics.size() == 6);
    CHECK(parsed.total_lines == 7);
    CHECK(parsed.records.size() + parsed.diagnostics.size() ==
          static_cast<std::size_t>(parsed.total_lines));

    CHECK(parsed.diagnostics[0].line == 2);
    CHECK(parsed.diagnostics[0].message == "unknown syscall 'frobnicate'");
    CHECK(parsed.diagnostics[1].message == "'open' expects 2 args, got 1");
    CHECK(parsed.diagnostics[2].message == "arg 'flags' of 'open' has the wrong type");
    CHECK(parsed.diagnostics[3].message == "missing or mistyped field");
    CHECK(parsed.diagnostics[4].message.find("invalid JSON") != std::string::npos);
    CHECK(parsed.diagnostics[5].message == "line is not a JSON object");
}

TEST_CASE("summaries count per process and per syscall") {
    std::vector<SyscallRecord> records;
    for (int i = 0; i < 5; ++i) records.push_back(record("open", {"/f", "O_RDONLY"}, 3));
    records.push_back(record("write", {std::int64_t(3), std::int64_t(100)}, 100));
    records.push_back(record("write", {std::int64_t(3), std::int64_t(50)}, 50, 33, "installd"));

    SyscallSummary s = summarize(records, default_indicators());
    CHECK(s.per_syscall.at("open") == 5);
    CHECK(s.per_syscall.at("write") == 2);
    CHECK(s.per_process.at({421, "app_process"}).at("open") == 5);
    CHECK(s.per_process.at({421, "app_process"}).at("write") == 1);
    CHECK(s.per_process.at({33, "installd"}).at("write") == 1);
    CHECK(s.suspicious.empty());
}

TEST_CASE("setuid-root fires only on uid 0 with success") {
    CHECK(flagged(record("setuid", {std::int64_t(0)}, 0), "setuid-root"));
    CHECK_FALSE(flagged(record("setuid", {std::int64_t(0)}, -1), "setuid-root"));
    CHECK_FALSE(flagged(record("setuid", {std::int64_t(10081)}, 0), "setuid-root"));
    CHECK(flagged(record("setgid", {std::int64_t(0)}, 0), "setgid-root"));
    CHECK_FALSE(flagged(record("setgid", {std::int64_t(0)}, 0), "setuid-root"));
}

TEST_CASE("setuid-bit-chmod fires on system paths only") {
    // 04755 octal is 2541 decimal.
    CHECK(flagged(record("chmod", {"/system/bin/sh", std::int64_t(2541)}, 0),
                  "setuid-bit-chmod"));
    CHECK(flagged(record("chmod", {"/data/local/tmp/su", std::int64_t(2048)}, 0),
                  "setuid-bit-chmod"));
    // The setuid bit alone is not enough off the system partitions.
    CHECK_FALSE(flagged(record("chmod", {"/data/data/com.foo/su", std::int64_t(2541)}, 0),
                        "setuid-bit-chmod"));
    // No setuid bit: plain 0755 is 493 decimal.
    CHECK_FALSE(flagged(record("chmod", {"/system/xbin/su", std::int64_t(493)}, 0),
                        "setuid-bit-chmod"));
    CHECK_FALSE(flagged(record("chmod", {"/system/xbin/su", std::int64_t(2541)}, -1),
                        "setuid-bit-chmod"));
}

TEST_CASE("suspicious hits keep record order and indexes") {
    std::vector<SyscallRecord> records = {
        record("open", {"/f", "O_RDONLY"}, 3),
        record("setuid", {std::int64_t(0)}, 0),
        record("chmod", {"/system/bin/sh", std::int64_t(2541)}, 0),
    };
    SyscallSummary s = summarize(records, default_indicators());
    REQUIRE(s.suspicious.size() == 2);
    CHECK(s.suspicious[0] == std::pair<std::size_t, std::string>{1, "setuid-root"});
    CHECK(s.suspicious[1] == std::pair<std::size_t, std::string>{2, "setuid-bit-chmod"});
}

TEST_CASE("the shipped indicator file equals the built-in table") {
    std::string text =
        read_file(std::filesystem::path(APKLAB_SOURCE_DIR) / "data/syscall_indicators.json");
    std::vector<ExploitIndicator> shipped = indicators_from_json(text);
    const std::vector<ExploitIndicator>& builtin = default_indicators();
    REQUIRE(shipped.size() == builtin.size());
    for (std::size_t i = 0; i < shipped.size(); ++i) {
        CHECK(shipped[i].id == builtin[i].id);
        CHECK(shipped[i].syscall == builtin[i].syscall);
        CHECK(shipped[i].arg_index == builtin[i].arg_index);
        CHECK(shipped[i].int_arg_equals == builtin[i].int_arg_equals);
        CHECK(shipped[i].mode_mask == builtin[i].mode_mask);
        CHECK(shipped[i].path_prefixes == builtin[i].path_prefixes);
        CHECK(shipped[i].ret_equals == builtin[i].ret_equals);
    }
}

TEST_CASE("indicator files are validated") {
    CHECK_THROWS_WITH_AS(indicators_from_json("{"), doctest::Contains("invalid JSON"),
                         ParseError);
    CHECK_THROWS_WITH_AS(indicators_from_json("{}"), doctest::Contains("must be an array"),
                         ParseError);
    CHECK_THROWS_WITH_AS(indicators_from_json("[{\"id\":\"x\"}]"),
                         doctest::Contains("need 'id' and 'syscall'"), ParseError);
    CHECK_THROWS_WITH_AS(indicators_from_json(
                             "[{\"id\":\"x\",\"syscall\":\"ioctl\"}]"),
                         doctest::Contains("'ioctl' is not a hooked syscall"), ParseError);

    auto ok = indicators_from_json(
        "[{\"id\":\"w\",\"syscall\":\"write\",\"arg_index\":1,\"int_arg_equals\":4096}]");
    REQUIRE(ok.size() == 1);
    CHECK(ok[0].int_arg_equals == 4096);
    CHECK(indicator_matches(ok[0], record("write", {std::int64_t(3), std::int64_t(4096)}, 7)));
}

TEST_CASE("traces are whole-system: multiple pids coexist") {
    std::string text = trace_line(1, 421, "app_process", "open", {"/a", "O_RDONLY"}, 3) +
                       trace_line(2, 33, "installd", "execve", {"/system/bin/pm", "pm"}, 0) +
                       trace_line(3, 1, "init", "mkdir", {"/dev/soc", 493}, 0);
    TraceParse parsed = parse_trace(text);
    REQUIRE(parsed.records.size() == 3);
    CHECK(parsed.records[0].pid == 421);
    CHECK(parsed.records[1].pid == 33);
    CHECK(parsed.records[2].pid == 1);
}
