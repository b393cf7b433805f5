#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apklab/actions.hpp"
#include "apklab/target.hpp"

namespace apklab {

// One parsed statement, tied back to its source line for diagnostics.
struct SimStatement {
    int line = 0;
    std::string keyword;
    DeviceAction action;
};

struct SimScript {
    std::vector<SimStatement> statements;
};

// Grammar summary (one statement per line, `#` starts a comment):
//   startApp 'label'            stopApp 'label'
//   callfrom 'number'           callcancel 'number'
//   smsfrom 'number' 'text'     gsm 'state'
//   battery 'status' capacity   changeLocation 'lon' 'lat'
//   monkey events               unlock | lock
//   shell 'command'             adb 'arguments'
//   screenshot                  wait ms
// Strings are single-quoted with '' as the escaped quote; bare arguments are
// decimal integers. Parsing is all-or-nothing: any error aborts with a
// ParseError naming the first offending line.
SimScript parse_script(const std::string& text);

// Canonical source form: one statement per line, no comments, single space
// between tokens, quotes re-escaped. parse(pretty_print(parse(x))) equals
// parse(x) for every script x that parses.
std::string pretty_print(const SimScript& script);

struct SimLogEntry {
    int line = 0;
    std::string statement;   // pretty-printed form
    bool ok = false;
    std::int64_t clock_ms = 0;
    std::string note;        // ack note, or the error text when !ok
};

struct SimulationLog {
    std::vector<SimLogEntry> entries;
    bool completed = false;  // false when a device error stopped the script
};

// Runs every statement in order against the target. A DeviceError records a
// failed entry and stops the script; it never propagates.
SimulationLog execute_script(const SimScript& script, AnalysisTarget& target);

// Parse + per-statement range validation, for the `check` CLI verb. Returns
// human-readable problems, empty when the script is clean.
std::vector<std::string> check_script(const std::string& text);

}  // namespace apklab
