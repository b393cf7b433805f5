#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <variant>
#include <vector>

#include "apklab/actions.hpp"
#include "apklab/errors.hpp"
#include "apklab/simscript.hpp"
#include "apklab/target.hpp"

using namespace apklab;

namespace {

// Exercises the full grammar: every keyword, escaped quotes, an empty string,
// a '#' inside quotes, negative coordinates.
const std::string kFullScript =
    "# warm-up\n"
    "unlock\n"
    "startApp 'com.example.app'\n"
    "stopApp 'com.example.app'\n"
    "callfrom '+431234567'\n"
    "callcancel '+431234567'\n"
    "smsfrom '15555550100' 'it''s a #trap'\n"
    "gsm 'roaming'\n"
    "battery 'discharging' 40\n"
    "changeLocation '14.29' '48.30'\n"
    "monkey 25\n"
    "shell 'pm list packages'\n"
    "adb ''\n"
    "screenshot 'after sms'\n"
    "wait 250\n"
    "lock\n";

// Minimal target: validates ranges like a device would, acks with a
// monotone clock. Real device behavior is covered by the device suite.
class FakeTarget : public AnalysisTarget {
public:
    std::vector<DeviceAction> applied;

    void start(const std::filesystem::path&, AnalysisRun&) override {}
    InstallResult install_app(const SampleMeta&) override { return {true, ""}; }
    ActionAck apply_action(const DeviceAction& action) override {
        if (auto bad = validate_action(action)) throw DeviceError(*bad);
        applied.push_back(action);
        clock_ms_ += 10;
        return {clock_ms_, describe_action(action)};
    }
    ArtifactBundle collect_artifacts() override { return {}; }
    void stop() override {}

private:
    std::int64_t clock_ms_ = 0;
};

}  // namespace

TEST_CASE("every keyword parses to its action with the right payload") {
    SimScript script = parse_script(kFullScript);
    REQUIRE(script.statements.size() == 15);

    CHECK(std::holds_alternative<UnlockScreen>(script.statements[0].action));
    CHECK(std::get<StartApp>(script.statements[1].action).package == "com.example.app");
    CHECK(std::get<StopApp>(script.statements[2].action).package == "com.example.app");
    CHECK(std::get<IncomingCall>(script.statements[3].action).number == "+431234567");
    CHECK(std::get<CancelCall>(script.statements[4].action).number == "+431234567");

    const auto& sms = std::get<IncomingSms>(script.statements[5].action);
    CHECK(sms.number == "15555550100");
    CHECK(sms.text == "it's a #trap");  // '' unescapes, # stays literal inside quotes

    CHECK(std::get<SetGsmState>(script.statements[6].action).state == GsmState::Roaming);

    const auto& batt = std::get<SetBatteryState>(script.statements[7].action);
    CHECK(batt.status == BatteryStatus::Discharging);
    CHECK(batt.capacity == 40);

    const auto& loc = std::get<SetLocation>(script.statements[8].action);
    CHECK(loc.lon == doctest::Approx(14.29));
    CHECK(loc.lat == doctest::Approx(48.30));

    CHECK(std::get<MonkeyInput>(script.statements[9].action).event_count == 25);
    CHECK(std::get<ShellCommand>(script.statements[10].action).command == "pm list packages");
    CHECK(std::get<AdbCommand>(script.statements[11].action).command.empty());
    CHECK(std::get<Screenshot>(script.statements[12].action).label == "after sms");
    CHECK(std::get<Wait>(script.statements[13].action).millis == 250);
    CHECK(std::holds_alternative<LockScreen>(script.statements[14].action));

    // Line numbers survive the comment line (statement 0 sits on line 2).
    CHECK(script.statements[0].line == 2);
    CHECK(script.statements[14].line == 16);
}

TEST_CASE("blank lines, comments, and trailing comments are ignored") {
    SimScript script = parse_script("\n  # full-line comment\nunlock  # trailing\n\nwait 1\n");
    REQUIRE(script.statements.size() == 2);
    CHECK(script.statements[0].keyword == "unlock");
    CHECK(script.statements[1].keyword == "wait");
}

TEST_CASE("gsm and battery accept every documented state") {
    for (const char* s : {"unregistered", "home", "roaming", "searching", "denied", "off", "on"})
        CHECK(gsm_state_from_string(s).has_value());
    for (const char* s : {"unknown", "charging", "discharging", "not-charging", "full"})
        CHECK(battery_status_from_string(s).has_value());
    CHECK_FALSE(gsm_state_from_string("airplane").has_value());
    CHECK_FALSE(battery_status_from_string("draining").has_value());

    for (GsmState s : {GsmState::Unregistered, GsmState::Home, GsmState::Roaming,
                       GsmState::Searching, GsmState::Denied, GsmState::Off, GsmState::On})
        CHECK(gsm_state_from_string(to_string(s)) == s);
    for (BatteryStatus s : {BatteryStatus::Unknown, BatteryStatus::Charging,
                            BatteryStatus::Discharging, BatteryStatus::NotCharging,
                            BatteryStatus::Full})
        CHECK(battery_status_from_string(to_string(s)) == s);
}

TEST_CASE("parse diagnostics carry the offending line number") {
    auto line_of = [](const std::string& text) {
        try {
            parse_script(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };

    CHECK(line_of("unlock\nfrobnicate 'x'\n") == 2);
    CHECK_THROWS_WITH_AS(parse_script("frobnicate 'x'\n"),
                         doctest::Contains("unknown keyword 'frobnicate'"), ParseError);
    CHECK_THROWS_WITH_AS(parse_script("smsfrom '123'\n"),
                         doctest::Contains("'smsfrom' takes 2 arguments"), ParseError);
    CHECK_THROWS_WITH_AS(parse_script("wait 1 2\n"),
                         doctest::Contains("'wait' takes 1 argument"), ParseError);
    CHECK_THROWS_WITH_AS(parse_script("startApp 'unterminated\n"),
                         doctest::Contains("unterminated"), ParseError);
    CHECK_THROWS_WITH_AS(parse_script("startApp pkg\n"),
                         doctest::Contains("must be quoted"), ParseError);
    CHECK_THROWS_WITH_AS(parse_script("wait 'soon'\n"),
                         doctest::Contains("must be an integer"), ParseError);
    CHECK_THROWS_WITH_AS(parse_script("monkey lots\n"),
                         doctest::Contains("must be an integer"), ParseError);
    CHECK_THROWS_WITH_AS(parse_script("gsm 'airplane'\n"),
                         doctest::Contains("unknown gsm state 'airplane'"), ParseError);
    CHECK_THROWS_WITH_AS(parse_script("battery 'draining' 10\n"),
                         doctest::Contains("unknown battery status"), ParseError);
    CHECK_THROWS_WITH_AS(parse_script("changeLocation 'east' 'west'\n"),
                         doctest::Contains("malformed coordinate"), ParseError);
    CHECK_THROWS_WITH_AS(parse_script("'unlock'\n"),
                         doctest::Contains("expected a keyword"), ParseError);
}

TEST_CASE("parsing is all-or-nothing") {
    CHECK_THROWS_AS(parse_script("unlock\nwait 1\nbogus\nlock\n"), ParseError);
}

TEST_CASE("pretty_print is a parse fixed point") {
    SimScript first = parse_script(kFullScript);
    std::string printed = pretty_print(first);
    SimScript second = parse_script(printed);

    REQUIRE(second.statements.size() == first.statements.size());
    for (std::size_t i = 0; i < first.statements.size(); ++i) {
        CHECK(second.statements[i].keyword == first.statements[i].keyword);
        CHECK(describe_action(second.statements[i].action) ==
              describe_action(first.statements[i].action));
    }
    // Canonical form is itself stable.
    CHECK(pretty_print(second) == printed);
    // Quotes are re-escaped on the way out.
    CHECK(printed.find("'it''s a #trap'") != std::string::npos);
}

TEST_CASE("check_script reports syntax and range problems per line") {
    CHECK(check_script(kFullScript).empty());

    auto problems = check_script(
        "unlock\n"
        "battery 'charging' 150\n"   // range
        "frobnicate\n"               // syntax
        "monkey 0\n"                 // range
        "wait -5\n"                  // range
        "changeLocation '181' '0'\n");
    REQUIRE(problems.size() == 5);
    CHECK(problems[0] == "line 2: battery capacity out of range [0,100]: 150");
    CHECK(problems[1] == "line 3: unknown keyword 'frobnicate'");
    CHECK(problems[2] == "line 4: monkey event count must be > 0");
    CHECK(problems[3] == "line 5: wait must be >= 0 ms");
    CHECK(problems[4] == "line 6: longitude out of range [-180,180]");
}

TEST_CASE("execute_script applies statements in order and logs each") {
    FakeTarget target;
    SimulationLog log = execute_script(parse_script("unlock\nwait 100\nmonkey 3\n"), target);

    CHECK(log.completed);
    REQUIRE(log.entries.size() == 3);
    CHECK(target.applied.size() == 3);
    CHECK(log.entries[0].statement == "unlock");
    CHECK(log.entries[1].statement == "wait 100");
    CHECK(log.entries[2].statement == "monkey 3");
    for (const auto& e : log.entries) CHECK(e.ok);
    CHECK(log.entries[0].clock_ms < log.entries[1].clock_ms);
    CHECK(log.entries[1].clock_ms < log.entries[2].clock_ms);
}

TEST_CASE("a device error stops the script but never propagates") {
    FakeTarget target;
    // battery 150 parses (grammar is satisfied); the device rejects it.
    SimScript script = parse_script("unlock\nbattery 'charging' 150\nlock\n");
    SimulationLog log;
    CHECK_NOTHROW(log = execute_script(script, target));

    CHECK_FALSE(log.completed);
    REQUIRE(log.entries.size() == 2);
    CHECK(log.entries[0].ok);
    CHECK_FALSE(log.entries[1].ok);
    CHECK(log.entries[1].note == "battery capacity out of range [0,100]: 150");
    CHECK(target.applied.size() == 1);  // lock never ran
}
