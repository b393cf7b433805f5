#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "apklab/fixture.hpp"
#include "apklab/fsdiff.hpp"
#include "apklab/target.hpp"
#include "apklab/wirebuild.hpp"

namespace apklab {

// Capture timestamps are anchored at a fixed epoch plus the logical clock,
// which makes bundle bytes a pure function of (fixture, action sequence).
constexpr std::int64_t kCaptureEpoch = 1370000000;

// Deterministic stand-in for the emulator. start() copies the fixture file
// (the "image") into the run directory and replays declared behaviors as
// actions arrive; collect_artifacts() freezes everything into the bundle.
class SimulatedDevice : public AnalysisTarget {
public:
    SimulatedDevice();

    void start(const std::filesystem::path& image_source, AnalysisRun& run) override;
    InstallResult install_app(const SampleMeta& sample) override;
    ActionAck apply_action(const DeviceAction& action) override;
    ArtifactBundle collect_artifacts() override;
    void stop() override;

    std::int64_t clock_ms() const { return clock_ms_; }
    const ScenarioFixture& fixture() const { return fixture_; }

private:
    struct FsNode {
        std::string kind;  // file | dir | symlink
        std::string content;
        std::string mode;
        std::string target;
    };

    using Subst = std::map<std::string, std::string>;

    void fire_effects(const std::vector<FixtureEffect>& effects, const Subst& subst);
    void fire_matching_rules(const std::string& trigger, const Subst& subst,
                             const std::string& package, const std::string& from,
                             const std::string& text, const std::string& command, int& fired);
    void emit_http(const FixtureEffect& e, const Subst& subst);
    void emit_dns_only(const FixtureEffect& e, const Subst& subst);
    void emit_icmp(const FixtureEffect& e, const Subst& subst);
    void append_syscall(const FixtureEffect& e, const Subst& subst);
    void append_syscall_line(std::int64_t pid, const std::string& comm, const std::string& name,
                             const std::vector<std::variant<std::string, std::int64_t>>& args,
                             std::int64_t ret);
    void append_logcat(const std::string& level, const std::string& tag, std::int64_t pid,
                       const std::string& message);
    void apply_fs_effect(const FixtureEffect& e, const Subst& subst);

    // Returns the resolved address, empty when the name does not resolve;
    // emits the DNS exchange unless the host is already a dotted address.
    std::string resolve_host(const std::string& host, const std::string& qtype);

    SnapshotManifest manifest_from_model() const;
    void require_live() const;
    std::uint32_t wire_sec() const;
    std::uint32_t wire_usec() const;
    void advance_wire(std::size_t packets);

    ScenarioFixture fixture_;
    AnalysisRun* run_ = nullptr;

    bool started_ = false;
    bool powered_ = false;
    bool installed_ = false;
    bool collected_ = false;

    std::int64_t clock_ms_ = 0;
    std::int64_t wire_ms_ = 0;  // last capture timestamp; never behind clock_ms_

    wire::PcapWriter pcap_;
    std::vector<std::string> trace_lines_;
    std::vector<std::string> logcat_lines_;
    std::map<std::string, FsNode> fs_;
    std::set<std::string> running_;

    std::uint16_t next_port_ = 40000;
    std::uint16_t next_txid_ = 1;

    ArtifactBundle bundle_;
};

// Fixed placeholder image written for Screenshot actions.
const std::string& placeholder_png();

}  // namespace apklab
