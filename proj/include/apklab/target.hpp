#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apklab/actions.hpp"
#include "apklab/run.hpp"

namespace apklab {

// The evidence files one run produces for plugin consumption. All paths live
// inside the run's result directory; the pre snapshot is taken before boot,
// the post snapshot after simulated power-off.
struct ArtifactBundle {
    std::filesystem::path pcap_path;
    std::filesystem::path syscall_trace_path;
    std::filesystem::path logcat_path;
    std::filesystem::path pre_snapshot_path;
    std::filesystem::path post_snapshot_path;
    std::vector<std::filesystem::path> screenshot_paths;
};

struct InstallResult {
    bool ok = false;
    std::string detail;
};

struct ActionAck {
    std::int64_t clock_ms = 0;
    std::string note;
};

// Analysis-target abstraction standing in for the emulator. One instance
// drives one session; all five operations follow the run lifecycle order.
class AnalysisTarget {
public:
    virtual ~AnalysisTarget() = default;

    // Boots a session from a working copy of image_source; the original is
    // never mutated. Throws DeviceError on copy failure or double start.
    virtual void start(const std::filesystem::path& image_source, AnalysisRun& run) = 0;

    // Activates the behaviors keyed to the sample's package. Install failure
    // is reported, not thrown: the run continues.
    virtual InstallResult install_app(const SampleMeta& sample) = 0;

    // Throws DeviceError when called outside start..collect, or when the
    // action violates a range invariant.
    virtual ActionAck apply_action(const DeviceAction& action) = 0;

    // Flushes artifact files, performs the simulated power-off, writes the
    // post snapshot. Idempotent: a second call returns the same bundle.
    virtual ArtifactBundle collect_artifacts() = 0;

    virtual void stop() = 0;
};

}  // namespace apklab
