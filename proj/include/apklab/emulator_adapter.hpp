#pragma once

#include <string>

#include "apklab/target.hpp"

namespace apklab {

// Contract for driving a real emulator over adb and the console telnet port.
// Declared so deployments can swap it in for SimulatedDevice; every operation
// currently throws NotImplementedError. Action mapping when implemented:
// telephony/gsm/battery/location via telnet console commands, app and input
// control via adb shell (am/pm/monkey), screenshots via screencap.
class EmulatorAdapter : public AnalysisTarget {
public:
    EmulatorAdapter(std::string adb_serial, std::string console_host, int console_port);

    void start(const std::filesystem::path& image_source, AnalysisRun& run) override;
    InstallResult install_app(const SampleMeta& sample) override;
    ActionAck apply_action(const DeviceAction& action) override;
    ArtifactBundle collect_artifacts() override;
    void stop() override;

private:
    std::string adb_serial_;
    std::string console_host_;
    int console_port_;
};

}  // namespace apklab
