#include "apklab/emulator_adapter.hpp"

#include "apklab/errors.hpp"

namespace apklab {

EmulatorAdapter::EmulatorAdapter(std::string adb_serial, std::string console_host,
                                 int console_port)
    : adb_serial_(std::move(adb_serial)),
      console_host_(std::move(console_host)),
      console_port_(console_port) {}

void EmulatorAdapter::start(const std::filesystem::path&, AnalysisRun&) {
    throw NotImplementedError("emulator adapter: start");
}

InstallResult EmulatorAdapter::install_app(const SampleMeta&) {
    throw NotImplementedError("emulator adapter: install_app");
}

ActionAck EmulatorAdapter::apply_action(const DeviceAction&) {
    throw NotImplementedError("emulator adapter: apply_action");
}

ArtifactBundle EmulatorAdapter::collect_artifacts() {
    throw NotImplementedError("emulator adapter: collect_artifacts");
}

void EmulatorAdapter::stop() {
    throw NotImplementedError("emulator adapter: stop");
}

}  // namespace apklab
