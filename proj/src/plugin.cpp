#include "apklab/plugin.hpp"

namespace apklab {

std::filesystem::path StageContext::scratch_dir(const std::string& plugin) const {
    auto dir = run.scratch_dir(plugin);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    return dir;
}

}  // namespace apklab
