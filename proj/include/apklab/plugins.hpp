#pragma once

#include <vector>

#include "apklab/plugin.hpp"

namespace apklab {

// The six builtin analysis plugins. Each call builds fresh instances: the
// static and hashlookup plugins hold per-run background state, so catalog
// instances must not be shared across runs.
std::vector<PluginPtr> builtin_catalog();

PluginPtr make_fsdiff_plugin();
PluginPtr make_network_plugin();
PluginPtr make_syscall_plugin();
PluginPtr make_static_plugin();
PluginPtr make_apilog_plugin();
PluginPtr make_hashlookup_plugin();

}  // namespace apklab
