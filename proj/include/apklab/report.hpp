#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "apklab/filters.hpp"
#include "apklab/record.hpp"
#include "apklab/store.hpp"

namespace apklab {

// Renders the XML report document. Pure function of the run row, the
// store-read records, and the rule set, so regenerating from the same
// store with the same rules is byte-identical.
//
// Layout: <analysis> → <meta> (sample identity, timestamps, plugin
// statuses) → one <result> section per plugin with filter stats
// attributes and the kept <record> elements.
std::string render_report(const RunMetaRow& meta, const std::vector<PluginRecord>& records,
                          const FilterRuleSet& rules);

// Reads the run back from the store (never from memory), renders, and
// writes `out_path`. Returns the document text.
std::string generate_report(const ResultStore& store, const std::string& run_id,
                            const FilterRuleSet& rules, const std::filesystem::path& out_path);

}  // namespace apklab
