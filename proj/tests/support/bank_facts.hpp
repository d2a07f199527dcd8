#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "whatif/dsl.hpp"
#include "whatif/eval.hpp"
#include "whatif/model.hpp"

namespace whatif::testing {

/// Facts a correct answer to `script` must carry, computed without the
/// solver or the insights code: what-if scripts go through apply() and the
/// flow oracle, queries are answered by direct scans of the dataset, the
/// oracle baseline plan and the raw history lines.
std::map<std::string, ExpectedFact> oracle_facts(const dsl::ScenarioScript& script, const Dataset& dataset,
                                                 const std::filesystem::path& history_file);

}  // namespace whatif::testing
