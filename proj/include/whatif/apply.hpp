#pragma once

#include <string>
#include <variant>
#include <vector>

#include "whatif/dsl.hpp"
#include "whatif/model.hpp"

namespace whatif {

using FieldValue = std::variant<double, bool, std::int64_t>;

/// One whitelisted field write. `created` marks a lane the statement added;
/// reverting removes it instead of restoring a value.
struct FieldChange {
    std::string entity;  // "supplier", "factory", "lane", "demand"
    Id id;
    std::string field;
    FieldValue prior;
    FieldValue value;
    bool created = false;
    bool operator==(const FieldChange&) const = default;
};

struct ApplyLogEntry {
    std::size_t index = 0;
    std::string statement;  // canonical text
    std::vector<FieldChange> changes;
};

struct ApplyLog {
    std::vector<ApplyLogEntry> entries;
    std::size_t change_count() const;
};

struct ApplyResult {
    SupplyNetwork network;
    DemandPlan demand;
    ApplyLog log;
};

/// Applies statements in order to copies of the inputs. Query statements are
/// logged without changes. Throws Error(unresolved_reference) naming the
/// missing id, or Error(invalid_value) for illegal values.
ApplyResult apply(const dsl::ScenarioScript& script, const SupplyNetwork& network,
                  const DemandPlan& demand);

/// Dry-run of apply(); returns the error message or an empty string.
std::string check(const dsl::ScenarioScript& script, const SupplyNetwork& network,
                  const DemandPlan& demand);

/// Restores every logged prior value in reverse order (in place).
void revert(const ApplyLog& log, SupplyNetwork& network, DemandPlan& demand);

std::string to_string(const FieldValue& value);

}  // namespace whatif
