#pragma once

#include <string>
#include <vector>

#include "whatif/model.hpp"

namespace whatif {

enum class Severity { error, warning };

struct ValidationIssue {
    Severity severity = Severity::error;
    std::string code;      // e.g. "unreachable-demand", "inert-supplier"
    std::string location;  // entity path, e.g. "suppliers/S1"
    std::string message;
};

/// Collects every issue; an empty result means the dataset is solvable.
std::vector<ValidationIssue> validate(const SupplyNetwork& network, const DemandPlan& demand);

bool has_errors(const std::vector<ValidationIssue>& issues);

const char* to_string(Severity severity) noexcept;

}  // namespace whatif
