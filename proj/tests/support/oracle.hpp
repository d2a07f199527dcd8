#pragma once

#include "whatif/model.hpp"
#include "whatif/solver.hpp"

namespace whatif::testing {

inline constexpr double kOracleMaxUnits = 8.0;

/// Exhaustive integer enumeration of product assignments and material
/// sourcings. Requires total demand <= 8, integral quantities/capacities and
/// every bom entry equal to 1; throws Error(instance_too_large) otherwise.
FulfillmentPlan oracle_solve(const SupplyNetwork& network, const DemandPlan& demand);

/// Successive-shortest-path min-cost flow on the pure-network form of the
/// program (one material, every product bom {material: 1}). No size bound.
FulfillmentPlan flow_oracle_solve(const SupplyNetwork& network, const DemandPlan& demand);

}  // namespace whatif::testing
