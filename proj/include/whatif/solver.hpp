#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "whatif/model.hpp"

namespace whatif {

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kOptimalityTol = 1e-6;

struct CostBreakdown {
    double material = 0.0;
    double inbound_shipping = 0.0;
    double production = 0.0;
    double outbound_shipping = 0.0;
    double delay = 0.0;
    double lost_penalty = 0.0;

    double sum() const {
        return material + inbound_shipping + production + outbound_shipping + delay + lost_penalty;
    }
    bool operator==(const CostBreakdown&) const = default;
};

/// Names in presentation order; index matches `component(i)`.
inline constexpr const char* kCostComponents[] = {"material",          "inbound_shipping",
                                                  "production",        "outbound_shipping",
                                                  "delay",             "lost_penalty"};
double component(const CostBreakdown& breakdown, std::size_t index);
double component(const CostBreakdown& breakdown, const std::string& name);

/// One lane's flow for one item: a material id on supply lanes, a demand
/// record id on distribution lanes.
struct FlowEntry {
    Id lane;
    Id item;
    double units = 0.0;
    bool operator==(const FlowEntry&) const = default;
};

enum class PlanStatus { optimal, infeasible_input };

struct FulfillmentPlan {
    std::vector<FlowEntry> flows;       // sorted by (lane, item); zero flows omitted
    std::map<Id, double> production;    // every active factory
    std::map<Id, double> lost;          // every demand record
    CostBreakdown cost_breakdown;
    double total_cost = 0.0;
    PlanStatus status = PlanStatus::optimal;
    std::set<Id> lane_universe;
    std::set<Id> record_universe;

    bool operator==(const FulfillmentPlan&) const = default;

    double flow(const Id& lane, const Id& item) const;
    double fulfilled(const Id& record) const;
};

/// Builds the cost-minimizing flow program over the layered network and
/// solves it. Lost-demand slack keeps every instance feasible.
/// Throws Error(invalid_value) when validate() would report errors.
FulfillmentPlan solve(const SupplyNetwork& network, const DemandPlan& demand);

struct FlowChange {
    Id lane;
    Id item;
    double base_units = 0.0;
    double alt_units = 0.0;
    bool operator==(const FlowChange&) const = default;
};

struct PlanDiff {
    double base_total = 0.0;
    double alt_total = 0.0;
    double delta_total = 0.0;
    CostBreakdown delta_by_component;
    std::vector<FlowChange> changed_flows;
    std::map<Id, double> delta_lost;  // nonzero entries only
    double base_lost_total = 0.0;
    double alt_lost_total = 0.0;
    std::string feasibility_note;

    bool operator==(const PlanDiff&) const = default;
    bool unchanged() const;
};

/// Throws Error(mismatched_universe) when the plans cover different demand
/// records or neither lane set contains the other.
PlanDiff diff_plans(const FulfillmentPlan& base, const FulfillmentPlan& alt);

/// Checks the plan invariants against its instance; returns the violations.
std::vector<std::string> check_plan(const SupplyNetwork& network, const DemandPlan& demand,
                                    const FulfillmentPlan& plan, double tol = 1e-6);

/// Evaluates the objective of a given flow assignment against an instance.
CostBreakdown evaluate_cost(const SupplyNetwork& network, const DemandPlan& demand,
                            const FulfillmentPlan& plan);

const char* to_string(PlanStatus status) noexcept;

}  // namespace whatif
