#pragma once

#include <nlohmann/json.hpp>

#include "whatif/drift.hpp"
#include "whatif/eval.hpp"
#include "whatif/insights.hpp"
#include "whatif/pipeline.hpp"
#include "whatif/solver.hpp"
#include "whatif/validate.hpp"

namespace whatif {

using json = nlohmann::json;

json to_json(const CostBreakdown& breakdown);
json to_json(const FulfillmentPlan& plan);
json plan_summary_json(const FulfillmentPlan& plan);
json to_json(const PlanDiff& diff);
json to_json(const QueryResult& result);
json to_json(const Answer& answer);
json to_json(const ApplyLog& log);
json to_json(const ValidationIssue& issue);
json to_json(const Alert& alert);
json to_json(const DriftReport& report);
json to_json(const EvalReport& report, bool include_latency = true);

/// Plan export document back into a plan (the service and console consume
/// the export verbatim; the CLI reads it back for diffs).
FulfillmentPlan plan_from_json(const json& document);

}  // namespace whatif
