#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "whatif/dsl.hpp"
#include "whatif/model.hpp"
#include "whatif/solver.hpp"

namespace whatif {

struct PlanSummary {
    double total_cost = 0.0;
    CostBreakdown cost_breakdown;
    std::map<Id, double> production;
    double lost_units = 0.0;
    bool operator==(const PlanSummary&) const = default;
};

PlanSummary summarize(const FulfillmentPlan& plan);

struct ShipmentEvent {
    Id lane;
    std::int64_t ship_day = 0;
    double lead_time = 0.0;  // observed days in transit
    bool operator==(const ShipmentEvent&) const = default;
};

struct HistoryEntry {
    std::int64_t day = 0;
    PlanSummary summary;
    std::vector<ShipmentEvent> shipments;
    bool operator==(const HistoryEntry&) const = default;
};

/// Append-only; days strictly increase.
class PlanHistory {
public:
    void append(HistoryEntry entry);
    const std::vector<HistoryEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::int64_t first_day() const;
    std::int64_t last_day() const;

    /// Replays a history file (one JSON record per line).
    static PlanHistory load(const std::filesystem::path& path);
    static PlanHistory parse(std::string_view text, const std::string& source_name = "history");
    /// Appends one record to the file and to this history.
    void append_to_file(const std::filesystem::path& path, HistoryEntry entry);

private:
    std::vector<HistoryEntry> entries_;
};

std::string to_json_line(const HistoryEntry& entry);

/// Read-only view of everything queries may look at.
struct InsightState {
    const SupplyNetwork* network = nullptr;
    const DemandPlan* demand = nullptr;
    const FulfillmentPlan* plan = nullptr;
    const PlanHistory* history = nullptr;
};

struct QueryResult {
    std::string kind;      // supplier-inventory, cheapest-lane, shipment-quantity, ...
    double value = 0.0;    // the scalar answer
    std::string unit;      // "units", "currency", "fraction"
    std::string entity;    // lane / factory id when the answer names one
    std::int64_t period_first = 0;
    std::int64_t period_last = 0;
    std::size_t matched = 0;  // FractionPlansWhere numerator
    std::size_t total = 0;    // FractionPlansWhere denominator
    std::string subject;      // human label of the question subject
    bool operator==(const QueryResult&) const = default;
};

/// Throws Error(unknown_entity) or Error(empty_period).
QueryResult run_query(const dsl::QueryForm& query, const InsightState& state);

/// Resolves a period to a closed interval against the history.
std::pair<std::int64_t, std::int64_t> resolve_period(const dsl::Period& period,
                                                     const PlanHistory& history);

double metric_value(const PlanSummary& summary, const std::string& metric);
bool is_known_metric(const std::string& metric);

struct Alert {
    std::string kind = "lead-time-drift";
    Id subject;  // lane id
    Id origin;   // supplier / factory at the lane origin
    double recent_mean = 0.0;
    double reference_mean = 0.0;
    std::int64_t last_ship_day = 0;
    double predicted_arrival_day = 0.0;
    std::string suggested_action;
};

struct MonitorConfig {
    std::int64_t window = 30;
    std::int64_t reference = 90;
    double min_relative_increase = 0.25;
    double min_absolute_increase = 1.0;
};

/// Alerts for lanes whose recent mean lead time exceeds the reference mean
/// by both thresholds. Windows are disjoint and end at the last history day.
/// `network` (optional) fills in the lane origin.
/// Throws Error(insufficient_history).
std::vector<Alert> monitor_lead_times(const PlanHistory& history, const MonitorConfig& config,
                                      const SupplyNetwork* network = nullptr);

struct Suggestion {
    Lane candidate;
    PlanDiff diff;
};

/// Candidates that strictly lower total cost, best first.
std::vector<Suggestion> suggest_improvements(const SupplyNetwork& network, const DemandPlan& demand,
                                             const FulfillmentPlan& baseline,
                                             const std::vector<Lane>& candidates);

}  // namespace whatif
