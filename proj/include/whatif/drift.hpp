#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "whatif/model.hpp"

namespace whatif {

enum class ChangeKind { added, removed, modified };
enum class RootCause {
    hardware_generation_efficiency,
    customer_reduction,
    demand_growth,
    reallocation,
    unclassified,
};

const char* to_string(ChangeKind kind) noexcept;
const char* to_string(RootCause cause) noexcept;

struct AttributeDelta {
    std::string key;
    std::optional<std::string> before;
    std::optional<std::string> after;
    bool operator==(const AttributeDelta&) const = default;
};

struct ChangeRecord {
    Id record;
    ChangeKind kind = ChangeKind::modified;
    double quantity_before = 0.0;
    double quantity_after = 0.0;
    std::vector<AttributeDelta> attribute_deltas;  // includes retailer/product moves
    std::int64_t due_day_delta = 0;
    std::string region_before;
    std::string region_after;
    std::string author;
    std::string note;
    RootCause category = RootCause::unclassified;
    std::vector<std::string> flags;  // missing-metadata, large-swing

    double quantity_delta() const { return quantity_after - quantity_before; }
    bool operator==(const ChangeRecord&) const = default;
};

struct RegionAggregate {
    double before = 0.0;
    double after = 0.0;
    double delta() const { return after - before; }
    bool operator==(const RegionAggregate&) const = default;
};

struct DriftReport {
    std::string snapshot_before;
    std::string snapshot_after;
    std::map<std::string, RegionAggregate> regions;
    std::vector<ChangeRecord> changes;  // sorted by record id
    std::size_t unchanged = 0;

    std::size_t count(ChangeKind kind) const;
    std::vector<const ChangeRecord*> flagged() const;
    bool operator==(const DriftReport&) const = default;
};

struct DriftConfig {
    double large_swing_fraction = 0.5;
    std::set<std::string> hardware_keys{"hardware_type", "hw", "hardware", "generation"};
    std::set<std::string> region_keys{"region"};
};

/// Record-level diff keyed by record id. Throws Error(duplicate_id).
DriftReport compute_drift(const DemandPlan& before, const DemandPlan& after,
                          const DriftConfig& config = {});

enum class ReportFormat { markdown, email_text };

/// Byte-stable rendering.
std::string render_report(const DriftReport& report, ReportFormat format);

/// Region used for aggregation: the configured region attribute, else the retailer id.
std::string record_region(const DemandRecord& record, const DriftConfig& config = {});

}  // namespace whatif
