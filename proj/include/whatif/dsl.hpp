#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "whatif/error.hpp"
#include "whatif/model.hpp"

namespace whatif::dsl {

// Demand selectors: ALL | RETAILER id | PRODUCT id | RECORD id | ATTR k=v | REGION name
enum class SelectorKind { all, retailer, product, record, attribute, region };

struct Selector {
    SelectorKind kind = SelectorKind::all;
    std::string value;  // id, region name, or attribute value
    std::string key;    // attribute key (ATTR only)
    bool operator==(const Selector&) const = default;
};

enum class EntityKind { factory, supplier, lane };

struct EntityRef {
    EntityKind kind = EntityKind::factory;
    Id id;
    bool operator==(const EntityRef&) const = default;
};

enum class AdjustMode { by, to, times };

struct Adjustment {
    AdjustMode mode = AdjustMode::by;
    double amount = 0.0;
    bool operator==(const Adjustment&) const = default;
    double applied_to(double current) const;
};

enum class LaneSelectorKind { lane, region, all };

struct LaneSelector {
    LaneSelectorKind kind = LaneSelectorKind::all;
    std::string value;
    bool operator==(const LaneSelector&) const = default;
};

/// Closed day-index interval; `trailing` periods resolve against the last
/// day of the plan history at query time.
struct Period {
    bool trailing = true;
    std::int64_t first = 0;  // absolute start (trailing == false)
    std::int64_t last = 0;   // absolute end   (trailing == false)
    std::int64_t days = 0;   // window length  (trailing == true)
    bool operator==(const Period&) const = default;
};

enum class Comparator { greater, greater_equal, less, less_equal };

struct SupplierInventory {
    Id supplier;
    Id material;
    bool operator==(const SupplierInventory&) const = default;
};
struct CheapestLane {
    Id origin;
    Id destination;
    bool operator==(const CheapestLane&) const = default;
};
struct ShipmentQuantity {
    Id product;
    Id retailer;
    bool operator==(const ShipmentQuantity&) const = default;
};
struct TopFactoryByOutput {
    Period period;
    bool operator==(const TopFactoryByOutput&) const = default;
};
struct FractionPlansWhere {
    std::string metric;  // a cost component, "total_cost", "shipping" or "lost_units"
    Comparator comparator = Comparator::greater;
    double threshold = 0.0;
    Period period;
    bool operator==(const FractionPlansWhere&) const = default;
};

using QueryForm = std::variant<SupplierInventory, CheapestLane, ShipmentQuantity,
                               TopFactoryByOutput, FractionPlansWhere>;

struct ScaleDemand {
    Selector selector;
    double factor = 1.0;
    bool operator==(const ScaleDemand&) const = default;
};
struct SetDemand {
    Id record;
    double quantity = 0.0;
    bool operator==(const SetDemand&) const = default;
};
struct Disable {
    EntityRef target;
    bool operator==(const Disable&) const = default;
};
struct Enable {
    EntityRef target;
    bool operator==(const Enable&) const = default;
};
struct RestrictRetailer {
    Id retailer;
    std::vector<Id> factories;
    bool operator==(const RestrictRetailer&) const = default;
};
struct AdjustPrice {
    Id material;
    std::optional<Id> supplier;
    Adjustment adjustment;
    bool operator==(const AdjustPrice&) const = default;
};
struct AdjustShipCost {
    LaneSelector lanes;
    Adjustment adjustment;
    bool operator==(const AdjustShipCost&) const = default;
};
struct SetCapacity {
    EntityRef target;
    double value = 0.0;
    bool operator==(const SetCapacity&) const = default;
};
struct SetLeadTime {
    Id lane;
    double days = 0.0;
    bool operator==(const SetLeadTime&) const = default;
};
struct ShiftDueDate {
    Selector selector;
    std::int64_t days = 0;
    bool operator==(const ShiftDueDate&) const = default;
};
struct AddLane {
    Id origin;
    Id destination;
    double cost = 0.0;
    double capacity = 0.0;
    double lead_time = 0.0;
    bool operator==(const AddLane&) const = default;
};
struct Query {
    QueryForm form;
    bool operator==(const Query&) const = default;
};

using Statement = std::variant<ScaleDemand, SetDemand, Disable, Enable, RestrictRetailer,
                               AdjustPrice, AdjustShipCost, SetCapacity, SetLeadTime,
                               ShiftDueDate, AddLane, Query>;

struct ScenarioScript {
    std::vector<Statement> statements;
    bool operator==(const ScenarioScript&) const = default;

    bool query_only() const;
    bool has_query() const;
};

/// Parse failure at a position; `expected` lists the acceptable tokens.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t column, std::vector<std::string> expected,
                const std::string& found);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

protected:
    SyntaxError(ErrorCode code, std::size_t line, std::size_t column,
                std::vector<std::string> expected, const std::string& message);

private:
    std::size_t line_;
    std::size_t column_;
    std::vector<std::string> expected_;
};

/// A statement that starts with a word the language does not know.
class UnknownKeywordError : public SyntaxError {
public:
    UnknownKeywordError(std::size_t line, std::size_t column, const std::string& word);
    const std::string& word() const noexcept { return word_; }

private:
    std::string word_;
};

ScenarioScript parse(std::string_view text);

/// Canonical text; statements joined by "; ".
std::string render(const ScenarioScript& script);
std::string render(const Statement& statement);
std::string render(const QueryForm& form);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Metric names accepted by QUERY FRACTION.
const std::vector<std::string>& metrics();

/// Words reserved by the grammar (upper case).
const std::vector<std::string>& keywords();

}  // namespace whatif::dsl
