#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace whatif {

using Id = std::string;

struct Material {
    Id id;
    std::string name;
    bool operator==(const Material&) const = default;
};

struct Product {
    Id id;
    std::string name;
    std::map<Id, double> bom;  // material id -> units per unit of product
    bool operator==(const Product&) const = default;
};

struct Supplier {
    Id id;
    Id material;
    double unit_price = 0.0;
    double capacity = 0.0;
    double inventory = 0.0;
    bool active = true;

    /// Planning bound on what the supplier can ship this period.
    double effective_supply() const { return std::min(capacity, inventory); }
    bool operator==(const Supplier&) const = default;
};

struct Factory {
    Id id;
    double production_capacity = 0.0;
    double production_cost = 0.0;
    bool active = true;
    bool operator==(const Factory&) const = default;
};

struct Retailer {
    Id id;
    std::string region;
    bool operator==(const Retailer&) const = default;
};

struct Lane {
    Id id;
    Id origin;
    Id destination;
    double unit_ship_cost = 0.0;
    double capacity = 0.0;
    double lead_time = 0.0;
    bool active = true;
    bool operator==(const Lane&) const = default;
};

/// Delay is charged per unit on the outbound lane:
/// max(0, lead_time - due_day - grace_days) * delay_cost_rate.
struct DelayPolicy {
    double grace_days = 0.0;
    bool operator==(const DelayPolicy&) const = default;
};

enum class NodeKind { supplier, factory, retailer, none };

struct SupplyNetwork {
    std::vector<Material> materials;
    std::vector<Product> products;
    std::vector<Supplier> suppliers;
    std::vector<Factory> factories;
    std::vector<Retailer> retailers;
    std::vector<Lane> lanes;
    DelayPolicy delay;

    bool operator==(const SupplyNetwork&) const = default;

    const Material* find_material(const Id& id) const;
    const Product* find_product(const Id& id) const;
    const Supplier* find_supplier(const Id& id) const;
    const Factory* find_factory(const Id& id) const;
    const Retailer* find_retailer(const Id& id) const;
    const Lane* find_lane(const Id& id) const;
    const Lane* find_lane_between(const Id& origin, const Id& destination) const;
    Supplier* find_supplier(const Id& id);
    Factory* find_factory(const Id& id);
    Lane* find_lane(const Id& id);
    Lane* find_lane_between(const Id& origin, const Id& destination);

    NodeKind node_kind(const Id& id) const;
};

struct DemandRecord {
    Id id;
    Id retailer;
    Id product;
    double quantity = 0.0;
    std::int64_t due_day = 0;
    double delay_cost_rate = 0.0;
    double lost_penalty = 0.0;
    std::map<std::string, std::string> attributes;
    std::string owner;
    std::string modified_by;
    std::string change_note;
    std::string modified_at;

    bool operator==(const DemandRecord&) const = default;
};

struct DemandPlan {
    std::string snapshot_id;
    std::string as_of;
    std::vector<DemandRecord> records;

    bool operator==(const DemandPlan&) const = default;

    const DemandRecord* find(const Id& id) const;
    DemandRecord* find(const Id& id);
};

/// Network plus demand, the unit every downstream module reads.
struct Dataset {
    SupplyNetwork network;
    DemandPlan demand;
    bool operator==(const Dataset&) const = default;
};

/// Stable 64-bit fingerprint over every field of the dataset. Used to prove
/// that read paths leave the baseline untouched.
std::uint64_t fingerprint(const SupplyNetwork& network, const DemandPlan& demand);
std::string fingerprint_hex(const SupplyNetwork& network, const DemandPlan& demand);

}  // namespace whatif
