#include "whatif/model.hpp"

#include <cstdio>

#include "whatif/dataset_io.hpp"

namespace whatif {

namespace {

template <typename T>
T* find_by_id(std::vector<T>& items, const Id& id) {
    for (auto& item : items) {
        if (item.id == id) return &item;
    }
    return nullptr;
}

template <typename T>
const T* find_by_id(const std::vector<T>& items, const Id& id) {
    for (const auto& item : items) {
        if (item.id == id) return &item;
    }
    return nullptr;
}

}  // namespace

const Material* SupplyNetwork::find_material(const Id& id) const { return find_by_id(materials, id); }
const Product* SupplyNetwork::find_product(const Id& id) const { return find_by_id(products, id); }
const Supplier* SupplyNetwork::find_supplier(const Id& id) const { return find_by_id(suppliers, id); }
const Factory* SupplyNetwork::find_factory(const Id& id) const { return find_by_id(factories, id); }
const Retailer* SupplyNetwork::find_retailer(const Id& id) const { return find_by_id(retailers, id); }
const Lane* SupplyNetwork::find_lane(const Id& id) const { return find_by_id(lanes, id); }
Supplier* SupplyNetwork::find_supplier(const Id& id) { return find_by_id(suppliers, id); }
Factory* SupplyNetwork::find_factory(const Id& id) { return find_by_id(factories, id); }
Lane* SupplyNetwork::find_lane(const Id& id) { return find_by_id(lanes, id); }

const Lane* SupplyNetwork::find_lane_between(const Id& origin, const Id& destination) const {
    for (const auto& lane : lanes) {
        if (lane.origin == origin && lane.destination == destination) return &lane;
    }
    return nullptr;
}

Lane* SupplyNetwork::find_lane_between(const Id& origin, const Id& destination) {
    for (auto& lane : lanes) {
        if (lane.origin == origin && lane.destination == destination) return &lane;
    }
    return nullptr;
}

NodeKind SupplyNetwork::node_kind(const Id& id) const {
    if (find_supplier(id)) return NodeKind::supplier;
    if (find_factory(id)) return NodeKind::factory;
    if (find_retailer(id)) return NodeKind::retailer;
    return NodeKind::none;
}

const DemandRecord* DemandPlan::find(const Id& id) const { return find_by_id(records, id); }
DemandRecord* DemandPlan::find(const Id& id) { return find_by_id(records, id); }

std::uint64_t fingerprint(const SupplyNetwork& network, const DemandPlan& demand) {
    // FNV-1a over the canonical serializations.
    std::uint64_t hash = 14695981039346656037ull;
    auto feed = [&hash](std::string_view bytes) {
        for (unsigned char c : bytes) {
            hash ^= c;
            hash *= 1099511628211ull;
        }
    };
    feed(network_to_json(network, -1));
    feed("\x1f");
    feed(demand.snapshot_id);
    feed("\x1f");
    feed(demand.as_of);
    feed("\x1f");
    feed(demand_to_csv(demand));
    return hash;
}

std::string fingerprint_hex(const SupplyNetwork& network, const DemandPlan& demand) {
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx",
                  static_cast<unsigned long long>(fingerprint(network, demand)));
    return buffer;
}

}  // namespace whatif
