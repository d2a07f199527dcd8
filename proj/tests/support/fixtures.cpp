#include "fixtures.hpp"

#include <cmath>
#include <set>

#include "whatif/dataset_io.hpp"

#ifndef WHATIF_SOURCE_DIR
#error "WHATIF_SOURCE_DIR must point at the repository root"
#endif

namespace whatif::testing {

namespace {

template <typename T>
T pick(std::mt19937_64& rng, const std::vector<T>& items) {
    return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }
double half_steps(std::mt19937_64& rng, int lo, int hi) { return uniform(rng, lo * 2, hi * 2) / 2.0; }

}  // namespace

std::filesystem::path data_dir() { return std::filesystem::path(WHATIF_SOURCE_DIR) / "tests" / "data"; }
std::filesystem::path repo_data_dir() { return std::filesystem::path(WHATIF_SOURCE_DIR) / "data"; }
std::filesystem::path demo_net_dir() { return data_dir() / "demo-net"; }

Dataset demo_net() { return load_dataset_dir(demo_net_dir()); }

Dataset demo_net_scaled() {
    Dataset ds = demo_net();
    for (auto& s : ds.network.suppliers) {
        s.capacity /= 10;
        s.inventory /= 10;
    }
    for (auto& f : ds.network.factories) f.production_capacity /= 10;
    for (auto& l : ds.network.lanes) l.capacity /= 10;
    for (auto& r : ds.demand.records) r.quantity /= 10;
    return ds;
}

Dataset canary(const Dataset& dataset) {
    Dataset ds = dataset;
    double next = 7319.0;
    auto value = [&next] {
        next += 104.0;
        return next + 0.8125;
    };
    for (auto& p : ds.network.products) {
        for (auto& [m, units] : p.bom) units = value();
    }
    for (auto& s : ds.network.suppliers) {
        s.unit_price = value();
        s.capacity = value();
        s.inventory = value();
    }
    for (auto& f : ds.network.factories) {
        f.production_capacity = value();
        f.production_cost = value();
    }
    for (auto& l : ds.network.lanes) {
        l.unit_ship_cost = value();
        l.capacity = value();
        l.lead_time = value();
    }
    std::int64_t day = 86000;
    for (auto& r : ds.demand.records) {
        r.quantity = value();
        r.delay_cost_rate = value();
        r.lost_penalty = value();
        r.due_day = day += 17;
    }
    return ds;
}

Dataset random_instance(std::mt19937_64& rng, const RandomInstanceOptions& o) {
    Dataset ds;
    auto& net = ds.network;
    net.materials.push_back({"M", "material"});
    const int products = uniform(rng, 1, 2);
    for (int i = 1; i <= products; ++i) net.products.push_back({"P" + std::to_string(i), "", {{"M", 1.0}}});
    const int suppliers = uniform(rng, 1, o.max_suppliers);
    const int factories = uniform(rng, 1, o.max_factories);
    const int retailers = uniform(rng, 1, o.max_retailers);
    for (int i = 1; i <= suppliers; ++i) {
        net.suppliers.push_back({"S" + std::to_string(i), "M", half_steps(rng, 0, 4),
                                 static_cast<double>(uniform(rng, 0, 8)), static_cast<double>(uniform(rng, 0, 8)),
                                 !chance(rng, 0.1)});
    }
    for (int i = 1; i <= factories; ++i) {
        net.factories.push_back({"F" + std::to_string(i), static_cast<double>(uniform(rng, 0, 8)),
                                 half_steps(rng, 0, 3), !chance(rng, 0.1)});
    }
    for (int i = 1; i <= retailers; ++i) {
        net.retailers.push_back({"R" + std::to_string(i), i % 2 ? "West" : "East"});
    }
    for (const auto& s : net.suppliers) {
        for (const auto& f : net.factories) {
            if (!chance(rng, 0.8)) continue;
            net.lanes.push_back({s.id + "_" + f.id, s.id, f.id, half_steps(rng, 0, 3),
                                 static_cast<double>(uniform(rng, 0, 8)), static_cast<double>(uniform(rng, 0, 3)),
                                 !chance(rng, 0.1)});
        }
    }
    for (const auto& f : net.factories) {
        for (const auto& r : net.retailers) {
            if (!chance(rng, 0.8)) continue;
            net.lanes.push_back({f.id + "_" + r.id, f.id, r.id, half_steps(rng, 0, 3),
                                 static_cast<double>(uniform(rng, 0, 8)), static_cast<double>(uniform(rng, 0, 6)),
                                 !chance(rng, 0.1)});
        }
    }
    const int records = uniform(rng, 1, o.max_records);
    int budget = uniform(rng, 0, o.max_total_demand);
    for (int i = 1; i <= records; ++i) {
        const int qty = i == records ? budget : uniform(rng, 0, budget);
        budget -= qty;
        DemandRecord rec;
        rec.id = "D" + std::to_string(i);
        rec.retailer = pick(rng, net.retailers).id;
        rec.product = pick(rng, net.products).id;
        rec.quantity = qty;
        rec.due_day = uniform(rng, 0, 6);
        rec.delay_cost_rate = half_steps(rng, 0, 2);
        rec.lost_penalty = uniform(rng, 5, 30);
        ds.demand.records.push_back(std::move(rec));
    }
    ds.demand.snapshot_id = "random";
    return ds;
}

dsl::ScenarioScript random_restriction(std::mt19937_64& rng, const Dataset& ds) {
    using namespace dsl;
    ScenarioScript script;
    const auto& net = ds.network;
    const int count = uniform(rng, 1, 3);
    for (int i = 0; i < count; ++i) {
        switch (uniform(rng, 0, 6)) {
            case 0:
                script.statements.push_back(Disable{{EntityKind::factory, pick(rng, net.factories).id}});
                break;
            case 1:
                script.statements.push_back(Disable{{EntityKind::supplier, pick(rng, net.suppliers).id}});
                break;
            case 2:
                if (net.lanes.empty()) break;
                script.statements.push_back(Disable{{EntityKind::lane, pick(rng, net.lanes).id}});
                break;
            case 3: {
                const auto& f = pick(rng, net.factories);
                script.statements.push_back(
                    SetCapacity{{EntityKind::factory, f.id}, std::floor(f.production_capacity * uniform(rng, 0, 9) / 10.0)});
                break;
            }
            case 4: {
                std::vector<Id> allowed;
                for (const auto& f : net.factories) {
                    if (chance(rng, 0.5)) allowed.push_back(f.id);
                }
                if (allowed.empty()) allowed.push_back(net.factories.front().id);
                script.statements.push_back(RestrictRetailer{pick(rng, net.retailers).id, allowed});
                break;
            }
            case 5: {
                const auto& s = pick(rng, net.suppliers);
                script.statements.push_back(
                    AdjustPrice{"M", s.id, {AdjustMode::by, half_steps(rng, 0, 3)}});
                break;
            }
            default:
                if (net.lanes.empty()) break;
                script.statements.push_back(AdjustShipCost{{LaneSelectorKind::lane, pick(rng, net.lanes).id},
                                                           {AdjustMode::times, 1.0 + uniform(rng, 0, 10) / 10.0}});
                break;
        }
    }
    if (script.statements.empty()) {
        script.statements.push_back(Disable{{EntityKind::factory, net.factories.front().id}});
    }
    return script;
}

dsl::ScenarioScript random_script(std::mt19937_64& rng) {
    using namespace dsl;
    const std::vector<std::string> ids = {"F1", "S2", "R_1", "D7", "x.y", "lane_9", "ALL", "to", "has space",
                                          "quote\"d", "back\\slash", "", "Gen5", "é"};
    auto id = [&] { return pick(rng, ids); };
    auto num = [&]() -> double {
        switch (uniform(rng, 0, 4)) {
            case 0: return uniform(rng, 0, 1000);
            case 1: return uniform(rng, 0, 100000) / 1000.0;
            case 2: return std::uniform_real_distribution<double>(0, 1e6)(rng);
            case 3: return 1.15;
            default: return std::ldexp(std::uniform_real_distribution<double>(0.5, 1)(rng), uniform(rng, -30, 40));
        }
    };
    auto signed_num = [&] { return chance(rng, 0.5) ? -num() : num(); };
    auto selector = [&]() -> Selector {
        switch (uniform(rng, 0, 5)) {
            case 0: return {SelectorKind::all, "", ""};
            case 1: return {SelectorKind::retailer, id(), ""};
            case 2: return {SelectorKind::product, id(), ""};
            case 3: return {SelectorKind::record, id(), ""};
            case 4: return {SelectorKind::attribute, id(), id()};
            default: return {SelectorKind::region, id(), ""};
        }
    };
    auto entity = [&]() -> EntityRef {
        return {static_cast<EntityKind>(uniform(rng, 0, 2)), id()};
    };
    auto adjustment = [&]() -> Adjustment {
        const auto mode = static_cast<AdjustMode>(uniform(rng, 0, 2));
        return {mode, mode == AdjustMode::by ? signed_num() : num()};
    };
    auto period = [&]() -> Period {
        Period p;
        p.trailing = chance(rng, 0.5);
        if (p.trailing) {
            p.days = uniform(rng, 0, 400);
        } else {
            p.first = uniform(rng, -50, 500);
            p.last = uniform(rng, -50, 500);
        }
        return p;
    };
    auto query = [&]() -> QueryForm {
        switch (uniform(rng, 0, 4)) {
            case 0: return SupplierInventory{id(), id()};
            case 1: return CheapestLane{id(), id()};
            case 2: return ShipmentQuantity{id(), id()};
            case 3: return TopFactoryByOutput{period()};
            default:
                return FractionPlansWhere{pick(rng, metrics()), static_cast<Comparator>(uniform(rng, 0, 3)),
                                          signed_num(), period()};
        }
    };

    ScenarioScript script;
    const int count = uniform(rng, 1, 5);
    for (int i = 0; i < count; ++i) {
        switch (uniform(rng, 0, 11)) {
            case 0: script.statements.push_back(ScaleDemand{selector(), num()}); break;
            case 1: script.statements.push_back(SetDemand{id(), num()}); break;
            case 2: script.statements.push_back(Disable{entity()}); break;
            case 3: script.statements.push_back(Enable{entity()}); break;
            case 4: {
                std::vector<Id> fs;
                const int n = uniform(rng, 1, 3);
                for (int k = 0; k < n; ++k) fs.push_back(id());
                script.statements.push_back(RestrictRetailer{id(), fs});
                break;
            }
            case 5: {
                std::optional<Id> at;
                if (chance(rng, 0.5)) at = id();
                script.statements.push_back(AdjustPrice{id(), at, adjustment()});
                break;
            }
            case 6: {
                LaneSelector lanes{static_cast<LaneSelectorKind>(uniform(rng, 0, 2)), ""};
                if (lanes.kind != LaneSelectorKind::all) lanes.value = id();
                script.statements.push_back(AdjustShipCost{lanes, adjustment()});
                break;
            }
            case 7: script.statements.push_back(SetCapacity{entity(), num()}); break;
            case 8: script.statements.push_back(SetLeadTime{id(), num()}); break;
            case 9: script.statements.push_back(ShiftDueDate{selector(), uniform(rng, -60, 60)}); break;
            case 10: script.statements.push_back(AddLane{id(), id(), num(), num(), num()}); break;
            default: script.statements.push_back(Query{query()}); break;
        }
    }
    return script;
}

DemandPlan random_snapshot(std::mt19937_64& rng, const std::string& snapshot_id) {
    DemandPlan plan;
    plan.snapshot_id = snapshot_id;
    const std::vector<std::string> regions = {"West", "East", "North"};
    const std::vector<std::string> hardware = {"Gen5", "Gen6", "Gen7"};
    const std::vector<std::string> people = {"alice", "bob", "carol", ""};
    const int count = uniform(rng, 0, 12);
    for (int i = 0; i < count; ++i) {
        if (chance(rng, 0.3)) continue;  // gaps so two snapshots add/remove ids
        DemandRecord r;
        r.id = "D" + std::to_string(i);
        r.retailer = "R" + std::to_string(uniform(rng, 1, 3));
        r.product = "P";
        r.quantity = uniform(rng, 0, 20) * 5;
        r.due_day = uniform(rng, 0, 30);
        r.delay_cost_rate = 0.2;
        r.lost_penalty = 100;
        r.attributes["region"] = pick(rng, regions);
        r.attributes["hw"] = pick(rng, hardware);
        r.modified_by = pick(rng, people);
        r.change_note = chance(rng, 0.7) ? "note " + std::to_string(i) : "";
        plan.records.push_back(std::move(r));
    }
    return plan;
}

Dataset scale_costs(const Dataset& dataset, double k) {
    Dataset ds = dataset;
    for (auto& s : ds.network.suppliers) s.unit_price *= k;
    for (auto& f : ds.network.factories) f.production_cost *= k;
    for (auto& l : ds.network.lanes) l.unit_ship_cost *= k;
    for (auto& r : ds.demand.records) {
        r.delay_cost_rate *= k;
        r.lost_penalty *= k;
    }
    return ds;
}

}  // namespace whatif::testing
