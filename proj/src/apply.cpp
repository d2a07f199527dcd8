#include "whatif/apply.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "whatif/error.hpp"

namespace whatif {

namespace {

using namespace dsl;

[[noreturn]] void unresolved(const std::string& what, const std::string& id) {
    throw Error(ErrorCode::unresolved_reference, "unresolved reference: " + what + " '" + id + "'");
}
[[noreturn]] void illegal(const std::string& message) {
    throw Error(ErrorCode::invalid_value, "illegal value: " + message);
}

void require_non_negative(double value, const std::string& what) {
    if (!std::isfinite(value) || value < 0) illegal(what + " must be >= 0 (got " + format_number(value) + ")");
}

class Applier {
public:
    Applier(SupplyNetwork& network, DemandPlan& demand) : net_(network), demand_(demand) {}

    std::vector<FieldChange> run(const Statement& statement) {
        changes_.clear();
        std::visit([this](const auto& s) { apply(s); }, statement);
        return std::move(changes_);
    }

private:
    template <typename T>
    void set(const char* entity, const Id& id, const char* field, T& slot, T value) {
        changes_.push_back({entity, id, field, FieldValue{slot}, FieldValue{value}, false});
        slot = value;
    }

    std::vector<DemandRecord*> select(const Selector& sel) {
        std::vector<DemandRecord*> out;
        for (auto& rec : demand_.records) {
            bool match = false;
            switch (sel.kind) {
                case SelectorKind::all: match = true; break;
                case SelectorKind::retailer: match = rec.retailer == sel.value; break;
                case SelectorKind::product: match = rec.product == sel.value; break;
                case SelectorKind::record: match = rec.id == sel.value; break;
                case SelectorKind::attribute: {
                    auto it = rec.attributes.find(sel.key);
                    match = it != rec.attributes.end() && it->second == sel.value;
                    break;
                }
                case SelectorKind::region: {
                    const Retailer* r = net_.find_retailer(rec.retailer);
                    match = r && r->region == sel.value;
                    break;
                }
            }
            if (match) out.push_back(&rec);
        }
        if (out.empty()) {
            switch (sel.kind) {
                case SelectorKind::all: unresolved("demand", "ALL");
                case SelectorKind::retailer: unresolved("retailer", sel.value);
                case SelectorKind::product: unresolved("product", sel.value);
                case SelectorKind::record: unresolved("demand record", sel.value);
                case SelectorKind::attribute: unresolved("attribute", sel.key + "=" + sel.value);
                case SelectorKind::region: unresolved("region", sel.value);
            }
        }
        return out;
    }

    bool* active_flag(const EntityRef& ref, const char*& entity) {
        switch (ref.kind) {
            case EntityKind::factory:
                entity = "factory";
                if (auto* f = net_.find_factory(ref.id)) return &f->active;
                unresolved("factory", ref.id);
            case EntityKind::supplier:
                entity = "supplier";
                if (auto* s = net_.find_supplier(ref.id)) return &s->active;
                unresolved("supplier", ref.id);
            case EntityKind::lane:
                entity = "lane";
                if (auto* l = net_.find_lane(ref.id)) return &l->active;
                unresolved("lane", ref.id);
        }
        unresolved("entity", ref.id);
    }

    void apply(const ScaleDemand& s) {
        if (!std::isfinite(s.factor) || s.factor <= 0) illegal("scale factor must be > 0");
        for (auto* rec : select(s.selector)) set("demand", rec->id, "quantity", rec->quantity, rec->quantity * s.factor);
    }
    void apply(const SetDemand& s) {
        require_non_negative(s.quantity, "demand quantity");
        DemandRecord* rec = demand_.find(s.record);
        if (!rec) unresolved("demand record", s.record);
        set("demand", rec->id, "quantity", rec->quantity, s.quantity);
    }
    void apply(const Disable& s) {
        const char* entity = nullptr;
        bool* flag = active_flag(s.target, entity);
        set(entity, s.target.id, "active", *flag, false);
    }
    void apply(const Enable& s) {
        const char* entity = nullptr;
        bool* flag = active_flag(s.target, entity);
        set(entity, s.target.id, "active", *flag, true);
    }
    void apply(const RestrictRetailer& s) {
        if (s.factories.empty()) illegal("RESTRICT RETAILER needs at least one factory");
        if (!net_.find_retailer(s.retailer)) unresolved("retailer", s.retailer);
        std::set<Id> allowed;
        for (const auto& f : s.factories) {
            if (!net_.find_factory(f)) unresolved("factory", f);
            allowed.insert(f);
        }
        for (auto& lane : net_.lanes) {
            if (lane.destination != s.retailer || !net_.find_factory(lane.origin)) continue;
            if (!allowed.count(lane.origin)) set("lane", lane.id, "active", lane.active, false);
        }
    }
    void apply(const AdjustPrice& s) {
        if (!net_.find_material(s.material)) unresolved("material", s.material);
        if (s.adjustment.mode == AdjustMode::times && s.adjustment.amount < 0) illegal("price multiplier must be >= 0");
        bool touched = false;
        for (auto& sup : net_.suppliers) {
            if (sup.material != s.material) continue;
            if (s.supplier && sup.id != *s.supplier) continue;
            const double price = s.adjustment.applied_to(sup.unit_price);
            require_non_negative(price, "unit_price of " + sup.id);
            set("supplier", sup.id, "unit_price", sup.unit_price, price);
            touched = true;
        }
        if (!touched) {
            if (s.supplier) unresolved("supplier of material " + s.material, *s.supplier);
            unresolved("supplier of material", s.material);
        }
    }
    void apply(const AdjustShipCost& s) {
        if (s.adjustment.mode == AdjustMode::times && s.adjustment.amount < 0) illegal("cost multiplier must be >= 0");
        bool touched = false;
        for (auto& lane : net_.lanes) {
            bool match = false;
            switch (s.lanes.kind) {
                case LaneSelectorKind::all: match = true; break;
                case LaneSelectorKind::lane: match = lane.id == s.lanes.value; break;
                case LaneSelectorKind::region: {
                    const Retailer* r = net_.find_retailer(lane.destination);
                    match = r && r->region == s.lanes.value;
                    break;
                }
            }
            if (!match) continue;
            const double cost = s.adjustment.applied_to(lane.unit_ship_cost);
            require_non_negative(cost, "unit_ship_cost of " + lane.id);
            set("lane", lane.id, "unit_ship_cost", lane.unit_ship_cost, cost);
            touched = true;
        }
        if (!touched) {
            unresolved(s.lanes.kind == LaneSelectorKind::region ? "region" : "lane",
                       s.lanes.kind == LaneSelectorKind::all ? "ALL" : s.lanes.value);
        }
    }
    void apply(const SetCapacity& s) {
        require_non_negative(s.value, "capacity");
        switch (s.target.kind) {
            case EntityKind::factory: {
                auto* f = net_.find_factory(s.target.id);
                if (!f) unresolved("factory", s.target.id);
                set("factory", f->id, "production_capacity", f->production_capacity, s.value);
                break;
            }
            case EntityKind::supplier: {
                auto* sup = net_.find_supplier(s.target.id);
                if (!sup) unresolved("supplier", s.target.id);
                set("supplier", sup->id, "capacity", sup->capacity, s.value);
                break;
            }
            case EntityKind::lane: {
                auto* l = net_.find_lane(s.target.id);
                if (!l) unresolved("lane", s.target.id);
                set("lane", l->id, "capacity", l->capacity, s.value);
                break;
            }
        }
    }
    void apply(const SetLeadTime& s) {
        require_non_negative(s.days, "lead time");
        auto* l = net_.find_lane(s.lane);
        if (!l) unresolved("lane", s.lane);
        set("lane", l->id, "lead_time", l->lead_time, s.days);
    }
    void apply(const ShiftDueDate& s) {
        for (auto* rec : select(s.selector)) set("demand", rec->id, "due_day", rec->due_day, rec->due_day + s.days);
    }
    void apply(const AddLane& s) {
        require_non_negative(s.cost, "lane cost");
        require_non_negative(s.capacity, "lane capacity");
        require_non_negative(s.lead_time, "lane lead time");
        const NodeKind from = net_.node_kind(s.origin);
        const NodeKind to = net_.node_kind(s.destination);
        if (from == NodeKind::none) unresolved("node", s.origin);
        if (to == NodeKind::none) unresolved("node", s.destination);
        const bool supply = from == NodeKind::supplier && to == NodeKind::factory;
        const bool distribution = from == NodeKind::factory && to == NodeKind::retailer;
        if (!supply && !distribution) illegal("lanes must run supplier->factory or factory->retailer");

        if (Lane* existing = net_.find_lane_between(s.origin, s.destination)) {
            set("lane", existing->id, "unit_ship_cost", existing->unit_ship_cost, s.cost);
            set("lane", existing->id, "capacity", existing->capacity, s.capacity);
            set("lane", existing->id, "lead_time", existing->lead_time, s.lead_time);
            set("lane", existing->id, "active", existing->active, true);
            return;
        }
        std::string id = s.origin + "_" + s.destination;
        for (int suffix = 2; net_.find_lane(id); ++suffix) id = s.origin + "_" + s.destination + "_" + std::to_string(suffix);
        net_.lanes.push_back({id, s.origin, s.destination, s.cost, s.capacity, s.lead_time, true});
        changes_.push_back({"lane", id, "created", FieldValue{false}, FieldValue{true}, true});
    }
    void apply(const Query&) {}

    SupplyNetwork& net_;
    DemandPlan& demand_;
    std::vector<FieldChange> changes_;
};

template <typename T>
void restore(T& slot, const FieldValue& prior) {
    slot = std::get<T>(prior);
}

}  // namespace

std::size_t ApplyLog::change_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.changes.size();
    return n;
}

ApplyResult apply(const dsl::ScenarioScript& script, const SupplyNetwork& network, const DemandPlan& demand) {
    ApplyResult result{network, demand, {}};
    Applier applier(result.network, result.demand);
    for (std::size_t i = 0; i < script.statements.size(); ++i) {
        const auto& statement = script.statements[i];
        result.log.entries.push_back({i, dsl::render(statement), applier.run(statement)});
    }
    return result;
}

std::string check(const dsl::ScenarioScript& script, const SupplyNetwork& network, const DemandPlan& demand) {
    try {
        apply(script, network, demand);
        return {};
    } catch (const Error& e) {
        return e.what();
    }
}

void revert(const ApplyLog& log, SupplyNetwork& network, DemandPlan& demand) {
    for (auto entry = log.entries.rbegin(); entry != log.entries.rend(); ++entry) {
        for (auto change = entry->changes.rbegin(); change != entry->changes.rend(); ++change) {
            const auto& c = *change;
            if (c.created) {
                std::erase_if(network.lanes, [&](const Lane& l) { return l.id == c.id; });
                continue;
            }
            if (c.entity == "demand") {
                DemandRecord* rec = demand.find(c.id);
                if (!rec) throw Error(ErrorCode::unresolved_reference, "revert: record " + c.id);
                if (c.field == "quantity") restore(rec->quantity, c.prior);
                else if (c.field == "due_day") restore(rec->due_day, c.prior);
            } else if (c.entity == "supplier") {
                Supplier* s = network.find_supplier(c.id);
                if (!s) throw Error(ErrorCode::unresolved_reference, "revert: supplier " + c.id);
                if (c.field == "active") restore(s->active, c.prior);
                else if (c.field == "unit_price") restore(s->unit_price, c.prior);
                else if (c.field == "capacity") restore(s->capacity, c.prior);
            } else if (c.entity == "factory") {
                Factory* f = network.find_factory(c.id);
                if (!f) throw Error(ErrorCode::unresolved_reference, "revert: factory " + c.id);
                if (c.field == "active") restore(f->active, c.prior);
                else if (c.field == "production_capacity") restore(f->production_capacity, c.prior);
            } else if (c.entity == "lane") {
                Lane* l = network.find_lane(c.id);
                if (!l) throw Error(ErrorCode::unresolved_reference, "revert: lane " + c.id);
                if (c.field == "active") restore(l->active, c.prior);
                else if (c.field == "unit_ship_cost") restore(l->unit_ship_cost, c.prior);
                else if (c.field == "capacity") restore(l->capacity, c.prior);
                else if (c.field == "lead_time") restore(l->lead_time, c.prior);
            }
        }
    }
}

std::string to_string(const FieldValue& value) {
    if (const auto* d = std::get_if<double>(&value)) return dsl::format_number(*d);
    if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
    return std::to_string(std::get<std::int64_t>(value));
}

}  // namespace whatif
