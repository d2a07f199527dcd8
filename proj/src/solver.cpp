#include "whatif/solver.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "whatif/error.hpp"
#include "whatif/simplex.hpp"
#include "whatif/validate.hpp"

namespace whatif {

namespace {

double clean(double v) { return std::abs(v) < kFeasibilityTol ? 0.0 : v; }

double delay_days(const Lane& lane, const DemandRecord& record, const DelayPolicy& policy) {
    return std::max(0.0, lane.lead_time - static_cast<double>(record.due_day) - policy.grace_days);
}

enum class VarKind { material, product, lost };

struct Variable {
    VarKind kind;
    const Lane* lane = nullptr;
    const Supplier* supplier = nullptr;
    const Factory* factory = nullptr;
    const DemandRecord* record = nullptr;
    Id item;
};

}  // namespace

const char* to_string(PlanStatus status) noexcept {
    return status == PlanStatus::optimal ? "optimal" : "infeasible-input";
}

double component(const CostBreakdown& b, std::size_t index) {
    switch (index) {
        case 0: return b.material;
        case 1: return b.inbound_shipping;
        case 2: return b.production;
        case 3: return b.outbound_shipping;
        case 4: return b.delay;
        case 5: return b.lost_penalty;
    }
    throw Error(ErrorCode::invalid_value, "no cost component " + std::to_string(index));
}

double component(const CostBreakdown& b, const std::string& name) {
    for (std::size_t i = 0; i < std::size(kCostComponents); ++i) {
        if (name == kCostComponents[i]) return component(b, i);
    }
    throw Error(ErrorCode::invalid_value, "no cost component '" + name + "'");
}

double FulfillmentPlan::flow(const Id& lane, const Id& item) const {
    for (const auto& f : flows) {
        if (f.lane == lane && f.item == item) return f.units;
    }
    return 0.0;
}

double FulfillmentPlan::fulfilled(const Id& record) const {
    double sum = 0.0;
    for (const auto& f : flows) {
        if (f.item == record) sum += f.units;
    }
    return sum;
}

FulfillmentPlan solve(const SupplyNetwork& network, const DemandPlan& demand) {
    auto issues = validate(network, demand);
    if (has_errors(issues)) {
        for (const auto& issue : issues) {
            if (issue.severity == Severity::error) {
                throw Error(ErrorCode::invalid_value, "invalid input: " + issue.location + ": " + issue.message);
            }
        }
    }

    // Flow variables in (lane id, item id) order, then lost demand by record id.
    std::vector<Variable> vars;
    for (const auto& lane : network.lanes) {
        if (!lane.active) continue;
        if (const Supplier* s = network.find_supplier(lane.origin)) {
            const Factory* f = network.find_factory(lane.destination);
            if (!s->active || !f || !f->active) continue;
            vars.push_back({VarKind::material, &lane, s, f, nullptr, s->material});
        } else if (const Factory* f = network.find_factory(lane.origin)) {
            if (!f->active) continue;
            for (const auto& rec : demand.records) {
                if (rec.retailer != lane.destination || rec.quantity <= 0) continue;
                vars.push_back({VarKind::product, &lane, nullptr, f, &rec, rec.id});
            }
        }
    }
    std::sort(vars.begin(), vars.end(), [](const Variable& a, const Variable& b) {
        return std::tie(a.lane->id, a.item) < std::tie(b.lane->id, b.item);
    });
    std::vector<const DemandRecord*> records;
    for (const auto& rec : demand.records) records.push_back(&rec);
    std::sort(records.begin(), records.end(),
              [](const DemandRecord* a, const DemandRecord* b) { return a->id < b->id; });
    for (const auto* rec : records) vars.push_back({VarKind::lost, nullptr, nullptr, nullptr, rec, rec->id});

    lp::LinearProgram program;
    for (const auto& v : vars) {
        double c = 0.0;
        switch (v.kind) {
            case VarKind::material: c = v.supplier->unit_price + v.lane->unit_ship_cost; break;
            case VarKind::product:
                c = v.factory->production_cost + v.lane->unit_ship_cost +
                    delay_days(*v.lane, *v.record, network.delay) * v.record->delay_cost_rate;
                break;
            case VarKind::lost: c = v.record->lost_penalty; break;
        }
        program.add_variable(c);
    }

    auto add_row = [&program](lp::Sense sense, double rhs) -> lp::Row& {
        program.rows.push_back({{}, sense, rhs});
        return program.rows.back();
    };

    for (const auto& s : network.suppliers) {
        if (!s.active) continue;
        lp::Row& row = add_row(lp::Sense::less_equal, s.effective_supply());
        for (std::size_t j = 0; j < vars.size(); ++j) {
            if (vars[j].kind == VarKind::material && vars[j].supplier == &s) row.terms.emplace_back(j, 1.0);
        }
        if (row.terms.empty()) program.rows.pop_back();
    }
    for (const auto& lane : network.lanes) {
        if (!lane.active) continue;
        lp::Row& row = add_row(lp::Sense::less_equal, lane.capacity);
        for (std::size_t j = 0; j < vars.size(); ++j) {
            if (vars[j].kind != VarKind::lost && vars[j].lane == &lane) row.terms.emplace_back(j, 1.0);
        }
        if (row.terms.empty()) program.rows.pop_back();
    }
    for (const auto& f : network.factories) {
        if (!f.active) continue;
        lp::Row& row = add_row(lp::Sense::less_equal, f.production_capacity);
        for (std::size_t j = 0; j < vars.size(); ++j) {
            if (vars[j].kind == VarKind::product && vars[j].factory == &f) row.terms.emplace_back(j, 1.0);
        }
        if (row.terms.empty()) {
            program.rows.pop_back();
            continue;
        }
        // Material conversion: sum(bom * product flow) - material inflow <= 0.
        for (const auto& m : network.materials) {
            lp::Row conv{{}, lp::Sense::less_equal, 0.0};
            bool needed = false;
            for (std::size_t j = 0; j < vars.size(); ++j) {
                const auto& v = vars[j];
                if (v.factory != &f) continue;
                if (v.kind == VarKind::product) {
                    const Product* p = network.find_product(v.record->product);
                    auto it = p->bom.find(m.id);
                    if (it != p->bom.end() && it->second > 0) {
                        conv.terms.emplace_back(j, it->second);
                        needed = true;
                    }
                } else if (v.kind == VarKind::material && v.item == m.id) {
                    conv.terms.emplace_back(j, -1.0);
                }
            }
            if (needed) program.rows.push_back(std::move(conv));
        }
    }
    for (const auto* rec : records) {
        lp::Row& row = add_row(lp::Sense::equal, rec->quantity);
        for (std::size_t j = 0; j < vars.size(); ++j) {
            if (vars[j].record == rec) row.terms.emplace_back(j, 1.0);
        }
    }

    lp::Solution solution = lp::solve(program);

    FulfillmentPlan plan;
    for (const auto& lane : network.lanes) plan.lane_universe.insert(lane.id);
    for (const auto& rec : demand.records) plan.record_universe.insert(rec.id);
    if (solution.status != lp::Status::optimal) {
        plan.status = PlanStatus::infeasible_input;
        return plan;
    }

    for (const auto& f : network.factories) {
        if (f.active) plan.production[f.id] = 0.0;
    }
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const auto& v = vars[j];
        const double units = clean(solution.values[j]);
        switch (v.kind) {
            case VarKind::lost: plan.lost[v.record->id] = units; break;
            case VarKind::material:
            case VarKind::product:
                if (units > 0) plan.flows.push_back({v.lane->id, v.item, units});
                if (v.kind == VarKind::product) plan.production[v.factory->id] += units;
                break;
        }
    }
    plan.cost_breakdown = evaluate_cost(network, demand, plan);
    plan.total_cost = plan.cost_breakdown.sum();
    return plan;
}

CostBreakdown evaluate_cost(const SupplyNetwork& network, const DemandPlan& demand,
                            const FulfillmentPlan& plan) {
    CostBreakdown b;
    for (const auto& flow : plan.flows) {
        const Lane* lane = network.find_lane(flow.lane);
        if (!lane) throw Error(ErrorCode::mismatched_universe, "plan uses unknown lane " + flow.lane);
        if (const Supplier* s = network.find_supplier(lane->origin)) {
            b.material += flow.units * s->unit_price;
            b.inbound_shipping += flow.units * lane->unit_ship_cost;
        } else {
            const Factory* f = network.find_factory(lane->origin);
            const DemandRecord* rec = demand.find(flow.item);
            if (!f || !rec) throw Error(ErrorCode::mismatched_universe, "plan flow " + flow.lane + "/" + flow.item);
            b.production += flow.units * f->production_cost;
            b.outbound_shipping += flow.units * lane->unit_ship_cost;
            b.delay += flow.units * delay_days(*lane, *rec, network.delay) * rec->delay_cost_rate;
        }
    }
    for (const auto& [id, units] : plan.lost) {
        const DemandRecord* rec = demand.find(id);
        if (!rec) throw Error(ErrorCode::mismatched_universe, "plan loses unknown record " + id);
        b.lost_penalty += units * rec->lost_penalty;
    }
    return b;
}

std::vector<std::string> check_plan(const SupplyNetwork& network, const DemandPlan& demand,
                                    const FulfillmentPlan& plan, double tol) {
    std::vector<std::string> problems;
    auto near = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };

    for (const auto& rec : demand.records) {
        auto it = plan.lost.find(rec.id);
        const double lost = it == plan.lost.end() ? 0.0 : it->second;
        if (lost < -tol) problems.push_back("negative lost demand for " + rec.id);
        if (!near(plan.fulfilled(rec.id) + lost, rec.quantity)) {
            problems.push_back("fulfilled + lost != quantity for " + rec.id);
        }
    }
    std::map<Id, double> lane_load, supplier_out, production;
    std::map<std::pair<Id, Id>, double> material_in, material_need;
    for (const auto& flow : plan.flows) {
        if (flow.units < -tol) problems.push_back("negative flow on " + flow.lane);
        const Lane* lane = network.find_lane(flow.lane);
        if (!lane) {
            problems.push_back("unknown lane " + flow.lane);
            continue;
        }
        if (!lane->active) problems.push_back("flow on inactive lane " + lane->id);
        lane_load[lane->id] += flow.units;
        if (const Supplier* s = network.find_supplier(lane->origin)) {
            if (!s->active) problems.push_back("flow from inactive supplier " + s->id);
            supplier_out[s->id] += flow.units;
            material_in[{lane->destination, flow.item}] += flow.units;
        } else {
            const DemandRecord* rec = demand.find(flow.item);
            const Factory* f = network.find_factory(lane->origin);
            if (!rec || !f) {
                problems.push_back("bad product flow " + flow.lane + "/" + flow.item);
                continue;
            }
            if (!f->active) problems.push_back("production at inactive factory " + f->id);
            if (rec->retailer != lane->destination) problems.push_back("record shipped to wrong retailer " + rec->id);
            production[f->id] += flow.units;
            for (const auto& [m, units] : network.find_product(rec->product)->bom) {
                material_need[{f->id, m}] += units * flow.units;
            }
        }
    }
    for (const auto& [id, load] : lane_load) {
        if (load > network.find_lane(id)->capacity + tol) problems.push_back("lane over capacity " + id);
    }
    for (const auto& [id, out] : supplier_out) {
        if (out > network.find_supplier(id)->effective_supply() + tol) problems.push_back("supplier over supply " + id);
    }
    for (const auto& f : network.factories) {
        const double made = production.count(f.id) ? production[f.id] : 0.0;
        auto it = plan.production.find(f.id);
        const double reported = it == plan.production.end() ? 0.0 : it->second;
        if (!near(made, reported)) problems.push_back("production mismatch at " + f.id);
        if (made > f.production_capacity + tol) problems.push_back("factory over capacity " + f.id);
    }
    for (const auto& [key, need] : material_need) {
        const double have = material_in.count(key) ? material_in[key] : 0.0;
        if (have + tol < need) problems.push_back("material shortfall at " + key.first + " for " + key.second);
    }
    const CostBreakdown expected = evaluate_cost(network, demand, plan);
    for (std::size_t i = 0; i < std::size(kCostComponents); ++i) {
        if (!near(component(expected, i), component(plan.cost_breakdown, i))) {
            problems.push_back(std::string("cost component mismatch: ") + kCostComponents[i]);
        }
    }
    if (!near(plan.cost_breakdown.sum(), plan.total_cost)) problems.push_back("total != sum of breakdown");
    return problems;
}

bool PlanDiff::unchanged() const {
    return std::abs(delta_total) <= kFeasibilityTol && changed_flows.empty() && delta_lost.empty();
}

PlanDiff diff_plans(const FulfillmentPlan& base, const FulfillmentPlan& alt) {
    if (base.record_universe != alt.record_universe) {
        throw Error(ErrorCode::mismatched_universe, "plans cover different demand records");
    }
    const bool base_in_alt = std::includes(alt.lane_universe.begin(), alt.lane_universe.end(),
                                           base.lane_universe.begin(), base.lane_universe.end());
    const bool alt_in_base = std::includes(base.lane_universe.begin(), base.lane_universe.end(),
                                           alt.lane_universe.begin(), alt.lane_universe.end());
    if (!base_in_alt && !alt_in_base) {
        throw Error(ErrorCode::mismatched_universe, "plans were solved over unrelated lane sets");
    }

    PlanDiff d;
    d.base_total = base.total_cost;
    d.alt_total = alt.total_cost;
    d.delta_total = alt.total_cost - base.total_cost;
    const auto& bb = base.cost_breakdown;
    const auto& ab = alt.cost_breakdown;
    d.delta_by_component = {ab.material - bb.material,
                            ab.inbound_shipping - bb.inbound_shipping,
                            ab.production - bb.production,
                            ab.outbound_shipping - bb.outbound_shipping,
                            ab.delay - bb.delay,
                            ab.lost_penalty - bb.lost_penalty};

    std::map<std::pair<Id, Id>, std::pair<double, double>> flows;
    for (const auto& f : base.flows) flows[{f.lane, f.item}].first = f.units;
    for (const auto& f : alt.flows) flows[{f.lane, f.item}].second = f.units;
    for (const auto& [key, units] : flows) {
        if (std::abs(units.first - units.second) > kFeasibilityTol) {
            d.changed_flows.push_back({key.first, key.second, units.first, units.second});
        }
    }
    for (const auto& id : base.record_universe) {
        const double b = base.lost.count(id) ? base.lost.at(id) : 0.0;
        const double a = alt.lost.count(id) ? alt.lost.at(id) : 0.0;
        d.base_lost_total += b;
        d.alt_lost_total += a;
        if (std::abs(a - b) > kFeasibilityTol) d.delta_lost[id] = a - b;
    }
    if (d.alt_lost_total > kFeasibilityTol) {
        d.feasibility_note = "not all demand can be fulfilled";
    } else {
        d.feasibility_note = "all demand is fulfilled";
    }
    return d;
}

}  // namespace whatif
