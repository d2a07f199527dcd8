#include "whatif/serialize.hpp"

#include "whatif/error.hpp"

namespace whatif {

namespace {

json attribute_value(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

json counts_json(const OutcomeCounts& c) {
    return {{"total", c.total()},         {"correct", c.correct},
            {"incorrect", c.incorrect},   {"fallback", c.fallback},
            {"clarification", c.clarification}, {"accuracy", c.accuracy()},
            {"fallback_rate", c.fallback_rate()}};
}

}  // namespace

json to_json(const CostBreakdown& b) {
    json out = json::object();
    for (std::size_t i = 0; i < std::size(kCostComponents); ++i) out[kCostComponents[i]] = component(b, i);
    return out;
}

json to_json(const FulfillmentPlan& plan) {
    json flows = json::array();
    for (const auto& f : plan.flows) flows.push_back({{"lane", f.lane}, {"item", f.item}, {"units", f.units}});
    return {{"status", to_string(plan.status)},
            {"total_cost", plan.total_cost},
            {"cost_breakdown", to_json(plan.cost_breakdown)},
            {"flows", flows},
            {"production", plan.production},
            {"lost", plan.lost},
            {"lanes", plan.lane_universe},
            {"records", plan.record_universe}};
}

json plan_summary_json(const FulfillmentPlan& plan) {
    const auto s = summarize(plan);
    return {{"total_cost", s.total_cost},
            {"cost_breakdown", to_json(s.cost_breakdown)},
            {"production", s.production},
            {"lost_units", s.lost_units}};
}

FulfillmentPlan plan_from_json(const json& doc) {
    try {
        FulfillmentPlan p;
        p.status = doc.value("status", std::string("optimal")) == "optimal" ? PlanStatus::optimal
                                                                            : PlanStatus::infeasible_input;
        p.total_cost = doc.at("total_cost").get<double>();
        const auto& b = doc.at("cost_breakdown");
        p.cost_breakdown.material = b.value("material", 0.0);
        p.cost_breakdown.inbound_shipping = b.value("inbound_shipping", 0.0);
        p.cost_breakdown.production = b.value("production", 0.0);
        p.cost_breakdown.outbound_shipping = b.value("outbound_shipping", 0.0);
        p.cost_breakdown.delay = b.value("delay", 0.0);
        p.cost_breakdown.lost_penalty = b.value("lost_penalty", 0.0);
        for (const auto& f : doc.at("flows")) {
            p.flows.push_back({f.at("lane").get<std::string>(), f.at("item").get<std::string>(), f.at("units").get<double>()});
        }
        p.production = doc.at("production").get<std::map<Id, double>>();
        p.lost = doc.at("lost").get<std::map<Id, double>>();
        if (doc.contains("lanes")) p.lane_universe = doc.at("lanes").get<std::set<Id>>();
        if (doc.contains("records")) p.record_universe = doc.at("records").get<std::set<Id>>();
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_input, std::string("plan document: ") + e.what());
    }
}

json to_json(const PlanDiff& d) {
    json changed = json::array();
    for (const auto& c : d.changed_flows) {
        changed.push_back({{"lane", c.lane}, {"item", c.item}, {"base_units", c.base_units}, {"alt_units", c.alt_units}});
    }
    return {{"base_total", d.base_total},
            {"alt_total", d.alt_total},
            {"delta_total", d.delta_total},
            {"delta_by_component", to_json(d.delta_by_component)},
            {"changed_flows", changed},
            {"delta_lost", d.delta_lost},
            {"base_lost_total", d.base_lost_total},
            {"alt_lost_total", d.alt_lost_total},
            {"feasibility_note", d.feasibility_note}};
}

json to_json(const QueryResult& r) {
    json out = {{"kind", r.kind}, {"value", r.value}, {"unit", r.unit}, {"subject", r.subject}};
    if (!r.entity.empty()) out["entity"] = r.entity;
    if (r.kind == "top-factory" || r.kind == "fraction-plans") {
        out["period"] = {r.period_first, r.period_last};
    }
    if (r.kind == "fraction-plans") {
        out["matched"] = r.matched;
        out["total"] = r.total;
    }
    return out;
}

json to_json(const Answer& a) {
    json out = {{"kind", to_string(a.kind)}, {"text", a.text}, {"backend", a.backend}, {"retries", a.retries}};
    out["dsl"] = a.dsl ? json(*a.dsl) : json(nullptr);
    if (const auto* d = std::get_if<PlanDiff>(&a.structured)) {
        out["structured"] = to_json(*d);
    } else if (const auto* q = std::get_if<QueryResult>(&a.structured)) {
        out["structured"] = to_json(*q);
    } else {
        out["structured"] = nullptr;
    }
    if (!a.options.empty()) out["options"] = a.options;
    return out;
}

json to_json(const ApplyLog& log) {
    json out = json::array();
    for (const auto& e : log.entries) {
        json changes = json::array();
        for (const auto& c : e.changes) {
            changes.push_back({{"entity", c.entity},
                               {"id", c.id},
                               {"field", c.field},
                               {"prior", to_string(c.prior)},
                               {"value", to_string(c.value)},
                               {"created", c.created}});
        }
        out.push_back({{"index", e.index}, {"statement", e.statement}, {"changes", changes}});
    }
    return out;
}

json to_json(const ValidationIssue& i) {
    return {{"severity", to_string(i.severity)}, {"code", i.code}, {"location", i.location}, {"message", i.message}};
}

json to_json(const Alert& a) {
    return {{"kind", a.kind},
            {"subject", a.subject},
            {"origin", a.origin},
            {"recent_mean", a.recent_mean},
            {"reference_mean", a.reference_mean},
            {"last_ship_day", a.last_ship_day},
            {"predicted_arrival_day", a.predicted_arrival_day},
            {"suggested_action", a.suggested_action}};
}

json to_json(const DriftReport& r) {
    json regions = json::object();
    for (const auto& [name, agg] : r.regions) {
        regions[name] = {{"before", agg.before}, {"after", agg.after}, {"delta", agg.delta()}};
    }
    json changes = json::array();
    for (const auto& c : r.changes) {
        json attrs = json::array();
        for (const auto& a : c.attribute_deltas) {
            attrs.push_back({{"key", a.key}, {"before", attribute_value(a.before)}, {"after", attribute_value(a.after)}});
        }
        changes.push_back({{"record", c.record},
                           {"kind", to_string(c.kind)},
                           {"quantity_before", c.quantity_before},
                           {"quantity_after", c.quantity_after},
                           {"quantity_delta", c.quantity_delta()},
                           {"attribute_deltas", attrs},
                           {"due_day_delta", c.due_day_delta},
                           {"region_before", c.region_before},
                           {"region_after", c.region_after},
                           {"author", c.author},
                           {"note", c.note},
                           {"category", to_string(c.category)},
                           {"flags", c.flags}});
    }
    json flagged = json::array();
    for (const auto* c : r.flagged()) flagged.push_back(c->record);
    return {{"snapshot_before", r.snapshot_before},
            {"snapshot_after", r.snapshot_after},
            {"regions", regions},
            {"changes", changes},
            {"flagged", flagged},
            {"summary",
             {{"added", r.count(ChangeKind::added)},
              {"removed", r.count(ChangeKind::removed)},
              {"modified", r.count(ChangeKind::modified)},
              {"unchanged", r.unchanged}}}};
}

json to_json(const EvalReport& r, bool include_latency) {
    json items = json::array();
    for (const auto& i : r.items) {
        json mismatches = json::array();
        for (const auto& m : i.mismatches) {
            mismatches.push_back({{"name", m.name}, {"expected", m.expected}, {"actual", m.actual}});
        }
        json item = {{"id", i.id},
                     {"difficulty", to_string(i.difficulty)},
                     {"expect", to_string(i.expect)},
                     {"outcome", to_string(i.outcome)},
                     {"answer_kind", i.answer_kind},
                     {"dsl", i.dsl},
                     {"mismatches", mismatches}};
        if (include_latency) item["latency_ms"] = i.latency_ms;
        items.push_back(std::move(item));
    }
    json by_difficulty = json::object();
    for (const auto& [name, c] : r.by_difficulty) by_difficulty[name] = counts_json(c);
    json out = {{"backend", r.backend},
                {"accuracy", r.accuracy()},
                {"fallback_rate", r.fallback_rate()},
                {"counts", counts_json(r.counts)},
                {"supported", counts_json(r.supported)},
                {"by_difficulty", by_difficulty},
                {"coverage_gaps", r.coverage_gaps},
                {"items", items}};
    if (include_latency) out["latency_ms"] = {{"mean", r.latency_mean_ms}, {"max", r.latency_max_ms}};
    return out;
}

}  // namespace whatif
