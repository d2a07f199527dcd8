#include "whatif/insights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "whatif/apply.hpp"
#include "whatif/dataset_io.hpp"
#include "whatif/error.hpp"

namespace whatif {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json breakdown_json(const CostBreakdown& b) {
    json out = json::object();
    for (std::size_t i = 0; i < std::size(kCostComponents); ++i) out[kCostComponents[i]] = component(b, i);
    return out;
}

CostBreakdown breakdown_from(const json& j) {
    CostBreakdown b;
    b.material = j.value("material", 0.0);
    b.inbound_shipping = j.value("inbound_shipping", 0.0);
    b.production = j.value("production", 0.0);
    b.outbound_shipping = j.value("outbound_shipping", 0.0);
    b.delay = j.value("delay", 0.0);
    b.lost_penalty = j.value("lost_penalty", 0.0);
    return b;
}

HistoryEntry entry_from_json(const json& j) {
    HistoryEntry e;
    e.day = j.at("day").get<std::int64_t>();
    e.summary.cost_breakdown = breakdown_from(j.value("cost_breakdown", json::object()));
    e.summary.total_cost = j.contains("total_cost") ? j.at("total_cost").get<double>()
                                                    : e.summary.cost_breakdown.sum();
    e.summary.lost_units = j.value("lost_units", 0.0);
    if (j.contains("production")) {
        for (const auto& [id, units] : j.at("production").items()) e.summary.production[id] = units.get<double>();
    }
    if (j.contains("shipments")) {
        for (const auto& s : j.at("shipments")) {
            e.shipments.push_back(
                {s.at("lane").get<std::string>(), s.at("ship_day").get<std::int64_t>(), s.at("lead_time").get<double>()});
        }
    }
    return e;
}

bool compare(double value, dsl::Comparator c, double threshold) {
    switch (c) {
        case dsl::Comparator::greater: return value > threshold;
        case dsl::Comparator::greater_equal: return value >= threshold;
        case dsl::Comparator::less: return value < threshold;
        case dsl::Comparator::less_equal: return value <= threshold;
    }
    return false;
}

const PlanHistory& require_history(const InsightState& state) {
    if (state.history == nullptr || state.history->empty()) {
        throw Error(ErrorCode::empty_period, "no plan history is available");
    }
    return *state.history;
}

std::vector<const HistoryEntry*> entries_in(const PlanHistory& history, std::int64_t first, std::int64_t last) {
    std::vector<const HistoryEntry*> out;
    for (const auto& e : history.entries()) {
        if (e.day >= first && e.day <= last) out.push_back(&e);
    }
    if (out.empty()) {
        throw Error(ErrorCode::empty_period,
                    "no plans in days " + std::to_string(first) + " to " + std::to_string(last));
    }
    return out;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

PlanSummary summarize(const FulfillmentPlan& plan) {
    PlanSummary s;
    s.total_cost = plan.total_cost;
    s.cost_breakdown = plan.cost_breakdown;
    s.production = plan.production;
    for (const auto& [id, units] : plan.lost) s.lost_units += units;
    return s;
}

void PlanHistory::append(HistoryEntry entry) {
    if (!entries_.empty() && entry.day <= entries_.back().day) {
        throw Error(ErrorCode::invalid_value, "history day " + std::to_string(entry.day) +
                                                  " does not follow day " + std::to_string(entries_.back().day));
    }
    entries_.push_back(std::move(entry));
}

std::int64_t PlanHistory::first_day() const { return entries_.empty() ? 0 : entries_.front().day; }
std::int64_t PlanHistory::last_day() const { return entries_.empty() ? 0 : entries_.back().day; }

PlanHistory PlanHistory::parse(std::string_view text, const std::string& source_name) {
    PlanHistory history;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            history.append(entry_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw DatasetError(ErrorCode::malformed_input, source_name, number, 0, e.what());
        } catch (const Error& e) {
            throw DatasetError(e.code(), source_name, number, 0, e.what());
        }
    }
    return history;
}

PlanHistory PlanHistory::load(const std::filesystem::path& path) {
    return parse(read_text_file(path), path.string());
}

void PlanHistory::append_to_file(const std::filesystem::path& path, HistoryEntry entry) {
    const std::string line = to_json_line(entry);
    append(std::move(entry));
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error(ErrorCode::not_found, "cannot open " + path.string());
    out << line << '\n';
}

std::string to_json_line(const HistoryEntry& e) {
    json j;
    j["day"] = e.day;
    j["total_cost"] = e.summary.total_cost;
    j["cost_breakdown"] = breakdown_json(e.summary.cost_breakdown);
    j["production"] = e.summary.production;
    j["lost_units"] = e.summary.lost_units;
    j["shipments"] = json::array();
    for (const auto& s : e.shipments) {
        j["shipments"].push_back({{"lane", s.lane}, {"ship_day", s.ship_day}, {"lead_time", s.lead_time}});
    }
    return j.dump();
}

bool is_known_metric(const std::string& metric) {
    const auto& m = dsl::metrics();
    return std::find(m.begin(), m.end(), metric) != m.end();
}

double metric_value(const PlanSummary& s, const std::string& metric) {
    if (metric == "total_cost") return s.total_cost;
    if (metric == "shipping") return s.cost_breakdown.inbound_shipping + s.cost_breakdown.outbound_shipping;
    if (metric == "lost_units") return s.lost_units;
    for (const char* name : kCostComponents) {
        if (metric == name) return component(s.cost_breakdown, metric);
    }
    throw Error(ErrorCode::unknown_entity, "unknown metric '" + metric + "'");
}

std::pair<std::int64_t, std::int64_t> resolve_period(const dsl::Period& period, const PlanHistory& history) {
    if (period.trailing) {
        if (period.days <= 0) throw Error(ErrorCode::empty_period, "a trailing period needs at least one day");
        return {history.last_day() - period.days + 1, history.last_day()};
    }
    if (period.first > period.last) {
        throw Error(ErrorCode::empty_period, "period starts after it ends");
    }
    return {period.first, period.last};
}

QueryResult run_query(const dsl::QueryForm& query, const InsightState& state) {
    const SupplyNetwork& net = *state.network;
    return std::visit(
        overloaded{
            [&](const dsl::SupplierInventory& q) {
                const Supplier* s = net.find_supplier(q.supplier);
                if (s == nullptr) throw Error(ErrorCode::unknown_entity, "unknown supplier '" + q.supplier + "'");
                if (net.find_material(q.material) == nullptr) {
                    throw Error(ErrorCode::unknown_entity, "unknown material '" + q.material + "'");
                }
                QueryResult r;
                r.kind = "supplier-inventory";
                r.value = s->material == q.material ? s->inventory : 0.0;
                r.unit = "units";
                r.entity = s->id;
                r.subject = "material " + q.material + " at supplier " + s->id;
                return r;
            },
            [&](const dsl::CheapestLane& q) {
                for (const Id* node : {&q.origin, &q.destination}) {
                    if (net.node_kind(*node) == NodeKind::none) {
                        throw Error(ErrorCode::unknown_entity, "unknown node '" + *node + "'");
                    }
                }
                const Lane* best = nullptr;
                for (const auto& l : net.lanes) {
                    if (!l.active || l.origin != q.origin || l.destination != q.destination) continue;
                    if (best == nullptr || l.unit_ship_cost < best->unit_ship_cost ||
                        (l.unit_ship_cost == best->unit_ship_cost && l.id < best->id)) {
                        best = &l;
                    }
                }
                if (best == nullptr) {
                    throw Error(ErrorCode::unknown_entity, "no active lane from " + q.origin + " to " + q.destination);
                }
                QueryResult r;
                r.kind = "cheapest-lane";
                r.value = best->unit_ship_cost;
                r.unit = "currency";
                r.entity = best->id;
                r.subject = "shipping from " + q.origin + " to " + q.destination;
                return r;
            },
            [&](const dsl::ShipmentQuantity& q) {
                if (net.find_product(q.product) == nullptr) {
                    throw Error(ErrorCode::unknown_entity, "unknown product '" + q.product + "'");
                }
                if (net.find_retailer(q.retailer) == nullptr) {
                    throw Error(ErrorCode::unknown_entity, "unknown retailer '" + q.retailer + "'");
                }
                QueryResult r;
                r.kind = "shipment-quantity";
                r.unit = "units";
                r.entity = q.retailer;
                r.subject = "product " + q.product + " to retailer " + q.retailer;
                for (const auto& rec : state.demand->records) {
                    if (rec.product == q.product && rec.retailer == q.retailer) r.value += state.plan->fulfilled(rec.id);
                }
                return r;
            },
            [&](const dsl::TopFactoryByOutput& q) {
                const auto& history = require_history(state);
                const auto [first, last] = resolve_period(q.period, history);
                std::map<Id, double> output;
                for (const auto* e : entries_in(history, first, last)) {
                    for (const auto& [id, units] : e->summary.production) output[id] += units;
                }
                if (output.empty()) throw Error(ErrorCode::empty_period, "no factory produced in the period");
                QueryResult r;
                r.kind = "top-factory";
                r.unit = "units";
                r.period_first = first;
                r.period_last = last;
                r.value = -1.0;
                for (const auto& [id, units] : output) {  // map order breaks ties by id
                    if (units > r.value) {
                        r.value = units;
                        r.entity = id;
                    }
                }
                r.subject = "factory output";
                return r;
            },
            [&](const dsl::FractionPlansWhere& q) {
                if (!is_known_metric(q.metric)) throw Error(ErrorCode::unknown_entity, "unknown metric '" + q.metric + "'");
                if (!std::isfinite(q.threshold)) throw Error(ErrorCode::invalid_value, "threshold must be finite");
                const auto& history = require_history(state);
                const auto [first, last] = resolve_period(q.period, history);
                QueryResult r;
                r.kind = "fraction-plans";
                r.unit = "fraction";
                r.period_first = first;
                r.period_last = last;
                for (const auto* e : entries_in(history, first, last)) {
                    ++r.total;
                    if (compare(metric_value(e->summary, q.metric), q.comparator, q.threshold)) ++r.matched;
                }
                r.value = static_cast<double>(r.matched) / static_cast<double>(r.total);
                r.subject = q.metric;
                return r;
            },
        },
        query);
}

std::vector<Alert> monitor_lead_times(const PlanHistory& history, const MonitorConfig& config,
                                      const SupplyNetwork* network) {
    if (config.window <= 0 || config.reference <= 0) {
        throw Error(ErrorCode::invalid_value, "monitor windows must be positive");
    }
    if (history.empty() || history.last_day() - history.first_day() + 1 < config.window + config.reference) {
        throw Error(ErrorCode::insufficient_history,
                    "history must span at least " + std::to_string(config.window + config.reference) + " days");
    }
    const std::int64_t end = history.last_day();
    const std::int64_t recent_start = end - config.window + 1;
    const std::int64_t reference_start = recent_start - config.reference;

    struct Samples {
        std::vector<double> recent;
        std::vector<double> reference;
        std::int64_t last_ship = 0;
    };
    std::map<Id, Samples> lanes;
    for (const auto& e : history.entries()) {
        for (const auto& s : e.shipments) {
            if (s.ship_day > end || s.ship_day < reference_start) continue;
            auto& samples = lanes[s.lane];
            if (s.ship_day >= recent_start) {
                samples.recent.push_back(s.lead_time);
                samples.last_ship = std::max(samples.last_ship, s.ship_day);
            } else {
                samples.reference.push_back(s.lead_time);
            }
        }
    }

    std::vector<Alert> alerts;
    for (const auto& [lane, samples] : lanes) {
        if (samples.recent.empty() || samples.reference.empty()) continue;
        const double recent = mean(samples.recent);
        const double reference = mean(samples.reference);
        const double increase = recent - reference;
        if (increase < config.min_absolute_increase) continue;
        if (increase < config.min_relative_increase * reference) continue;
        Alert a;
        a.subject = lane;
        if (network != nullptr) {
            if (const Lane* l = network->find_lane(lane)) a.origin = l->origin;
        }
        a.recent_mean = recent;
        a.reference_mean = reference;
        a.last_ship_day = samples.last_ship;
        a.predicted_arrival_day = static_cast<double>(samples.last_ship) + recent;
        std::ostringstream action;
        action << "Lead time on lane " << lane << " rose from " << dsl::format_number(std::round(reference * 100) / 100)
               << " to " << dsl::format_number(std::round(recent * 100) / 100)
               << " days; plan the next arrival for day " << dsl::format_number(std::round(a.predicted_arrival_day * 100) / 100)
               << " and consider buffer stock or another source.";
        a.suggested_action = action.str();
        alerts.push_back(std::move(a));
    }
    return alerts;
}

std::vector<Suggestion> suggest_improvements(const SupplyNetwork& network, const DemandPlan& demand,
                                             const FulfillmentPlan& baseline, const std::vector<Lane>& candidates) {
    std::vector<Suggestion> out;
    for (const auto& c : candidates) {
        dsl::ScenarioScript script;
        script.statements.push_back(dsl::AddLane{c.origin, c.destination, c.unit_ship_cost, c.capacity, c.lead_time});
        const auto applied = apply(script, network, demand);
        const auto alt = solve(applied.network, applied.demand);
        auto diff = diff_plans(baseline, alt);
        if (diff.delta_total < -kOptimalityTol) out.push_back({c, std::move(diff)});
    }
    std::stable_sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) {
        return a.diff.delta_total < b.diff.delta_total;
    });
    return out;
}

}  // namespace whatif
