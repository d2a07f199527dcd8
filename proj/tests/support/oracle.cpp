#include "oracle.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "whatif/error.hpp"

namespace whatif::testing {

namespace {

bool integral(double v) { return std::abs(v - std::round(v)) < 1e-12; }

double delay_cost(const Lane& lane, const DemandRecord& rec, const DelayPolicy& policy) {
    return std::max(0.0, lane.lead_time - static_cast<double>(rec.due_day) - policy.grace_days) *
           rec.delay_cost_rate;
}

struct Route {
    const Factory* factory;
    const Lane* lane;
    double unit_cost;
};

struct Source {
    const Supplier* supplier;
    const Lane* lane;
    double unit_cost;
};

FulfillmentPlan finish(const SupplyNetwork& network, const DemandPlan& demand, std::map<std::pair<Id, Id>, double> flows,
                       std::map<Id, double> lost) {
    FulfillmentPlan plan;
    for (const auto& l : network.lanes) plan.lane_universe.insert(l.id);
    for (const auto& r : demand.records) plan.record_universe.insert(r.id);
    for (const auto& f : network.factories) {
        if (f.active) plan.production[f.id] = 0.0;
    }
    for (const auto& [key, units] : flows) {
        if (units <= 1e-12) continue;
        plan.flows.push_back({key.first, key.second, units});
        const Lane* lane = network.find_lane(key.first);
        if (network.find_factory(lane->origin)) plan.production[lane->origin] += units;
    }
    for (const auto& r : demand.records) plan.lost[r.id] = lost.count(r.id) ? lost[r.id] : 0.0;
    plan.cost_breakdown = evaluate_cost(network, demand, plan);
    plan.total_cost = plan.cost_breakdown.sum();
    return plan;
}

}  // namespace

FulfillmentPlan oracle_solve(const SupplyNetwork& network, const DemandPlan& demand) {
    double total = 0.0;
    for (const auto& r : demand.records) {
        if (!integral(r.quantity)) throw Error(ErrorCode::instance_too_large, "oracle needs integral demand");
        total += r.quantity;
    }
    if (total > kOracleMaxUnits) throw Error(ErrorCode::instance_too_large, "oracle bound is 8 units of demand");
    for (const auto& p : network.products) {
        for (const auto& [m, units] : p.bom) {
            if (units != 1.0) throw Error(ErrorCode::instance_too_large, "oracle needs bom entries equal to 1");
        }
    }
    for (const auto& s : network.suppliers) {
        if (!integral(s.capacity) || !integral(s.inventory)) throw Error(ErrorCode::instance_too_large, "non-integral supply");
    }
    for (const auto& f : network.factories) {
        if (!integral(f.production_capacity)) throw Error(ErrorCode::instance_too_large, "non-integral capacity");
    }
    for (const auto& l : network.lanes) {
        if (!integral(l.capacity)) throw Error(ErrorCode::instance_too_large, "non-integral lane capacity");
    }

    // Routes per record: every active factory with an active lane into the
    // record's retailer.
    std::vector<const DemandRecord*> records;
    std::vector<std::vector<Route>> routes;
    for (const auto& rec : demand.records) {
        records.push_back(&rec);
        std::vector<Route> rs;
        for (const auto& lane : network.lanes) {
            const Factory* f = network.find_factory(lane.origin);
            if (!f || !f->active || !lane.active || lane.destination != rec.retailer) continue;
            rs.push_back({f, &lane, f->production_cost + lane.unit_ship_cost + delay_cost(lane, rec, network.delay)});
        }
        routes.push_back(std::move(rs));
    }

    std::map<Id, double> factory_load;
    std::map<Id, double> lane_load;
    std::map<std::pair<Id, Id>, double> product_flow;  // (lane, record)
    std::map<Id, double> lost;

    double best_cost = std::numeric_limits<double>::infinity();
    std::map<std::pair<Id, Id>, double> best_flows;
    std::map<Id, double> best_lost;

    // Given production, enumerate material sourcing per (factory, material).
    auto source_materials = [&](double& cost_out, std::map<std::pair<Id, Id>, double>& flows_out) {
        std::vector<std::pair<const Factory*, const Material*>> needs_keys;
        std::vector<double> needs;
        for (const auto& f : network.factories) {
            for (const auto& m : network.materials) {
                double need = 0.0;
                for (const auto& [key, units] : product_flow) {
                    const Lane* lane = network.find_lane(key.first);
                    if (lane->origin != f.id) continue;
                    const Product* p = network.find_product(demand.find(key.second)->product);
                    if (p->bom.count(m.id)) need += units;
                }
                if (need > 0) {
                    needs_keys.emplace_back(&f, &m);
                    needs.push_back(need);
                }
            }
        }
        std::map<Id, double> supplier_used;
        std::map<Id, double> inbound;
        double best = std::numeric_limits<double>::infinity();
        std::map<std::pair<Id, Id>, double> current, chosen;

        std::function<void(std::size_t, double)> per_need = [&](std::size_t k, double cost) {
            if (cost >= best) return;
            if (k == needs.size()) {
                best = cost;
                chosen = current;
                return;
            }
            const Factory* f = needs_keys[k].first;
            const Material* m = needs_keys[k].second;
            std::vector<Source> sources;
            for (const auto& lane : network.lanes) {
                const Supplier* s = network.find_supplier(lane.origin);
                if (!s || !s->active || !lane.active || lane.destination != f->id || s->material != m->id) continue;
                sources.push_back({s, &lane, s->unit_price + lane.unit_ship_cost});
            }
            std::function<void(std::size_t, double, double)> split = [&](std::size_t i, double remaining, double c) {
                if (remaining == 0) {
                    per_need(k + 1, c);
                    return;
                }
                if (i == sources.size()) return;
                const Source& src = sources[i];
                const double room = std::min(src.lane->capacity - inbound[src.lane->id],
                                             src.supplier->effective_supply() - supplier_used[src.supplier->id]);
                for (double u = 0; u <= std::min(room, remaining); u += 1) {
                    supplier_used[src.supplier->id] += u;
                    inbound[src.lane->id] += u;
                    current[{src.lane->id, m->id}] += u;
                    split(i + 1, remaining - u, c + u * src.unit_cost);
                    current[{src.lane->id, m->id}] -= u;
                    inbound[src.lane->id] -= u;
                    supplier_used[src.supplier->id] -= u;
                }
            };
            split(0, needs[k], cost);
        };
        per_need(0, 0.0);
        cost_out = best;
        flows_out = chosen;
    };

    std::function<void(std::size_t, double)> assign = [&](std::size_t idx, double cost) {
        if (idx == records.size()) {
            double sourcing = 0.0;
            std::map<std::pair<Id, Id>, double> material_flows;
            source_materials(sourcing, material_flows);
            if (!std::isfinite(sourcing)) return;
            const double total_cost = cost + sourcing;
            if (total_cost < best_cost - 1e-12) {
                best_cost = total_cost;
                best_flows = product_flow;
                for (const auto& [key, units] : material_flows) best_flows[key] += units;
                best_lost = lost;
            }
            return;
        }
        const DemandRecord* rec = records[idx];
        const auto& rs = routes[idx];
        std::function<void(std::size_t, double, double)> split = [&](std::size_t i, double remaining, double c) {
            if (i == rs.size()) {
                lost[rec->id] = remaining;
                assign(idx + 1, c + remaining * rec->lost_penalty);
                lost.erase(rec->id);
                return;
            }
            const Route& r = rs[i];
            const double room = std::min(r.factory->production_capacity - factory_load[r.factory->id],
                                         r.lane->capacity - lane_load[r.lane->id]);
            for (double u = 0; u <= std::min(room, remaining); u += 1) {
                factory_load[r.factory->id] += u;
                lane_load[r.lane->id] += u;
                if (u > 0) product_flow[{r.lane->id, rec->id}] = u;
                split(i + 1, remaining - u, c + u * r.unit_cost);
                if (u > 0) product_flow.erase({r.lane->id, rec->id});
                lane_load[r.lane->id] -= u;
                factory_load[r.factory->id] -= u;
            }
        };
        split(0, rec->quantity, cost);
    };
    assign(0, 0.0);

    return finish(network, demand, best_flows, best_lost);
}

FulfillmentPlan flow_oracle_solve(const SupplyNetwork& network, const DemandPlan& demand) {
    if (network.materials.size() != 1) throw Error(ErrorCode::instance_too_large, "flow oracle needs one material");
    const Id& material = network.materials.front().id;
    for (const auto& p : network.products) {
        if (p.bom.size() != 1 || !p.bom.count(material) || p.bom.at(material) != 1.0) {
            throw Error(ErrorCode::instance_too_large, "flow oracle needs bom {material: 1}");
        }
    }

    struct Arc {
        std::size_t to;
        double capacity;
        double cost;
        std::size_t reverse;
        Id lane;
        Id item;
    };
    std::vector<std::vector<Arc>> graph;
    auto node = [&graph] {
        graph.emplace_back();
        return graph.size() - 1;
    };
    auto arc = [&graph](std::size_t from, std::size_t to, double capacity, double cost, Id lane = {}, Id item = {}) {
        graph[from].push_back({to, capacity, cost, graph[to].size(), lane, item});
        graph[to].push_back({from, 0.0, -cost, graph[from].size() - 1, {}, {}});
    };
    constexpr double inf = std::numeric_limits<double>::infinity();

    const std::size_t source = node();
    const std::size_t sink = node();
    std::map<Id, std::size_t> supplier_node, factory_in, factory_out, record_node;
    for (const auto& s : network.suppliers) {
        if (!s.active) continue;
        supplier_node[s.id] = node();
        arc(source, supplier_node[s.id], s.effective_supply(), s.unit_price);
    }
    for (const auto& f : network.factories) {
        if (!f.active) continue;
        factory_in[f.id] = node();
        factory_out[f.id] = node();
        arc(factory_in[f.id], factory_out[f.id], f.production_capacity, f.production_cost);
    }
    double total = 0.0;
    for (const auto& r : demand.records) {
        record_node[r.id] = node();
        arc(record_node[r.id], sink, r.quantity, 0.0);
        arc(source, record_node[r.id], r.quantity, r.lost_penalty, {}, "lost");
        total += r.quantity;
    }
    for (const auto& lane : network.lanes) {
        if (!lane.active) continue;
        if (supplier_node.count(lane.origin) && factory_in.count(lane.destination)) {
            arc(supplier_node[lane.origin], factory_in[lane.destination], lane.capacity, lane.unit_ship_cost, lane.id, material);
        } else if (factory_out.count(lane.origin)) {
            const std::size_t hub = node();
            arc(factory_out[lane.origin], hub, lane.capacity, lane.unit_ship_cost);
            for (const auto& r : demand.records) {
                if (r.retailer != lane.destination) continue;
                arc(hub, record_node[r.id], inf, delay_cost(lane, r, network.delay), lane.id, r.id);
            }
        }
    }

    double sent = 0.0;
    while (sent < total - 1e-12) {
        std::vector<double> dist(graph.size(), inf);
        std::vector<std::pair<std::size_t, std::size_t>> parent(graph.size(), {SIZE_MAX, SIZE_MAX});
        dist[source] = 0.0;
        for (std::size_t round = 0; round < graph.size(); ++round) {
            bool changed = false;
            for (std::size_t u = 0; u < graph.size(); ++u) {
                if (dist[u] == inf) continue;
                for (std::size_t e = 0; e < graph[u].size(); ++e) {
                    const Arc& a = graph[u][e];
                    if (a.capacity > 1e-12 && dist[u] + a.cost < dist[a.to] - 1e-12) {
                        dist[a.to] = dist[u] + a.cost;
                        parent[a.to] = {u, e};
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (dist[sink] == inf) break;
        double push = total - sent;
        for (std::size_t v = sink; v != source; v = parent[v].first) {
            push = std::min(push, graph[parent[v].first][parent[v].second].capacity);
        }
        for (std::size_t v = sink; v != source; v = parent[v].first) {
            Arc& a = graph[parent[v].first][parent[v].second];
            a.capacity -= push;
            graph[a.to][a.reverse].capacity += push;
        }
        sent += push;
    }

    std::map<std::pair<Id, Id>, double> flows;
    std::map<Id, double> lost;
    for (std::size_t u = 0; u < graph.size(); ++u) {
        for (const Arc& a : graph[u]) {
            if (a.item.empty()) continue;
            const double used = graph[a.to][a.reverse].capacity;
            if (a.item == "lost" && u == source) {
                for (const auto& [id, n] : record_node) {
                    if (n == a.to) lost[id] += used;
                }
            } else if (!a.lane.empty()) {
                flows[{a.lane, a.item}] += used;
            }
        }
    }
    return finish(network, demand, flows, lost);
}

}  // namespace whatif::testing
