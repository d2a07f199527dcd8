#include "whatif/validate.hpp"

#include <cmath>

namespace whatif {

const char* to_string(Severity severity) noexcept {
    return severity == Severity::error ? "error" : "warning";
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
    for (const auto& issue : issues) {
        if (issue.severity == Severity::error) return true;
    }
    return false;
}

std::vector<ValidationIssue> validate(const SupplyNetwork& network, const DemandPlan& demand) {
    std::vector<ValidationIssue> issues;
    auto error = [&](std::string code, std::string location, std::string message) {
        issues.push_back({Severity::error, std::move(code), std::move(location), std::move(message)});
    };
    auto warning = [&](std::string code, std::string location, std::string message) {
        issues.push_back({Severity::warning, std::move(code), std::move(location), std::move(message)});
    };
    auto non_negative = [&](double value, const std::string& location, const char* field) {
        if (!std::isfinite(value) || value < 0) {
            error("negative-value", location, std::string(field) + " must be a finite value >= 0");
        }
    };

    for (const auto& p : network.products) {
        std::string loc = "products/" + p.id;
        if (p.bom.empty()) error("empty-bom", loc, "product has no bill of materials");
        for (const auto& [material, units] : p.bom) {
            if (!network.find_material(material)) error("dangling-reference", loc, "unknown material " + material);
            non_negative(units, loc, "bom units");
        }
    }
    for (const auto& s : network.suppliers) {
        std::string loc = "suppliers/" + s.id;
        if (!network.find_material(s.material)) error("dangling-reference", loc, "unknown material " + s.material);
        non_negative(s.unit_price, loc, "unit_price");
        non_negative(s.capacity, loc, "capacity");
        non_negative(s.inventory, loc, "inventory");
        if (s.active && s.effective_supply() <= 0) {
            warning("inert-supplier", loc, "active supplier has no capacity or inventory");
        }
    }
    for (const auto& f : network.factories) {
        std::string loc = "factories/" + f.id;
        non_negative(f.production_capacity, loc, "production_capacity");
        non_negative(f.production_cost, loc, "production_cost");
    }
    for (const auto& l : network.lanes) {
        std::string loc = "lanes/" + l.id;
        NodeKind from = network.node_kind(l.origin);
        NodeKind to = network.node_kind(l.destination);
        if (from == NodeKind::none) error("dangling-reference", loc, "unknown origin " + l.origin);
        if (to == NodeKind::none) error("dangling-reference", loc, "unknown destination " + l.destination);
        bool supply = from == NodeKind::supplier && to == NodeKind::factory;
        bool distribution = from == NodeKind::factory && to == NodeKind::retailer;
        if (from != NodeKind::none && to != NodeKind::none && !supply && !distribution) {
            error("lane-orientation", loc, "lanes must run supplier->factory or factory->retailer");
        }
        non_negative(l.unit_ship_cost, loc, "unit_ship_cost");
        non_negative(l.capacity, loc, "capacity");
        non_negative(l.lead_time, loc, "lead_time");
    }
    for (std::size_t i = 0; i < network.lanes.size(); ++i) {
        for (std::size_t j = i + 1; j < network.lanes.size(); ++j) {
            const auto& a = network.lanes[i];
            const auto& b = network.lanes[j];
            if (a.id == b.id) error("duplicate-id", "lanes/" + a.id, "duplicate lane id");
            if (a.origin == b.origin && a.destination == b.destination) {
                error("duplicate-lane", "lanes/" + b.id, "second lane " + a.origin + "->" + a.destination);
            }
        }
    }

    for (const auto& r : demand.records) {
        std::string loc = "demand/" + r.id;
        if (!network.find_retailer(r.retailer)) error("dangling-reference", loc, "unknown retailer " + r.retailer);
        const Product* product = network.find_product(r.product);
        if (!product) error("dangling-reference", loc, "unknown product " + r.product);
        non_negative(r.quantity, loc, "quantity");
        non_negative(r.delay_cost_rate, loc, "delay_cost_rate");
        if (!std::isfinite(r.lost_penalty) || r.lost_penalty <= 0) {
            error("non-positive-penalty", loc, "lost_penalty must be > 0");
        }
        if (r.quantity <= 0 || !product) continue;
        bool reachable = false;
        for (const auto& l : network.lanes) {
            if (!l.active || l.destination != r.retailer) continue;
            const Factory* f = network.find_factory(l.origin);
            if (f && f->active && f->production_capacity > 0) {
                reachable = true;
                break;
            }
        }
        if (!reachable) {
            warning("unreachable-demand", loc,
                    "unreachable demand: no active factory lane into retailer " + r.retailer);
        }
    }
    return issues;
}

}  // namespace whatif
