#include "whatif/drift.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "whatif/dsl.hpp"
#include "whatif/error.hpp"
#include "whatif/pipeline.hpp"

namespace whatif {

namespace {

// "D7" < "D10": digit runs compare by value.
struct NaturalLess {
    bool operator()(const std::string& x, const std::string& y) const {
        std::size_t i = 0, j = 0;
        while (i < x.size() && j < y.size()) {
            const bool dx = std::isdigit(static_cast<unsigned char>(x[i]));
            const bool dy = std::isdigit(static_cast<unsigned char>(y[j]));
            if (dx && dy) {
                std::size_t ei = i, ej = j;
                while (ei < x.size() && std::isdigit(static_cast<unsigned char>(x[ei]))) ++ei;
                while (ej < y.size() && std::isdigit(static_cast<unsigned char>(y[ej]))) ++ej;
                std::string_view nx(x.data() + i, ei - i), ny(y.data() + j, ej - j);
                while (nx.size() > 1 && nx.front() == '0') nx.remove_prefix(1);
                while (ny.size() > 1 && ny.front() == '0') ny.remove_prefix(1);
                if (nx.size() != ny.size()) return nx.size() < ny.size();
                if (nx != ny) return nx < ny;
                i = ei;
                j = ej;
            } else {
                if (x[i] != y[j]) return x[i] < y[j];
                ++i;
                ++j;
            }
        }
        if (x.size() - i != y.size() - j) return x.size() - i < y.size() - j;
        return x < y;
    }
};

std::map<Id, const DemandRecord*> index_records(const DemandPlan& plan, const char* which) {
    std::map<Id, const DemandRecord*> out;
    for (const auto& r : plan.records) {
        if (!out.emplace(r.id, &r).second) {
            throw Error(ErrorCode::duplicate_id, std::string("duplicate record id '") + r.id + "' in " + which +
                                                     " snapshot " + plan.snapshot_id);
        }
    }
    return out;
}

std::vector<AttributeDelta> attribute_deltas(const DemandRecord& a, const DemandRecord& b) {
    std::vector<AttributeDelta> out;
    auto field = [&out](const char* key, const std::string& x, const std::string& y) {
        if (x != y) out.push_back({key, x, y});
    };
    field("retailer", a.retailer, b.retailer);
    field("product", a.product, b.product);
    field("delay_cost_rate", dsl::format_number(a.delay_cost_rate), dsl::format_number(b.delay_cost_rate));
    field("lost_penalty", dsl::format_number(a.lost_penalty), dsl::format_number(b.lost_penalty));
    std::set<std::string> keys;
    for (const auto& [k, v] : a.attributes) keys.insert(k);
    for (const auto& [k, v] : b.attributes) keys.insert(k);
    for (const auto& k : keys) {
        auto ia = a.attributes.find(k);
        auto ib = b.attributes.find(k);
        std::optional<std::string> before, after;
        if (ia != a.attributes.end()) before = ia->second;
        if (ib != b.attributes.end()) after = ib->second;
        if (before != after) out.push_back({k, before, after});
    }
    return out;
}

std::string signed_quantity(double v) { return (v > 0 ? "+" : "") + format_quantity(v); }

std::string opt(const std::optional<std::string>& v) { return v ? *v : "(none)"; }

std::string change_detail(const ChangeRecord& c) {
    std::vector<std::string> parts;
    switch (c.kind) {
        case ChangeKind::added: parts.push_back("added with quantity " + format_quantity(c.quantity_after)); break;
        case ChangeKind::removed: parts.push_back("removed (quantity " + format_quantity(c.quantity_before) + ")"); break;
        case ChangeKind::modified:
            if (c.quantity_delta() != 0) {
                parts.push_back("quantity " + format_quantity(c.quantity_before) + " -> " +
                                format_quantity(c.quantity_after) + " (" + signed_quantity(c.quantity_delta()) + ")");
            }
            break;
    }
    for (const auto& a : c.attribute_deltas) parts.push_back(a.key + " " + opt(a.before) + " -> " + opt(a.after));
    if (c.due_day_delta != 0) {
        parts.push_back("due day " + std::string(c.due_day_delta > 0 ? "+" : "") + std::to_string(c.due_day_delta));
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "; " : "") + parts[i];
    return out;
}

std::string region_label(const ChangeRecord& c) {
    if (c.kind == ChangeKind::removed) return c.region_before;
    if (c.kind == ChangeKind::modified && c.region_before != c.region_after) return c.region_before + " -> " + c.region_after;
    return c.region_after;
}

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (std::size_t i = 0; i < flags.size(); ++i) out += (i ? ", " : "") + flags[i];
    return out;
}

}  // namespace

const char* to_string(ChangeKind kind) noexcept {
    switch (kind) {
        case ChangeKind::added: return "added";
        case ChangeKind::removed: return "removed";
        case ChangeKind::modified: return "modified";
    }
    return "modified";
}

const char* to_string(RootCause cause) noexcept {
    switch (cause) {
        case RootCause::hardware_generation_efficiency: return "hardware-generation-efficiency";
        case RootCause::customer_reduction: return "customer-reduction";
        case RootCause::demand_growth: return "demand-growth";
        case RootCause::reallocation: return "reallocation";
        case RootCause::unclassified: return "unclassified";
    }
    return "unclassified";
}

std::size_t DriftReport::count(ChangeKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(changes.begin(), changes.end(), [kind](const ChangeRecord& c) { return c.kind == kind; }));
}

std::vector<const ChangeRecord*> DriftReport::flagged() const {
    std::vector<const ChangeRecord*> out;
    for (const auto& c : changes) {
        if (!c.flags.empty()) out.push_back(&c);
    }
    return out;
}

std::string record_region(const DemandRecord& record, const DriftConfig& config) {
    for (const auto& key : config.region_keys) {
        auto it = record.attributes.find(key);
        if (it != record.attributes.end() && !it->second.empty()) return it->second;
    }
    return record.retailer;
}

DriftReport compute_drift(const DemandPlan& before, const DemandPlan& after, const DriftConfig& config) {
    const auto a = index_records(before, "first");
    const auto b = index_records(after, "second");
    DriftReport report;
    report.snapshot_before = before.snapshot_id;
    report.snapshot_after = after.snapshot_id;
    for (const auto& r : before.records) report.regions[record_region(r, config)].before += r.quantity;
    for (const auto& r : after.records) report.regions[record_region(r, config)].after += r.quantity;

    std::set<Id, NaturalLess> ids;
    for (const auto& [id, r] : a) ids.insert(id);
    for (const auto& [id, r] : b) ids.insert(id);
    for (const auto& id : ids) {
        auto ia = a.find(id);
        auto ib = b.find(id);
        ChangeRecord c;
        c.record = id;
        const DemandRecord* latest = nullptr;
        if (ia == a.end()) {
            latest = ib->second;
            c.kind = ChangeKind::added;
            c.quantity_after = latest->quantity;
            c.region_after = record_region(*latest, config);
            c.category = RootCause::demand_growth;
        } else if (ib == b.end()) {
            latest = ia->second;
            c.kind = ChangeKind::removed;
            c.quantity_before = latest->quantity;
            c.region_before = record_region(*latest, config);
            c.category = RootCause::customer_reduction;
        } else {
            const DemandRecord& x = *ia->second;
            const DemandRecord& y = *ib->second;
            latest = &y;
            c.kind = ChangeKind::modified;
            c.quantity_before = x.quantity;
            c.quantity_after = y.quantity;
            c.attribute_deltas = attribute_deltas(x, y);
            c.due_day_delta = y.due_day - x.due_day;
            c.region_before = record_region(x, config);
            c.region_after = record_region(y, config);
            if (c.quantity_delta() == 0 && c.attribute_deltas.empty() && c.due_day_delta == 0) {
                ++report.unchanged;
                continue;
            }
            bool hardware = false;
            bool location = c.region_before != c.region_after;
            for (const auto& d : c.attribute_deltas) {
                if (config.hardware_keys.count(d.key) || d.key == "product") hardware = true;
                if (config.region_keys.count(d.key) || d.key == "retailer") location = true;
            }
            if (c.quantity_delta() < 0) {
                c.category = hardware ? RootCause::hardware_generation_efficiency
                                      : (c.attribute_deltas.empty() ? RootCause::customer_reduction
                                                                    : RootCause::unclassified);
            } else if (c.quantity_delta() > 0) {
                c.category = RootCause::demand_growth;
            } else if (location) {
                c.category = RootCause::reallocation;
            }
            const double swing = std::abs(c.quantity_delta());
            if (swing > 0 && swing > config.large_swing_fraction * c.quantity_before) c.flags.push_back("large-swing");
        }
        c.author = latest->modified_by;
        c.note = latest->change_note;
        if (c.author.empty() || c.note.empty()) c.flags.insert(c.flags.begin(), "missing-metadata");
        report.changes.push_back(std::move(c));
    }
    return report;
}

std::string render_report(const DriftReport& report, ReportFormat format) {
    std::ostringstream out;
    double before = 0, after = 0;
    for (const auto& [region, agg] : report.regions) {
        before += agg.before;
        after += agg.after;
    }
    const bool md = format == ReportFormat::markdown;
    const std::string title = "Demand plan changes: " + report.snapshot_before + " -> " + report.snapshot_after;
    if (md) {
        out << "# " << title << "\n\n";
    } else {
        out << "Subject: " << title << "\n\n";
    }
    if (report.changes.empty()) {
        out << "No changes between snapshots.\n";
        return out.str();
    }

    out << (md ? "## Summary\n\n" : "SUMMARY\n");
    const char* bullet = md ? "- " : "  ";
    out << bullet << "Total quantity: " << format_quantity(before) << " -> " << format_quantity(after) << " ("
        << signed_quantity(after - before) << ")\n";
    out << bullet << "Added: " << report.count(ChangeKind::added) << "\n";
    out << bullet << "Removed: " << report.count(ChangeKind::removed) << "\n";
    out << bullet << "Modified: " << report.count(ChangeKind::modified) << "\n";
    out << bullet << "Unchanged: " << report.unchanged << "\n";
    out << bullet << "Flagged for review: " << report.flagged().size() << "\n\n";

    if (md) {
        out << "## By region\n\n| Region | Before | After | Delta |\n|---|---:|---:|---:|\n";
        for (const auto& [region, agg] : report.regions) {
            out << "| " << region << " | " << format_quantity(agg.before) << " | " << format_quantity(agg.after)
                << " | " << signed_quantity(agg.delta()) << " |\n";
        }
        out << "\n## Changes\n\n";
    } else {
        out << "BY REGION\n";
        for (const auto& [region, agg] : report.regions) {
            out << "  " << region << ": " << format_quantity(agg.before) << " -> " << format_quantity(agg.after)
                << " (" << signed_quantity(agg.delta()) << ")\n";
        }
        out << "\nCHANGES\n";
    }
    for (const auto& c : report.changes) {
        out << (md ? "- **" : "  * ") << c.record << (md ? "** (" : " (") << to_string(c.kind) << ", "
            << region_label(c) << "): " << change_detail(c) << ". Author: "
            << (c.author.empty() ? "unknown" : c.author) << ". Category: " << to_string(c.category) << ".";
        if (!c.note.empty()) out << " Note: " << c.note;
        out << "\n";
    }
    const auto flagged = report.flagged();
    if (!flagged.empty()) {
        out << (md ? "\n## Flagged for review\n\n" : "\nFLAGGED FOR REVIEW\n");
        for (const auto* c : flagged) {
            out << (md ? "- " : "  * ") << c->record << ": " << join_flags(c->flags) << "\n";
        }
    }
    return out.str();
}

}  // namespace whatif
