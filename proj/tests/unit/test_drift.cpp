#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "whatif/dataset_io.hpp"
#include "whatif/drift.hpp"
#include "whatif/error.hpp"

using namespace whatif;
using whatif::testing::data_dir;
using whatif::testing::random_snapshot;

namespace {

DemandPlan snapshot(const char* name) { return load_demand_file(data_dir() / "drift" / name); }

const ChangeRecord* find_change(const DriftReport& r, const std::string& id) {
    for (const auto& c : r.changes) {
        if (c.record == id) return &c;
    }
    return nullptr;
}

ChangeKind mirrored(ChangeKind k) {
    if (k == ChangeKind::added) return ChangeKind::removed;
    if (k == ChangeKind::removed) return ChangeKind::added;
    return k;
}

}  // namespace

TEST_CASE("reports match the reviewed golden files byte for byte") {
    const auto r = compute_drift(snapshot("plan_2026-08.csv"), snapshot("plan_2026-09.csv"));
    CHECK(render_report(r, ReportFormat::markdown) == read_text_file(data_dir() / "drift" / "golden_report.md"));
    CHECK(render_report(r, ReportFormat::email_text) == read_text_file(data_dir() / "drift" / "golden_report.txt"));
}

TEST_CASE("each change gets its category") {
    const auto r = compute_drift(snapshot("plan_2026-08.csv"), snapshot("plan_2026-09.csv"));
    CHECK(find_change(r, "D7")->category == RootCause::hardware_generation_efficiency);
    CHECK(find_change(r, "D8")->category == RootCause::customer_reduction);
    CHECK(find_change(r, "D9")->category == RootCause::demand_growth);
    CHECK(find_change(r, "D9")->due_day_delta == 7);
    CHECK(find_change(r, "D10")->category == RootCause::reallocation);
    CHECK(find_change(r, "D11")->kind == ChangeKind::removed);
    CHECK(find_change(r, "D12")->kind == ChangeKind::added);
    CHECK(find_change(r, "D14") == nullptr);
    CHECK(r.unchanged == 1);
    const auto* d13 = find_change(r, "D13");
    CHECK(d13->flags == std::vector<std::string>{"missing-metadata", "large-swing"});
    REQUIRE(r.flagged().size() == 1);
    CHECK(r.regions.at("US").delta() == doctest::Approx(20));
}

TEST_CASE("a snapshot compared with itself has no changes") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto s = random_snapshot(rng, "s");
        const auto r = compute_drift(s, s);
        CHECK(r.changes.empty());
        CHECK(r.unchanged == s.records.size());
        for (const auto& [region, agg] : r.regions) CHECK(agg.delta() == 0);
    }
}

TEST_CASE("swapping the snapshots mirrors the report") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 50; ++i) {
        const auto a = random_snapshot(rng, "a");
        const auto b = random_snapshot(rng, "b");
        const auto ab = compute_drift(a, b);
        const auto ba = compute_drift(b, a);
        REQUIRE(ab.changes.size() == ba.changes.size());
        CHECK(ab.unchanged == ba.unchanged);
        for (std::size_t k = 0; k < ab.changes.size(); ++k) {
            const auto& x = ab.changes[k];
            const auto& y = ba.changes[k];
            CHECK(x.record == y.record);
            CHECK(y.kind == mirrored(x.kind));
            CHECK(x.quantity_delta() == doctest::Approx(-y.quantity_delta()));
            CHECK(x.due_day_delta == -y.due_day_delta);
        }
        REQUIRE(ab.regions.size() == ba.regions.size());
        for (const auto& [region, agg] : ab.regions) {
            CHECK(agg.delta() == doctest::Approx(-ba.regions.at(region).delta()));
        }
    }
}

TEST_CASE("region totals agree with the record changes") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto a = random_snapshot(rng, "a");
        const auto b = random_snapshot(rng, "b");
        const auto r = compute_drift(a, b);
        double regions = 0, records = 0, before = 0, after = 0;
        for (const auto& [_, agg] : r.regions) regions += agg.delta();
        for (const auto& c : r.changes) records += c.quantity_delta();
        for (const auto& rec : a.records) before += rec.quantity;
        for (const auto& rec : b.records) after += rec.quantity;
        CHECK(regions == doctest::Approx(records));
        CHECK(regions == doctest::Approx(after - before));
    }
}

TEST_CASE("duplicate ids are rejected") {
    auto a = snapshot("plan_2026-08.csv");
    auto b = a;
    b.records.push_back(b.records.front());
    try {
        compute_drift(a, b);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::duplicate_id);
    }
}

TEST_CASE("large-swing threshold is configurable") {
    const auto a = snapshot("plan_2026-08.csv");
    const auto b = snapshot("plan_2026-09.csv");
    DriftConfig loose;
    loose.large_swing_fraction = 0.9;
    const auto r = compute_drift(a, b, loose);
    CHECK(find_change(r, "D13")->flags == std::vector<std::string>{"missing-metadata"});
    DriftConfig tight;
    tight.large_swing_fraction = 0.1;
    const auto t = compute_drift(a, b, tight);
    const auto& d8 = find_change(t, "D8")->flags;
    CHECK(std::find(d8.begin(), d8.end(), "large-swing") != d8.end());
}

TEST_CASE("region falls back to the retailer id") {
    DemandRecord rec;
    rec.retailer = "R5";
    CHECK(record_region(rec) == "R5");
    rec.attributes["region"] = "EU";
    CHECK(record_region(rec) == "EU");
}
