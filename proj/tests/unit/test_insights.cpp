#include <doctest.h>

#include "fixtures.hpp"
#include "whatif/apply.hpp"
#include "whatif/error.hpp"
#include "whatif/insights.hpp"
#include "whatif/solver.hpp"

using namespace whatif;
using whatif::testing::demo_net;
using whatif::testing::demo_net_dir;

namespace {

struct Fixture {
    Dataset ds = demo_net();
    FulfillmentPlan plan = solve(ds.network, ds.demand);
    PlanHistory history = PlanHistory::load(demo_net_dir() / "history.jsonl");
    InsightState state() const { return {&ds.network, &ds.demand, &plan, &history}; }
    QueryResult ask(const std::string& text) const {
        const auto script = dsl::parse(text);
        return run_query(std::get<dsl::Query>(script.statements.at(0)).form, state());
    }
};

ErrorCode query_code(const Fixture& f, const std::string& text) {
    try {
        f.ask(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown for " << text);
    return ErrorCode::malformed_input;
}

}  // namespace

TEST_CASE("inventory, lane and shipment lookups") {
    const Fixture f;
    auto r = f.ask("QUERY INVENTORY SUPPLIER S1 MATERIAL M");
    CHECK(r.kind == "supplier-inventory");
    CHECK(r.value == 120);
    CHECK(f.ask("QUERY INVENTORY SUPPLIER S2 MATERIAL M").value == 50);

    r = f.ask("QUERY CHEAPEST LANE FROM F1 TO R2");
    CHECK(r.kind == "cheapest-lane");
    CHECK(r.entity == "F1_R2");
    CHECK(r.value == 2.0);

    r = f.ask("QUERY SHIPMENT PRODUCT P RETAILER R1");
    CHECK(r.kind == "shipment-quantity");
    CHECK(r.value == doctest::Approx(40));
}

TEST_CASE("history aggregates over the last 30 days") {
    const Fixture f;
    auto r = f.ask("QUERY TOP FACTORY LAST 30 DAYS");
    CHECK(r.entity == "F1");
    CHECK(r.value == doctest::Approx(42000));
    CHECK(r.period_first == 121);
    CHECK(r.period_last == 150);

    r = f.ask("QUERY FRACTION shipping > 50000 LAST 30 DAYS");
    CHECK(r.matched == 3);
    CHECK(r.total == 10);
    CHECK(r.value == doctest::Approx(0.3));

    r = f.ask("QUERY FRACTION total_cost > 170000 LAST 30 DAYS");
    CHECK(r.matched == 4);
    CHECK(r.value == doctest::Approx(0.4));

    r = f.ask("QUERY FRACTION lost_units >= 10 DAYS 1 TO 15");
    CHECK(r.matched == 1);
    CHECK(r.total == 2);
}

TEST_CASE("query errors") {
    const Fixture f;
    CHECK(query_code(f, "QUERY INVENTORY SUPPLIER S9 MATERIAL M") == ErrorCode::unknown_entity);
    CHECK(query_code(f, "QUERY CHEAPEST LANE FROM F1 TO R9") == ErrorCode::unknown_entity);
    CHECK(query_code(f, "QUERY SHIPMENT PRODUCT Q RETAILER R1") == ErrorCode::unknown_entity);
    CHECK(query_code(f, "QUERY TOP FACTORY DAYS 500 TO 600") == ErrorCode::empty_period);
    CHECK(query_code(f, "QUERY FRACTION delay > 1 DAYS 2 TO 14") == ErrorCode::empty_period);
}

TEST_CASE("queries do not touch the baseline") {
    const Fixture f;
    const auto before = fingerprint(f.ds.network, f.ds.demand);
    f.ask("QUERY TOP FACTORY LAST 30 DAYS");
    f.ask("QUERY SHIPMENT PRODUCT P RETAILER R2");
    CHECK(fingerprint(f.ds.network, f.ds.demand) == before);
}

TEST_CASE("metric values") {
    PlanSummary s;
    s.total_cost = 10;
    s.cost_breakdown.inbound_shipping = 2;
    s.cost_breakdown.outbound_shipping = 3;
    s.lost_units = 4;
    CHECK(metric_value(s, "shipping") == 5);
    CHECK(metric_value(s, "total_cost") == 10);
    CHECK(metric_value(s, "lost_units") == 4);
    CHECK(is_known_metric("delay"));
    CHECK_FALSE(is_known_metric("profit"));
}

TEST_CASE("lead-time monitor flags the lane whose transit grew") {
    const Fixture f;
    const auto alerts = monitor_lead_times(f.history, {}, &f.ds.network);
    REQUIRE(alerts.size() == 1);
    const auto& a = alerts[0];
    CHECK(a.subject == "F1_R1");
    CHECK(a.origin == "F1");
    CHECK(a.recent_mean == doctest::Approx(8));
    CHECK(a.reference_mean == doctest::Approx(5));
    CHECK(a.last_ship_day == 150);
    CHECK(a.predicted_arrival_day == doctest::Approx(158));
    CHECK_FALSE(a.suggested_action.empty());

    MonitorConfig strict;
    strict.min_relative_increase = 0.7;
    CHECK(monitor_lead_times(f.history, strict).empty());
    MonitorConfig absolute;
    absolute.min_absolute_increase = 3.5;
    CHECK(monitor_lead_times(f.history, absolute).empty());
}

TEST_CASE("monitor needs enough history") {
    const Fixture f;
    MonitorConfig cfg;
    cfg.reference = 200;
    CHECK_THROWS_WITH_AS(monitor_lead_times(f.history, cfg), doctest::Contains("history"), Error);
    CHECK_THROWS_AS(monitor_lead_times(PlanHistory{}, {}), Error);
}

TEST_CASE("history parsing") {
    const std::string line = R"({"day": 3, "total_cost": 1, "cost_breakdown": {}, "production": {}, "lost_units": 0, "shipments": []})";
    const auto h = PlanHistory::parse(line + "\n\n");
    REQUIRE(h.entries().size() == 1);
    CHECK(h.first_day() == 3);
    CHECK(PlanHistory::parse(to_json_line(h.entries()[0])).entries() == h.entries());

    CHECK_THROWS_AS(PlanHistory::parse(line + "\n" + line), Error);  // days must increase
    CHECK_THROWS_AS(PlanHistory::parse("{not json"), Error);
    CHECK_THROWS_AS(PlanHistory::parse(R"({"total_cost": 1})"), Error);

    PlanHistory grow;
    grow.append(h.entries()[0]);
    auto next = h.entries()[0];
    CHECK_THROWS_AS(grow.append(next), Error);
    next.day = 4;
    grow.append(next);
    CHECK(grow.last_day() == 4);
}

TEST_CASE("suggestions keep only strict improvements, best first") {
    const Fixture f;
    Lane cheap{"", "F1", "R2", 0.1, 1000000, 0, true};
    Lane cheaper{"", "F2", "R1", 0.05, 1000000, 0, true};
    Lane dear{"", "F1", "R2", 50, 10, 0, true};
    const auto out = suggest_improvements(f.ds.network, f.ds.demand, f.plan, {dear, cheap, cheaper});
    REQUIRE(out.size() == 2);
    CHECK(out[0].diff.delta_total <= out[1].diff.delta_total);
    bool saw_cheap = false;
    for (const auto& s : out) {
        CHECK(s.diff.delta_total < 0);
        if (s.candidate.origin == "F1" && s.candidate.destination == "R2") {
            saw_cheap = true;
            CHECK(s.diff.delta_total == doctest::Approx(-36));
        }
    }
    CHECK(saw_cheap);
}

TEST_CASE("summaries mirror the plan") {
    const Fixture f;
    const auto s = summarize(f.plan);
    CHECK(s.total_cost == doctest::Approx(342));
    CHECK(s.lost_units == 0);
    CHECK(s.production.at("F1") + s.production.at("F2") == doctest::Approx(70));
}
