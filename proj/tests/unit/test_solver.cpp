#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "whatif/apply.hpp"
#include "whatif/error.hpp"
#include "whatif/solver.hpp"

using namespace whatif;
using whatif::testing::demo_net;

namespace {

FulfillmentPlan solve(const Dataset& ds) { return whatif::solve(ds.network, ds.demand); }

FulfillmentPlan solve_script(const Dataset& ds, const std::string& text) {
    auto r = apply(dsl::parse(text), ds.network, ds.demand);
    return whatif::solve(r.network, r.demand);
}

}  // namespace

TEST_CASE("demo-net baseline") {
    const auto ds = demo_net();
    const auto plan = solve(ds);
    CHECK(plan.total_cost == doctest::Approx(342.0));
    CHECK(plan.cost_breakdown.sum() == doctest::Approx(plan.total_cost));
    CHECK(check_plan(ds.network, ds.demand, plan).empty());
    CHECK(plan.fulfilled("D1") == doctest::Approx(40));
    CHECK(plan.fulfilled("D2") == doctest::Approx(30));
    const auto flow = whatif::testing::flow_oracle_solve(ds.network, ds.demand);
    CHECK(flow.total_cost == doctest::Approx(342.0));
}

TEST_CASE("demo-net scenario ledger") {
    const auto ds = demo_net();
    const double base = solve(ds).total_cost;
    struct Row {
        const char* script;
        double delta;
    };
    const Row rows[] = {
        {"DISABLE FACTORY F2", 948.0},
        {"SCALE DEMAND ALL BY 1.15", 51.3},
        {"ADJUST PRICE MATERIAL M AT S1 BY -1", -70.0},
        {"RESTRICT RETAILER R2 TO [F1]", 22.0},
        {"SHIFT DUE DATE D2 BY -7", 42.0},
        {"DISABLE SUPPLIER S2", 0.0},
    };
    for (const auto& row : rows) {
        CAPTURE(row.script);
        const auto r = apply(dsl::parse(row.script), ds.network, ds.demand);
        const auto alt = whatif::solve(r.network, r.demand);
        CHECK(alt.total_cost - base == doctest::Approx(row.delta));
        const auto oracle = whatif::testing::flow_oracle_solve(r.network, r.demand);
        CHECK(oracle.total_cost == doctest::Approx(alt.total_cost));
    }
    const auto f2 = solve_script(ds, "DISABLE FACTORY F2");
    CHECK(f2.lost.at("D2") == doctest::Approx(10));
    CHECK(diff_plans(solve(ds), f2).feasibility_note == "not all demand can be fulfilled");
}

TEST_CASE("scaled demo-net agrees with enumeration oracle") {
    const auto ds = whatif::testing::demo_net_scaled();
    const auto plan = solve(ds);
    CHECK(plan.total_cost == doctest::Approx(34.2));
    const auto oracle = whatif::testing::oracle_solve(ds.network, ds.demand);
    CHECK(oracle.total_cost == doctest::Approx(34.2));
}

TEST_CASE("random instances match both oracles") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 60; ++i) {
        const auto ds = whatif::testing::random_instance(rng);
        CAPTURE(i);
        const auto plan = solve(ds);
        const auto a = whatif::testing::oracle_solve(ds.network, ds.demand);
        const auto b = whatif::testing::flow_oracle_solve(ds.network, ds.demand);
        CHECK(plan.total_cost == doctest::Approx(a.total_cost).epsilon(1e-9));
        CHECK(b.total_cost == doctest::Approx(a.total_cost).epsilon(1e-9));
        CHECK(check_plan(ds.network, ds.demand, plan).empty());
    }
}

TEST_CASE("oracle rejects large instances") {
    CHECK_THROWS_AS(whatif::testing::oracle_solve(demo_net().network, demo_net().demand), Error);
}

TEST_CASE("cost scaling scales the objective and keeps flows") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 40; ++i) {
        const auto ds = whatif::testing::random_instance(rng);
        const auto plan = solve(ds);
        const auto scaled = solve(whatif::testing::scale_costs(ds, 3.0));
        CHECK(scaled.total_cost == doctest::Approx(3.0 * plan.total_cost));
        CHECK(scaled.flows == plan.flows);
    }
}

TEST_CASE("solve is deterministic") {
    const auto ds = demo_net();
    const auto a = solve(ds);
    for (int i = 0; i < 5; ++i) CHECK(solve(ds) == a);
}

TEST_CASE("diff of identical plans is empty") {
    const auto plan = solve(demo_net());
    const auto d = diff_plans(plan, plan);
    CHECK(d.unchanged());
    CHECK(d.delta_total == 0.0);
    CHECK(d.feasibility_note == "all demand is fulfilled");
}

TEST_CASE("diff rejects mismatched record sets") {
    auto ds = demo_net();
    const auto base = solve(ds);
    ds.demand.records.pop_back();
    CHECK_THROWS_AS(diff_plans(base, solve(ds)), Error);
}

TEST_CASE("invalid network is refused") {
    auto ds = demo_net();
    ds.network.factories[0].production_capacity = -1;
    CHECK_THROWS_AS(solve(ds), Error);
}

TEST_CASE("conservation holds on every random plan") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 40; ++i) {
        const auto ds = whatif::testing::random_instance(rng);
        const auto plan = solve(ds);
        for (const auto& r : ds.demand.records) {
            CHECK(plan.fulfilled(r.id) + plan.lost.at(r.id) == doctest::Approx(r.quantity));
        }
    }
}
