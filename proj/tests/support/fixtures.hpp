#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "whatif/dsl.hpp"
#include "whatif/model.hpp"

namespace whatif::testing {

std::filesystem::path data_dir();          // tests/data
std::filesystem::path repo_data_dir();     // data/ (shipped banks)
std::filesystem::path demo_net_dir();

Dataset demo_net();

/// demo-net with every quantity, capacity and inventory divided by 10.
Dataset demo_net_scaled();

/// Copy with every numeric field replaced by a distinctive value no prompt
/// could contain by accident; ids are unchanged.
Dataset canary(const Dataset& dataset);

struct RandomInstanceOptions {
    int max_suppliers = 3;
    int max_factories = 3;
    int max_retailers = 3;
    int max_records = 4;
    int max_total_demand = 8;
};

/// Small integral instance within the enumeration-oracle bounds.
Dataset random_instance(std::mt19937_64& rng, const RandomInstanceOptions& options = {});

/// Script made only of restricting edits (disable, capacity cuts, retailer
/// restrictions, cost increases) that resolves against `dataset`.
dsl::ScenarioScript random_restriction(std::mt19937_64& rng, const Dataset& dataset);

/// Arbitrary well-formed script for round-trip properties.
dsl::ScenarioScript random_script(std::mt19937_64& rng);

/// Demand snapshot with random records, attributes and metadata.
DemandPlan random_snapshot(std::mt19937_64& rng, const std::string& snapshot_id);

/// Returns `plan` with every cost coefficient multiplied by k.
Dataset scale_costs(const Dataset& dataset, double k);

}  // namespace whatif::testing
