#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "whatif/model.hpp"

namespace whatif {

/// Parses the network document (JSON object with the sections materials,
/// products, suppliers, factories, retailers, lanes and an optional delay
/// block). `source_name` only labels error messages.
SupplyNetwork parse_network(std::string_view text, const std::string& source_name = "network.json");

/// Parses the delimited demand table. Header:
/// id,retailer,product,quantity,due_day,delay_cost_rate,lost_penalty,attributes,
/// owner,modified_by,change_note,modified_at
/// Attributes are semicolon-joined key=value pairs.
DemandPlan parse_demand(std::string_view text, const std::string& snapshot_id,
                        const std::string& source_name = "demand.csv");

/// Checks cross references between demand and network (retailer/product ids).
void resolve_references(const SupplyNetwork& network, const DemandPlan& demand,
                        const std::string& demand_source = "demand.csv");

Dataset load_dataset(const std::filesystem::path& network_file,
                     const std::filesystem::path& demand_file);

/// Loads `<dir>/network.json` and `<dir>/demand.csv`.
Dataset load_dataset_dir(const std::filesystem::path& dir);

/// Demand-only load for drift analysis (no network to resolve against).
DemandPlan load_demand_file(const std::filesystem::path& demand_file);

std::string network_to_json(const SupplyNetwork& network, int indent = 2);
std::string demand_to_csv(const DemandPlan& demand);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace whatif
