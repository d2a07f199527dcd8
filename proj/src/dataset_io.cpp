#include "whatif/dataset_io.hpp"

#include <boost/tokenizer.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "whatif/error.hpp"

namespace whatif {

using json = nlohmann::json;

namespace {

constexpr const char* kDemandColumns[] = {"id",          "retailer",        "product",
                                          "quantity",    "due_day",         "delay_cost_rate",
                                          "lost_penalty", "attributes",     "owner",
                                          "modified_by", "change_note",     "modified_at"};
constexpr std::size_t kDemandColumnCount = std::size(kDemandColumns);

class NetworkReader {
public:
    explicit NetworkReader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(ErrorCode code, const std::string& message) const {
        throw DatasetError(code, source_, 0, 0, message);
    }

    const json& section(const json& doc, const char* name) const {
        auto it = doc.find(name);
        if (it == doc.end()) fail(ErrorCode::malformed_input, std::string("missing section '") + name + "'");
        if (!it->is_array()) fail(ErrorCode::malformed_input, std::string("section '") + name + "' must be an array");
        return *it;
    }

    std::string text(const json& item, const std::string& path, const char* field,
                     bool required = true) const {
        auto it = item.find(field);
        if (it == item.end()) {
            if (!required) return {};
            fail(ErrorCode::malformed_input, path + ": missing field '" + field + "'");
        }
        if (!it->is_string()) fail(ErrorCode::malformed_input, path + "." + field + ": expected text");
        return it->get<std::string>();
    }

    double number(const json& item, const std::string& path, const char* field) const {
        auto it = item.find(field);
        if (it == item.end()) fail(ErrorCode::malformed_input, path + ": missing field '" + field + "'");
        if (!it->is_number()) fail(ErrorCode::malformed_input, path + "." + field + ": expected number");
        double value = it->get<double>();
        if (!std::isfinite(value)) fail(ErrorCode::malformed_input, path + "." + field + ": not finite");
        return value;
    }

    bool flag(const json& item, const std::string& path, const char* field) const {
        auto it = item.find(field);
        if (it == item.end()) return true;
        if (!it->is_boolean()) fail(ErrorCode::malformed_input, path + "." + field + ": expected true/false");
        return it->get<bool>();
    }

    void unique(std::set<Id>& seen, const Id& id, const std::string& path) const {
        if (id.empty()) fail(ErrorCode::malformed_input, path + ": empty id");
        if (!seen.insert(id).second) fail(ErrorCode::duplicate_id, path + ": duplicate id '" + id + "'");
    }

private:
    std::string source_;
};

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

bool parse_double(std::string_view field, double& out) {
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size() && std::isfinite(out);
}

bool parse_int(std::string_view field, std::int64_t& out) {
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\\\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string number_text(double value) {
    // Shortest round-trip form.
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

}  // namespace

SupplyNetwork parse_network(std::string_view text, const std::string& source_name) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw DatasetError(ErrorCode::malformed_input, source_name, line, column,
                           "invalid JSON document");
    }
    NetworkReader r(source_name);
    if (!doc.is_object()) r.fail(ErrorCode::malformed_input, "document must be an object");

    SupplyNetwork net;
    std::set<Id> material_ids, product_ids, node_ids, lane_ids;

    const auto& materials = r.section(doc, "materials");
    for (std::size_t i = 0; i < materials.size(); ++i) {
        std::string path = "materials[" + std::to_string(i) + "]";
        Material m{r.text(materials[i], path, "id"), r.text(materials[i], path, "name", false)};
        r.unique(material_ids, m.id, path);
        net.materials.push_back(std::move(m));
    }

    const auto& products = r.section(doc, "products");
    for (std::size_t i = 0; i < products.size(); ++i) {
        const auto& item = products[i];
        std::string path = "products[" + std::to_string(i) + "]";
        Product p{r.text(item, path, "id"), r.text(item, path, "name", false), {}};
        r.unique(product_ids, p.id, path);
        auto bom = item.find("bom");
        if (bom == item.end() || !bom->is_object()) r.fail(ErrorCode::malformed_input, path + ".bom: expected object");
        for (const auto& [material, units] : bom->items()) {
            if (!units.is_number()) r.fail(ErrorCode::malformed_input, path + ".bom." + material + ": expected number");
            if (!material_ids.count(material)) {
                r.fail(ErrorCode::dangling_reference, path + ".bom: unknown material '" + material + "'");
            }
            p.bom[material] = units.get<double>();
        }
        net.products.push_back(std::move(p));
    }

    const auto& suppliers = r.section(doc, "suppliers");
    for (std::size_t i = 0; i < suppliers.size(); ++i) {
        const auto& item = suppliers[i];
        std::string path = "suppliers[" + std::to_string(i) + "]";
        Supplier s;
        s.id = r.text(item, path, "id");
        s.material = r.text(item, path, "material");
        s.unit_price = r.number(item, path, "unit_price");
        s.capacity = r.number(item, path, "capacity");
        s.inventory = r.number(item, path, "inventory");
        s.active = r.flag(item, path, "active");
        r.unique(node_ids, s.id, path);
        if (!material_ids.count(s.material)) {
            r.fail(ErrorCode::dangling_reference, path + ": unknown material '" + s.material + "'");
        }
        net.suppliers.push_back(std::move(s));
    }

    const auto& factories = r.section(doc, "factories");
    for (std::size_t i = 0; i < factories.size(); ++i) {
        const auto& item = factories[i];
        std::string path = "factories[" + std::to_string(i) + "]";
        Factory f;
        f.id = r.text(item, path, "id");
        f.production_capacity = r.number(item, path, "production_capacity");
        f.production_cost = r.number(item, path, "production_cost");
        f.active = r.flag(item, path, "active");
        r.unique(node_ids, f.id, path);
        net.factories.push_back(std::move(f));
    }

    const auto& retailers = r.section(doc, "retailers");
    for (std::size_t i = 0; i < retailers.size(); ++i) {
        std::string path = "retailers[" + std::to_string(i) + "]";
        Retailer rt{r.text(retailers[i], path, "id"), r.text(retailers[i], path, "region", false)};
        r.unique(node_ids, rt.id, path);
        net.retailers.push_back(std::move(rt));
    }

    const auto& lanes = r.section(doc, "lanes");
    std::set<std::pair<Id, Id>> pairs;
    for (std::size_t i = 0; i < lanes.size(); ++i) {
        const auto& item = lanes[i];
        std::string path = "lanes[" + std::to_string(i) + "]";
        Lane l;
        l.id = r.text(item, path, "id");
        l.origin = r.text(item, path, "origin");
        l.destination = r.text(item, path, "destination");
        l.unit_ship_cost = r.number(item, path, "unit_ship_cost");
        l.capacity = r.number(item, path, "capacity");
        l.lead_time = r.number(item, path, "lead_time");
        l.active = r.flag(item, path, "active");
        r.unique(lane_ids, l.id, path);
        for (const Id* end : {&l.origin, &l.destination}) {
            if (!node_ids.count(*end)) {
                r.fail(ErrorCode::dangling_reference, path + ": unknown node '" + *end + "'");
            }
        }
        NodeKind from = net.node_kind(l.origin);
        NodeKind to = net.node_kind(l.destination);
        bool supply = from == NodeKind::supplier && to == NodeKind::factory;
        bool distribution = from == NodeKind::factory && to == NodeKind::retailer;
        if (!supply && !distribution) {
            r.fail(ErrorCode::malformed_input,
                   path + ": lanes must run supplier->factory or factory->retailer");
        }
        if (!pairs.emplace(l.origin, l.destination).second) {
            r.fail(ErrorCode::duplicate_id,
                   path + ": duplicate lane " + l.origin + "->" + l.destination);
        }
        net.lanes.push_back(std::move(l));
    }

    if (auto delay = doc.find("delay"); delay != doc.end()) {
        if (!delay->is_object()) r.fail(ErrorCode::malformed_input, "delay: expected object");
        if (delay->contains("grace_days")) net.delay.grace_days = r.number(*delay, "delay", "grace_days");
    }
    return net;
}

DemandPlan parse_demand(std::string_view text, const std::string& snapshot_id,
                        const std::string& source_name) {
    using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
    DemandPlan plan;
    plan.snapshot_id = snapshot_id;

    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::set<Id> ids;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        std::vector<std::string> fields;
        try {
            Tokenizer tok(line);
            for (const auto& f : tok) fields.push_back(f);
        } catch (const boost::escaped_list_error& e) {
            throw DatasetError(ErrorCode::malformed_input, source_name, line_no, 0,
                               std::string("bad quoting: ") + e.what());
        }

        if (!header_seen) {
            for (std::size_t i = 0; i < std::max(fields.size(), kDemandColumnCount); ++i) {
                if (i >= fields.size() || i >= kDemandColumnCount || trim(fields[i]) != kDemandColumns[i]) {
                    throw DatasetError(ErrorCode::malformed_input, source_name, line_no, i + 1,
                                       std::string("header column ") + std::to_string(i + 1) +
                                           " must be '" +
                                           (i < kDemandColumnCount ? kDemandColumns[i] : "<none>") + "'");
                }
            }
            header_seen = true;
            continue;
        }

        if (fields.size() != kDemandColumnCount) {
            throw DatasetError(ErrorCode::malformed_input, source_name, line_no,
                               std::min(fields.size(), kDemandColumnCount) + 1,
                               "expected " + std::to_string(kDemandColumnCount) + " fields, found " +
                                   std::to_string(fields.size()));
        }

        auto bad = [&](std::size_t column, const std::string& what) -> DatasetError {
            return DatasetError(ErrorCode::malformed_input, source_name, line_no, column + 1,
                                std::string(kDemandColumns[column]) + ": " + what);
        };
        auto num = [&](std::size_t column) {
            double v = 0;
            if (!parse_double(trim(fields[column]), v)) throw bad(column, "not a number '" + fields[column] + "'");
            return v;
        };

        DemandRecord rec;
        rec.id = trim(fields[0]);
        rec.retailer = trim(fields[1]);
        rec.product = trim(fields[2]);
        if (rec.id.empty()) throw bad(0, "empty id");
        rec.quantity = num(3);
        if (!parse_int(trim(fields[4]), rec.due_day)) throw bad(4, "not an integer day '" + fields[4] + "'");
        rec.delay_cost_rate = num(5);
        rec.lost_penalty = num(6);
        std::string attrs = trim(fields[7]);
        std::size_t start = 0;
        while (!attrs.empty() && start <= attrs.size()) {
            std::size_t end = attrs.find(';', start);
            if (end == std::string::npos) end = attrs.size();
            std::string pair = trim(std::string_view(attrs).substr(start, end - start));
            if (!pair.empty()) {
                auto eq = pair.find('=');
                if (eq == std::string::npos || eq == 0) throw bad(7, "expected key=value, got '" + pair + "'");
                rec.attributes[trim(pair.substr(0, eq))] = trim(pair.substr(eq + 1));
            }
            start = end + 1;
        }
        rec.owner = fields[8];
        rec.modified_by = fields[9];
        rec.change_note = fields[10];
        rec.modified_at = trim(fields[11]);
        if (!ids.insert(rec.id).second) {
            throw DatasetError(ErrorCode::duplicate_id, source_name, line_no, 1,
                               "duplicate record id '" + rec.id + "'");
        }
        if (rec.modified_at > plan.as_of) plan.as_of = rec.modified_at;
        plan.records.push_back(std::move(rec));
    }
    if (!header_seen) {
        throw DatasetError(ErrorCode::malformed_input, source_name, 1, 1, "missing header row");
    }
    return plan;
}

void resolve_references(const SupplyNetwork& network, const DemandPlan& demand,
                        const std::string& demand_source) {
    for (const auto& rec : demand.records) {
        if (!network.find_retailer(rec.retailer)) {
            throw DatasetError(ErrorCode::dangling_reference, demand_source, 0, 0,
                               "record '" + rec.id + "': unknown retailer '" + rec.retailer + "'");
        }
        if (!network.find_product(rec.product)) {
            throw DatasetError(ErrorCode::dangling_reference, demand_source, 0, 0,
                               "record '" + rec.id + "': unknown product '" + rec.product + "'");
        }
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::not_found, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Dataset load_dataset(const std::filesystem::path& network_file,
                     const std::filesystem::path& demand_file) {
    Dataset ds;
    ds.network = parse_network(read_text_file(network_file), network_file.filename().string());
    ds.demand = load_demand_file(demand_file);
    resolve_references(ds.network, ds.demand, demand_file.filename().string());
    return ds;
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
    return load_dataset(dir / "network.json", dir / "demand.csv");
}

DemandPlan load_demand_file(const std::filesystem::path& demand_file) {
    return parse_demand(read_text_file(demand_file), demand_file.stem().string(),
                        demand_file.filename().string());
}

std::string network_to_json(const SupplyNetwork& network, int indent) {
    json doc;
    doc["materials"] = json::array();
    for (const auto& m : network.materials) doc["materials"].push_back({{"id", m.id}, {"name", m.name}});
    doc["products"] = json::array();
    for (const auto& p : network.products) {
        json bom = json::object();
        for (const auto& [material, units] : p.bom) bom[material] = units;
        doc["products"].push_back({{"id", p.id}, {"name", p.name}, {"bom", bom}});
    }
    doc["suppliers"] = json::array();
    for (const auto& s : network.suppliers) {
        doc["suppliers"].push_back({{"id", s.id},
                                    {"material", s.material},
                                    {"unit_price", s.unit_price},
                                    {"capacity", s.capacity},
                                    {"inventory", s.inventory},
                                    {"active", s.active}});
    }
    doc["factories"] = json::array();
    for (const auto& f : network.factories) {
        doc["factories"].push_back({{"id", f.id},
                                    {"production_capacity", f.production_capacity},
                                    {"production_cost", f.production_cost},
                                    {"active", f.active}});
    }
    doc["retailers"] = json::array();
    for (const auto& r : network.retailers) doc["retailers"].push_back({{"id", r.id}, {"region", r.region}});
    doc["lanes"] = json::array();
    for (const auto& l : network.lanes) {
        doc["lanes"].push_back({{"id", l.id},
                                {"origin", l.origin},
                                {"destination", l.destination},
                                {"unit_ship_cost", l.unit_ship_cost},
                                {"capacity", l.capacity},
                                {"lead_time", l.lead_time},
                                {"active", l.active}});
    }
    doc["delay"] = {{"grace_days", network.delay.grace_days}};
    return doc.dump(indent);
}

std::string demand_to_csv(const DemandPlan& demand) {
    std::string out;
    for (std::size_t i = 0; i < kDemandColumnCount; ++i) {
        if (i) out += ',';
        out += kDemandColumns[i];
    }
    out += '\n';
    for (const auto& r : demand.records) {
        std::string attrs;
        for (const auto& [k, v] : r.attributes) {
            if (!attrs.empty()) attrs += ';';
            attrs += k + "=" + v;
        }
        out += csv_field(r.id) + ',' + csv_field(r.retailer) + ',' + csv_field(r.product) + ',' +
               number_text(r.quantity) + ',' + std::to_string(r.due_day) + ',' +
               number_text(r.delay_cost_rate) + ',' + number_text(r.lost_penalty) + ',' +
               csv_field(attrs) + ',' + csv_field(r.owner) + ',' + csv_field(r.modified_by) + ',' +
               csv_field(r.change_note) + ',' + csv_field(r.modified_at) + '\n';
    }
    return out;
}

}  // namespace whatif
