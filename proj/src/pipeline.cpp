#include "whatif/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

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

constexpr const char* kSchemaHeader = "Schema (entity ids only)";
constexpr const char* kQuestionPrefix = "Question: ";
constexpr const char* kParaphraseMarker = "Rewrite the planner answer below";

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Schema text <-> lookup tables used by the offline translator.

struct Schema {
    std::vector<std::string> materials, products, suppliers, factories, retailers, regions, records;
    std::map<std::string, std::string> supplier_material;
    struct LaneInfo {
        std::string id, origin, destination;
    };
    std::vector<LaneInfo> lanes;

    std::optional<std::string> lane_between(const std::string& o, const std::string& d) const {
        for (const auto& l : lanes) {
            if (l.origin == o && l.destination == d) return l.id;
        }
        return std::nullopt;
    }
};

// "S1 (M)" -> {"S1", "M"}
std::pair<std::string, std::string> split_paren(const std::string& item) {
    const auto open = item.rfind(" (");
    if (open == std::string::npos || item.back() != ')') return {item, ""};
    return {item.substr(0, open), item.substr(open + 2, item.size() - open - 3)};
}

Schema parse_schema(std::string_view text) {
    Schema s;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        const auto colon = line.find(": ");
        if (colon == std::string::npos) continue;
        const std::string key = line.substr(0, colon);
        const std::string rest = line.substr(colon + 2);
        if (rest.empty()) continue;
        for (const auto& item : split(rest, ',')) {
            if (item.empty()) continue;
            auto [id, extra] = split_paren(item);
            if (key == "materials") s.materials.push_back(id);
            else if (key == "products") s.products.push_back(id);
            else if (key == "suppliers") {
                s.suppliers.push_back(id);
                s.supplier_material[id] = extra;
            } else if (key == "factories") s.factories.push_back(id);
            else if (key == "retailers") s.retailers.push_back(id);
            else if (key == "regions") s.regions.push_back(id);
            else if (key == "demand records") s.records.push_back(id);
            else if (key == "lanes") {
                const auto arrow = extra.find(" -> ");
                if (arrow != std::string::npos) {
                    s.lanes.push_back({id, extra.substr(0, arrow), extra.substr(arrow + 4)});
                }
            }
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Offline translator: clause-level intent rules over a normalized question.

enum class Kind { material, product, supplier, factory, retailer, lane, record, region };

struct Token {
    std::string raw;
    std::string low;
};

struct Entity {
    Kind kind;
    std::string id;
    std::size_t pos;
};

struct Number {
    double value;
    bool percent;
    std::size_t pos;
};

struct Clause {
    std::vector<Token> tokens;
    std::vector<Entity> entities;
    std::vector<Number> numbers;

    bool has(std::initializer_list<const char*> words) const {
        for (const auto& t : tokens) {
            for (const char* w : words) {
                if (t.low == w) return true;
            }
        }
        return false;
    }
    // Multi-word phrase match on consecutive tokens.
    bool phrase(std::string_view text) const { return find_phrase(text) != npos; }
    std::size_t find_phrase(std::string_view text) const {
        std::vector<std::string> words;
        std::istringstream in{std::string(text)};
        for (std::string w; in >> w;) words.push_back(w);
        if (words.empty() || words.size() > tokens.size()) return npos;
        for (std::size_t i = 0; i + words.size() <= tokens.size(); ++i) {
            bool ok = true;
            for (std::size_t j = 0; j < words.size() && ok; ++j) ok = tokens[i + j].low == words[j];
            if (ok) return i;
        }
        return npos;
    }
    bool any_phrase(std::initializer_list<const char*> phrases) const {
        for (const char* p : phrases) {
            if (phrase(p)) return true;
        }
        return false;
    }
    std::vector<const Entity*> of(Kind k) const {
        std::vector<const Entity*> out;
        for (const auto& e : entities) {
            if (e.kind == k) out.push_back(&e);
        }
        return out;
    }
    const Entity* first(Kind k) const {
        for (const auto& e : entities) {
            if (e.kind == k) return &e;
        }
        return nullptr;
    }
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

const std::map<std::string, Kind>& kind_words() {
    static const std::map<std::string, Kind> words = {
        {"factory", Kind::factory},   {"factories", Kind::factory}, {"plant", Kind::factory},
        {"plants", Kind::factory},    {"supplier", Kind::supplier}, {"suppliers", Kind::supplier},
        {"vendor", Kind::supplier},   {"retailer", Kind::retailer}, {"retailers", Kind::retailer},
        {"store", Kind::retailer},    {"lane", Kind::lane},         {"lanes", Kind::lane},
        {"route", Kind::lane},        {"demand", Kind::record},     {"record", Kind::record},
        {"order", Kind::record},      {"material", Kind::material}, {"materials", Kind::material},
        {"type", Kind::material},     {"product", Kind::product},   {"products", Kind::product},
        {"region", Kind::region},
    };
    return words;
}

std::optional<double> word_number(const std::string& w) {
    static const std::map<std::string, double> words = {
        {"a", 1},   {"an", 1},   {"one", 1},   {"two", 2},   {"three", 3},  {"four", 4},  {"five", 5},
        {"six", 6}, {"seven", 7}, {"eight", 8}, {"nine", 9}, {"ten", 10}, {"twelve", 12}};
    auto it = words.find(w);
    if (it == words.end()) return std::nullopt;
    return it->second;
}

std::optional<double> parse_number(std::string text, bool& percent) {
    percent = false;
    if (!text.empty() && text.back() == '%') {
        percent = true;
        text.pop_back();
    }
    double scale = 1.0;
    if (!text.empty() && (text.back() == 'k' || text.back() == 'K')) {
        scale = 1000.0;
        text.pop_back();
    }
    if (text.empty()) return std::nullopt;
    std::size_t i = 0;
    if (text[0] == '-' || text[0] == '+') i = 1;
    bool digit = false, dot = false;
    for (; i < text.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(text[i]))) {
            digit = true;
        } else if (text[i] == '.' && !dot) {
            dot = true;
        } else {
            return std::nullopt;
        }
    }
    if (!digit) return std::nullopt;
    return std::strtod(text.c_str(), nullptr) * scale;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    // Optimal string alignment: insertions, deletions, substitutions, adjacent swaps.
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
        }
    }
    return d[a.size()][b.size()];
}

const std::initializer_list<const char*> kUpWords = {"increase", "increases", "increased", "increasing", "grow",
                                                     "grows", "grew", "growing", "rise", "rises", "rose", "up",
                                                     "higher", "more", "jump", "jumps", "surge", "surges", "raise",
                                                     "raised", "raises", "hike", "hikes", "go"};
const std::initializer_list<const char*> kDownWords = {"decrease", "decreases", "decreased", "drop", "drops",
                                                       "dropped", "fall", "falls", "fell", "down", "lower",
                                                       "reduce", "reduced", "reduces", "decline", "declines",
                                                       "shrink", "shrinks", "cut", "less", "cheaper", "off",
                                                       "discount", "cuts", "slash", "slashes", "lowers"};

// Words the intent rules look for, plus common words that must never be "corrected".
const std::set<std::string>& vocabulary() {
    static const std::set<std::string> words = {
        "about", "above", "additional", "advance", "ahead", "amount", "another", "arrival", "arrive", "assuming",
        "available", "becomes", "before", "below", "better", "between", "cancel", "cancelled", "capacity",
        "capacities", "change", "changes", "cheaper", "cheapest", "close", "closed", "closes", "closing", "connection",
        "costlier", "costs", "could", "create", "customer", "customers", "deactivate", "decline", "decrease",
        "decreased", "decreases", "delay", "delayed", "deliver", "delivered", "delivery", "demand", "demands",
        "disable", "disabled", "discount", "double", "doubled", "doubles", "earlier", "effect", "enable", "enabled",
        "every", "exceed", "exceeded", "exceeding", "exceeds", "exclusively", "expensive", "factories", "factory",
        "fails", "failed", "fewer", "fraction", "freight", "from", "fulfill", "fulfilled", "greater", "happen",
        "happens", "higher", "increase", "increased", "increases", "increasing", "inventory", "later", "leadtime",
        "leverage", "limit", "limited", "lower", "material", "materials", "month", "months", "offline", "option",
        "orders", "outage", "outbound", "inbound", "overall", "percent", "percentage", "period", "plans", "plant",
        "plants", "postpone", "price", "priced", "prices", "pricier", "product", "production", "productive",
        "products", "proportion", "quarter", "raise", "raised", "raises", "reduce", "reduced", "reduces", "region",
        "reopen", "requirement", "restrict", "restricted", "retailer", "retailers", "route", "shipment", "shipments",
        "shipped", "shipping", "should", "shrink", "shut", "shutdown", "solely", "sooner", "still", "stock",
        "stopped", "supplied", "supplier", "suppliers", "supply", "tariff", "tariffs", "there", "these", "those",
        "total", "transit", "transport", "unavailable", "units", "utilize", "vendor", "volume", "weeks", "what",
        "where", "which", "while", "would", "shipping", "cost", "costs", "days", "week", "lead", "time", "with",
        "falls", "makes", "source", "online", "unit", "drops", "rises", "grows", "serve", "served", "stocks", "share",
        "cheap", "month", "spend", "bills", "lands", "knocks", "slash", "slashes", "lowers", "become",
    };
    static const std::set<std::string> all = [] {
        std::set<std::string> out = words;
        out.insert(kUpWords.begin(), kUpWords.end());
        out.insert(kDownWords.begin(), kDownWords.end());
        return out;
    }();
    return all;
}

void correct_typo(Token& t) {
    const auto& w = t.low;
    if (w.size() < 5 || !std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; })) return;
    if (vocabulary().count(w)) return;
    const std::size_t limit = w.size() >= 8 ? 2 : 1;
    const std::string* best = nullptr;
    std::size_t best_d = limit + 1;
    bool tie = false;
    for (const auto& v : vocabulary()) {
        if (v.size() + limit < w.size() || w.size() + limit < v.size()) continue;
        const std::size_t d = edit_distance(w, v);
        if (d < best_d) {
            best_d = d;
            best = &v;
            tie = false;
        } else if (d == best_d) {
            tie = true;
        }
    }
    if (best != nullptr && !tie && best_d <= limit) t.low = *best;
}

std::vector<Token> normalize(std::string_view question) {
    std::string s;
    for (std::size_t i = 0; i < question.size(); ++i) {
        const char c = question[i];
        const bool digit_before = i > 0 && std::isdigit(static_cast<unsigned char>(question[i - 1]));
        const bool digit_after = i + 1 < question.size() && std::isdigit(static_cast<unsigned char>(question[i + 1]));
        const bool alpha_before = i > 0 && std::isalpha(static_cast<unsigned char>(question[i - 1]));
        const bool alpha_after = i + 1 < question.size() && std::isalpha(static_cast<unsigned char>(question[i + 1]));
        if (c == ',' && digit_before && digit_after) continue;  // 50,000
        if (c == '$') continue;
        if (c == '-' && i + 1 < question.size() && question[i + 1] == '>') {
            s += " -> ";
            ++i;
            continue;
        }
        if (c == '-' && alpha_before && alpha_after) {
            s += ' ';
            continue;
        }
        if (c == '%') {
            while (!s.empty() && s.back() == ' ') s.pop_back();
            s += "% ";
            continue;
        }
        if (c == '?' || c == ',' || c == '!' || c == ';' || c == ':' || c == '"' || c == '(' || c == ')' ||
            c == '\'' || c == '\n' || c == '\t' || c == '/') {
            s += ' ';
            continue;
        }
        s += c;
    }
    std::vector<Token> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) {
        while (w.size() > 1 && w.back() == '.') w.pop_back();
        if (w == ".") continue;
        if (w.size() > 2 && w.substr(w.size() - 2) == "'s") w.resize(w.size() - 2);
        std::string low = lower(w);
        if ((low == "percent" || low == "pct") && !out.empty()) {
            bool pct;
            if (parse_number(out.back().raw, pct) && !pct) {
                out.back().raw += '%';
                out.back().low += '%';
                continue;
            }
        }
        out.push_back({w, low});
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        const auto& w = out[i].low;
        if (w == "dollar" || w == "dollars" || w == "buck" || w == "bucks") {
            if (auto v = word_number(out[i - 1].low)) {
                out[i - 1].raw = out[i - 1].low = format_quantity(*v);
            }
        }
    }
    // "per cent"
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
        if (out[i].low == "per" && out[i + 1].low == "cent" && i > 0) {
            out[i - 1].raw += '%';
            out[i - 1].low += '%';
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(i), out.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        }
    }
    return out;
}

class Recognizer {
public:
    explicit Recognizer(const Schema& s) : schema_(s) {
        auto add = [this](const std::vector<std::string>& ids, Kind k) {
            for (const auto& id : ids) index_[lower(id)].push_back({k, id});
        };
        add(s.factories, Kind::factory);
        add(s.suppliers, Kind::supplier);
        add(s.retailers, Kind::retailer);
        add(s.records, Kind::record);
        add(s.materials, Kind::material);
        add(s.products, Kind::product);
        add(s.regions, Kind::region);
        std::vector<std::string> lane_ids;
        for (const auto& l : s.lanes) lane_ids.push_back(l.id);
        add(lane_ids, Kind::lane);
    }

    std::optional<Entity> entity_at(const std::vector<Token>& tokens, std::size_t i) const {
        const auto& t = tokens[i];
        std::optional<Kind> hint;
        if (i > 0) {
            auto w = kind_words().find(tokens[i - 1].low);
            if (w != kind_words().end()) hint = w->second;
        }
        auto it = index_.find(t.low);
        if (it != index_.end()) {
            const auto& options = it->second;
            if (hint) {
                for (const auto& [k, id] : options) {
                    if (k == *hint) return Entity{k, id, i};
                }
            }
            // Short lower-case words ("a", "p") only count after a kind word or in their exact case.
            if (hint || t.raw == options.front().second || t.low.size() > 2 ||
                std::any_of(t.low.begin(), t.low.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
                return Entity{options.front().first, options.front().second, i};
            }
            return std::nullopt;
        }
        if (hint && *hint != Kind::region && looks_like_id(t.raw)) return Entity{*hint, t.raw, i};
        return std::nullopt;
    }

    const Schema& schema() const { return schema_; }

private:
    static bool looks_like_id(const std::string& raw) {
        if (raw.empty() || std::isdigit(static_cast<unsigned char>(raw[0]))) return false;
        bool upper_or_digit = false;
        for (char c : raw) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
            if (std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c))) {
                upper_or_digit = true;
            }
        }
        return upper_or_digit;
    }

    const Schema& schema_;
    std::map<std::string, std::vector<std::pair<Kind, std::string>>> index_;
};

std::vector<std::vector<Token>> clauses(const std::vector<Token>& tokens, const Recognizer& rec) {
    static const std::set<std::string> breaks = {"if", "when", "while", "but", "then", "assuming", "suppose",
                                                 "also", "plus", "whats"};
    std::vector<std::vector<Token>> out(1);
    std::optional<Kind> last_kind;
    auto next_kind = [&](std::size_t i) -> std::optional<Kind> {
        if (i >= tokens.size()) return std::nullopt;
        if (auto e = rec.entity_at(tokens, i)) return e->kind;
        if (kind_words().count(tokens[i].low) && i + 1 < tokens.size()) {
            if (auto e = rec.entity_at(tokens, i + 1)) return e->kind;
        }
        return std::nullopt;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        if (auto e = rec.entity_at(tokens, i)) last_kind = e->kind;
        const bool is_and = t.low == "and" || t.low == "&" || t.low == "or";
        const bool split_and = is_and && !(last_kind && next_kind(i + 1) == last_kind);
        if (breaks.count(t.low) || split_and) {
            if (!out.back().empty()) out.emplace_back();
            last_kind.reset();
            if (split_and) continue;
        }
        out.back().push_back(t);
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const auto& c) { return c.empty(); }), out.end());
    return out;
}

Clause whole_clause(const std::vector<Token>& tokens, const Recognizer& rec) {
    Clause all;
    all.tokens = tokens;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (auto e = rec.entity_at(tokens, i)) all.entities.push_back(*e);
        bool pct = false;
        if (auto v = parse_number(tokens[i].low, pct)) all.numbers.push_back({*v, pct, i});
    }
    return all;
}

// Number of days implied by phrases such as "a week", "3 days", "two weeks".
std::optional<double> duration_days(const Clause& c) {
    for (std::size_t i = 0; i < c.tokens.size(); ++i) {
        const auto& w = c.tokens[i].low;
        double unit = 0;
        if (w == "day" || w == "days") unit = 1;
        if (w == "week" || w == "weeks") unit = 7;
        if (w == "month" || w == "months") unit = 30;
        if (unit == 0) continue;
        if (i == 0) return unit;
        bool pct = false;
        if (auto v = parse_number(c.tokens[i - 1].low, pct)) return *v * unit;
        if (auto v = word_number(c.tokens[i - 1].low)) return *v * unit;
        return unit;
    }
    return std::nullopt;
}

std::int64_t period_days(const std::vector<Token>& tokens) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& w = tokens[i].low;
        if (w != "last" && w != "past" && w != "previous" && w != "recent") continue;
        if (i + 1 >= tokens.size()) break;
        const auto& n = tokens[i + 1].low;
        if (n == "month") return 30;
        if (n == "week") return 7;
        if (n == "quarter") return 90;
        if (n == "year") return 365;
        if (n == "day") return 1;
        bool pct = false;
        std::optional<double> v = parse_number(n, pct);
        if (!v) v = word_number(n);
        if (v && i + 2 < tokens.size()) {
            const auto& u = tokens[i + 2].low;
            if (u == "days" || u == "day") return static_cast<std::int64_t>(*v);
            if (u == "weeks" || u == "week") return static_cast<std::int64_t>(*v * 7);
            if (u == "months" || u == "month") return static_cast<std::int64_t>(*v * 30);
        }
    }
    return 30;
}

// Every record / retailer / region / product named in the clause, by the first kind present.
std::vector<dsl::Selector> demand_selectors(const Clause& c) {
    const std::pair<Kind, dsl::SelectorKind> order[] = {{Kind::record, dsl::SelectorKind::record},
                                                         {Kind::retailer, dsl::SelectorKind::retailer},
                                                         {Kind::region, dsl::SelectorKind::region},
                                                         {Kind::product, dsl::SelectorKind::product}};
    for (const auto& [kind, sel] : order) {
        std::vector<dsl::Selector> out;
        for (const auto* e : c.of(kind)) {
            if (std::none_of(out.begin(), out.end(), [&](const dsl::Selector& s) { return s.value == e->id; })) {
                out.push_back({sel, e->id, ""});
            }
        }
        if (!out.empty()) return out;
    }
    return {{dsl::SelectorKind::all, "", ""}};
}

std::string demand_subject(const dsl::Selector& s) {
    switch (s.kind) {
        case dsl::SelectorKind::record: return "demand " + s.value;
        case dsl::SelectorKind::retailer: return "demand at retailer " + s.value;
        case dsl::SelectorKind::region: return "demand in region " + s.value;
        case dsl::SelectorKind::product: return "demand for product " + s.value;
        default: return "the overall demand";
    }
}

dsl::Selector demand_selector(const Clause& c) {
    if (auto e = c.first(Kind::record)) return {dsl::SelectorKind::record, e->id, ""};
    if (auto e = c.first(Kind::retailer)) return {dsl::SelectorKind::retailer, e->id, ""};
    if (auto e = c.first(Kind::region)) return {dsl::SelectorKind::region, e->id, ""};
    if (auto e = c.first(Kind::product)) return {dsl::SelectorKind::product, e->id, ""};
    return {dsl::SelectorKind::all, "", ""};
}

const Number* first_number(const Clause& c, bool percent) {
    for (const auto& n : c.numbers) {
        if (n.percent == percent) return &n;
    }
    return nullptr;
}

// Number directly after one of `words` (skipping "of", "to", "at", "is").
const Number* number_after(const Clause& c, std::initializer_list<const char*> words) {
    for (const auto& n : c.numbers) {
        for (std::size_t back = 1; back <= 3 && back <= n.pos; ++back) {
            const auto& w = c.tokens[n.pos - back].low;
            bool hit = false;
            for (const char* k : words) hit = hit || w == k;
            if (hit) return &n;
            if (w != "of" && w != "to" && w != "at" && w != "is" && w != "a" && w != "per" && w != "unit" &&
                w != "be" && w != "=") {
                break;
            }
        }
    }
    return nullptr;
}

enum class Direction { none, up, down };

Direction direction(const Clause& c) {
    // "goes down" / "go down" must not read as up.
    if (c.has(kDownWords)) return Direction::down;
    if (c.has(kUpWords) || c.has({"expensive", "pricier", "costlier"})) return Direction::up;
    return Direction::none;
}

struct Outcome {
    std::vector<dsl::Statement> statements;
    std::vector<std::string> clarify;
    bool unsupported_clause = false;
};

std::string id_text(const std::string& id) {
    // Ids are rendered by the DSL printer; this is for clarification wording.
    return id;
}

bool restrict_clause(const Clause& c, Outcome& out) {
    const auto* r = c.first(Kind::retailer);
    const auto factories = c.of(Kind::factory);
    if (r == nullptr || factories.empty()) return false;
    if (!c.has({"only", "exclusively", "restrict", "restricted", "solely", "limit", "limited"})) return false;
    dsl::RestrictRetailer s{r->id, {}};
    for (const auto* f : factories) {
        if (std::find(s.factories.begin(), s.factories.end(), f->id) == s.factories.end()) s.factories.push_back(f->id);
    }
    out.statements.push_back(s);
    return true;
}

std::optional<std::pair<std::string, std::string>> endpoints(const Clause& c) {
    std::vector<const Entity*> nodes;
    for (const auto& e : c.entities) {
        if (e.kind == Kind::supplier || e.kind == Kind::factory || e.kind == Kind::retailer) nodes.push_back(&e);
    }
    if (nodes.size() < 2) return std::nullopt;
    return std::make_pair(nodes[0]->id, nodes[1]->id);
}

bool add_lane_clause(const Clause& c, Outcome& out) {
    if (!c.has({"lane", "route", "connection", "link"})) return false;
    if (!c.has({"add", "adding", "new", "open", "opening", "build", "create"})) return false;
    const auto ends = endpoints(c);
    if (!ends) return false;
    const Number* cost = number_after(c, {"cost", "costing", "at", "price", "rate"});
    if (cost == nullptr) {
        for (const auto& n : c.numbers) {
            if (!n.percent) {
                cost = &n;
                break;
            }
        }
    }
    if (cost == nullptr) return false;
    const Number* cap = number_after(c, {"capacity", "cap"});
    const Number* lead = number_after(c, {"lead", "leadtime", "time", "transit"});
    if (lead == nullptr) {
        for (const auto& n : c.numbers) {
            if (n.pos + 1 < c.tokens.size() && (c.tokens[n.pos + 1].low == "days" || c.tokens[n.pos + 1].low == "day")) {
                lead = &n;
            }
        }
    }
    out.statements.push_back(dsl::AddLane{ends->first, ends->second, cost->value,
                                          cap ? cap->value : 1000000.0, lead ? lead->value : 0.0});
    return true;
}

bool due_date_clause(const Clause& c, Outcome& out) {
    const bool subject = c.has({"dock", "docked", "docking", "due", "deliver", "delivered", "delivery", "arrive",
                                "arrival", "ship", "shipped", "land", "lands"});
    if (!subject) return false;
    const bool earlier = c.has({"earlier", "sooner", "ahead", "early", "advance", "forward"}) || c.phrase("move up");
    const bool later = c.has({"later", "postpone", "postponed", "delay", "delayed", "defer", "deferred", "late"}) ||
                       c.phrase("push back") || c.phrase("pushed back");
    if (earlier == later) return false;
    const auto days = duration_days(c);
    if (!days) return false;
    out.statements.push_back(dsl::ShiftDueDate{demand_selector(c),
                                               static_cast<std::int64_t>(std::llround(earlier ? -*days : *days))});
    return true;
}

bool demand_clause(const Clause& c, Outcome& out) {
    if (!c.has({"demand", "demands", "orders", "volume", "volumes", "requirement", "requirements", "want", "wants",
                "wanted"}) &&
        c.first(Kind::record) == nullptr) {
        return false;
    }
    auto scale = [&](double f) {
        for (auto& sel : demand_selectors(c)) out.statements.push_back(dsl::ScaleDemand{sel, f});
        return true;
    };
    if (c.has({"double", "doubles", "doubled"})) return scale(2.0);
    if (c.has({"triple", "triples", "tripled"})) return scale(3.0);
    if (c.has({"halve", "halves", "halved", "half"})) return scale(0.5);
    const Direction dir = direction(c);
    if (const Number* pct = first_number(c, true)) {
        if (dir == Direction::none) return false;
        const double f = dir == Direction::up ? 1.0 + pct->value / 100.0 : 1.0 - pct->value / 100.0;
        if (f <= 0) return false;
        return scale(std::round(f * 1e12) / 1e12);
    }
    if (const auto* rec = c.first(Kind::record)) {
        const Number* qty = number_after(c, {"to", "becomes", "be", "is", "of", "at", "only"});
        if (qty && !qty->percent && qty->value >= 0) {
            out.statements.push_back(dsl::SetDemand{rec->id, qty->value});
            return true;
        }
    }
    if (dir != Direction::none || c.has({"change", "changes", "changed", "shift", "shifts", "moves", "varies"})) {
        const bool facility = c.first(Kind::factory) || c.first(Kind::supplier) || c.first(Kind::lane);
        if (c.numbers.empty() && !facility && !c.has({"dock", "due", "earlier", "later"})) {
            const std::string subject = demand_subject(demand_selector(c));
            out.clarify = {"What would be the additional cost if " + subject + " increases by 10%?",
                           "What would be the cost change if " + subject + " decreases by 10%?"};
            return true;
        }
    }
    return false;
}

bool price_clause(const Clause& c, const Schema& schema, Outcome& out) {
    const bool priced = c.has({"price", "prices", "priced", "cheaper", "expensive", "pricier", "costlier", "costs",
                               "cost", "discount", "off"});
    if (!priced) return false;
    const auto* mat = c.first(Kind::material);
    const auto* sup = c.first(Kind::supplier);
    if (mat == nullptr && sup == nullptr) return false;
    if (c.has({"shipping", "ship", "freight", "transport", "tariff", "tariffs", "lane"})) return false;
    std::string material = mat ? mat->id : "";
    if (material.empty()) {
        auto it = schema.supplier_material.find(sup->id);
        if (it == schema.supplier_material.end() || it->second.empty()) return false;
        material = it->second;
    }
    std::optional<std::string> at;
    if (sup) at = sup->id;
    const Direction dir = direction(c);
    dsl::Adjustment adj;
    if (const Number* pct = first_number(c, true)) {
        if (dir == Direction::none) return false;
        adj = {dsl::AdjustMode::times, dir == Direction::up ? 1.0 + pct->value / 100.0 : 1.0 - pct->value / 100.0};
        adj.amount = std::round(adj.amount * 1e12) / 1e12;
    } else if (const Number* n = first_number(c, false)) {
        const std::string prev = n->pos > 0 ? c.tokens[n->pos - 1].low : "";
        const bool to_form = prev == "to" || prev == "costs" || prev == "becomes" ||
                             ((prev == "is" || prev == "at" || prev == "of") && dir == Direction::none);
        if (to_form && !c.has({"by"})) {
            adj = {dsl::AdjustMode::to, n->value};
        } else if (dir != Direction::none) {
            adj = {dsl::AdjustMode::by, dir == Direction::up ? n->value : -n->value};
        } else {
            return false;
        }
    } else {
        return false;
    }
    out.statements.push_back(dsl::AdjustPrice{material, at, adj});
    return true;
}

bool ship_cost_clause(const Clause& c, const Schema& schema, Outcome& out) {
    const bool tariff = c.has({"tariff", "tariffs", "duty", "duties"});
    const bool shipping = c.has({"shipping", "freight", "transport", "transportation", "ship", "lane"}) &&
                          (c.has({"cost", "costs", "rate", "rates", "price", "prices", "expensive", "cheaper"}) ||
                           c.phrase("per unit"));
    if (!tariff && !shipping) return false;
    dsl::LaneSelector lanes{dsl::LaneSelectorKind::all, ""};
    if (const auto* lane = c.first(Kind::lane)) {
        lanes = {dsl::LaneSelectorKind::lane, lane->id};
    } else if (const auto* region = c.first(Kind::region)) {
        lanes = {dsl::LaneSelectorKind::region, region->id};
    } else if (auto ends = endpoints(c)) {
        if (auto id = schema.lane_between(ends->first, ends->second)) {
            lanes = {dsl::LaneSelectorKind::lane, *id};
        } else {
            return false;
        }
    }
    const Direction dir = tariff && !c.has(kDownWords) ? Direction::up : direction(c);
    dsl::Adjustment adj;
    if (const Number* pct = first_number(c, true)) {
        if (dir == Direction::none) return false;
        adj = {dsl::AdjustMode::times, dir == Direction::up ? 1.0 + pct->value / 100.0 : 1.0 - pct->value / 100.0};
        adj.amount = std::round(adj.amount * 1e12) / 1e12;
    } else if (const Number* n = first_number(c, false)) {
        const std::string prev = n->pos > 0 ? c.tokens[n->pos - 1].low : "";
        const bool to_form = (prev == "to" || prev == "becomes" || prev == "become" ||
                              ((prev == "is" || prev == "at" || prev == "of") && dir == Direction::none)) &&
                             !c.has({"by"});
        if (to_form) {
            adj = {dsl::AdjustMode::to, n->value};
        } else if (dir != Direction::none) {
            adj = {dsl::AdjustMode::by, dir == Direction::up ? n->value : -n->value};
        } else {
            return false;
        }
    } else if (c.has({"double", "doubles", "doubled"})) {
        adj = {dsl::AdjustMode::times, 2.0};
    } else {
        return false;
    }
    out.statements.push_back(dsl::AdjustShipCost{lanes, adj});
    return true;
}

bool capacity_clause(const Clause& c, const Schema& schema, Outcome& out) {
    // "F1 can only make 45 units" reads as a capacity cap.
    const bool output_cap = c.first(Kind::factory) && c.has({"only"}) &&
                            c.has({"make", "produce", "build", "manufacture", "output"}) && !c.numbers.empty();
    if (!c.has({"capacity", "capacities"}) && !output_cap) return false;
    std::optional<dsl::EntityRef> target;
    if (auto e = c.first(Kind::factory)) target = dsl::EntityRef{dsl::EntityKind::factory, e->id};
    else if (auto e = c.first(Kind::supplier)) target = dsl::EntityRef{dsl::EntityKind::supplier, e->id};
    else if (auto e = c.first(Kind::lane)) target = dsl::EntityRef{dsl::EntityKind::lane, e->id};
    if (target && target->kind != dsl::EntityKind::lane && c.has({"lane", "route"})) {
        if (auto ends = endpoints(c)) {
            if (auto id = schema.lane_between(ends->first, ends->second)) target = dsl::EntityRef{dsl::EntityKind::lane, *id};
        }
    }
    if (!target) return false;
    const Number* n = number_after(c, {"to", "only", "of", "becomes", "is", "make", "produce", "build", "manufacture"});
    if (n == nullptr || n->percent || c.has({"by"})) {
        out.unsupported_clause = true;
        return true;
    }
    out.statements.push_back(dsl::SetCapacity{*target, n->value});
    return true;
}

bool lead_time_clause(const Clause& c, const Schema& schema, Outcome& out) {
    if (!(c.phrase("lead time") || c.has({"leadtime", "leadtimes"}) || c.phrase("transit time"))) return false;
    std::optional<std::string> lane;
    if (auto e = c.first(Kind::lane)) lane = e->id;
    else if (auto ends = endpoints(c)) lane = schema.lane_between(ends->first, ends->second);
    if (!lane) return false;
    const Number* n = number_after(c, {"to", "becomes", "is", "of", "takes"});
    if (n == nullptr || n->percent || c.has({"by"})) {
        out.unsupported_clause = true;
        return true;
    }
    out.statements.push_back(dsl::SetLeadTime{*lane, n->value});
    return true;
}

bool status_clause(const Clause& c, Outcome& out) {
    const bool enable = c.has({"reopen", "reopens", "reopened", "enable", "enabled", "reactivate", "reactivated",
                               "restart", "restarted", "resume", "resumes"}) ||
                        c.phrase("back online") || c.phrase("bring back") || c.phrase("turn on");
    const bool disable = c.has({"shut", "shutdown", "shuts", "close", "closes", "closed", "closing", "disable",
                                "disabled", "deactivate", "deactivated", "offline", "lose", "lost", "loses",
                                "unavailable", "outage", "fails", "failed", "stop", "stops", "stopped", "without",
                                "remove", "removed", "drop", "dropped", "down", "block", "blocked", "halt",
                                "halted", "strike", "eliminate", "cancel", "cancelled", "decommission",
                                "decommissioned", "mothball", "mothballed", "idle", "idled"}) ||
                         c.phrase("turn off") || c.phrase("switch off");
    if (enable == disable) return false;
    bool any = false;
    for (const auto& e : c.entities) {
        std::optional<dsl::EntityKind> kind;
        if (e.kind == Kind::factory) kind = dsl::EntityKind::factory;
        if (e.kind == Kind::supplier) kind = dsl::EntityKind::supplier;
        if (e.kind == Kind::lane) kind = dsl::EntityKind::lane;
        if (!kind) continue;
        dsl::EntityRef ref{*kind, e.id};
        if (enable) out.statements.push_back(dsl::Enable{ref});
        else out.statements.push_back(dsl::Disable{ref});
        any = true;
    }
    return any;
}

bool ambiguous(const std::vector<Token>& tokens, const Recognizer& rec, const Schema& schema, Outcome& out) {
    Clause all;
    all.tokens = tokens;
    const bool vague = all.has({"utilize", "utilise", "utilization", "utilisation", "leverage"}) ||
                       all.phrase("better use") || all.phrase("make more of") || all.phrase("get more out");
    if (!vague) return false;
    std::string factory = schema.factories.empty() ? "F" : schema.factories.front();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (auto e = rec.entity_at(tokens, i); e && e->kind == Kind::factory) {
            factory = e->id;
            break;
        }
    }
    const std::string retailer = schema.retailers.empty() ? "R" : schema.retailers.front();
    out.clarify = {
        "Can we still fulfill all demand if we shut down factory " + id_text(factory) + "?",
        "What would be the additional cost if retailer " + id_text(retailer) + " can use products only from factory " +
            id_text(factory) + "?",
        "Which factory produced the most in the last 30 days?",
    };
    return true;
}

std::optional<dsl::QueryForm> query_form(const std::vector<Token>& tokens, const Recognizer& rec,
                                         const Schema& schema) {
    const Clause all = whole_clause(tokens, rec);

    // Fraction of historical plans meeting a cost threshold.
    if (all.has({"fraction", "share", "percentage", "proportion", "percent", "ratio", "often"}) ||
        all.phrase("how many plans") || all.phrase("how many of the plans") || all.phrase("what part")) {
        const std::pair<const char*, const char*> metrics[] = {
            {"outbound shipping", "outbound_shipping"}, {"inbound shipping", "inbound_shipping"},
            {"lost units", "lost_units"},               {"lost demand", "lost_units"},
            {"units lost", "lost_units"},               {"lost penalty", "lost_penalty"},
            {"lost sales", "lost_penalty"},             {"material cost", "material"},
            {"material costs", "material"},             {"production cost", "production"},
            {"production costs", "production"},         {"delay cost", "delay"},
            {"delay costs", "delay"},                   {"shipping", "shipping"},
            {"freight", "shipping"},                    {"total cost", "total_cost"},
            {"cost", "total_cost"},                     {"costs", "total_cost"},
        };
        std::optional<std::string> metric;
        for (const auto& [text, name] : metrics) {
            if (all.phrase(text)) {
                metric = name;
                break;
            }
        }
        std::optional<dsl::Comparator> cmp;
        if (all.phrase("at least") || all.phrase("or more")) cmp = dsl::Comparator::greater_equal;
        else if (all.phrase("at most") || all.phrase("or less")) cmp = dsl::Comparator::less_equal;
        else if (all.has({"exceed", "exceeded", "exceeds", "exceeding", "above", "over", "more", "greater", "higher",
                          "topped"})) cmp = dsl::Comparator::greater;
        else if (all.has({"below", "under", "less", "lower", "fewer"})) cmp = dsl::Comparator::less;
        const Number* threshold = nullptr;
        for (const auto& n : all.numbers) {
            if (n.percent) continue;
            const bool is_period = n.pos > 0 && (tokens[n.pos - 1].low == "last" || tokens[n.pos - 1].low == "past");
            if (!is_period) {
                threshold = &n;
                break;
            }
        }
        if (metric && cmp && threshold) {
            dsl::Period p;
            p.trailing = true;
            p.days = period_days(tokens);
            return dsl::FractionPlansWhere{*metric, *cmp, threshold->value, p};
        }
    }

    // Most productive factory over a period.
    if (all.phrase("most productive") || all.phrase("produced the most") || all.phrase("produce the most") ||
        all.phrase("produces the most") || all.phrase("highest output") || all.phrase("most output") ||
        all.phrase("top factory") || all.phrase("largest output") || all.phrase("biggest output") ||
        all.phrase("made the most")) {
        dsl::Period p;
        p.trailing = true;
        p.days = period_days(tokens);
        return dsl::TopFactoryByOutput{p};
    }

    // Cheapest shipping option between two nodes.
    if (all.has({"cheapest", "cheapest"}) || all.phrase("lowest cost") || all.phrase("least expensive") ||
        all.phrase("lowest shipping") || all.phrase("cheapest way")) {
        if (auto ends = endpoints(all)) return dsl::CheapestLane{ends->first, ends->second};
    }

    // Supplier inventory.
    if (const auto* sup = all.first(Kind::supplier)) {
        const bool inventory = all.has({"inventory", "stock", "stocks", "on-hand"}) || all.phrase("on hand") ||
                               (all.phrase("how much") && all.has({"have", "has", "hold", "holds", "got"}));
        if (inventory) {
            std::string material;
            if (const auto* m = all.first(Kind::material)) {
                material = m->id;
            } else if (auto it = schema.supplier_material.find(sup->id); it != schema.supplier_material.end()) {
                material = it->second;
            }
            if (!material.empty()) return dsl::SupplierInventory{sup->id, material};
        }
    }

    // Shipped quantity of a product to a retailer under the current plan.
    if (const auto* r = all.first(Kind::retailer)) {
        const bool how_many = all.phrase("how many") || all.phrase("how much") || all.has({"quantity", "volume"});
        const bool shipped = all.has({"ship", "ships", "shipped", "shipping", "deliver", "delivered", "delivering",
                                      "send", "sent", "sending", "receive", "receives", "receiving", "get", "gets",
                                      "supply", "supplied", "fulfill", "fulfilled"});
        if (how_many && shipped) {
            std::string product;
            if (const auto* p = all.first(Kind::product)) product = p->id;
            else if (schema.products.size() == 1) product = schema.products.front();
            if (!product.empty()) return dsl::ShipmentQuantity{product, r->id};
        }
    }
    return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<ExampleEntry> parse_example_bank(std::string_view text) {
    std::vector<ExampleEntry> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            ExampleEntry e;
            e.question = j.at("question").get<std::string>();
            e.dsl = j.at("dsl").get<std::string>();
            if (j.contains("tags")) e.tags = j.at("tags").get<std::vector<std::string>>();
            out.push_back(std::move(e));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::bank_format, "example bank line " + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

std::vector<ExampleEntry> load_example_bank(const std::filesystem::path& path) {
    return parse_example_bank(read_text_file(path));
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

double jaccard(std::string_view a, std::string_view b) {
    const auto ta = tokenize(a);
    const auto tb = tokenize(b);
    const std::set<std::string> sa(ta.begin(), ta.end());
    const std::set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& t : sa) common += sb.count(t);
    return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

std::vector<ScoredExample> select_examples(std::string_view question, const std::vector<ExampleEntry>& bank,
                                           std::size_t k) {
    std::vector<ScoredExample> scored;
    scored.reserve(bank.size());
    for (std::size_t i = 0; i < bank.size(); ++i) scored.push_back({&bank[i], jaccard(question, bank[i].question), i});
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredExample& a, const ScoredExample& b) { return a.score > b.score; });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

std::string Prompt::text() const {
    std::string out;
    for (const auto& m : messages) {
        out += m.role;
        out += ": ";
        out += m.content;
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string OfflineTranslator::translate_question(std::string_view question, std::string_view schema_text) {
    const Schema schema = parse_schema(schema_text);
    const Recognizer rec(schema);
    auto tokens = normalize(question);
    if (tokens.empty()) return "UNSUPPORTED";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!rec.entity_at(tokens, i)) correct_typo(tokens[i]);
    }

    Outcome out;
    if (ambiguous(tokens, rec, schema, out)) return "CLARIFY: " + join(out.clarify, " | ");

    // Lane additions carry several numbers joined by "and"; read them from the whole question.
    if (add_lane_clause(whole_clause(tokens, rec), out)) return dsl::render(dsl::ScenarioScript{out.statements});

    // A clause with no intent of its own ("factory F2 and ...") carries into the next one.
    std::vector<Token> carry;
    for (const auto& part : clauses(tokens, rec)) {
        carry.insert(carry.end(), part.begin(), part.end());
        const Clause c = whole_clause(carry, rec);
        if (restrict_clause(c, out) || due_date_clause(c, out) || lead_time_clause(c, schema, out) ||
            capacity_clause(c, schema, out) || ship_cost_clause(c, schema, out) || price_clause(c, schema, out)) {
            carry.clear();
            continue;
        }
        if (demand_clause(c, out)) {
            if (!out.clarify.empty()) break;
            carry.clear();
            continue;
        }
        if (status_clause(c, out)) carry.clear();
    }
    if (!out.clarify.empty() && out.statements.empty()) return "CLARIFY: " + join(out.clarify, " | ");
    if (out.unsupported_clause) return "UNSUPPORTED";
    if (!out.statements.empty()) return dsl::render(dsl::ScenarioScript{out.statements});

    if (auto q = query_form(tokens, rec, schema)) return dsl::render(*q);
    return "UNSUPPORTED";
}

const std::vector<std::string>& OfflineTranslator::catalog() {
    static const std::vector<std::string> items = {
        "What would be the additional cost if the overall product demand increases by 15%?",
        "What is the cost change if demand at retailer R1 drops by 20%?",
        "Can we still fulfill all demand if we shut down factory F?",
        "What happens if supplier S is unavailable?",
        "What would be the additional cost if retailer R can use products only from factory F?",
        "What if raw material M at supplier S is $1 cheaper per unit?",
        "What if shipping costs into region East rise by 10%? (tariffs)",
        "What if the capacity of factory F is reduced to 40?",
        "What if the lead time on lane L becomes 9 days?",
        "What is the cost increase if we dock demand D a week earlier?",
        "Should we add a new lane from factory F to retailer R at cost 0.1?",
        "How much raw material of type M does supplier S have today?",
        "What is the cheapest shipping option from factory F to retailer R?",
        "How many units of product P are shipped to retailer R?",
        "Which factory was the most productive in the last 30 days?",
        "What fraction of plans had total shipping cost above 50,000 last month?",
    };
    return items;
}

std::string OfflineTranslator::complete(const Prompt& prompt) {
    if (!prompt.messages.empty() && starts_with(prompt.messages.front().content, kParaphraseMarker)) {
        return prompt.messages.back().content;
    }
    std::string schema;
    for (const auto& m : prompt.messages) {
        if (m.role == "system" && starts_with(m.content, kSchemaHeader)) schema = m.content;
    }
    std::string question;
    for (auto it = prompt.messages.rbegin(); it != prompt.messages.rend() && question.empty(); ++it) {
        if (it->role != "user") continue;
        std::istringstream in(it->content);
        for (std::string line; std::getline(in, line);) {
            if (starts_with(line, kQuestionPrefix)) question = line.substr(std::string_view(kQuestionPrefix).size());
        }
    }
    return translate_question(question, schema);
}

// ---------------------------------------------------------------------------

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {}

std::string RemoteBackend::request_body(const RemoteConfig& config, const Prompt& prompt) {
    json body;
    body["model"] = config.model;
    body["temperature"] = 0;
    body["messages"] = json::array();
    for (const auto& m : prompt.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    return body.dump();
}

std::string RemoteBackend::parse_response(std::string_view body) {
    try {
        const auto j = json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::backend_unavailable, std::string("malformed completion response: ") + e.what());
    }
}

std::string RecordingBackend::complete(const Prompt& prompt) {
    {
        std::lock_guard lock(mutex_);
        prompts_.push_back(prompt.text());
    }
    return inner_.complete(prompt);
}

std::vector<std::string> RecordingBackend::prompts() const {
    std::lock_guard lock(mutex_);
    return prompts_;
}

std::string FaultInjectingBackend::complete(const Prompt& prompt) {
    const std::size_t n = ++calls_;
    if (period_ > 0 && n % period_ == 0) return "SCALE DEMAND ALL BY 0.5";
    return inner_.complete(prompt);
}

// ---------------------------------------------------------------------------

const std::string& default_preamble() {
    static const std::string text =
        "You translate supply-chain planning questions into a scenario DSL.\n"
        "Reply with DSL statements only, separated by \"; \". Statements:\n"
        "SCALE DEMAND <selector> BY <factor>\n"
        "SET DEMAND <record> TO <quantity>\n"
        "DISABLE|ENABLE FACTORY|SUPPLIER|LANE <id>\n"
        "RESTRICT RETAILER <id> TO [<factory>, ...]\n"
        "ADJUST PRICE MATERIAL <id> [AT <supplier>] BY <delta>|TO <value>|TIMES <factor>\n"
        "ADJUST SHIP COST LANE <id>|REGION <name>|ALL BY <delta>|TO <value>|TIMES <factor>\n"
        "SET CAPACITY FACTORY|SUPPLIER|LANE <id> TO <value>\n"
        "SET LEADTIME LANE <id> TO <days>\n"
        "SHIFT DUE DATE <selector> BY <days>\n"
        "ADD LANE <origin> -> <destination> COST <c> CAPACITY <c> LEADTIME <days>\n"
        "QUERY INVENTORY SUPPLIER <id> MATERIAL <id>\n"
        "QUERY CHEAPEST LANE FROM <id> TO <id>\n"
        "QUERY SHIPMENT PRODUCT <id> RETAILER <id>\n"
        "QUERY TOP FACTORY LAST <n> DAYS\n"
        "QUERY FRACTION <metric> >|>=|<|<= <threshold> LAST <n> DAYS\n"
        "Selectors: ALL, RETAILER <id>, PRODUCT <id>, REGION <name>, ATTR <key>=<value>, or a record id.\n"
        "If the question has several plausible meanings reply \"CLARIFY: <option> | <option>\".\n"
        "If it cannot be expressed reply \"UNSUPPORTED\".";
    return text;
}

std::string schema_summary(const SupplyNetwork& net, const DemandPlan& demand) {
    std::ostringstream out;
    out << kSchemaHeader << '\n';
    auto list = [&out](const char* key, const std::vector<std::string>& items) {
        out << key << ": " << join(items, ", ") << '\n';
    };
    std::vector<std::string> items;
    for (const auto& m : net.materials) items.push_back(m.id);
    list("materials", items);
    items.clear();
    for (const auto& p : net.products) items.push_back(p.id);
    list("products", items);
    items.clear();
    for (const auto& s : net.suppliers) items.push_back(s.id + " (" + s.material + ")");
    list("suppliers", items);
    items.clear();
    for (const auto& f : net.factories) items.push_back(f.id);
    list("factories", items);
    items.clear();
    std::set<std::string> regions;
    for (const auto& r : net.retailers) {
        items.push_back(r.id);
        if (!r.region.empty()) regions.insert(r.region);
    }
    list("retailers", items);
    list("regions", std::vector<std::string>(regions.begin(), regions.end()));
    items.clear();
    for (const auto& l : net.lanes) items.push_back(l.id + " (" + l.origin + " -> " + l.destination + ")");
    list("lanes", items);
    items.clear();
    std::set<std::string> keys;
    for (const auto& r : demand.records) {
        items.push_back(r.id);
        for (const auto& [k, v] : r.attributes) keys.insert(k);
    }
    list("demand records", items);
    list("attribute keys", std::vector<std::string>(keys.begin(), keys.end()));
    list("metrics", dsl::metrics());
    return out.str();
}

Prompt build_prompt(std::string_view question, const std::vector<ScoredExample>& examples, std::string_view schema,
                    const PipelineConfig& config) {
    Prompt p;
    p.messages.push_back({"system", config.preamble.empty() ? default_preamble() : config.preamble});
    p.messages.push_back({"system", std::string(schema)});
    for (const auto& e : examples) {
        p.messages.push_back({"user", kQuestionPrefix + e.entry->question});
        p.messages.push_back({"assistant", e.entry->dsl});
    }
    p.messages.push_back({"user", kQuestionPrefix + std::string(question)});
    return p;
}

ClarificationNeeded::ClarificationNeeded(std::vector<std::string> options)
    : Error(ErrorCode::ambiguous_question, "ambiguous question; options: " + join(options, " | ")),
      options_(std::move(options)) {}

TranslationFailed::TranslationFailed(std::size_t retries, std::string last_output, const std::string& reason)
    : Error(ErrorCode::translation_failed, reason), retries_(retries), last_output_(std::move(last_output)) {}

namespace {

std::string strip_fences(std::string text) {
    text = trim(text);
    if (starts_with(text, "```")) {
        const auto nl = text.find('\n');
        text = nl == std::string::npos ? "" : text.substr(nl + 1);
        const auto end = text.rfind("```");
        if (end != std::string::npos) text = text.substr(0, end);
    }
    return trim(text);
}

// Feedback for the retry; value errors are reported without numbers because
// the message may quote values computed from the dataset.
std::string feedback(const Error& e) {
    if (e.code() == ErrorCode::invalid_value) return "invalid_value: a value in the script is out of range";
    return std::string(to_string(e.code())) + ": " + e.what();
}

}  // namespace

Translation translate(std::string_view question, TranslatorBackend& backend, const std::vector<ExampleEntry>& bank,
                      const Dataset& dataset, const PipelineConfig& config) {
    const std::string schema = schema_summary(dataset.network, dataset.demand);
    const auto examples = select_examples(question, bank, std::max<std::size_t>(config.example_count, 1));
    Prompt prompt = build_prompt(question, examples, schema, config);
    std::string last;
    std::string reason;
    for (std::size_t attempt = 0; attempt <= config.max_retries; ++attempt) {
        last = strip_fences(backend.complete(prompt));
        if (starts_with(last, "CLARIFY:")) {
            std::vector<std::string> options;
            for (auto& o : split(std::string_view(last).substr(8), '|')) {
                if (!o.empty()) options.push_back(o);
            }
            throw ClarificationNeeded(std::move(options));
        }
        if (last == "UNSUPPORTED" || last.empty()) {
            throw TranslationFailed(attempt, last, "the question is not supported");
        }
        std::string rejection;
        try {
            auto script = dsl::parse(last);
            apply(script, dataset.network, dataset.demand);
            return {std::move(script), attempt};
        } catch (const Error& e) {
            reason = e.what();
            rejection = feedback(e);
        }
        prompt.messages.push_back({"assistant", last});
        prompt.messages.push_back({"user", "The previous reply was rejected (" + rejection +
                                               "). Reply with corrected DSL only.\n" + kQuestionPrefix +
                                               std::string(question)});
    }
    throw TranslationFailed(config.max_retries, last, reason);
}

const char* to_string(AnswerKind kind) noexcept {
    switch (kind) {
        case AnswerKind::insight: return "insight";
        case AnswerKind::what_if: return "what-if";
        case AnswerKind::clarification: return "clarification";
        case AnswerKind::fallback: return "fallback";
    }
    return "fallback";
}

SessionState make_session(std::shared_ptr<const Dataset> dataset, TranslatorBackend& backend,
                          std::shared_ptr<const std::vector<ExampleEntry>> bank,
                          std::shared_ptr<const PlanHistory> history, PipelineConfig config) {
    SessionState s;
    s.baseline = std::make_shared<const FulfillmentPlan>(solve(dataset->network, dataset->demand));
    s.dataset = std::move(dataset);
    s.bank = bank ? std::move(bank) : std::make_shared<const std::vector<ExampleEntry>>();
    s.history = history ? std::move(history) : std::make_shared<const PlanHistory>();
    s.backend = &backend;
    s.config = std::move(config);
    return s;
}

Answer execute(const dsl::ScenarioScript& script, const SessionState& session) {
    Answer a;
    a.dsl = dsl::render(script);
    a.backend = session.backend ? session.backend->id() : "";
    const Dataset& ds = *session.dataset;
    if (script.query_only()) {
        InsightState state{&ds.network, &ds.demand, session.baseline.get(), session.history.get()};
        std::vector<std::string> texts;
        for (const auto& s : script.statements) {
            const auto& q = std::get<dsl::Query>(s);
            auto result = run_query(q.form, state);
            texts.push_back(interpret(result));
            a.structured = std::move(result);
        }
        a.kind = AnswerKind::insight;
        a.text = join(texts, " ");
        return a;
    }
    dsl::ScenarioScript edits;
    std::vector<dsl::QueryForm> queries;
    for (const auto& s : script.statements) {
        if (const auto* q = std::get_if<dsl::Query>(&s)) queries.push_back(q->form);
        else edits.statements.push_back(s);
    }
    auto applied = apply(edits, ds.network, ds.demand);
    const auto alt = solve(applied.network, applied.demand);
    auto diff = diff_plans(*session.baseline, alt);
    a.kind = AnswerKind::what_if;
    a.text = interpret(diff, &applied.log);
    InsightState state{&applied.network, &applied.demand, &alt, session.history.get()};
    for (const auto& q : queries) a.text += " In the modified plan: " + interpret(run_query(q, state));
    if (session.config.paraphrase && session.backend) a.text = paraphrase(a.text, *session.backend);
    a.structured = std::move(diff);
    return a;
}

Answer answer(std::string_view question, const SessionState& session) {
    Answer a;
    a.backend = session.backend ? session.backend->id() : "";
    if (trim(question).empty()) {
        a.kind = AnswerKind::fallback;
        a.text = "Please ask a question. " + fallback_text();
        return a;
    }
    Translation t;
    try {
        t = translate(question, *session.backend, *session.bank, *session.dataset, session.config);
    } catch (const ClarificationNeeded& c) {
        a.kind = AnswerKind::clarification;
        a.options = c.options();
        a.text = "The question can be read in more than one way. Did you mean: " + join(c.options(), " or ");
        return a;
    } catch (const TranslationFailed& f) {
        a.kind = AnswerKind::fallback;
        a.retries = f.retries();
        a.text = fallback_text();
        return a;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::backend_unavailable) throw;
        a.kind = AnswerKind::fallback;
        a.text = fallback_text();
        return a;
    }
    try {
        Answer out = execute(t.script, session);
        out.retries = t.retries;
        return out;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::backend_unavailable) throw;
        a.kind = AnswerKind::fallback;
        a.dsl = dsl::render(t.script);
        a.retries = t.retries;
        a.text = std::string("The question could not be answered: ") + e.what() + ". " + fallback_text();
        return a;
    }
}

// ---------------------------------------------------------------------------

std::string format_money(double value, int decimals) {
    decimals = std::clamp(decimals, 0, 6);
    if (!std::isfinite(value)) return value > 0 ? "inf" : (value < 0 ? "-inf" : "nan");
    const bool negative = value < 0;
    const long double micro_ld = std::fabs(static_cast<long double>(value)) * 1000000.0L;
    const auto micro = static_cast<unsigned long long>(std::llroundl(micro_ld));
    unsigned long long step = 1;
    for (int i = decimals; i < 6; ++i) step *= 10;
    unsigned long long q = micro / step;
    const unsigned long long r = micro % step;
    if (r * 2 > step || (r * 2 == step && (q % 2) == 1)) ++q;
    unsigned long long scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    std::string out = std::to_string(q / scale);
    if (decimals > 0) {
        std::string frac = std::to_string(q % scale);
        out += '.' + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
    }
    if (negative && q != 0) out = "-" + out;
    return out;
}

std::string format_quantity(double value) {
    std::string s = format_money(value, 6);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

namespace {

const char* component_label(std::size_t i) {
    static const char* labels[] = {"material", "inbound shipping", "production", "outbound shipping", "delay",
                                   "lost-demand penalty"};
    return labels[i];
}

std::string signed_money(double v) { return (v > 0 ? "+" : "") + format_money(v); }

}  // namespace

std::string interpret(const PlanDiff& diff, const ApplyLog* log) {
    std::vector<std::string> s;
    if (log != nullptr && !log->entries.empty()) {
        std::vector<std::string> statements;
        for (const auto& e : log->entries) statements.push_back(e.statement);
        s.push_back("Scenario: " + join(statements, "; ") + ".");
    }
    if (diff.unchanged()) {
        s.push_back("With this change the plan is unchanged; total cost stays at " + format_money(diff.base_total) +
                    ".");
        return join(s, " ");
    }
    const double d = diff.delta_total;
    if (std::fabs(d) <= kOptimalityTol) {
        s.push_back("Total cost is unchanged at " + format_money(diff.base_total) + ", but " +
                    std::to_string(diff.changed_flows.size()) + " flows are rerouted.");
    } else {
        s.push_back(std::string("Total cost ") + (d > 0 ? "increases" : "decreases") + " by " +
                    format_money(std::fabs(d)) + " (from " + format_money(diff.base_total) + " to " +
                    format_money(diff.alt_total) + ").");
        std::size_t best = 0;
        for (std::size_t i = 1; i < std::size(kCostComponents); ++i) {
            if (std::fabs(component(diff.delta_by_component, i)) > std::fabs(component(diff.delta_by_component, best))) {
                best = i;
            }
        }
        s.push_back(std::string("The largest change is in ") + component_label(best) + " cost (" +
                    signed_money(component(diff.delta_by_component, best)) + ").");
    }
    for (const auto& [record, units] : diff.delta_lost) {
        if (units > 0) {
            s.push_back(format_quantity(units) + " units of demand " + record + " are lost.");
        } else {
            s.push_back(format_quantity(-units) + " previously lost units of demand " + record + " are now fulfilled.");
        }
    }
    if (!diff.feasibility_note.empty()) {
        std::string note = diff.feasibility_note;
        note[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(note[0])));
        s.push_back(note + ".");
    }
    return join(s, " ");
}

std::string interpret(const QueryResult& r) {
    if (r.kind == "supplier-inventory") {
        return "Supplier " + r.entity + " has " + format_quantity(r.value) + " units of " +
               r.subject.substr(0, r.subject.find(" at supplier")) + " on hand.";
    }
    if (r.kind == "cheapest-lane") {
        return "The cheapest active lane for " + r.subject + " is " + r.entity + " at " + format_money(r.value) +
               " per unit.";
    }
    if (r.kind == "shipment-quantity") {
        return "The current plan ships " + format_quantity(r.value) + " units of " + r.subject + ".";
    }
    if (r.kind == "top-factory") {
        return "Factory " + r.entity + " produced the most in days " + std::to_string(r.period_first) + " to " +
               std::to_string(r.period_last) + ": " + format_quantity(r.value) + " units.";
    }
    if (r.kind == "fraction-plans") {
        return format_quantity(std::round(r.value * 100 * 1e6) / 1e6) + "% of plans in the period (" +
               std::to_string(r.matched) + " of " + std::to_string(r.total) + ", days " +
               std::to_string(r.period_first) + " to " + std::to_string(r.period_last) + ") match " + r.subject +
               ".";
    }
    return r.subject + ": " + format_quantity(r.value) + " " + r.unit;
}

std::string paraphrase(const std::string& text, TranslatorBackend& backend) {
    // Mask every number; the backend only ever sees placeholders.
    std::vector<std::string> numbers;
    std::string masked;
    for (std::size_t i = 0; i < text.size();) {
        const bool starts_number = std::isdigit(static_cast<unsigned char>(text[i])) ||
                                   ((text[i] == '-' || text[i] == '+') && i + 1 < text.size() &&
                                    std::isdigit(static_cast<unsigned char>(text[i + 1])));
        const bool in_word = i > 0 && (std::isalpha(static_cast<unsigned char>(text[i - 1])) || text[i - 1] == '_');
        if (starts_number && !in_word) {
            std::size_t j = i + 1;
            while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) ||
                                       (text[j] == '.' && j + 1 < text.size() &&
                                        std::isdigit(static_cast<unsigned char>(text[j + 1]))))) {
                ++j;
            }
            numbers.push_back(text.substr(i, j - i));
            masked += "{{" + std::to_string(numbers.size()) + "}}";
            i = j;
        } else if (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_') {
            // Copy identifiers (F2, D2, S1_F1) whole so their digits stay put.
            std::size_t j = i;
            while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
                                       text[j] == '.')) {
                if (text[j] == '.' && (j + 1 >= text.size() || !std::isalnum(static_cast<unsigned char>(text[j + 1])))) {
                    break;
                }
                ++j;
            }
            const std::string word = text.substr(i, j - i);
            if (std::any_of(word.begin(), word.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
                masked += word;
            } else {
                numbers.push_back(word);
                masked += "{{" + std::to_string(numbers.size()) + "}}";
            }
            i = j;
        } else {
            masked += text[i++];
        }
    }
    Prompt p;
    p.messages.push_back({"system", std::string(kParaphraseMarker) +
                                        " in clear, friendly business English. Keep every placeholder such as "
                                        "{{1}} exactly once and do not add numbers."});
    p.messages.push_back({"user", masked});
    std::string reply;
    try {
        reply = backend.complete(p);
    } catch (const Error&) {
        return text;
    }
    for (std::size_t i = numbers.size(); i >= 1; --i) {
        const std::string token = "{{" + std::to_string(i) + "}}";
        const auto pos = reply.find(token);
        if (pos == std::string::npos || reply.find(token, pos + 1) != std::string::npos) return text;
        reply.replace(pos, token.size(), numbers[i - 1]);
    }
    if (reply.find("{{") != std::string::npos) return text;
    return trim(reply);
}

std::string fallback_text() {
    std::string out = "I cannot answer that question yet. Supported question types:";
    for (const auto& item : OfflineTranslator::catalog()) out += "\n- " + item;
    return out;
}

}  // namespace whatif
