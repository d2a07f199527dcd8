#include "whatif/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace whatif::dsl {

namespace {

const std::vector<std::string> kKeywords = {
    "ADD",       "ADJUST",   "ALL",      "AT",       "ATTR",      "BY",       "CAPACITY", "CHEAPEST",
    "COST",      "DATE",     "DAYS",     "DEMAND",   "DISABLE",   "DUE",      "ENABLE",   "FACTORY",
    "FRACTION",  "FROM",     "INVENTORY", "LANE",    "LAST",      "LEADTIME", "MATERIAL", "PRICE",
    "PRODUCT",   "QUERY",    "RECORD",   "REGION",   "RESTRICT",  "RETAILER", "SCALE",    "SET",
    "SHIFT",     "SHIP",     "SHIPMENT", "SUPPLIER", "TIMES",     "TO",       "TOP",
};

const std::vector<std::string> kStatementStarts = {"SCALE",  "SET",      "DISABLE", "ENABLE", "RESTRICT",
                                                   "ADJUST", "SHIFT",    "ADD",     "QUERY"};

const std::vector<std::string> kMetrics = {"total_cost", "material",   "inbound_shipping",
                                           "production", "outbound_shipping", "delay",
                                           "lost_penalty", "shipping", "lost_units"};

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

bool is_keyword(std::string_view word) {
    const std::string u = upper(word);
    return std::binary_search(kKeywords.begin(), kKeywords.end(), u);
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

enum class Tok { word, quoted, number, symbol, newline, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;  // word / quoted contents / symbol / number source
    double number = 0.0;
    std::size_t line = 1;
    std::size_t column = 1;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::word: return "'" + t.text + "'";
        case Tok::quoted: return "\"" + t.text + "\"";
        case Tok::number: return "number " + t.text;
        case Tok::symbol: return "'" + t.text + "'";
        case Tok::newline: return "newline";
        case Tok::end: return "end of input";
    }
    return "?";
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_blanks();
            Token t;
            t.line = line_;
            t.column = column_;
            if (pos_ >= text_.size()) {
                t.kind = Tok::end;
                out.push_back(t);
                return out;
            }
            const char c = text_[pos_];
            if (c == '\n') {
                advance();
                t.kind = Tok::newline;
                t.text = "\n";
            } else if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
                continue;
            } else if (is_ident_start(c)) {
                t.kind = Tok::word;
                while (pos_ < text_.size() && is_ident_char(text_[pos_])) t.text += advance();
            } else if (c == '"') {
                t.kind = Tok::quoted;
                advance();
                while (true) {
                    if (pos_ >= text_.size() || text_[pos_] == '\n') {
                        throw SyntaxError(t.line, t.column, {"closing '\"'"}, "unterminated string");
                    }
                    char d = advance();
                    if (d == '"') break;
                    if (d == '\\') {
                        if (pos_ >= text_.size()) {
                            throw SyntaxError(t.line, t.column, {"closing '\"'"}, "unterminated string");
                        }
                        d = advance();
                    }
                    t.text += d;
                }
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
                       ((c == '-' || c == '+') && pos_ + 1 < text_.size() &&
                        (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '.'))) {
                lex_number(t);
            } else if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
                advance();
                advance();
                t.kind = Tok::symbol;
                t.text = "->";
            } else if ((c == '>' || c == '<') && pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
                t.kind = Tok::symbol;
                t.text += advance();
                t.text += advance();
            } else if (c == ';' || c == '[' || c == ']' || c == ',' || c == '=' || c == '>' || c == '<') {
                t.kind = Tok::symbol;
                t.text = std::string(1, advance());
            } else {
                std::string found(1, c);
                if (!std::isprint(static_cast<unsigned char>(c))) {
                    char hex[8];
                    std::snprintf(hex, sizeof hex, "\\x%02x", static_cast<unsigned char>(c));
                    found = hex;
                }
                throw SyntaxError(t.line, t.column, {"statement text"}, "unexpected character '" + found + "'");
            }
            out.push_back(std::move(t));
        }
    }

private:
    void skip_blanks() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) advance();
    }

    char advance() {
        const char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    void lex_number(Token& t) {
        t.kind = Tok::number;
        const std::size_t start = pos_;
        if (text_[pos_] == '+' || text_[pos_] == '-') advance();
        auto digits = [this] {
            std::size_t n = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                advance();
                ++n;
            }
            return n;
        };
        std::size_t count = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            advance();
            count += digits();
        }
        if (count == 0) throw SyntaxError(t.line, t.column, {"number"}, "malformed number");
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            const std::size_t save_pos = pos_;
            const std::size_t save_col = column_;
            advance();
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) advance();
            if (digits() == 0) {
                pos_ = save_pos;
                column_ = save_col;
            }
        }
        if (pos_ < text_.size() && is_ident_start(text_[pos_])) {
            throw SyntaxError(t.line, t.column, {"number"}, "malformed number");
        }
        t.text = std::string(text_.substr(start, pos_ - start));
        std::string_view digits_view = t.text;
        if (!digits_view.empty() && digits_view.front() == '+') digits_view.remove_prefix(1);
        auto [ptr, ec] = std::from_chars(digits_view.data(), digits_view.data() + digits_view.size(), t.number);
        if (ec != std::errc{} || ptr != digits_view.data() + digits_view.size() || !std::isfinite(t.number)) {
            throw SyntaxError(t.line, t.column, {"number"}, "number out of range '" + t.text + "'");
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    ScenarioScript script() {
        ScenarioScript out;
        skip_separators();
        if (peek().kind == Tok::end) fail(kStatementStarts);
        while (true) {
            out.statements.push_back(statement());
            if (peek().kind == Tok::end) break;
            if (!is_separator(peek())) fail({"';'", "newline", "end of input"});
            skip_separators();
            if (peek().kind == Tok::end) break;
        }
        return out;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    Token next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

    static bool is_separator(const Token& t) {
        return t.kind == Tok::newline || (t.kind == Tok::symbol && t.text == ";");
    }
    void skip_separators() {
        while (is_separator(peek())) ++pos_;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const Token& t = peek();
        throw SyntaxError(t.line, t.column, std::move(expected), describe(t));
    }

    bool at_keyword(const char* kw) const {
        return peek().kind == Tok::word && upper(peek().text) == kw;
    }
    bool accept(const char* kw) {
        if (!at_keyword(kw)) return false;
        ++pos_;
        return true;
    }
    void expect(const char* kw) {
        if (!accept(kw)) fail({kw});
    }
    void expect_symbol(const char* sym) {
        if (peek().kind == Tok::symbol && peek().text == sym) {
            ++pos_;
            return;
        }
        fail({std::string("'") + sym + "'"});
    }

    std::string identifier() {
        const Token& t = peek();
        if (t.kind == Tok::quoted || (t.kind == Tok::word && !is_keyword(t.text))) return next().text;
        fail({"identifier"});
    }

    double number() {
        const Token& t = peek();
        if (t.kind != Tok::number || t.text.front() == '-' || t.text.front() == '+') fail({"unsigned number"});
        return next().number;
    }
    double signed_number() {
        if (peek().kind != Tok::number) fail({"signed number"});
        return next().number;
    }
    std::int64_t integer(bool allow_sign) {
        const Token& t = peek();
        if (t.kind != Tok::number || (!allow_sign && (t.text.front() == '-' || t.text.front() == '+'))) {
            fail({allow_sign ? "signed integer" : "integer"});
        }
        const double v = t.number;
        if (v != std::floor(v) || std::abs(v) > 1e12) fail({"integer"});
        ++pos_;
        return static_cast<std::int64_t>(v);
    }

    EntityRef entity() {
        if (accept("FACTORY")) return {EntityKind::factory, identifier()};
        if (accept("SUPPLIER")) return {EntityKind::supplier, identifier()};
        if (accept("LANE")) return {EntityKind::lane, identifier()};
        fail({"FACTORY", "SUPPLIER", "LANE"});
    }

    Selector selector() {
        if (accept("ALL")) return {SelectorKind::all, "", ""};
        if (accept("RETAILER")) return {SelectorKind::retailer, identifier(), ""};
        if (accept("PRODUCT")) return {SelectorKind::product, identifier(), ""};
        if (accept("RECORD")) return {SelectorKind::record, identifier(), ""};
        if (accept("REGION")) return {SelectorKind::region, identifier(), ""};
        if (accept("ATTR")) {
            std::string key = identifier();
            expect_symbol("=");
            return {SelectorKind::attribute, identifier(), key};
        }
        const Token& t = peek();
        if (t.kind == Tok::quoted || (t.kind == Tok::word && !is_keyword(t.text))) {
            return {SelectorKind::record, next().text, ""};
        }
        fail({"ALL", "RETAILER", "PRODUCT", "RECORD", "ATTR", "REGION", "identifier"});
    }

    Adjustment adjustment() {
        if (accept("BY")) return {AdjustMode::by, signed_number()};
        if (accept("TO")) return {AdjustMode::to, number()};
        if (accept("TIMES")) return {AdjustMode::times, number()};
        fail({"BY", "TO", "TIMES"});
    }

    Period period() {
        if (accept("LAST")) {
            Period p;
            p.trailing = true;
            p.days = integer(false);
            expect("DAYS");
            return p;
        }
        if (accept("DAYS")) {
            Period p;
            p.trailing = false;
            p.first = integer(true);
            expect("TO");
            p.last = integer(true);
            return p;
        }
        fail({"LAST", "DAYS"});
    }

    Comparator comparator() {
        const Token& t = peek();
        if (t.kind == Tok::symbol) {
            if (t.text == ">") return ++pos_, Comparator::greater;
            if (t.text == ">=") return ++pos_, Comparator::greater_equal;
            if (t.text == "<") return ++pos_, Comparator::less;
            if (t.text == "<=") return ++pos_, Comparator::less_equal;
        }
        fail({"'>'", "'>='", "'<'", "'<='"});
    }

    QueryForm query() {
        if (accept("INVENTORY")) {
            expect("SUPPLIER");
            SupplierInventory q;
            q.supplier = identifier();
            expect("MATERIAL");
            q.material = identifier();
            return q;
        }
        if (accept("CHEAPEST")) {
            expect("LANE");
            expect("FROM");
            CheapestLane q;
            q.origin = identifier();
            expect("TO");
            q.destination = identifier();
            return q;
        }
        if (accept("SHIPMENT")) {
            expect("PRODUCT");
            ShipmentQuantity q;
            q.product = identifier();
            expect("RETAILER");
            q.retailer = identifier();
            return q;
        }
        if (accept("TOP")) {
            expect("FACTORY");
            return TopFactoryByOutput{period()};
        }
        if (accept("FRACTION")) {
            FractionPlansWhere q;
            const Token& t = peek();
            if (t.kind != Tok::word || std::find(kMetrics.begin(), kMetrics.end(), t.text) == kMetrics.end()) {
                fail(kMetrics);
            }
            q.metric = next().text;
            q.comparator = comparator();
            q.threshold = signed_number();
            q.period = period();
            return q;
        }
        fail({"INVENTORY", "CHEAPEST", "SHIPMENT", "TOP", "FRACTION"});
    }

    Statement statement() {
        const Token& t = peek();
        if (t.kind == Tok::word) {
            const std::string kw = upper(t.text);
            if (std::find(kStatementStarts.begin(), kStatementStarts.end(), kw) == kStatementStarts.end()) {
                throw UnknownKeywordError(t.line, t.column, t.text);
            }
        } else {
            fail(kStatementStarts);
        }

        if (accept("SCALE")) {
            expect("DEMAND");
            ScaleDemand s;
            s.selector = selector();
            expect("BY");
            s.factor = number();
            return s;
        }
        if (accept("SET")) {
            if (accept("DEMAND")) {
                SetDemand s;
                s.record = identifier();
                expect("TO");
                s.quantity = number();
                return s;
            }
            if (accept("CAPACITY")) {
                SetCapacity s;
                s.target = entity();
                expect("TO");
                s.value = number();
                return s;
            }
            if (accept("LEADTIME")) {
                expect("LANE");
                SetLeadTime s;
                s.lane = identifier();
                expect("TO");
                s.days = number();
                return s;
            }
            fail({"DEMAND", "CAPACITY", "LEADTIME"});
        }
        if (accept("DISABLE")) return Disable{entity()};
        if (accept("ENABLE")) return Enable{entity()};
        if (accept("RESTRICT")) {
            expect("RETAILER");
            RestrictRetailer s;
            s.retailer = identifier();
            expect("TO");
            expect_symbol("[");
            s.factories.push_back(identifier());
            while (peek().kind == Tok::symbol && peek().text == ",") {
                ++pos_;
                s.factories.push_back(identifier());
            }
            expect_symbol("]");
            return s;
        }
        if (accept("ADJUST")) {
            if (accept("PRICE")) {
                expect("MATERIAL");
                AdjustPrice s;
                s.material = identifier();
                if (accept("AT")) s.supplier = identifier();
                s.adjustment = adjustment();
                return s;
            }
            if (accept("SHIP")) {
                expect("COST");
                AdjustShipCost s;
                if (accept("LANE")) {
                    s.lanes = {LaneSelectorKind::lane, identifier()};
                } else if (accept("REGION")) {
                    s.lanes = {LaneSelectorKind::region, identifier()};
                } else if (accept("ALL")) {
                    s.lanes = {LaneSelectorKind::all, ""};
                } else {
                    fail({"LANE", "REGION", "ALL"});
                }
                s.adjustment = adjustment();
                return s;
            }
            fail({"PRICE", "SHIP"});
        }
        if (accept("SHIFT")) {
            expect("DUE");
            expect("DATE");
            ShiftDueDate s;
            s.selector = selector();
            expect("BY");
            s.days = integer(true);
            return s;
        }
        if (accept("ADD")) {
            expect("LANE");
            AddLane s;
            s.origin = identifier();
            expect_symbol("->");
            s.destination = identifier();
            expect("COST");
            s.cost = number();
            expect("CAPACITY");
            s.capacity = number();
            expect("LEADTIME");
            s.lead_time = number();
            return s;
        }
        expect("QUERY");
        return Query{query()};
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string syntax_message(std::size_t line, std::size_t column, const std::vector<std::string>& expected,
                           const std::string& found) {
    std::ostringstream out;
    out << "line " << line << ", column " << column << ": expected " << join(expected, " | ")
        << ", found " << found;
    return out.str();
}

std::string ident(const std::string& id) {
    const bool bare = !id.empty() && is_ident_start(id.front()) &&
                      std::all_of(id.begin(), id.end(), is_ident_char) && !is_keyword(id);
    if (bare) return id;
    std::string out = "\"";
    for (char c : id) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string integer_text(std::int64_t v) { return std::to_string(v); }

std::string entity_text(const EntityRef& e) {
    switch (e.kind) {
        case EntityKind::factory: return "FACTORY " + ident(e.id);
        case EntityKind::supplier: return "SUPPLIER " + ident(e.id);
        case EntityKind::lane: return "LANE " + ident(e.id);
    }
    return {};
}

std::string selector_text(const Selector& s) {
    switch (s.kind) {
        case SelectorKind::all: return "ALL";
        case SelectorKind::retailer: return "RETAILER " + ident(s.value);
        case SelectorKind::product: return "PRODUCT " + ident(s.value);
        case SelectorKind::record: return ident(s.value);
        case SelectorKind::attribute: return "ATTR " + ident(s.key) + "=" + ident(s.value);
        case SelectorKind::region: return "REGION " + ident(s.value);
    }
    return {};
}

std::string adjustment_text(const Adjustment& a) {
    switch (a.mode) {
        case AdjustMode::by: return "BY " + format_number(a.amount);
        case AdjustMode::to: return "TO " + format_number(a.amount);
        case AdjustMode::times: return "TIMES " + format_number(a.amount);
    }
    return {};
}

std::string period_text(const Period& p) {
    if (p.trailing) return "LAST " + integer_text(p.days) + " DAYS";
    return "DAYS " + integer_text(p.first) + " TO " + integer_text(p.last);
}

const char* comparator_text(Comparator c) {
    switch (c) {
        case Comparator::greater: return ">";
        case Comparator::greater_equal: return ">=";
        case Comparator::less: return "<";
        case Comparator::less_equal: return "<=";
    }
    return ">";
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double Adjustment::applied_to(double current) const {
    switch (mode) {
        case AdjustMode::by: return current + amount;
        case AdjustMode::to: return amount;
        case AdjustMode::times: return current * amount;
    }
    return current;
}

bool ScenarioScript::query_only() const {
    return !statements.empty() && std::all_of(statements.begin(), statements.end(), [](const Statement& s) {
        return std::holds_alternative<Query>(s);
    });
}

bool ScenarioScript::has_query() const {
    return std::any_of(statements.begin(), statements.end(),
                       [](const Statement& s) { return std::holds_alternative<Query>(s); });
}

SyntaxError::SyntaxError(std::size_t line, std::size_t column, std::vector<std::string> expected,
                         const std::string& found)
    : SyntaxError(ErrorCode::syntax_error, line, column, expected,
                  syntax_message(line, column, expected, found)) {}

SyntaxError::SyntaxError(ErrorCode code, std::size_t line, std::size_t column,
                         std::vector<std::string> expected, const std::string& message)
    : Error(code, message), line_(line), column_(column), expected_(std::move(expected)) {}

UnknownKeywordError::UnknownKeywordError(std::size_t line, std::size_t column, const std::string& word)
    : SyntaxError(ErrorCode::unknown_keyword, line, column, kStatementStarts,
                  "line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": unknown keyword '" + word + "'; statements start with " +
                      join(kStatementStarts, " | ")),
      word_(word) {}

ScenarioScript parse(std::string_view text) {
    Lexer lexer(text);
    Parser parser(lexer.run());
    return parser.script();
}

std::string format_number(double value) {
    if (value == 0.0) return "0";
    char buffer[400];
    const double mag = std::abs(value);
    // Shortest round-trip digits; plain notation unless the value is extreme.
    const auto format = mag >= 1e-6 && mag < 1e15 ? std::chars_format::fixed : std::chars_format::general;
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value, format);
    return std::string(buffer, ptr);
}

std::string render(const QueryForm& form) {
    return std::visit(
        overloaded{
            [](const SupplierInventory& q) {
                return "QUERY INVENTORY SUPPLIER " + ident(q.supplier) + " MATERIAL " + ident(q.material);
            },
            [](const CheapestLane& q) {
                return "QUERY CHEAPEST LANE FROM " + ident(q.origin) + " TO " + ident(q.destination);
            },
            [](const ShipmentQuantity& q) {
                return "QUERY SHIPMENT PRODUCT " + ident(q.product) + " RETAILER " + ident(q.retailer);
            },
            [](const TopFactoryByOutput& q) { return "QUERY TOP FACTORY " + period_text(q.period); },
            [](const FractionPlansWhere& q) {
                return "QUERY FRACTION " + q.metric + " " + comparator_text(q.comparator) + " " +
                       format_number(q.threshold) + " " + period_text(q.period);
            },
        },
        form);
}

std::string render(const Statement& statement) {
    return std::visit(
        overloaded{
            [](const ScaleDemand& s) {
                return "SCALE DEMAND " + selector_text(s.selector) + " BY " + format_number(s.factor);
            },
            [](const SetDemand& s) { return "SET DEMAND " + ident(s.record) + " TO " + format_number(s.quantity); },
            [](const Disable& s) { return "DISABLE " + entity_text(s.target); },
            [](const Enable& s) { return "ENABLE " + entity_text(s.target); },
            [](const RestrictRetailer& s) {
                std::vector<std::string> ids;
                for (const auto& f : s.factories) ids.push_back(ident(f));
                return "RESTRICT RETAILER " + ident(s.retailer) + " TO [" + join(ids, ", ") + "]";
            },
            [](const AdjustPrice& s) {
                std::string out = "ADJUST PRICE MATERIAL " + ident(s.material);
                if (s.supplier) out += " AT " + ident(*s.supplier);
                return out + " " + adjustment_text(s.adjustment);
            },
            [](const AdjustShipCost& s) {
                std::string lanes;
                switch (s.lanes.kind) {
                    case LaneSelectorKind::lane: lanes = "LANE " + ident(s.lanes.value); break;
                    case LaneSelectorKind::region: lanes = "REGION " + ident(s.lanes.value); break;
                    case LaneSelectorKind::all: lanes = "ALL"; break;
                }
                return "ADJUST SHIP COST " + lanes + " " + adjustment_text(s.adjustment);
            },
            [](const SetCapacity& s) {
                return "SET CAPACITY " + entity_text(s.target) + " TO " + format_number(s.value);
            },
            [](const SetLeadTime& s) {
                return "SET LEADTIME LANE " + ident(s.lane) + " TO " + format_number(s.days);
            },
            [](const ShiftDueDate& s) {
                return "SHIFT DUE DATE " + selector_text(s.selector) + " BY " + integer_text(s.days);
            },
            [](const AddLane& s) {
                return "ADD LANE " + ident(s.origin) + " -> " + ident(s.destination) + " COST " +
                       format_number(s.cost) + " CAPACITY " + format_number(s.capacity) + " LEADTIME " +
                       format_number(s.lead_time);
            },
            [](const Query& s) { return render(s.form); },
        },
        statement);
}

std::string render(const ScenarioScript& script) {
    std::vector<std::string> parts;
    for (const auto& s : script.statements) parts.push_back(render(s));
    return join(parts, "; ");
}

const std::vector<std::string>& keywords() { return kKeywords; }
const std::vector<std::string>& metrics() { return kMetrics; }

}  // namespace whatif::dsl
