#include "whatif/eval.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "whatif/dataset_io.hpp"
#include "whatif/error.hpp"

namespace whatif {

using nlohmann::json;

namespace {

[[noreturn]] void bank_error(std::size_t line, const std::string& message) {
    throw Error(ErrorCode::bank_format, "bank line " + std::to_string(line) + ": " + message);
}

Difficulty parse_difficulty(const std::string& s, std::size_t line) {
    if (s == "standard") return Difficulty::standard;
    if (s == "grammar-noise") return Difficulty::grammar_noise;
    if (s == "atypical") return Difficulty::atypical;
    bank_error(line, "unknown difficulty '" + s + "'");
}

Expectation parse_expectation(const std::string& s, std::size_t line) {
    if (s == "answer") return Expectation::answer;
    if (s == "fallback") return Expectation::fallback;
    if (s == "clarification") return Expectation::clarification;
    bank_error(line, "unknown expect '" + s + "'");
}

ExpectedFact parse_fact(const json& j, std::size_t line) {
    ExpectedFact f;
    if (j.is_number()) {
        f.value = j.get<double>();
    } else if (j.is_string()) {
        f.value = j.get<std::string>();
    } else if (j.is_object() && j.contains("value")) {
        f = parse_fact(j.at("value"), line);
        if (j.contains("tol")) f.tolerance = j.at("tol").get<double>();
    } else {
        bank_error(line, "fact must be a number, a string or {\"value\", \"tol\"}");
    }
    return f;
}

std::string fact_text(const FactValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return dsl::format_number(*d);
    return std::get<std::string>(v);
}

std::string canonical(const std::string& text) {
    try {
        return dsl::render(dsl::parse(text));
    } catch (const Error&) {
        return text;
    }
}

}  // namespace

const char* to_string(Difficulty d) noexcept {
    switch (d) {
        case Difficulty::standard: return "standard";
        case Difficulty::grammar_noise: return "grammar-noise";
        case Difficulty::atypical: return "atypical";
    }
    return "standard";
}

const char* to_string(Expectation e) noexcept {
    switch (e) {
        case Expectation::answer: return "answer";
        case Expectation::fallback: return "fallback";
        case Expectation::clarification: return "clarification";
    }
    return "answer";
}

const char* to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::correct: return "correct";
        case Outcome::incorrect: return "incorrect";
        case Outcome::fallback: return "fallback";
        case Outcome::clarification: return "clarification";
    }
    return "incorrect";
}

std::vector<BankItem> parse_bank(std::string_view text) {
    std::vector<BankItem> out;
    std::set<std::string> ids;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            bank_error(number, e.what());
        }
        if (!j.is_object()) bank_error(number, "expected an object");
        try {
            BankItem item;
            item.id = j.at("id").get<std::string>();
            item.question = j.at("question").get<std::string>();
            if (j.contains("expected_dsl") && !j.at("expected_dsl").is_null()) {
                item.expected_dsl = j.at("expected_dsl").get<std::string>();
            }
            if (j.contains("expected_facts")) {
                for (const auto& [name, value] : j.at("expected_facts").items()) {
                    item.expected_facts[name] = parse_fact(value, number);
                }
            }
            if (j.contains("difficulty")) item.difficulty = parse_difficulty(j.at("difficulty").get<std::string>(), number);
            if (j.contains("expect")) item.expect = parse_expectation(j.at("expect").get<std::string>(), number);
            if (!item.expected_dsl && item.expected_facts.empty()) {
                bank_error(number, "item needs expected_dsl or expected_facts");
            }
            if (!ids.insert(item.id).second) bank_error(number, "duplicate id '" + item.id + "'");
            out.push_back(std::move(item));
        } catch (const json::exception& e) {
            bank_error(number, e.what());
        }
    }
    if (out.empty()) throw Error(ErrorCode::bank_format, "the question bank is empty");
    return out;
}

std::vector<BankItem> load_bank(const std::filesystem::path& path) { return parse_bank(read_text_file(path)); }

std::map<std::string, FactValue> extract_facts(const Answer& a) {
    std::map<std::string, FactValue> f;
    f["kind"] = std::string(to_string(a.kind));
    if (a.dsl) f["dsl"] = *a.dsl;
    if (const auto* d = std::get_if<PlanDiff>(&a.structured)) {
        f["delta_total"] = d->delta_total;
        f["base_total"] = d->base_total;
        f["alt_total"] = d->alt_total;
        f["lost_total"] = d->alt_lost_total;
        for (std::size_t i = 0; i < std::size(kCostComponents); ++i) {
            f[std::string("delta.") + kCostComponents[i]] = component(d->delta_by_component, i);
        }
        for (const auto& [record, units] : d->delta_lost) f["delta_lost." + record] = units;
    }
    if (const auto* q = std::get_if<QueryResult>(&a.structured)) {
        f["query"] = q->kind;
        f["value"] = q->value;
        f["entity"] = q->entity;
        f["matched"] = static_cast<double>(q->matched);
        f["total"] = static_cast<double>(q->total);
    }
    return f;
}

MatchResult match_result(const Answer& actual, const BankItem& expected) {
    MatchResult m;
    if (actual.kind == AnswerKind::fallback) {
        m.outcome = Outcome::fallback;
        return m;
    }
    if (actual.kind == AnswerKind::clarification) {
        m.outcome = Outcome::clarification;
        return m;
    }
    if (!expected.expected_facts.empty()) {
        const auto facts = extract_facts(actual);
        for (const auto& [name, fact] : expected.expected_facts) {
            auto it = facts.find(name);
            // delta_lost.<record> entries are omitted when zero.
            FactValue got = it != facts.end() ? it->second
                            : name.rfind("delta_lost.", 0) == 0 ? FactValue(0.0)
                                                                : FactValue(std::string("(missing)"));
            bool ok = false;
            if (const auto* want = std::get_if<double>(&fact.value)) {
                const auto* have = std::get_if<double>(&got);
                ok = have != nullptr && std::fabs(*have - *want) <= fact.tolerance;
            } else if (name == "dsl") {
                const auto* have = std::get_if<std::string>(&got);
                ok = have != nullptr && canonical(*have) == canonical(std::get<std::string>(fact.value));
            } else {
                ok = got == fact.value;
            }
            if (!ok) m.mismatches.push_back({name, fact_text(fact.value), fact_text(got)});
        }
    } else if (expected.expected_dsl) {
        const std::string want = canonical(*expected.expected_dsl);
        const std::string have = actual.dsl ? canonical(*actual.dsl) : "(none)";
        if (want != have) m.mismatches.push_back({"dsl", want, have});
    }
    m.outcome = m.mismatches.empty() ? Outcome::correct : Outcome::incorrect;
    return m;
}

double OutcomeCounts::accuracy() const {
    const std::size_t denominator = total() - clarification;
    return denominator == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(denominator);
}

double OutcomeCounts::fallback_rate() const {
    return total() == 0 ? 0.0 : static_cast<double>(fallback) / static_cast<double>(total());
}

void OutcomeCounts::add(Outcome o) {
    switch (o) {
        case Outcome::correct: ++correct; break;
        case Outcome::incorrect: ++incorrect; break;
        case Outcome::fallback: ++fallback; break;
        case Outcome::clarification: ++clarification; break;
    }
}

EvalReport run_eval(const std::vector<BankItem>& bank, TranslatorBackend& backend, const SessionState& session_template,
                    const EvalOptions& options) {
    if (bank.empty()) throw Error(ErrorCode::bank_format, "the question bank is empty");
    std::vector<const BankItem*> items;
    for (const auto& item : bank) {
        if (!options.supported_only || item.expect == Expectation::answer) items.push_back(&item);
    }
    if (items.empty()) throw Error(ErrorCode::bank_format, "no items left after filtering");
    const std::size_t evaluations = options.evaluations == 0 ? items.size() : options.evaluations;

    EvalReport report;
    report.backend = backend.id();
    double latency_sum = 0.0;
    for (std::size_t n = 0; n < evaluations; ++n) {
        const BankItem& item = *items[n % items.size()];
        SessionState session = session_template;
        session.backend = &backend;
        ItemOutcome out;
        out.id = n < items.size() ? item.id : item.id + "#" + std::to_string(n / items.size());
        out.difficulty = item.difficulty;
        out.expect = item.expect;
        const auto start = std::chrono::steady_clock::now();
        try {
            const Answer a = answer(item.question, session);
            auto m = match_result(a, item);
            out.outcome = m.outcome;
            out.mismatches = std::move(m.mismatches);
            out.answer_kind = to_string(a.kind);
            out.dsl = a.dsl.value_or("");
        } catch (const Error& e) {
            out.outcome = Outcome::fallback;
            out.answer_kind = "error";
            out.mismatches.push_back({"error", "", e.what()});
        }
        out.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        latency_sum += out.latency_ms;
        report.latency_max_ms = std::max(report.latency_max_ms, out.latency_ms);
        report.counts.add(out.outcome);
        if (item.expect == Expectation::answer) {
            report.supported.add(out.outcome);
            if (out.outcome == Outcome::fallback) report.coverage_gaps.push_back(out.id);
        }
        report.by_difficulty[to_string(item.difficulty)].add(out.outcome);
        report.items.push_back(std::move(out));
    }
    report.latency_mean_ms = latency_sum / static_cast<double>(evaluations);
    return report;
}

std::string summary_table(const EvalReport& report) {
    std::ostringstream out;
    out << "backend: " << report.backend << "\n";
    out << std::left << std::setw(16) << "group" << std::right << std::setw(7) << "total" << std::setw(9) << "correct"
        << std::setw(11) << "incorrect" << std::setw(10) << "fallback" << std::setw(9) << "clarify" << std::setw(10)
        << "accuracy" << "\n";
    auto row = [&out](const std::string& name, const OutcomeCounts& c) {
        out << std::left << std::setw(16) << name << std::right << std::setw(7) << c.total() << std::setw(9)
            << c.correct << std::setw(11) << c.incorrect << std::setw(10) << c.fallback << std::setw(9)
            << c.clarification << std::setw(10) << std::fixed << std::setprecision(3) << c.accuracy() << "\n";
    };
    row("all", report.counts);
    row("supported", report.supported);
    for (const auto& [name, c] : report.by_difficulty) row(name, c);
    out << "fallback rate: " << std::fixed << std::setprecision(3) << report.fallback_rate() << "\n";
    out << "latency ms: mean " << std::setprecision(2) << report.latency_mean_ms << ", max " << report.latency_max_ms
        << "\n";
    if (!report.coverage_gaps.empty()) {
        out << "coverage gaps:";
        for (const auto& id : report.coverage_gaps) out << " " << id;
        out << "\n";
    }
    for (const auto& item : report.items) {
        if (item.outcome != Outcome::incorrect) continue;
        out << "incorrect " << item.id << ":";
        for (const auto& m : item.mismatches) out << " " << m.name << " expected " << m.expected << " got " << m.actual << ";";
        out << "\n";
    }
    return out.str();
}

}  // namespace whatif
