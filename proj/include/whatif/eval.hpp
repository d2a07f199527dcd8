#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "whatif/pipeline.hpp"

namespace whatif {

using FactValue = std::variant<double, std::string>;

struct ExpectedFact {
    FactValue value;
    double tolerance = 1e-6;  // numeric facts only
};

enum class Difficulty { standard, grammar_noise, atypical };
const char* to_string(Difficulty difficulty) noexcept;

/// What the item is supposed to produce. Items expecting a fallback are the
/// deliberately unsupported part of the bank.
enum class Expectation { answer, fallback, clarification };
const char* to_string(Expectation expectation) noexcept;

struct BankItem {
    std::string id;
    std::string question;
    std::optional<std::string> expected_dsl;
    std::map<std::string, ExpectedFact> expected_facts;
    Difficulty difficulty = Difficulty::standard;
    Expectation expect = Expectation::answer;
};

/// One JSON object per line:
/// {"id","question","expected_dsl","expected_facts":{name: number | string |
///  {"value": x, "tol": t}},"difficulty","expect"}
/// Throws Error(bank_format) with the line number; an empty bank is an error.
std::vector<BankItem> parse_bank(std::string_view text);
std::vector<BankItem> load_bank(const std::filesystem::path& path);

enum class Outcome { correct, incorrect, fallback, clarification };
const char* to_string(Outcome outcome) noexcept;

/// Named facts an answer exposes: kind, dsl, delta_total, base_total,
/// alt_total, lost_total, delta_lost.<record>, delta.<component>, value,
/// entity, matched, total.
std::map<std::string, FactValue> extract_facts(const Answer& answer);

struct FactMismatch {
    std::string name;
    std::string expected;
    std::string actual;
};

struct MatchResult {
    Outcome outcome = Outcome::incorrect;
    std::vector<FactMismatch> mismatches;
};

MatchResult match_result(const Answer& actual, const BankItem& expected);

struct ItemOutcome {
    std::string id;
    Difficulty difficulty = Difficulty::standard;
    Expectation expect = Expectation::answer;
    Outcome outcome = Outcome::incorrect;
    std::string answer_kind;
    std::string dsl;
    std::vector<FactMismatch> mismatches;
    double latency_ms = 0.0;
};

struct OutcomeCounts {
    std::size_t correct = 0;
    std::size_t incorrect = 0;
    std::size_t fallback = 0;
    std::size_t clarification = 0;
    std::size_t total() const { return correct + incorrect + fallback + clarification; }
    /// correct / (total - clarification); 0 when the denominator is empty.
    double accuracy() const;
    double fallback_rate() const;
    void add(Outcome outcome);
};

struct EvalReport {
    std::string backend;
    std::vector<ItemOutcome> items;
    OutcomeCounts counts;
    OutcomeCounts supported;  // items with expect == answer
    std::map<std::string, OutcomeCounts> by_difficulty;
    std::vector<std::string> coverage_gaps;  // supported items that fell back
    double latency_mean_ms = 0.0;
    double latency_max_ms = 0.0;

    double accuracy() const { return counts.accuracy(); }
    double fallback_rate() const { return counts.fallback_rate(); }
};

struct EvalOptions {
    /// Evaluate this many items by cycling the (filtered) bank; 0 = bank size.
    std::size_t evaluations = 0;
    bool supported_only = false;
};

/// Fresh session per item built from `session_template` with `backend`.
EvalReport run_eval(const std::vector<BankItem>& bank, TranslatorBackend& backend,
                    const SessionState& session_template, const EvalOptions& options = {});

std::string summary_table(const EvalReport& report);

}  // namespace whatif
