#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "whatif/apply.hpp"
#include "whatif/dsl.hpp"
#include "whatif/insights.hpp"
#include "whatif/model.hpp"
#include "whatif/solver.hpp"

namespace whatif {

struct ExampleEntry {
    std::string question;
    std::string dsl;
    std::vector<std::string> tags;
};

/// One JSON object per line: {"question": ..., "dsl": ..., "tags": [...]}.
std::vector<ExampleEntry> load_example_bank(const std::filesystem::path& path);
std::vector<ExampleEntry> parse_example_bank(std::string_view text);

struct ScoredExample {
    const ExampleEntry* entry = nullptr;
    double score = 0.0;
    std::size_t index = 0;
};

/// Lowercased alphanumeric tokens.
std::vector<std::string> tokenize(std::string_view text);
double jaccard(std::string_view a, std::string_view b);

/// Top-k bank entries by token-set Jaccard similarity; ties keep bank order.
std::vector<ScoredExample> select_examples(std::string_view question,
                                           const std::vector<ExampleEntry>& bank, std::size_t k);

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct Prompt {
    std::vector<ChatMessage> messages;
    /// Concatenation of every message, i.e. the exact bytes a backend sees.
    std::string text() const;
};

class TranslatorBackend {
public:
    virtual ~TranslatorBackend() = default;
    virtual std::string id() const = 0;
    /// Throws Error(backend_unavailable) when the service cannot answer.
    virtual std::string complete(const Prompt& prompt) = 0;
};

/// Deterministic pattern-rule translator. Reads the question (last line
/// starting with "Question:") and the entity-id schema from the prompt and
/// emits DSL, "CLARIFY: option | option" for ambiguous questions, or
/// "UNSUPPORTED".
class OfflineTranslator final : public TranslatorBackend {
public:
    std::string id() const override { return "offline"; }
    std::string complete(const Prompt& prompt) override;

    /// Translation of a bare question against an id schema.
    static std::string translate_question(std::string_view question, std::string_view schema);

    /// Human-readable list of question templates the rule table understands.
    static const std::vector<std::string>& catalog();
};

struct RemoteConfig {
    std::string base_url;        // e.g. https://api.example.com/v1
    std::string model;
    std::string auth_token;      // value for "Authorization: Bearer ..."; may be empty
    std::chrono::milliseconds timeout{30000};
};

/// Chat-completion HTTP backend: POST {base}/chat/completions with
/// {"model", "messages", "temperature": 0}; reads choices[0].message.content.
class RemoteBackend final : public TranslatorBackend {
public:
    explicit RemoteBackend(RemoteConfig config);
    std::string id() const override { return "remote:" + config_.model; }
    std::string complete(const Prompt& prompt) override;

    static std::string request_body(const RemoteConfig& config, const Prompt& prompt);
    static std::string parse_response(std::string_view body);

private:
    RemoteConfig config_;
};

/// Keeps a copy of every outbound prompt; forwards to an inner backend.
class RecordingBackend final : public TranslatorBackend {
public:
    explicit RecordingBackend(TranslatorBackend& inner) : inner_(inner) {}
    std::string id() const override { return inner_.id(); }
    std::string complete(const Prompt& prompt) override;
    std::vector<std::string> prompts() const;

private:
    TranslatorBackend& inner_;
    mutable std::mutex mutex_;
    std::vector<std::string> prompts_;
};

/// Replaces every `period`-th completion with a valid but wrong script.
class FaultInjectingBackend final : public TranslatorBackend {
public:
    FaultInjectingBackend(TranslatorBackend& inner, std::size_t period)
        : inner_(inner), period_(period) {}
    std::string id() const override { return "fault-injecting(" + inner_.id() + ")"; }
    std::string complete(const Prompt& prompt) override;
    std::size_t calls() const { return calls_.load(); }

private:
    TranslatorBackend& inner_;
    std::size_t period_;
    std::atomic<std::size_t> calls_{0};
};

struct PipelineConfig {
    std::size_t example_count = 5;
    std::string preamble;  // empty -> default_preamble()
    bool paraphrase = false;
    std::size_t max_retries = 1;
};

const std::string& default_preamble();

/// Entity ids only; never quantities, prices, costs, capacities or inventories.
std::string schema_summary(const SupplyNetwork& network, const DemandPlan& demand);

Prompt build_prompt(std::string_view question, const std::vector<ScoredExample>& examples,
                    std::string_view schema, const PipelineConfig& config);

class ClarificationNeeded : public Error {
public:
    explicit ClarificationNeeded(std::vector<std::string> options);
    const std::vector<std::string>& options() const noexcept { return options_; }

private:
    std::vector<std::string> options_;
};

class TranslationFailed : public Error {
public:
    TranslationFailed(std::size_t retries, std::string last_output, const std::string& reason);
    std::size_t retries() const noexcept { return retries_; }
    const std::string& last_output() const noexcept { return last_output_; }

private:
    std::size_t retries_;
    std::string last_output_;
};

struct Translation {
    dsl::ScenarioScript script;
    std::size_t retries = 0;
};

/// Prompt assembly, backend call, parse + dry-run validation, one retry with
/// the error appended. Throws ClarificationNeeded, TranslationFailed or
/// Error(backend_unavailable).
Translation translate(std::string_view question, TranslatorBackend& backend,
                      const std::vector<ExampleEntry>& bank, const Dataset& dataset,
                      const PipelineConfig& config);

enum class AnswerKind { insight, what_if, clarification, fallback };
const char* to_string(AnswerKind kind) noexcept;

struct Answer {
    AnswerKind kind = AnswerKind::fallback;
    std::string text;
    std::optional<std::string> dsl;
    std::variant<std::monostate, QueryResult, PlanDiff> structured;
    std::vector<std::string> options;  // clarification choices
    std::string backend;
    std::size_t retries = 0;
};

/// Everything one session needs; the dataset, plan and history are shared
/// read-only with other sessions.
struct SessionState {
    std::shared_ptr<const Dataset> dataset;
    std::shared_ptr<const FulfillmentPlan> baseline;
    std::shared_ptr<const PlanHistory> history;
    std::shared_ptr<const std::vector<ExampleEntry>> bank;
    TranslatorBackend* backend = nullptr;
    PipelineConfig config;
};

SessionState make_session(std::shared_ptr<const Dataset> dataset, TranslatorBackend& backend,
                          std::shared_ptr<const std::vector<ExampleEntry>> bank,
                          std::shared_ptr<const PlanHistory> history = nullptr,
                          PipelineConfig config = {});

/// Never throws for translation problems: every path ends in an Answer.
/// Error(backend_unavailable) propagates so the service can map it to 503.
Answer answer(std::string_view question, const SessionState& session);

/// Runs a validated script: queries go to insights, edits re-solve and diff.
Answer execute(const dsl::ScenarioScript& script, const SessionState& session);

std::string interpret(const PlanDiff& diff, const ApplyLog* log = nullptr);
std::string interpret(const QueryResult& result);

/// Optional wording pass: numbers are replaced by placeholders before the
/// text reaches the backend and substituted back afterwards.
std::string paraphrase(const std::string& text, TranslatorBackend& backend);

std::string fallback_text();

/// Money with half-even rounding to `decimals` places.
std::string format_money(double value, int decimals = 2);
/// Quantity without trailing zeros (up to 6 decimals).
std::string format_quantity(double value);

}  // namespace whatif
