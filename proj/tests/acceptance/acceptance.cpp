// Acceptance checks. Prints one PASS/FAIL line per criterion; exit code 1 if any fails.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "bank_facts.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "whatif/apply.hpp"
#include "whatif/dataset_io.hpp"
#include "whatif/drift.hpp"
#include "whatif/error.hpp"
#include "whatif/eval.hpp"
#include "whatif/service.hpp"
#include "whatif/solver.hpp"

using namespace whatif;
using namespace whatif::testing;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

// Records the first failure; later ones only bump the count.
struct Check {
    Verdict out;
    std::size_t failures = 0;
    void require(bool ok, const std::string& what) {
        if (ok) return;
        if (failures++ == 0) out.detail = what;
        out.pass = false;
    }
    Verdict done(const std::string& summary) {
        if (out.pass) out.detail = summary;
        else if (failures > 1) out.detail += " (+" + std::to_string(failures - 1) + " more)";
        return out;
    }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string num(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

std::shared_ptr<const std::vector<ExampleEntry>> example_bank() {
    static const auto bank =
        std::make_shared<const std::vector<ExampleEntry>>(load_example_bank(repo_data_dir() / "example_bank.jsonl"));
    return bank;
}

std::shared_ptr<const PlanHistory> demo_history() {
    static const auto h = std::make_shared<const PlanHistory>(PlanHistory::load(demo_net_dir() / "history.jsonl"));
    return h;
}

std::vector<BankItem> eval_bank() { return load_bank(repo_data_dir() / "eval_bank.jsonl"); }

// ---------------------------------------------------------------------------

Verdict oracle_equivalence() {
    Check c;
    const auto start = Clock::now();
    std::mt19937_64 rng(20260901);
    std::size_t n = 0;
    for (; n < 250; ++n) {
        const auto ds = random_instance(rng);
        const auto plan = solve(ds.network, ds.demand);
        const auto ref = oracle_solve(ds.network, ds.demand);
        c.require(std::fabs(plan.total_cost - ref.total_cost) <= 1e-6,
                  "instance " + std::to_string(n) + ": solver " + num(plan.total_cost) + " vs oracle " + num(ref.total_cost));
        c.require(check_plan(ds.network, ds.demand, plan).empty(), "instance " + std::to_string(n) + ": plan invariants");
    }
    const double secs = seconds_since(start);
    c.require(secs < 60, "took " + num(secs) + " s");
    return c.done(std::to_string(n) + " instances in " + num(std::round(secs * 100) / 100) + " s");
}

struct LedgerRow {
    const char* question;
    const char* dsl;
    double delta;
    std::map<std::string, double> lost;
};

Verdict demo_ledger() {
    Check c;
    const auto ds = demo_net();
    const std::vector<LedgerRow> rows = {
        {"Can we still fulfill all demand if we shut down factory F2?", "DISABLE FACTORY F2", 948.0, {{"D2", 10.0}}},
        {"What would be the additional cost if the overall product demand increases by 15%?",
         "SCALE DEMAND ALL BY 1.15", 51.3, {}},
        {"What if raw material M at supplier S1 is $1 cheaper per unit?", "ADJUST PRICE MATERIAL M AT S1 BY -1", -70.0, {}},
        {"What would be the additional cost if retailer R2 can use products only from factory F1?",
         "RESTRICT RETAILER R2 TO [F1]", 22.0, {}},
        {"What is the cost increase if demand D2 is due a week earlier?", "SHIFT DUE DATE D2 BY -7", 42.0, {}},
    };

    // Oracle first.
    const auto oracle_base = flow_oracle_solve(ds.network, ds.demand);
    c.require(std::fabs(oracle_base.total_cost - 342.0) <= 1e-6, "oracle baseline " + num(oracle_base.total_cost));
    for (const auto& row : rows) {
        const auto r = apply(dsl::parse(row.dsl), ds.network, ds.demand);
        const auto alt = flow_oracle_solve(r.network, r.demand);
        c.require(std::fabs(alt.total_cost - oracle_base.total_cost - row.delta) <= 1e-6,
                  std::string("oracle ") + row.dsl + " delta " + num(alt.total_cost - oracle_base.total_cost));
        for (const auto& [rec, units] : row.lost) {
            c.require(std::fabs(alt.lost.at(rec) - units) <= 1e-6, std::string("oracle lost ") + rec);
        }
    }

    // Then the full ask() path.
    const auto start = Clock::now();
    OfflineTranslator offline;
    const auto session = make_session(std::make_shared<const Dataset>(ds), offline, example_bank(), demo_history());
    c.require(std::fabs(session.baseline->total_cost - 342.0) <= 1e-6, "baseline " + num(session.baseline->total_cost));
    for (const auto& row : rows) {
        const Answer a = answer(row.question, session);
        if (a.kind != AnswerKind::what_if) {
            c.require(false, std::string("no what-if answer for: ") + row.question);
            continue;
        }
        c.require(a.dsl == std::string(row.dsl), "translated to " + a.dsl.value_or("?"));
        const auto& diff = std::get<PlanDiff>(a.structured);
        c.require(std::fabs(diff.delta_total - row.delta) <= 1e-6, std::string(row.dsl) + " delta " + num(diff.delta_total));
        std::map<std::string, double> lost(diff.delta_lost.begin(), diff.delta_lost.end());
        for (const auto& [rec, units] : row.lost) {
            c.require(lost.count(rec) && std::fabs(lost[rec] - units) <= 1e-6, std::string("lost units of ") + rec);
        }
        if (row.lost.empty()) c.require(lost.empty(), std::string(row.dsl) + " loses demand");
    }
    const double secs = seconds_since(start);
    c.require(secs < 5, "took " + num(secs) + " s");
    return c.done("baseline 342 and " + std::to_string(rows.size()) + " scenarios via oracle and ask() in " +
                  num(std::round(secs * 1000) / 1000) + " s");
}

Verdict restriction_monotonicity() {
    Check c;
    std::mt19937_64 rng(77);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        const auto ds = random_instance(rng);
        const auto script = random_restriction(rng, ds);
        const auto r = apply(script, ds.network, ds.demand);
        const double delta = solve(r.network, r.demand).total_cost - solve(ds.network, ds.demand).total_cost;
        worst = std::min(worst, delta);
        c.require(delta >= -1e-9, dsl::render(script) + " lowered cost by " + num(-delta));
    }
    return c.done("100 scenarios, min delta " + num(worst));
}

Verdict dsl_round_trip() {
    Check c;
    std::mt19937_64 rng(4242);
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_script(rng);
        const auto text = dsl::render(s);
        try {
            c.require(dsl::parse(text) == s, "round trip differs: " + text);
        } catch (const Error& e) {
            c.require(false, "rendered text rejected: " + text + ": " + e.what());
        }
    }
    const std::string alphabet = "SCALEDMNDBYQURYFTOP[];,-><=\"\\#.0123456789 \n\tabcxyz\x01\xff";
    std::size_t fuzzed = 0;
    for (int i = 0; i < 20000; ++i) {
        std::string text = dsl::render(random_script(rng));
        const int edits = 1 + static_cast<int>(rng() % 6);
        for (int k = 0; k < edits && !text.empty(); ++k) {
            const std::size_t at = rng() % text.size();
            switch (rng() % 3) {
                case 0: text.erase(at, 1); break;
                case 1: text.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
                default: text[at] = alphabet[rng() % alphabet.size()]; break;
            }
        }
        try {
            dsl::parse(text);
        } catch (const Error&) {
        } catch (const std::exception& e) {
            c.require(false, std::string("non-domain exception: ") + e.what());
        }
        ++fuzzed;
    }
    return c.done("1000 scripts round-trip; " + std::to_string(fuzzed) + " fuzzed inputs handled");
}

// Numeric tokens that are not part of an identifier or a {{n}} placeholder.
std::vector<std::string> free_numbers(const std::string& text) {
    static const std::regex placeholder(R"(\{\{\d+\}\})");
    const std::string t = std::regex_replace(text, placeholder, " ");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < t.size();) {
        const auto c = static_cast<unsigned char>(t[i]);
        if (std::isalpha(c) || t[i] == '_') {
            while (i < t.size() && (std::isalnum(static_cast<unsigned char>(t[i])) || t[i] == '_')) ++i;
        } else if (std::isdigit(c)) {
            std::size_t j = i;
            while (j < t.size() && (std::isdigit(static_cast<unsigned char>(t[j])) ||
                                    (t[j] == '.' && j + 1 < t.size() && std::isdigit(static_cast<unsigned char>(t[j + 1]))))) {
                ++j;
            }
            out.push_back(t.substr(i, j - i));
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

std::vector<double> dataset_values(const Dataset& ds) {
    std::vector<double> v;
    for (const auto& p : ds.network.products) {
        for (const auto& [_, u] : p.bom) v.push_back(u);
    }
    for (const auto& s : ds.network.suppliers) v.insert(v.end(), {s.unit_price, s.capacity, s.inventory});
    for (const auto& f : ds.network.factories) v.insert(v.end(), {f.production_capacity, f.production_cost});
    for (const auto& l : ds.network.lanes) v.insert(v.end(), {l.unit_ship_cost, l.capacity, l.lead_time});
    for (const auto& r : ds.demand.records) {
        v.insert(v.end(), {r.quantity, static_cast<double>(r.due_day), r.delay_cost_rate, r.lost_penalty});
    }
    return v;
}

// Outbound prompts per question, in the order they were sent.
std::vector<std::vector<std::string>> recorded_prompts(const Dataset& ds, const std::vector<BankItem>& bank) {
    OfflineTranslator offline;
    RecordingBackend recorder(offline);
    PipelineConfig cfg;
    cfg.paraphrase = true;
    const auto session = make_session(std::make_shared<const Dataset>(ds), recorder, example_bank(), demo_history(), cfg);
    std::vector<std::vector<std::string>> out;
    std::size_t seen = 0;
    for (const auto& item : bank) {
        try {
            answer(item.question, session);
        } catch (const Error&) {
        }
        const auto all = recorder.prompts();
        out.emplace_back(all.begin() + static_cast<std::ptrdiff_t>(seen), all.end());
        seen = all.size();
    }
    return out;
}

Verdict privacy_scan() {
    Check c;
    const auto bank = eval_bank();
    const auto demo = demo_net();
    const auto can = canary(demo);

    // Exhaustive substring scan: every canary value in every rendering.
    std::set<std::string> needles;
    for (double v : dataset_values(can)) {
        needles.insert(dsl::format_number(v));
        needles.insert(format_money(v));
        needles.insert(format_quantity(v));
        needles.insert(std::to_string(static_cast<long long>(std::floor(v))));
        needles.insert(std::to_string(v));
    }
    const auto canary_prompts = recorded_prompts(can, bank);
    std::size_t bytes = 0, count = 0;
    for (const auto& per_question : canary_prompts) {
        c.require(!per_question.empty(), "a question produced no prompt");
        for (const auto& p : per_question) {
            ++count;
            bytes += p.size();
            for (const auto& n : needles) c.require(p.find(n) == std::string::npos, "canary value " + n + " sent to backend");
        }
    }

    // demo-net: numbers left after masking the planner's own words and the static examples.
    std::set<double> values;
    for (double v : dataset_values(demo)) values.insert(v);
    std::set<std::string> allowed_text;
    for (const auto& e : *example_bank()) {
        allowed_text.insert("Question: " + e.question);
        allowed_text.insert(e.dsl);
    }
    std::vector<std::string> demo_prompts;
    for (const auto& per_question : recorded_prompts(demo, bank)) {
        demo_prompts.insert(demo_prompts.end(), per_question.begin(), per_question.end());
    }
    for (std::size_t i = 0; i < demo_prompts.size(); ++i) {
        std::string p = demo_prompts[i];
        for (const auto& item : bank) {
            for (std::size_t pos; (pos = p.find(item.question)) != std::string::npos;) p.erase(pos, item.question.size());
        }
        for (const auto& a : allowed_text) {
            for (std::size_t pos; (pos = p.find(a)) != std::string::npos;) p.erase(pos, a.size());
        }
        for (const auto& tok : free_numbers(p)) {
            c.require(!values.count(std::stod(tok)), "demo-net value " + tok + " in prompt " + std::to_string(i));
        }
    }

    // The first translation prompt of each question does not depend on dataset numbers.
    const auto a = recorded_prompts(demo, bank);
    for (std::size_t i = 0; i < a.size(); ++i) {
        c.require(!a[i].empty() && !canary_prompts[i].empty() && a[i].front() == canary_prompts[i].front(),
                  bank[i].id + ": prompt changed with dataset values");
    }
    return c.done(std::to_string(count) + " prompts (" + std::to_string(bytes) + " bytes) free of canary values; " +
                  std::to_string(a.size()) + " translation prompts identical under value change");
}

Verdict eval_fidelity() {
    Check c;
    const auto bank = eval_bank();
    c.require(bank.size() == 60, "bank has " + std::to_string(bank.size()) + " items");
    const auto ds = demo_net();

    // Stored facts must agree with the independent oracles.
    for (const auto& item : bank) {
        if (item.expect != Expectation::answer) continue;
        const auto facts = oracle_facts(dsl::parse(item.expected_dsl.value_or("")), ds, demo_net_dir() / "history.jsonl");
        for (const auto& [name, f] : facts) {
            const auto it = item.expected_facts.find(name);
            bool ok = it != item.expected_facts.end();
            if (ok && std::holds_alternative<double>(f.value)) {
                ok = std::holds_alternative<double>(it->second.value) &&
                     std::fabs(std::get<double>(it->second.value) - std::get<double>(f.value)) <= 1e-6;
            } else if (ok) {
                ok = it->second.value == f.value;
            }
            c.require(ok, item.id + ": stored fact " + name + " disagrees with the oracle");
        }
    }

    OfflineTranslator offline;
    const auto session = make_session(std::make_shared<const Dataset>(ds), offline, example_bank(), demo_history());
    const auto report = run_eval(bank, offline, session);
    c.require(report.supported.accuracy() == 1.0, "offline accuracy " + num(report.supported.accuracy()));
    c.require(report.supported.incorrect == 0, "offline incorrect " + std::to_string(report.supported.incorrect));

    FaultInjectingBackend faulty(offline, 10);
    const auto fsession = make_session(std::make_shared<const Dataset>(ds), faulty, example_bank(), demo_history());
    EvalOptions opts;
    opts.evaluations = 200;
    opts.supported_only = true;
    const auto freport = run_eval(bank, faulty, fsession, opts);
    c.require(freport.items.size() == 200, "fault run evaluated " + std::to_string(freport.items.size()));
    c.require(std::fabs(freport.supported.accuracy() - 0.9) <= 0.05, "fault accuracy " + num(freport.supported.accuracy()));
    return c.done("offline " + num(report.supported.accuracy()) + " on " + std::to_string(report.supported.total()) +
                  " supported items; fault-injected " + num(freport.supported.accuracy()) + " over 200");
}

Verdict drift_golden() {
    Check c;
    const auto dir = data_dir() / "drift";
    const auto a = load_demand_file(dir / "plan_2026-08.csv");
    const auto b = load_demand_file(dir / "plan_2026-09.csv");
    const auto r = compute_drift(a, b);
    c.require(render_report(r, ReportFormat::markdown) == read_text_file(dir / "golden_report.md"), "markdown differs from golden");
    c.require(render_report(r, ReportFormat::email_text) == read_text_file(dir / "golden_report.txt"), "email text differs from golden");
    c.require(compute_drift(a, a).changes.empty() && compute_drift(b, b).changes.empty(), "fixture drift(A,A) not empty");

    std::mt19937_64 rng(606);
    for (int i = 0; i < 50; ++i) {
        const auto x = random_snapshot(rng, "x");
        const auto y = random_snapshot(rng, "y");
        c.require(compute_drift(x, x).changes.empty(), "random drift(A,A) not empty");
        const auto xy = compute_drift(x, y);
        const auto yx = compute_drift(y, x);
        bool mirrored = xy.changes.size() == yx.changes.size() && xy.unchanged == yx.unchanged &&
                        xy.regions.size() == yx.regions.size();
        for (std::size_t k = 0; mirrored && k < xy.changes.size(); ++k) {
            const auto& p = xy.changes[k];
            const auto& q = yx.changes[k];
            const bool kinds = p.kind == ChangeKind::modified ? q.kind == ChangeKind::modified
                                                              : q.kind != ChangeKind::modified && q.kind != p.kind;
            mirrored = p.record == q.record && kinds && std::fabs(p.quantity_delta() + q.quantity_delta()) <= 1e-9 &&
                       p.due_day_delta == -q.due_day_delta;
        }
        for (const auto& [region, agg] : xy.regions) {
            mirrored = mirrored && yx.regions.count(region) && std::fabs(agg.delta() + yx.regions.at(region).delta()) <= 1e-9;
        }
        c.require(mirrored, "pair " + std::to_string(i) + " is not antisymmetric");
    }
    return c.done("golden markdown and email identical; identity and 50 antisymmetric pairs");
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("whatif-accept-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

Verdict service_contract() {
    Check c;
    TempDir tmp;
    ServiceConfig cfg;
    cfg.port = 0;
    cfg.data_dir = tmp.path;
    cfg.example_bank = repo_data_dir() / "example_bank.jsonl";
    fs::copy_file(repo_data_dir() / "eval_bank.jsonl", tmp.path / "eval_bank.jsonl");
    Service svc(cfg);
    const int port = svc.start();
    httplib::Client cl("127.0.0.1", port);

    auto call = [&](const std::string& method, const std::string& path, const json& body, int want) -> json {
        httplib::Result r = method == "GET" ? cl.Get(path) : cl.Post(path, body.dump(), "application/json");
        if (!r) {
            c.require(false, method + " " + path + ": no response");
            return json();
        }
        c.require(r->status == want, method + " " + path + " -> " + std::to_string(r->status) + ", want " + std::to_string(want));
        try {
            return json::parse(r->body);
        } catch (const json::exception&) {
            c.require(false, method + " " + path + ": body is not JSON");
            return json();
        }
    };

    c.require(call("GET", "/health", nullptr, 200).value("status", "") == "ok", "health");
    c.require(call("GET", "/catalog", nullptr, 200).contains("questions"), "catalog");
    const json upload = {{"network", read_text_file(demo_net_dir() / "network.json")},
                         {"demand", read_text_file(demo_net_dir() / "demand.csv")},
                         {"history", read_text_file(demo_net_dir() / "history.jsonl")}};
    const std::string id = call("POST", "/datasets", upload, 201).value("dataset_id", "");
    const json created = call("POST", "/sessions", {{"dataset_id", id}}, 201);
    const std::string sid = created.value("session_id", "");
    const std::string base = "/sessions/" + sid;

    const json ask = call("POST", base + "/ask", {{"question", "What if we shut down factory F2?"}}, 200);
    c.require(ask.value("kind", "") == "what-if", "ask kind");
    const json sc = call("POST", base + "/scenario", {{"dsl", "SCALE DEMAND ALL BY 1.15"}}, 200);
    c.require(std::fabs(sc["diff"].value("delta_total", 0.0) - 51.3) <= 1e-6, "scenario delta");
    c.require(std::fabs(call("GET", base + "/plan", nullptr, 200).value("total_cost", 0.0) - 342) <= 1e-6, "plan");
    c.require(call("GET", base + "/alerts", nullptr, 200)["alerts"].size() == 1, "alerts");
    const json drift = call("POST", "/drift",
                            {{"a", read_text_file(data_dir() / "drift" / "plan_2026-08.csv")},
                             {"b", read_text_file(data_dir() / "drift" / "plan_2026-09.csv")}},
                            200);
    c.require(drift.contains("markdown"), "drift");
    const json ev = call("POST", "/eval", {{"bank", "eval_bank.jsonl"}, {"backend", "offline"}}, 200);
    c.require(ev["supported"].value("accuracy", 0.0) == 1.0, "eval accuracy");

    call("POST", base + "/scenario", {{"dsl", "SCALE DEMAND ALL"}}, 400);
    call("POST", base + "/scenario", {{"dsl", "DISABLE FACTORY F9"}}, 400);
    call("POST", "/sessions/" + std::string(32, '0') + "/ask", {{"question", "q"}}, 404);
    call("GET", "/sessions/nope/plan", nullptr, 404);
    call("POST", base + "/ask", {{"question", ""}}, 422);

    // 16 sessions, interleaved asks.
    const auto ds = svc.datasets().get(id);
    const auto fp = fingerprint(ds->network, ds->demand);
    const std::vector<std::string> questions = {
        "What if we shut down factory F2?",
        "What is the cost increase if demand D2 is due a week earlier?",
        "How much raw material of type M does supplier S1 have today?",
        "What if raw material M at supplier S1 is $1 cheaper per unit?",
    };
    std::vector<std::string> baselines(16), plans(16);
    std::vector<int> errors(16, 0);
    std::vector<std::thread> threads;
    for (int t = 0; t < 16; ++t) {
        threads.emplace_back([&, t] {
            httplib::Client tc("127.0.0.1", port);
            auto r = tc.Post("/sessions", json{{"dataset_id", id}}.dump(), "application/json");
            if (!r || r->status != 201) {
                ++errors[t];
                return;
            }
            const auto j = json::parse(r->body);
            baselines[t] = j["baseline"].dump();
            const std::string s = j["session_id"];
            for (int k = 0; k < 6; ++k) {
                auto a = tc.Post("/sessions/" + s + "/ask", json{{"question", questions[(t + k) % 4]}}.dump(),
                                 "application/json");
                if (!a || a->status != 200) ++errors[t];
            }
            auto p = tc.Get("/sessions/" + s + "/plan");
            if (!p || p->status != 200) ++errors[t];
            else plans[t] = p->body;
        });
    }
    for (auto& th : threads) th.join();
    for (int t = 0; t < 16; ++t) {
        c.require(errors[t] == 0, "session " + std::to_string(t) + " saw errors");
        c.require(baselines[t] == baselines[0] && plans[t] == plans[0], "session " + std::to_string(t) + " baseline differs");
    }
    c.require(fingerprint(ds->network, ds->demand) == fp, "dataset fingerprint changed");
    svc.stop();
    return c.done("endpoints, 400/404/422 paths and 16 concurrent sessions with one baseline hash");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"oracle-equivalence", oracle_equivalence},
        {"demo-net-ledger", demo_ledger},
        {"restriction-monotonicity", restriction_monotonicity},
        {"dsl-round-trip", dsl_round_trip},
        {"privacy-scan", privacy_scan},
        {"eval-metric-fidelity", eval_fidelity},
        {"drift-golden", drift_golden},
        {"service-contract", service_contract},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Verdict o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
