#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "whatif/dataset_io.hpp"
#include "whatif/drift.hpp"
#include "whatif/error.hpp"
#include "whatif/eval.hpp"
#include "whatif/serialize.hpp"
#include "whatif/service.hpp"
#include "whatif/validate.hpp"

namespace fs = std::filesystem;
using namespace whatif;

namespace {

Service* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

struct Common {
    std::string config;
    bool offline = false;
    std::string dataset;
};

ServiceConfig make_config(const Common& c) {
    auto cfg = load_config(c.config.empty() ? std::nullopt : std::optional<fs::path>(c.config));
    if (c.offline) cfg.backend = BackendKind::offline;
    return cfg;
}

std::shared_ptr<const PlanHistory> history_of(const fs::path& dir) {
    const fs::path file = dir / "history.jsonl";
    if (!fs::exists(file)) return std::make_shared<const PlanHistory>();
    return std::make_shared<const PlanHistory>(PlanHistory::load(file));
}

std::shared_ptr<const std::vector<ExampleEntry>> example_bank(const ServiceConfig& cfg) {
    fs::path path = cfg.example_bank;
    if (path.empty() && fs::exists(cfg.data_dir / "example_bank.jsonl")) path = cfg.data_dir / "example_bank.jsonl";
    return std::make_shared<const std::vector<ExampleEntry>>(path.empty() ? std::vector<ExampleEntry>{}
                                                                          : load_example_bank(path));
}

void print_answer(const Answer& a, bool as_json) {
    if (as_json) {
        std::cout << to_json(a).dump(2) << '\n';
        return;
    }
    std::cout << "[" << to_string(a.kind) << "]";
    if (a.dsl) std::cout << " " << *a.dsl;
    std::cout << "\n" << a.text << "\n";
}

void add_common(CLI::App* cmd, Common& c, bool dataset_required) {
    cmd->add_option("--config", c.config, "Service config file (JSON)");
    cmd->add_flag("--offline", c.offline, "Use the offline translator regardless of config");
    auto* opt = cmd->add_option("--dataset", c.dataset, "Dataset directory (network.json + demand.csv)");
    if (dataset_required) opt->required()->check(CLI::ExistingDirectory);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Supply-chain what-if engine"};
    app.require_subcommand(1);

    Common serve_c, ask_c, scen_c, eval_c, plan_c;
    bool json_out = false;

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    add_common(serve, serve_c, false);
    std::string listen;
    serve->add_option("--listen", listen, "host:port (overrides config)");

    auto* ask = app.add_subcommand("ask", "Answer a planner question against a dataset");
    add_common(ask, ask_c, true);
    std::string question;
    ask->add_option("question", question, "Question text")->required();
    ask->add_flag("--json", json_out, "Print the full answer payload");

    auto* scenario = app.add_subcommand("scenario", "Run a DSL script against a dataset");
    add_common(scenario, scen_c, true);
    std::string script_text;
    scenario->add_option("dsl", script_text, "Scenario script")->required();
    scenario->add_flag("--json", json_out, "Print the full answer payload");

    auto* plan = app.add_subcommand("plan", "Solve the baseline plan and print it as JSON");
    add_common(plan, plan_c, true);

    auto* drift = app.add_subcommand("drift", "Compare two demand snapshots");
    std::string snap_a, snap_b, drift_format = "markdown", drift_config;
    drift->add_option("before", snap_a, "Earlier snapshot CSV")->required()->check(CLI::ExistingFile);
    drift->add_option("after", snap_b, "Later snapshot CSV")->required()->check(CLI::ExistingFile);
    drift->add_option("--format", drift_format, "markdown | email | json")
        ->check(CLI::IsMember({"markdown", "email", "json"}));
    drift->add_option("--config", drift_config, "Service config file (drift thresholds)");

    auto* eval = app.add_subcommand("eval", "Score a backend against an evaluation bank");
    add_common(eval, eval_c, true);
    std::string bank_path, report_path;
    bool supported_only = false;
    std::size_t evaluations = 0, fault_period = 0;
    eval->add_option("--bank", bank_path, "Evaluation bank (JSON lines)")->required()->check(CLI::ExistingFile);
    eval->add_flag("--supported-only", supported_only, "Skip items expecting a fallback or clarification");
    eval->add_option("--evaluations", evaluations, "Total evaluations (cycles the bank)");
    eval->add_option("--fault-period", fault_period, "Inject a wrong translation every n-th call");
    eval->add_option("--report", report_path, "Write the JSON report here");

    auto* val = app.add_subcommand("validate", "Check a dataset directory");
    std::string val_dir;
    val->add_option("--dataset", val_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            auto cfg = make_config(serve_c);
            if (!listen.empty()) {
                setenv("WHATIF_LISTEN", listen.c_str(), 1);
                apply_env_overrides(cfg);
            }
            Service service(cfg);
            if (!serve_c.dataset.empty()) {
                std::cout << "dataset " << service.preload(serve_c.dataset) << "\n";
            }
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            const int port = service.start();
            std::cout << "listening on " << cfg.host << ":" << port << std::endl;
            service.run();
            g_service = nullptr;
            return 0;
        }

        if (*ask || *scenario) {
            const Common& c = *ask ? ask_c : scen_c;
            const auto cfg = make_config(c);
            auto backend = make_backend(cfg);
            PipelineConfig pc;
            pc.example_count = cfg.example_count;
            pc.paraphrase = cfg.paraphrase;
            auto ds = std::make_shared<const Dataset>(load_dataset_dir(c.dataset));
            const auto session = make_session(ds, *backend, example_bank(cfg), history_of(c.dataset), pc);
            const Answer a = *ask ? answer(question, session) : execute(dsl::parse(script_text), session);
            print_answer(a, json_out);
            return 0;
        }

        if (*plan) {
            const auto cfg = make_config(plan_c);
            OfflineTranslator offline;
            const auto session = make_session(std::make_shared<const Dataset>(load_dataset_dir(plan_c.dataset)), offline,
                                              example_bank(cfg));
            std::cout << to_json(*session.baseline).dump(2) << '\n';
            return 0;
        }

        if (*drift) {
            DriftConfig dc;
            if (!drift_config.empty()) dc = load_config(fs::path(drift_config)).drift;
            const auto a = load_demand_file(snap_a);
            const auto b = load_demand_file(snap_b);
            const auto report = compute_drift(a, b, dc);
            if (drift_format == "json") std::cout << to_json(report).dump(2) << '\n';
            else std::cout << render_report(report, drift_format == "email" ? ReportFormat::email_text : ReportFormat::markdown);
            return 0;
        }

        if (*eval) {
            const auto cfg = make_config(eval_c);
            auto backend = make_backend(cfg);
            std::unique_ptr<FaultInjectingBackend> faulty;
            TranslatorBackend* used = backend.get();
            if (fault_period > 0) {
                faulty = std::make_unique<FaultInjectingBackend>(*backend, fault_period);
                used = faulty.get();
            }
            PipelineConfig pc;
            pc.example_count = cfg.example_count;
            const auto session = make_session(std::make_shared<const Dataset>(load_dataset_dir(eval_c.dataset)), *used,
                                              example_bank(cfg), history_of(eval_c.dataset), pc);
            EvalOptions options;
            options.supported_only = supported_only;
            options.evaluations = evaluations;
            const auto report = run_eval(load_bank(bank_path), *used, session, options);
            std::cout << summary_table(report);
            if (!report_path.empty()) write_text_file(report_path, to_json(report).dump(2) + "\n");
            return 0;
        }

        if (*val) {
            const auto ds = load_dataset_dir(val_dir);
            const auto issues = validate(ds.network, ds.demand);
            for (const auto& i : issues) {
                std::cout << (i.severity == Severity::error ? "error" : "warning") << " " << i.location << ": "
                          << i.message << "\n";
            }
            if (issues.empty()) std::cout << "ok\n";
            return has_errors(issues) ? 1 : 0;
        }
    } catch (const Error& e) {
        std::cerr << to_string(e.code()) << ": " << e.what() << "\n";
        return 2;
    }
    return 0;
}
