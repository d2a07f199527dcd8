#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "whatif/apply.hpp"
#include "whatif/dataset_io.hpp"
#include "whatif/drift.hpp"
#include "whatif/eval.hpp"
#include "whatif/pipeline.hpp"
#include "whatif/serialize.hpp"
#include "whatif/validate.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace whatif;

namespace {

// Session bound to one dataset, answering with the offline translator.
class Workspace {
public:
    Workspace(const fs::path& dir, std::optional<fs::path> example_bank) {
        auto ds = std::make_shared<const Dataset>(load_dataset_dir(dir));
        auto bank = std::make_shared<const std::vector<ExampleEntry>>(
            example_bank ? load_example_bank(*example_bank) : std::vector<ExampleEntry>{});
        std::shared_ptr<const PlanHistory> history;
        if (fs::exists(dir / "history.jsonl")) history = std::make_shared<const PlanHistory>(PlanHistory::load(dir / "history.jsonl"));
        session_ = make_session(std::move(ds), backend_, std::move(bank), std::move(history));
    }

    std::string fingerprint() const { return fingerprint_hex(session_.dataset->network, session_.dataset->demand); }
    std::string baseline() const { return to_json(*session_.baseline).dump(); }
    std::string ask(const std::string& question) const {
        py::gil_scoped_release release;
        return to_json(answer(question, session_)).dump();
    }
    std::string scenario(const std::string& text) const {
        py::gil_scoped_release release;
        return to_json(execute(dsl::parse(text), session_)).dump();
    }
    std::string evaluate(const fs::path& bank, bool supported_only, std::size_t evaluations) const {
        py::gil_scoped_release release;
        EvalOptions options;
        options.supported_only = supported_only;
        options.evaluations = evaluations;
        return to_json(run_eval(load_bank(bank), backend_, session_, options), false).dump();
    }
    std::vector<std::string> validate() const {
        std::vector<std::string> out;
        for (const auto& i : whatif::validate(session_.dataset->network, session_.dataset->demand)) {
            out.push_back(to_json(i).dump());
        }
        return out;
    }

private:
    mutable OfflineTranslator backend_;
    SessionState session_;
};

std::string drift_report(const fs::path& before, const fs::path& after, const std::string& format) {
    const auto report = compute_drift(load_demand_file(before), load_demand_file(after));
    if (format == "json") return to_json(report).dump();
    if (format == "markdown") return render_report(report, ReportFormat::markdown);
    if (format == "email") return render_report(report, ReportFormat::email_text);
    throw Error(ErrorCode::invalid_value, "format must be markdown, email or json");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Supply-chain what-if engine";

    static py::handle error_type = py::exception<Error>(m, "WhatIfError").release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = error_type(py::str(e.what()));
            inst.attr("code") = to_string(e.code());
            PyErr_SetObject(error_type.ptr(), inst.ptr());
        }
    });

    py::class_<Workspace>(m, "Workspace")
        .def(py::init<const fs::path&, std::optional<fs::path>>(), py::arg("dataset_dir"), py::arg("example_bank") = py::none())
        .def("fingerprint", &Workspace::fingerprint)
        .def("baseline_json", &Workspace::baseline)
        .def("ask_json", &Workspace::ask, py::arg("question"))
        .def("scenario_json", &Workspace::scenario, py::arg("dsl"))
        .def("evaluate_json", &Workspace::evaluate, py::arg("bank"), py::arg("supported_only") = false,
             py::arg("evaluations") = 0)
        .def("validate_json", &Workspace::validate);

    m.def("canonical", [](const std::string& text) { return dsl::render(dsl::parse(text)); }, py::arg("dsl"),
          "Parses a scenario script and returns its canonical text.");
    m.def("drift_report", &drift_report, py::arg("before"), py::arg("after"), py::arg("format") = "markdown");
    m.def("format_money", &format_money, py::arg("value"), py::arg("decimals") = 2);
    m.def("catalog", [] { return OfflineTranslator::catalog(); });
}
