#include "whatif/service.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <shared_mutex>

#include <nlohmann/json.hpp>

#include "whatif/dataset_io.hpp"
#include "whatif/error.hpp"
#include "whatif/eval.hpp"
#include "whatif/serialize.hpp"
#include "whatif/validate.hpp"

namespace whatif {

namespace fs = std::filesystem;

namespace {

std::string env(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

std::string now_iso() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void parse_listen(const std::string& listen, ServiceConfig& c) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::invalid_value, "listen address must be host:port: " + listen);
    c.host = listen.substr(0, colon);
    try {
        c.port = std::stoi(listen.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_value, "bad port in listen address: " + listen);
    }
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::not_found:
            return 404;
        case ErrorCode::backend_unavailable:
            return 503;
        case ErrorCode::unknown_entity:
        case ErrorCode::empty_period:
        case ErrorCode::insufficient_history:
            return 422;
        default:
            return 400;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

void ServiceConfig::check() const {
    if (port < 0 || port > 65535) throw Error(ErrorCode::invalid_value, "port out of range");
    if (backend == BackendKind::remote) {
        if (remote_base_url.empty()) throw Error(ErrorCode::invalid_value, "remote backend needs remote.base_url");
        if (remote_model.empty()) throw Error(ErrorCode::invalid_value, "remote backend needs remote.model");
    }
    if (example_count == 0) throw Error(ErrorCode::invalid_value, "example_count must be >= 1");
    if (drift.large_swing_fraction < 0) throw Error(ErrorCode::invalid_value, "drift.large_swing_fraction must be >= 0");
    if (monitor.window <= 0 || monitor.reference <= 0) {
        throw Error(ErrorCode::invalid_value, "monitor windows must be positive");
    }
}

void apply_env_overrides(ServiceConfig& c) {
    if (auto listen = env("WHATIF_LISTEN"); !listen.empty()) parse_listen(listen, c);
    if (auto url = env("WHATIF_BACKEND_URL"); !url.empty()) c.remote_base_url = url;
    if (auto ref = env("WHATIF_AUTH_TOKEN_ENV"); !ref.empty()) c.remote_auth_env = ref;
}

ServiceConfig load_config(const std::optional<fs::path>& path) {
    ServiceConfig c;
    if (path) {
        json j;
        try {
            j = json::parse(read_text_file(*path));
            if (j.contains("listen")) parse_listen(j.at("listen").get<std::string>(), c);
            c.host = j.value("host", c.host);
            c.port = j.value("port", c.port);
            const std::string backend = j.value("backend", std::string("offline"));
            if (backend == "offline") c.backend = BackendKind::offline;
            else if (backend == "remote") c.backend = BackendKind::remote;
            else throw Error(ErrorCode::invalid_value, "backend must be offline or remote");
            if (j.contains("remote")) {
                const auto& r = j.at("remote");
                c.remote_base_url = r.value("base_url", c.remote_base_url);
                c.remote_model = r.value("model", c.remote_model);
                c.remote_auth_env = r.value("auth_env", c.remote_auth_env);
                c.remote_timeout = std::chrono::milliseconds(r.value("timeout_ms", c.remote_timeout.count()));
            }
            c.example_count = j.value("example_count", c.example_count);
            c.paraphrase = j.value("paraphrase", c.paraphrase);
            if (j.contains("drift")) {
                const auto& d = j.at("drift");
                c.drift.large_swing_fraction = d.value("large_swing_fraction", c.drift.large_swing_fraction);
                if (d.contains("hardware_keys")) c.drift.hardware_keys = d.at("hardware_keys").get<std::set<std::string>>();
                if (d.contains("region_keys")) c.drift.region_keys = d.at("region_keys").get<std::set<std::string>>();
            }
            if (j.contains("monitor")) {
                const auto& m = j.at("monitor");
                c.monitor.window = m.value("window", c.monitor.window);
                c.monitor.reference = m.value("reference", c.monitor.reference);
                c.monitor.min_relative_increase = m.value("min_relative_increase", c.monitor.min_relative_increase);
                c.monitor.min_absolute_increase = m.value("min_absolute_increase", c.monitor.min_absolute_increase);
            }
            if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
            if (j.contains("example_bank")) c.example_bank = j.at("example_bank").get<std::string>();
            c.api_token_env = j.value("api_token_env", c.api_token_env);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::malformed_input, path->string() + ": " + e.what());
        }
    }
    apply_env_overrides(c);
    if (!c.api_token_env.empty()) c.api_token = env(c.api_token_env.c_str());
    c.check();
    return c;
}

std::unique_ptr<TranslatorBackend> make_backend(const ServiceConfig& c) {
    if (c.backend == BackendKind::offline) return std::make_unique<OfflineTranslator>();
    RemoteConfig r;
    r.base_url = c.remote_base_url;
    r.model = c.remote_model;
    r.timeout = c.remote_timeout;
    if (!c.remote_auth_env.empty()) r.auth_token = env(c.remote_auth_env.c_str());
    return std::make_unique<RemoteBackend>(std::move(r));
}

// ---------------------------------------------------------------------------

DatasetStore::DatasetStore(fs::path root) : root_(std::move(root)) {}

std::string DatasetStore::add(std::string_view network_json, std::string_view demand_csv,
                              std::optional<std::string_view> history_jsonl) {
    auto network = parse_network(network_json, "network.json");
    auto demand = parse_demand(demand_csv, "demand", "demand.csv");
    resolve_references(network, demand, "demand.csv");
    if (history_jsonl) PlanHistory::parse(*history_jsonl, "history.jsonl");
    const auto issues = validate(network, demand);
    if (has_errors(issues)) {
        for (const auto& i : issues) {
            if (i.severity == Severity::error) throw Error(ErrorCode::invalid_value, i.location + ": " + i.message);
        }
    }
    const std::string id = fingerprint_hex(network, demand).substr(0, 16);
    demand.snapshot_id = id;
    std::unique_lock lock(mutex_);
    const fs::path dir = root_ / "datasets" / id;
    fs::create_directories(dir);
    write_text_file(dir / "network.json", network_json);
    write_text_file(dir / "demand.csv", demand_csv);
    if (history_jsonl) write_text_file(dir / "history.jsonl", *history_jsonl);
    cache_[id] = std::make_shared<const Dataset>(Dataset{std::move(network), std::move(demand)});
    return id;
}

std::shared_ptr<const Dataset> DatasetStore::get(const std::string& id) {
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(id); it != cache_.end()) return it->second;
    }
    const bool safe = !id.empty() && std::all_of(id.begin(), id.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
    const fs::path dir = root_ / "datasets" / id;
    if (!safe || !fs::exists(dir / "network.json")) throw Error(ErrorCode::not_found, "unknown dataset '" + id + "'");
    auto ds = load_dataset_dir(dir);
    ds.demand.snapshot_id = id;
    auto shared = std::make_shared<const Dataset>(std::move(ds));
    std::unique_lock lock(mutex_);
    return cache_.emplace(id, shared).first->second;
}

std::vector<std::string> DatasetStore::list() const {
    std::vector<std::string> out;
    std::shared_lock lock(mutex_);
    const fs::path dir = root_ / "datasets";
    if (fs::exists(dir)) {
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_directory()) out.push_back(e.path().filename().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::shared_ptr<const PlanHistory> DatasetStore::history(const std::string& id) {
    get(id);
    const fs::path file = root_ / "datasets" / id / "history.jsonl";
    if (!fs::exists(file)) return std::make_shared<const PlanHistory>();
    return std::make_shared<const PlanHistory>(PlanHistory::load(file));
}

void InteractionLog::append(const std::string& session, std::string_view question, const Answer& answer,
                            double latency_ms) {
    json j = {{"timestamp", now_iso()},
              {"session", session},
              {"question", question},
              {"dsl", answer.dsl ? json(*answer.dsl) : json(nullptr)},
              {"kind", to_string(answer.kind)},
              {"backend", answer.backend},
              {"retries", answer.retries},
              {"latency_ms", latency_ms}};
    std::lock_guard lock(mutex_);
    std::ofstream(path_, std::ios::app) << j.dump() << '\n';
}

void InteractionLog::append_failure(const std::string& session, std::string_view question, const std::string& error,
                                    double latency_ms) {
    json j = {{"timestamp", now_iso()}, {"session", session},   {"question", question},
              {"failure", error},       {"kind", "error"},      {"latency_ms", latency_ms}};
    std::lock_guard lock(mutex_);
    std::ofstream(path_, std::ios::app) << j.dump() << '\n';
}

std::string random_session_id() {
    static thread_local std::mt19937_64 rng{[] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }()};
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(rng()));
    return buf;
}

// ---------------------------------------------------------------------------

struct Session {
    std::string id;
    std::string dataset_id;
    std::string created_at;
    SessionState state;
    std::mutex mutex;
};

struct Service::Impl {
    httplib::Server server;
    std::unique_ptr<TranslatorBackend> backend;
    std::shared_ptr<const std::vector<ExampleEntry>> bank;
    std::unique_ptr<InteractionLog> log;
    std::shared_mutex sessions_mutex;
    std::map<std::string, std::shared_ptr<Session>> sessions;
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                json extra = json::object()) {
    json body = {{"error", {{"code", code}, {"message", message}}}};
    for (auto& [k, v] : extra.items()) body["error"][k] = v;
    send_json(res, status, body);
}

void send_error(httplib::Response& res, const Error& e) {
    json extra = json::object();
    if (const auto* s = dynamic_cast<const dsl::SyntaxError*>(&e)) {
        extra = {{"line", s->line()}, {"column", s->column()}, {"expected", s->expected()}};
    } else if (const auto* d = dynamic_cast<const DatasetError*>(&e)) {
        extra = {{"file", d->file()}, {"line", d->line()}, {"column", d->column()}};
    }
    send_error(res, http_status(e.code()), to_string(e.code()), e.what(), extra);
}

json body_json(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_input, std::string("request body is not JSON: ") + e.what());
    }
}

// Multipart field, or the same key in a JSON body (string, or object for the network).
std::string part(const httplib::Request& req, const std::string& name) {
    if (req.is_multipart_form_data()) {
        if (!req.has_file(name)) throw Error(ErrorCode::malformed_input, "missing multipart field '" + name + "'");
        return req.get_file_value(name).content;
    }
    const json j = body_json(req);
    if (!j.contains(name)) throw Error(ErrorCode::malformed_input, "missing field '" + name + "'");
    const auto& v = j.at(name);
    return v.is_string() ? v.get<std::string>() : v.dump();
}

bool has_part(const httplib::Request& req, const std::string& name) {
    if (req.is_multipart_form_data()) return req.has_file(name);
    return body_json(req).contains(name);
}

}  // namespace

Service::Service(ServiceConfig config)
    : config_(std::move(config)), datasets_(config_.data_dir), impl_(std::make_unique<Impl>()) {
    fs::create_directories(config_.data_dir);
    impl_->backend = make_backend(config_);
    fs::path bank = config_.example_bank;
    if (bank.empty() && fs::exists(config_.data_dir / "example_bank.jsonl")) bank = config_.data_dir / "example_bank.jsonl";
    impl_->bank = std::make_shared<const std::vector<ExampleEntry>>(bank.empty() ? std::vector<ExampleEntry>{}
                                                                                 : load_example_bank(bank));
    impl_->log = std::make_unique<InteractionLog>(config_.data_dir / "interactions.jsonl");

    auto& svr = impl_->server;
    Impl& impl = *impl_;
    const ServiceConfig& cfg = config_;
    DatasetStore& store = datasets_;

    auto guarded = [&cfg](auto handler) {
        return [&cfg, handler](const httplib::Request& req, httplib::Response& res) {
            if (!cfg.api_token.empty() && req.path != "/health" &&
                req.get_header_value("Authorization") != "Bearer " + cfg.api_token) {
                send_error(res, 401, "unauthorized", "missing or wrong bearer token");
                return;
            }
            try {
                handler(req, res);
            } catch (const Error& e) {
                send_error(res, e);
            } catch (const std::exception& e) {
                send_error(res, 500, "internal", e.what());
            }
        };
    };

    auto find_session = [&impl](const std::string& id) {
        std::shared_lock lock(impl.sessions_mutex);
        auto it = impl.sessions.find(id);
        if (it == impl.sessions.end()) throw Error(ErrorCode::not_found, "unknown session '" + id + "'");
        return it->second;
    };

    svr.Get("/health", guarded([&, find_session](const httplib::Request&, httplib::Response& res) {
                std::size_t sessions = 0;
                {
                    std::shared_lock lock(impl.sessions_mutex);
                    sessions = impl.sessions.size();
                }
                send_json(res, 200, {{"status", "ok"}, {"backend", impl.backend->id()}, {"sessions", sessions}});
            }));

    svr.Get("/catalog", guarded([&, find_session](const httplib::Request&, httplib::Response& res) {
                send_json(res, 200, {{"questions", OfflineTranslator::catalog()},
                                     {"dsl_keywords", dsl::keywords()},
                                     {"metrics", dsl::metrics()}});
            }));

    svr.Get("/datasets", guarded([&, find_session](const httplib::Request&, httplib::Response& res) {
                send_json(res, 200, {{"datasets", store.list()}});
            }));

    svr.Post("/datasets", guarded([&, find_session](const httplib::Request& req, httplib::Response& res) {
                 std::optional<std::string> history;
                 if (has_part(req, "history")) history = part(req, "history");
                 const std::string id = store.add(part(req, "network"), part(req, "demand"), history);
                 const auto ds = store.get(id);
                 json warnings = json::array();
                 for (const auto& i : validate(ds->network, ds->demand)) warnings.push_back(to_json(i));
                 send_json(res, 201, {{"dataset_id", id}, {"warnings", warnings}});
             }));

    svr.Post("/sessions", guarded([&, find_session](const httplib::Request& req, httplib::Response& res) {
                 const json body = body_json(req);
                 const std::string dataset_id = body.value("dataset_id", std::string());
                 if (dataset_id.empty()) throw Error(ErrorCode::malformed_input, "dataset_id is required");
                 auto ds = store.get(dataset_id);
                 PipelineConfig pc;
                 pc.example_count = cfg.example_count;
                 pc.paraphrase = cfg.paraphrase;
                 auto session = std::make_shared<Session>();
                 session->id = random_session_id();
                 session->dataset_id = dataset_id;
                 session->created_at = now_iso();
                 session->state = make_session(ds, *impl.backend, impl.bank, store.history(dataset_id), pc);
                 {
                     std::unique_lock lock(impl.sessions_mutex);
                     impl.sessions[session->id] = session;
                 }
                 send_json(res, 201, {{"session_id", session->id},
                                      {"dataset_id", dataset_id},
                                      {"created_at", session->created_at},
                                      {"baseline", plan_summary_json(*session->state.baseline)}});
             }));

    svr.Delete(R"(/sessions/([0-9a-f]+))", guarded([&, find_session](const httplib::Request& req, httplib::Response& res) {
                   std::unique_lock lock(impl.sessions_mutex);
                   if (impl.sessions.erase(req.matches[1]) == 0) {
                       throw Error(ErrorCode::not_found, "unknown session '" + std::string(req.matches[1]) + "'");
                   }
                   send_json(res, 200, {{"deleted", std::string(req.matches[1])}});
               }));

    svr.Post(R"(/sessions/([^/]+)/ask)", guarded([&, find_session](const httplib::Request& req, httplib::Response& res) {
                 auto session = find_session(req.matches[1]);
                 const json body = body_json(req);
                 const std::string question = body.contains("question") && body.at("question").is_string()
                                                  ? body.at("question").get<std::string>()
                                                  : "";
                 if (question.find_first_not_of(" \t\r\n") == std::string::npos) {
                     send_error(res, 422, "empty_question", "question must be a non-empty string");
                     return;
                 }
                 std::lock_guard lock(session->mutex);
                 const auto start = std::chrono::steady_clock::now();
                 auto elapsed = [&start] {
                     return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                 };
                 try {
                     const Answer a = answer(question, session->state);
                     impl.log->append(session->id, question, a, elapsed());
                     send_json(res, 200, to_json(a));
                 } catch (const Error& e) {
                     impl.log->append_failure(session->id, question, e.what(), elapsed());
                     throw;
                 }
             }));

    svr.Post(R"(/sessions/([^/]+)/scenario)", guarded([&, find_session](const httplib::Request& req, httplib::Response& res) {
                 auto session = find_session(req.matches[1]);
                 const json body = body_json(req);
                 const std::string text = body.value("dsl", std::string());
                 std::lock_guard lock(session->mutex);
                 try {
                     const auto script = dsl::parse(text);
                     const auto& ds = *session->state.dataset;
                     if (script.query_only()) {
                         send_json(res, 200, to_json(execute(script, session->state)));
                         return;
                     }
                     const auto applied = apply(script, ds.network, ds.demand);
                     json out = to_json(execute(script, session->state));
                     out["diff"] = out["structured"];
                     out["log"] = to_json(applied.log);
                     send_json(res, 200, out);
                 } catch (const Error& e) {
                     send_error(res, e);
                     if (res.status != 503) res.status = 400;
                 }
             }));

    svr.Get(R"(/sessions/([^/]+)/plan)", guarded([&, find_session](const httplib::Request& req, httplib::Response& res) {
                auto session = find_session(req.matches[1]);
                send_json(res, 200, to_json(*session->state.baseline));
            }));

    svr.Get(R"(/sessions/([^/]+)/alerts)", guarded([&, find_session](const httplib::Request& req, httplib::Response& res) {
                auto session = find_session(req.matches[1]);
                json alerts = json::array();
                for (const auto& a : monitor_lead_times(*session->state.history, cfg.monitor,
                                                        &session->state.dataset->network)) {
                    alerts.push_back(to_json(a));
                }
                send_json(res, 200, {{"alerts", alerts}});
            }));

    svr.Post(R"(/sessions/([^/]+)/suggest)", guarded([&, find_session](const httplib::Request& req, httplib::Response& res) {
                 auto session = find_session(req.matches[1]);
                 const json body = body_json(req);
                 std::vector<Lane> candidates;
                 try {
                     for (const auto& c : body.value("candidates", json::array())) {
                         Lane l;
                         l.origin = c.at("origin").get<std::string>();
                         l.destination = c.at("destination").get<std::string>();
                         l.unit_ship_cost = c.at("unit_ship_cost").get<double>();
                         l.capacity = c.at("capacity").get<double>();
                         l.lead_time = c.value("lead_time", 0.0);
                         candidates.push_back(std::move(l));
                     }
                 } catch (const json::exception& e) {
                     throw Error(ErrorCode::malformed_input, std::string("candidates: ") + e.what());
                 }
                 const auto& ds = *session->state.dataset;
                 json out = json::array();
                 for (const auto& s :
                      suggest_improvements(ds.network, ds.demand, *session->state.baseline, candidates)) {
                     out.push_back({{"origin", s.candidate.origin},
                                    {"destination", s.candidate.destination},
                                    {"unit_ship_cost", s.candidate.unit_ship_cost},
                                    {"capacity", s.candidate.capacity},
                                    {"lead_time", s.candidate.lead_time},
                                    {"diff", to_json(s.diff)}});
                 }
                 send_json(res, 200, {{"suggestions", out}});
             }));

    svr.Post("/drift", guarded([&, find_session](const httplib::Request& req, httplib::Response& res) {
                 std::string a_name = "a", b_name = "b";
                 if (req.is_multipart_form_data()) {
                     if (req.has_file("a") && !req.get_file_value("a").filename.empty()) {
                         a_name = fs::path(req.get_file_value("a").filename).stem().string();
                     }
                     if (req.has_file("b") && !req.get_file_value("b").filename.empty()) {
                         b_name = fs::path(req.get_file_value("b").filename).stem().string();
                     }
                 }
                 const auto a = parse_demand(part(req, "a"), a_name, "a");
                 const auto b = parse_demand(part(req, "b"), b_name, "b");
                 const auto report = compute_drift(a, b, cfg.drift);
                 send_json(res, 200, {{"report", to_json(report)},
                                      {"markdown", render_report(report, ReportFormat::markdown)},
                                      {"email_text", render_report(report, ReportFormat::email_text)}});
             }));

    svr.Post("/eval", guarded([&, find_session](const httplib::Request& req, httplib::Response& res) {
                 const json body = body_json(req);
                 std::vector<BankItem> bank;
                 if (body.contains("bank_text")) {
                     bank = parse_bank(body.at("bank_text").get<std::string>());
                 } else {
                     const fs::path rel = body.value("bank", std::string());
                     if (rel.empty()) throw Error(ErrorCode::malformed_input, "bank or bank_text is required");
                     if (rel.is_absolute() || std::any_of(rel.begin(), rel.end(), [](const fs::path& p) { return p == ".."; })) {
                         throw Error(ErrorCode::malformed_input, "bank path must be relative to the data directory");
                     }
                     if (!fs::exists(cfg.data_dir / rel)) throw Error(ErrorCode::not_found, "no bank at " + rel.string());
                     bank = load_bank(cfg.data_dir / rel);
                 }
                 std::string dataset_id = body.value("dataset_id", std::string());
                 if (dataset_id.empty()) {
                     const auto all = store.list();
                     if (all.size() != 1) throw Error(ErrorCode::malformed_input, "dataset_id is required");
                     dataset_id = all.front();
                 }
                 const std::string backend_name = body.value("backend", std::string("configured"));
                 OfflineTranslator offline;
                 TranslatorBackend* backend = impl.backend.get();
                 if (backend_name == "offline") backend = &offline;
                 else if (backend_name != "configured") throw Error(ErrorCode::malformed_input, "backend must be offline or configured");
                 PipelineConfig pc;
                 pc.example_count = cfg.example_count;
                 const auto session = make_session(store.get(dataset_id), *backend, impl.bank, store.history(dataset_id), pc);
                 EvalOptions options;
                 options.supported_only = body.value("supported_only", false);
                 options.evaluations = body.value("evaluations", std::size_t{0});
                 const auto report = run_eval(bank, *backend, session, options);
                 json out = to_json(report);
                 out["summary"] = summary_table(report);
                 std::ofstream(cfg.data_dir / "eval_report.json") << out.dump(2) << '\n';
                 send_json(res, 200, out);
             }));

    svr.set_payload_max_length(64 * 1024 * 1024);
}

Service::~Service() { stop(); }

std::string Service::preload(const fs::path& dir) {
    const std::string id = datasets_.add(read_text_file(dir / "network.json"), read_text_file(dir / "demand.csv"));
    const fs::path history = dir / "history.jsonl";
    const fs::path target = config_.data_dir / "datasets" / id / "history.jsonl";
    if (fs::exists(history) && !fs::exists(target)) fs::copy_file(history, target);
    return id;
}

int Service::start() {
    if (config_.port == 0) {
        port_ = impl_->server.bind_to_any_port(config_.host);
    } else {
        port_ = impl_->server.bind_to_port(config_.host, config_.port) ? config_.port : -1;
    }
    if (port_ < 0) throw Error(ErrorCode::invalid_value, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void Service::run() {
    if (!thread_.joinable()) start();
    thread_.join();
}

void Service::stop() {
    if (impl_) impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace whatif
