#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>

#include "whatif/drift.hpp"
#include "whatif/insights.hpp"
#include "whatif/pipeline.hpp"

namespace whatif {

enum class BackendKind { offline, remote };

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    BackendKind backend = BackendKind::offline;
    std::string remote_base_url;
    std::string remote_model;
    /// Name of the environment variable holding the bearer token for the
    /// remote backend; the token itself never lives in the config file.
    std::string remote_auth_env;
    std::chrono::milliseconds remote_timeout{30000};
    std::size_t example_count = 5;
    bool paraphrase = false;
    DriftConfig drift;
    MonitorConfig monitor;
    std::filesystem::path data_dir = "whatif-data";
    std::filesystem::path example_bank;  // empty -> <data_dir>/example_bank.jsonl if present
    std::string api_token;               // optional static bearer token for clients
    std::string api_token_env;           // environment variable the token is read from

    /// Throws Error(invalid_value) when a remote backend lacks its URL or
    /// model, or a value is out of range.
    void check() const;
};

/// Reads a JSON config file (missing keys keep defaults), then applies
/// WHATIF_LISTEN (host:port), WHATIF_BACKEND_URL and WHATIF_AUTH_TOKEN_ENV.
ServiceConfig load_config(const std::optional<std::filesystem::path>& path);
void apply_env_overrides(ServiceConfig& config);

/// Stateless function of a config: builds the translator backend.
std::unique_ptr<TranslatorBackend> make_backend(const ServiceConfig& config);

/// Persistent datasets under <data_dir>/datasets/<id>/ and the append-only
/// history and interaction logs. Ids are content fingerprints.
class DatasetStore {
public:
    explicit DatasetStore(std::filesystem::path root);

    /// Validates, persists and returns the dataset id. The optional plan
    /// history must parse before anything is written.
    std::string add(std::string_view network_json, std::string_view demand_csv,
                    std::optional<std::string_view> history_jsonl = std::nullopt);
    std::shared_ptr<const Dataset> get(const std::string& id);
    std::vector<std::string> list() const;
    std::shared_ptr<const PlanHistory> history(const std::string& id);

private:
    std::filesystem::path root_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const Dataset>> cache_;
};

class InteractionLog {
public:
    explicit InteractionLog(std::filesystem::path path) : path_(std::move(path)) {}
    void append(const std::string& session, std::string_view question, const Answer& answer,
                double latency_ms);
    void append_failure(const std::string& session, std::string_view question,
                        const std::string& error, double latency_ms);

private:
    std::filesystem::path path_;
    std::mutex mutex_;
};

std::string random_session_id();

class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port.
    /// Returns the bound port.
    int start();
    /// Blocks in the calling thread until stop().
    void run();
    void stop();
    int port() const { return port_; }

    DatasetStore& datasets() { return datasets_; }
    /// Loads a dataset directory into the store (used by `serve --dataset`).
    std::string preload(const std::filesystem::path& dir);

    struct Impl;

private:
    ServiceConfig config_;
    DatasetStore datasets_;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace whatif
