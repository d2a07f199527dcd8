#include <httplib.h>

#include "whatif/error.hpp"
#include "whatif/pipeline.hpp"

namespace whatif {

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // base path without trailing slash
};

Endpoint split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error(ErrorCode::invalid_value, "backend URL needs a scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    Endpoint e;
    e.origin = url.substr(0, slash);
    e.path = slash == std::string::npos ? "" : url.substr(slash);
    while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
    return e;
}

}  // namespace

std::string RemoteBackend::complete(const Prompt& prompt) {
    const Endpoint endpoint = split_url(config_.base_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (endpoint.origin.rfind("https://", 0) == 0) {
        throw Error(ErrorCode::backend_unavailable, "this build has no TLS support for " + endpoint.origin);
    }
#endif
    httplib::Client client(endpoint.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), static_cast<time_t>(micros.count()));
    client.set_read_timeout(seconds.count(), static_cast<time_t>(micros.count()));
    client.set_write_timeout(seconds.count(), static_cast<time_t>(micros.count()));
    httplib::Headers headers;
    if (!config_.auth_token.empty()) headers.emplace("Authorization", "Bearer " + config_.auth_token);
    auto result = client.Post(endpoint.path + "/chat/completions", headers, request_body(config_, prompt),
                              "application/json");
    if (!result) {
        throw Error(ErrorCode::backend_unavailable,
                    "translator backend unreachable: " + httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
        throw Error(ErrorCode::backend_unavailable, "translator backend returned HTTP " + std::to_string(result->status));
    }
    return parse_response(result->body);
}

}  // namespace whatif
