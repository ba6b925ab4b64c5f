#include <cmath>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "json_codec.hpp"
#include "screenwise/error.hpp"
#include "screenwise/llmlink.hpp"

namespace screenwise::llm {

using detail::json;

std::string_view to_string(BackendKind k) noexcept {
    switch (k) {
        case BackendKind::remote: return "remote";
        case BackendKind::mock_perfect: return "mock-perfect";
        case BackendKind::mock_noisy: return "mock-noisy";
    }
    return "remote";
}

std::optional<BackendKind> parse_backend_kind(std::string_view s) noexcept {
    if (s == "remote") return BackendKind::remote;
    if (s == "mock-perfect" || s == "mock_perfect") return BackendKind::mock_perfect;
    if (s == "mock-noisy" || s == "mock_noisy") return BackendKind::mock_noisy;
    return std::nullopt;
}

namespace {

std::set<int> index_set(const json& j, const char* key) {
    std::set<int> out;
    auto it = j.find(key);
    if (it == j.end()) return out;
    if (!it->is_array()) throw FormatError(std::string("noise field '") + key + "' must be an array");
    for (const auto& v : *it) {
        if (!v.is_number_integer()) {
            throw FormatError(std::string("noise field '") + key + "' must hold integers");
        }
        out.insert(v.get<int>());
    }
    return out;
}

NoiseProfile profile_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("noise profile must be a JSON object");
    return {index_set(j, "wrong_recommendation"), index_set(j, "extra_rule"), index_set(j, "zero_rule")};
}

}  // namespace

NoiseSchedule parse_noise_schedule(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("noise profile is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw FormatError("noise profile must be a JSON object");
    NoiseSchedule s;
    if (j.contains("structured") || j.contains("unstructured")) {
        if (auto it = j.find("structured"); it != j.end()) s.structured = profile_from_json(*it);
        if (auto it = j.find("unstructured"); it != j.end()) s.unstructured = profile_from_json(*it);
    } else {
        s.structured = s.unstructured = profile_from_json(j);
    }
    return s;
}

NoiseSchedule load_noise_schedule(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError(path, "cannot open noise profile");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_noise_schedule(buf.str());
}

void check_noise_range(const NoiseProfile& p, int case_count) {
    for (const auto* set : {&p.wrong_recommendation, &p.extra_rule, &p.zero_rule}) {
        for (int id : *set) {
            if (id < 1 || id > case_count) {
                throw InvariantViolation("noise index " + std::to_string(id) + " outside case ids 1.." +
                                         std::to_string(case_count));
            }
        }
    }
}

void BackendConfig::validate() const {
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
        throw InvariantViolation("temperature must be >= 0");
    }
    if (max_retries < 0) throw InvariantViolation("max_retries must be >= 0");
    if (!(timeout_s > 0.0)) throw InvariantViolation("timeout must be positive");
    if (kind == BackendKind::remote && endpoint_url.empty()) {
        throw InvariantViolation("remote backend needs an endpoint URL");
    }
}

// ---- HTTP -------------------------------------------------------------------

struct HttpChatBackend::Impl {
    std::string base;  // scheme://host[:port]
    std::string path;  // /v1/chat/completions
    std::string model;
    double temperature;
    std::string api_key;
    std::unique_ptr<httplib::Client> client;
};

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw InvariantViolation("endpoint URL needs a scheme: " + url);
    const auto path_begin = url.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) return {url, "/"};
    return {url.substr(0, path_begin), url.substr(path_begin)};
}

bool is_timeout(httplib::Error e) {
    return e == httplib::Error::Read || e == httplib::Error::ConnectionTimeout;
}

}  // namespace

HttpChatBackend::HttpChatBackend(const BackendConfig& cfg, std::string api_key)
    : impl_(std::make_unique<Impl>()) {
    auto [base, path] = split_url(cfg.endpoint_url);
    impl_->base = base;
    impl_->path = path;
    impl_->model = cfg.model_name;
    impl_->temperature = cfg.temperature;
    impl_->api_key = std::move(api_key);
    impl_->client = std::make_unique<httplib::Client>(impl_->base);
    const auto timeout = std::chrono::milliseconds(static_cast<long>(cfg.timeout_s * 1000));
    impl_->client->set_connection_timeout(timeout);
    impl_->client->set_read_timeout(timeout);
    impl_->client->set_write_timeout(timeout);
    impl_->client->set_bearer_token_auth(impl_->api_key);
}

HttpChatBackend::~HttpChatBackend() = default;

std::string HttpChatBackend::request_body(std::span<const ChatMessage> messages) const {
    json body;
    body["model"] = impl_->model;
    body["temperature"] = impl_->temperature;
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = std::move(msgs);
    return body.dump();
}

std::string HttpChatBackend::complete(std::span<const ChatMessage> messages) {
    auto res = impl_->client->Post(impl_->path, request_body(messages), "application/json");
    if (!res) {
        const auto err = res.error();
        if (is_timeout(err)) throw Timeout(httplib::to_string(err));
        throw BackendError(httplib::to_string(err));
    }
    if (res->status != 200) {
        throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
        auto j = json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw BackendError(std::string("malformed chat response: ") + e.what());
    }
}

void HttpChatBackend::probe() {
    auto res = impl_->client->Get(impl_->path);
    if (!res) {
        throw BackendUnreachable(impl_->base + ": " + httplib::to_string(res.error()));
    }
}

}  // namespace screenwise::llm
