#include "sdesql/http_backend.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>

#include "sdesql/error.hpp"

namespace sdesql {

using nlohmann::json;

HttpBackendConfig http_config_from_env() {
    auto get = [](const char* name) -> std::string {
        const char* v = std::getenv(name);
        return v ? v : "";
    };
    HttpBackendConfig c;
    c.base_url = get("SDESQL_LLM_URL");
    c.api_key = get("SDESQL_LLM_API_KEY");
    c.model = get("SDESQL_LLM_MODEL");
    if (c.base_url.empty()) throw ConfigError("SDESQL_LLM_URL is not set");
    if (c.model.empty()) throw ConfigError("SDESQL_LLM_MODEL is not set");
    return c;
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
    const std::string& url = config_.base_url;
    auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
    auto slash = url.find('/', scheme + 3);
    origin_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "" : url.substr(slash);
    while (!path_.empty() && path_.back() == '/') path_.pop_back();
    path_ += "/chat/completions";
}

std::vector<std::string> HttpChatBackend::complete(const LlmRequest& request, const std::string& prompt,
                                                   Usage& usage) {
    httplib::Client cli(origin_);
    cli.set_connection_timeout(config_.timeout);
    cli.set_read_timeout(config_.timeout);
    cli.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::vector<std::string> out;
    const auto want = static_cast<std::size_t>(request.sampling.n_samples);
    for (int attempt = 0; out.size() < want && attempt < request.sampling.n_samples; ++attempt) {
        json body = {{"model", config_.model},
                     {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                     {"temperature", request.sampling.temperature},
                     {"n", want - out.size()},
                     {"max_tokens", request.sampling.max_tokens}};
        if (request.sampling.seed) body["seed"] = *request.sampling.seed;
        auto res = cli.Post(path_, headers, body.dump(), "application/json");
        if (!res) {
            if (res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
                res.error() == httplib::Error::ConnectionTimeout) {
                throw LlmTimeout("endpoint timed out: " + httplib::to_string(res.error()));
            }
            throw EndpointError(0, httplib::to_string(res.error()));
        }
        if (res->status < 200 || res->status >= 300) throw EndpointError(res->status, res->body);
        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array()) {
            throw EndpointError(res->status, res->body);
        }
        for (const auto& choice : j["choices"]) {
            if (out.size() == want) break;
            std::string content;
            if (choice.is_object() && choice.contains("message") && choice["message"].is_object()) {
                content = choice["message"].value("content", std::string());
            }
            out.push_back(std::move(content));
        }
        if (j.contains("usage") && j["usage"].is_object()) {
            usage.prompt_tokens += j["usage"].value("prompt_tokens", 0);
            usage.completion_tokens += j["usage"].value("completion_tokens", 0);
        }
    }
    return out;
}

}  // namespace sdesql
