#pragma once

#include <chrono>
#include <string>

#include "sdesql/llm_client.hpp"

namespace sdesql {

struct HttpBackendConfig {
    std::string base_url;  // e.g. https://host/v1 ; /chat/completions is appended
    std::string api_key;
    std::string model;
    std::chrono::seconds timeout{120};
};

/// Reads SDESQL_LLM_URL, SDESQL_LLM_API_KEY and SDESQL_LLM_MODEL. Throws ConfigError.
HttpBackendConfig http_config_from_env();

/// OpenAI-style chat-completions endpoint. When the server returns fewer
/// choices than requested, further calls top the list up.
class HttpChatBackend : public CompletionBackend {
public:
    explicit HttpChatBackend(HttpBackendConfig config);
    std::vector<std::string> complete(const LlmRequest& request, const std::string& prompt, Usage& usage) override;

private:
    HttpBackendConfig config_;
    std::string origin_;
    std::string path_;
};

}  // namespace sdesql
