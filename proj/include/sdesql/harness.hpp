#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "sdesql/llm_client.hpp"

namespace sdesql {

struct ClientOptions {
    LlmMode mode = LlmMode::replay;
    std::filesystem::path cassette;
    std::filesystem::path templates_dir;  // empty: TemplateRegistry::default_dir()
    std::optional<std::filesystem::path> script;  // scripted backend instead of HTTP
};

/// Replay requires an existing cassette; record appends to it (creating it
/// when missing); live and record use the scripted backend when a script is
/// given, the HTTP endpoint otherwise. Throws ConfigError / MissingFile.
std::shared_ptr<LlmClient> make_client(const ClientOptions& options);

}  // namespace sdesql
