#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdesql/llm_client.hpp"

namespace sdesql {

/// Rule-driven stand-in for a chat endpoint, used to author cassettes offline.
/// A rule fires when its template matches and every `when` binding contains
/// the given substring; the first firing rule answers. Completions are cycled
/// to fill `n_samples`.
struct ScriptRule {
    TemplateId template_id = TemplateId::entity_extraction;
    std::map<std::string, std::string> when;
    std::vector<std::string> completions;
};

class ScriptedBackend : public CompletionBackend {
public:
    explicit ScriptedBackend(std::vector<ScriptRule> rules) : rules_(std::move(rules)) {}
    /// Reads `{"rules": [{"template", "when", "completions" | "completion"}]}`.
    static std::shared_ptr<ScriptedBackend> load(const std::filesystem::path& path);
    static std::shared_ptr<ScriptedBackend> from_json(const nlohmann::json& doc);

    /// Throws EndpointError(404) when no rule fires.
    std::vector<std::string> complete(const LlmRequest& request, const std::string& prompt, Usage& usage) override;

    const std::vector<ScriptRule>& rules() const noexcept { return rules_; }

private:
    std::vector<ScriptRule> rules_;
};

}  // namespace sdesql
