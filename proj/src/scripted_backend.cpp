#include "sdesql/scripted_backend.hpp"

#include <fstream>

#include "sdesql/error.hpp"

namespace sdesql {

using nlohmann::json;

std::shared_ptr<ScriptedBackend> ScriptedBackend::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw MalformedRecord(0, "<file>", e.what());
    }
    return from_json(doc);
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const json& doc) {
    if (!doc.contains("rules") || !doc["rules"].is_array()) throw MalformedRecord(0, "rules", "expected an array");
    std::vector<ScriptRule> rules;
    const auto& arr = doc["rules"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& r = arr[i];
        ScriptRule rule;
        try {
            rule.template_id = parse_template_id(r.at("template").get<std::string>());
            if (r.contains("when")) rule.when = r["when"].get<std::map<std::string, std::string>>();
            if (r.contains("completions")) rule.completions = r["completions"].get<std::vector<std::string>>();
            if (r.contains("completion")) rule.completions.push_back(r["completion"].get<std::string>());
        } catch (const json::exception& e) {
            throw MalformedRecord(i, "rule", e.what());
        } catch (const UnknownTemplate& e) {
            throw MalformedRecord(i, "template", e.what());
        }
        if (rule.completions.empty()) throw MalformedRecord(i, "completions", "missing");
        rules.push_back(std::move(rule));
    }
    return std::make_shared<ScriptedBackend>(std::move(rules));
}

std::vector<std::string> ScriptedBackend::complete(const LlmRequest& request, const std::string& prompt,
                                                   Usage& usage) {
    for (const auto& rule : rules_) {
        if (rule.template_id != request.template_id) continue;
        bool fires = true;
        for (const auto& [key, needle] : rule.when) {
            auto it = request.bindings.find(key);
            if (it == request.bindings.end() || it->second.find(needle) == std::string::npos) {
                fires = false;
                break;
            }
        }
        if (!fires) continue;
        std::vector<std::string> out;
        for (int i = 0; i < request.sampling.n_samples; ++i) {
            out.push_back(rule.completions[static_cast<std::size_t>(i) % rule.completions.size()]);
        }
        usage.prompt_tokens += static_cast<std::int64_t>(prompt.size() / 4);
        for (const auto& c : out) usage.completion_tokens += static_cast<std::int64_t>(c.size() / 4);
        return out;
    }
    throw EndpointError(404, "no script rule for " + std::string(to_string(request.template_id)));
}

}  // namespace sdesql
