#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sdesql {

enum class TemplateId {
    entity_extraction,
    column_selection,
    candidates_exploration,
    combinations_exploration,
    zero_shot_generation,
    error_feedback_repair,
    solution_exploration,
    final_refinement,
    target_checking,
};

inline constexpr std::array<TemplateId, 9> kAllTemplateIds = {
    TemplateId::entity_extraction,      TemplateId::column_selection,     TemplateId::candidates_exploration,
    TemplateId::combinations_exploration, TemplateId::zero_shot_generation, TemplateId::error_feedback_repair,
    TemplateId::solution_exploration,   TemplateId::final_refinement,     TemplateId::target_checking,
};

std::string_view to_string(TemplateId id);
/// Throws UnknownTemplate.
TemplateId parse_template_id(std::string_view name);

using Bindings = std::map<std::string, std::string>;

/// Prompt texts keyed by template id, with `{{name}}` placeholders.
class TemplateRegistry {
public:
    /// Reads `<dir>/<id>.tmpl` for every known id. Throws MissingFile.
    static TemplateRegistry load(const std::filesystem::path& dir);

    /// Directory from SDESQL_TEMPLATE_DIR, else the build-time default.
    static std::filesystem::path default_dir();

    void add(std::string id, std::string body);
    bool contains(std::string_view id) const;
    const std::string& body(std::string_view id) const;

    /// Placeholder names in first-appearance order, without duplicates.
    std::vector<std::string> placeholders(std::string_view id) const;

    /// Throws UnknownTemplate or MissingBinding. Extra bindings are ignored.
    std::string render(std::string_view id, const Bindings& bindings) const;

    /// Startup drift check: every id used by the pipeline must be registered.
    void verify_complete() const;

private:
    std::map<std::string, std::string, std::less<>> bodies_;
};

std::string render_prompt(const TemplateRegistry& registry, TemplateId id, const Bindings& bindings);

}  // namespace sdesql
