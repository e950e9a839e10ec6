#include "sdesql/templates.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sdesql/error.hpp"

#ifndef SDESQL_DEFAULT_TEMPLATE_DIR
#define SDESQL_DEFAULT_TEMPLATE_DIR "templates"
#endif

namespace sdesql {

namespace {

constexpr std::array<std::string_view, 9> kNames = {
    "entity_extraction",    "column_selection",      "candidates_exploration",
    "combinations_exploration", "zero_shot_generation", "error_feedback_repair",
    "solution_exploration", "final_refinement",      "target_checking",
};

// Calls `on_text` for literal runs and `on_name` for each placeholder.
template <class Text, class Name>
void scan(std::string_view body, Text on_text, Name on_name) {
    std::size_t i = 0;
    while (i < body.size()) {
        std::size_t open = body.find("{{", i);
        if (open == std::string_view::npos) {
            on_text(body.substr(i));
            return;
        }
        std::size_t close = body.find("}}", open + 2);
        if (close == std::string_view::npos) {
            on_text(body.substr(i));
            return;
        }
        on_text(body.substr(i, open - i));
        on_name(body.substr(open + 2, close - open - 2));
        i = close + 2;
    }
}

}  // namespace

std::string_view to_string(TemplateId id) { return kNames[static_cast<std::size_t>(id)]; }

TemplateId parse_template_id(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) return static_cast<TemplateId>(i);
    }
    throw UnknownTemplate(std::string(name));
}

std::filesystem::path TemplateRegistry::default_dir() {
    if (const char* env = std::getenv("SDESQL_TEMPLATE_DIR"); env && *env) return env;
    return SDESQL_DEFAULT_TEMPLATE_DIR;
}

TemplateRegistry TemplateRegistry::load(const std::filesystem::path& dir) {
    TemplateRegistry reg;
    for (auto name : kNames) {
        auto path = dir / (std::string(name) + ".tmpl");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw MissingFile(path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        reg.add(std::string(name), ss.str());
    }
    return reg;
}

void TemplateRegistry::add(std::string id, std::string body) { bodies_[std::move(id)] = std::move(body); }

bool TemplateRegistry::contains(std::string_view id) const { return bodies_.find(id) != bodies_.end(); }

const std::string& TemplateRegistry::body(std::string_view id) const {
    auto it = bodies_.find(id);
    if (it == bodies_.end()) throw UnknownTemplate(std::string(id));
    return it->second;
}

std::vector<std::string> TemplateRegistry::placeholders(std::string_view id) const {
    std::vector<std::string> names;
    scan(body(id), [](std::string_view) {}, [&](std::string_view n) {
        std::string s(n);
        if (std::find(names.begin(), names.end(), s) == names.end()) names.push_back(std::move(s));
    });
    return names;
}

std::string TemplateRegistry::render(std::string_view id, const Bindings& bindings) const {
    const std::string& b = body(id);
    std::string out;
    out.reserve(b.size());
    scan(b, [&](std::string_view t) { out += t; }, [&](std::string_view n) {
        auto it = bindings.find(std::string(n));
        if (it == bindings.end()) throw MissingBinding(std::string(n));
        out += it->second;
    });
    return out;
}

void TemplateRegistry::verify_complete() const {
    for (auto name : kNames) {
        if (!contains(name)) throw UnknownTemplate(std::string(name));
    }
}

std::string render_prompt(const TemplateRegistry& registry, TemplateId id, const Bindings& bindings) {
    return registry.render(to_string(id), bindings);
}

}  // namespace sdesql
