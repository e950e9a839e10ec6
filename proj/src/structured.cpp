#include "sdesql/structured.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>

#include "sdesql/error.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

namespace {

std::vector<std::string_view> lines_of(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i <= s.size()) {
        std::size_t nl = s.find('\n', i);
        if (nl == std::string_view::npos) nl = s.size();
        std::string_view line = s.substr(i, nl - i);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        i = nl + 1;
    }
    return out;
}

std::string strip_quotes(std::string_view s) {
    s = text::trim(s);
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'') ||
                          (s.front() == '`' && s.back() == '`'))) {
        s = s.substr(1, s.size() - 2);
    }
    return std::string(text::trim(s));
}

std::string_view strip_bullet(std::string_view line) {
    line = text::trim(line);
    if (line.starts_with("- ") || line.starts_with("* ")) return text::trim(line.substr(2));
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i + 1 < line.size() && (line[i] == '.' || line[i] == ')') && line[i + 1] == ' ') {
        return text::trim(line.substr(i + 2));
    }
    return line;
}

void require_text(std::string_view completion) {
    if (text::trim(completion).empty()) throw ParseFailure("empty completion", std::string(completion));
}

std::optional<ColumnPick> parse_pick(std::string_view s) {
    std::string t = strip_quotes(s);
    if (t.empty()) return std::nullopt;
    auto dot = t.find('.');
    if (dot == std::string::npos) return ColumnPick{"", t};
    auto table = strip_quotes(std::string_view(t).substr(0, dot));
    auto column = strip_quotes(std::string_view(t).substr(dot + 1));
    if (column.empty()) return std::nullopt;
    return ColumnPick{table, column};
}

std::optional<SelectionLine> parse_selection(std::string_view line) {
    auto arrow = line.find("=>");
    if (arrow == std::string_view::npos) return std::nullopt;
    SelectionLine sl;
    sl.entity = strip_quotes(line.substr(0, arrow));
    if (sl.entity.empty()) return std::nullopt;
    std::string_view rest = line.substr(arrow + 2);
    std::string_view values;
    if (auto bar = rest.find('|'); bar != std::string_view::npos) {
        values = rest.substr(bar + 1);
        rest = rest.substr(0, bar);
    }
    if (!text::iequals(text::trim(rest), "NONE")) {
        for (const auto& part : text::split(rest, ',')) {
            if (auto p = parse_pick(part)) sl.columns.push_back(*p);
        }
    }
    if (!text::trim(values).empty()) {
        for (const auto& v : text::split(values, ';')) {
            auto s = strip_quotes(v);
            if (!s.empty()) sl.values.push_back(std::move(s));
        }
    }
    return sl;
}

}  // namespace

std::vector<std::string> parse_entity_list(std::string_view completion) {
    require_text(completion);
    auto trimmed = text::trim(completion);
    if (text::iequals(trimmed, "NONE")) return {};
    std::vector<std::string> out;
    auto add = [&](std::string s) {
        if (s.empty()) return;
        for (const auto& e : out) {
            if (text::iequals(e, s)) return;
        }
        out.push_back(std::move(s));
    };
    if (trimmed.front() == '[') {
        auto j = nlohmann::json::parse(trimmed, nullptr, false);
        if (j.is_array()) {
            for (const auto& item : j) {
                if (item.is_string()) add(std::string(text::trim(item.get<std::string>())));
            }
            return out;
        }
    }
    for (auto line : lines_of(completion)) {
        auto t = text::trim(line);
        if (!(t.starts_with("- ") || t.starts_with("* "))) continue;
        add(strip_quotes(strip_bullet(t)));
    }
    if (out.empty()) throw ParseFailure("no entity lines", std::string(completion));
    return out;
}

std::vector<SelectionLine> parse_selection_lines(std::string_view completion) {
    require_text(completion);
    std::vector<SelectionLine> out;
    for (auto line : lines_of(completion)) {
        if (auto sl = parse_selection(strip_bullet(line))) out.push_back(std::move(*sl));
    }
    if (out.empty()) throw ParseFailure("no selection lines", std::string(completion));
    return out;
}

CandidateLines parse_candidate_lines(std::string_view completion) {
    require_text(completion);
    CandidateLines out;
    for (auto line : lines_of(completion)) {
        auto t = strip_bullet(line);
        bool target = text::starts_with_icase(t, "TARGET ");
        bool condition = text::starts_with_icase(t, "CONDITION ");
        if (!target && !condition) continue;
        auto body = t.substr(target ? 7 : 10);
        if (auto sl = parse_selection(body)) (target ? out.targets : out.conditions).push_back(std::move(*sl));
    }
    if (out.targets.empty() && out.conditions.empty()) {
        throw ParseFailure("no TARGET or CONDITION lines", std::string(completion));
    }
    return out;
}

std::vector<std::string> parse_sql_blocks(std::string_view completion) {
    require_text(completion);
    std::vector<std::string> blocks;
    std::size_t i = 0;
    while (true) {
        std::size_t open = completion.find("```", i);
        if (open == std::string_view::npos) break;
        std::size_t body = completion.find('\n', open + 3);
        if (body == std::string_view::npos) break;
        std::size_t close = completion.find("```", body + 1);
        if (close == std::string_view::npos) close = completion.size();
        auto sql = text::trim(completion.substr(body + 1, close - body - 1));
        if (!sql.empty()) blocks.emplace_back(sql);
        if (close >= completion.size()) break;
        i = close + 3;
    }
    if (blocks.empty()) {
        auto t = text::trim(completion);
        if (text::starts_with_icase(t, "SELECT") || text::starts_with_icase(t, "WITH")) blocks.emplace_back(t);
    }
    if (blocks.empty()) throw ParseFailure("no SQL block", std::string(completion));
    return blocks;
}

std::vector<CauseLine> parse_cause_lines(std::string_view completion) {
    require_text(completion);
    std::vector<CauseLine> out;
    for (auto line : lines_of(completion)) {
        auto t = strip_bullet(line);
        if (!text::starts_with_icase(t, "CAUSE:")) continue;
        auto parts = text::split(t.substr(6), '|');
        CauseLine c;
        c.tag = text::to_lower(text::trim(parts[0]));
        for (std::size_t k = 1; k < parts.size(); ++k) {
            auto p = text::trim(parts[k]);
            if (text::starts_with_icase(p, "units:")) {
                for (const auto& n : text::split(p.substr(6), ',')) {
                    auto d = text::trim(n);
                    if (!d.empty() && std::all_of(d.begin(), d.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
                        c.units.push_back(static_cast<std::size_t>(std::stoul(std::string(d))));
                    }
                }
            } else {
                if (!c.rationale.empty()) c.rationale += " | ";
                c.rationale += p;
            }
        }
        if (!c.tag.empty()) out.push_back(std::move(c));
    }
    if (out.empty()) throw ParseFailure("no CAUSE lines", std::string(completion));
    return out;
}

std::set<std::size_t> parse_verdict(std::string_view completion) {
    require_text(completion);
    for (auto line : lines_of(completion)) {
        auto t = strip_bullet(line);
        if (text::iequals(text::trim(t), "KEEP") || text::starts_with_icase(t, "KEEP ")) return {};
        if (!text::starts_with_icase(t, "REMOVE")) continue;
        auto open = t.find('[');
        auto close = t.find(']', open == std::string_view::npos ? 0 : open);
        if (open == std::string_view::npos || close == std::string_view::npos) {
            throw ParseFailure("REMOVE without index list", std::string(completion));
        }
        std::set<std::size_t> out;
        for (const auto& n : text::split(t.substr(open + 1, close - open - 1), ',')) {
            auto d = text::trim(n);
            if (d.empty()) continue;
            if (!std::all_of(d.begin(), d.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
                throw ParseFailure("non-numeric index in REMOVE", std::string(completion));
            }
            out.insert(static_cast<std::size_t>(std::stoul(std::string(d))));
        }
        return out;
    }
    throw ParseFailure("no KEEP or REMOVE verdict", std::string(completion));
}

}  // namespace sdesql
