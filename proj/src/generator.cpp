#include "sdesql/generator.hpp"

#include <algorithm>
#include <map>

#include "sdesql/error.hpp"
#include "sdesql/sqlkit.hpp"
#include "sdesql/structured.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

std::string error_class(const std::string& message) {
    std::string m = text::to_lower(message);
    for (const char* k : {"no such column", "no such table", "no such function", "ambiguous column",
                          "syntax error", "misuse of aggregate", "only a single select", "read-only"}) {
        if (m.find(k) != std::string::npos) return text::replace_all(text::replace_all(k, " ", "_"), "-", "_");
    }
    return "other";
}

std::string group_key(const ExecutionOutcome& outcome, bool order_sensitive) {
    switch (outcome.status) {
        case ExecStatus::rows: return "rows:" + result_digest(canonicalize(outcome, order_sensitive));
        case ExecStatus::empty: return "empty";
        case ExecStatus::error: return "error:" + error_class(outcome.error_message);
        case ExecStatus::timeout: return "timeout";
    }
    return "?";
}

GenerationResult generate_candidates(Conversation& conv, const GenerationInputs& inputs, int n, Database& db,
                                     const ExecutionLimits& limits, const std::string& fallback_sql) {
    LlmRequest req{TemplateId::zero_shot_generation,
                   {{"question", inputs.question},
                    {"evidence", inputs.evidence},
                    {"schema", inputs.schema_text},
                    {"exploration_report", inputs.exploration_report}},
                   n == 1 ? greedy() : consistency_sampling(n)};
    auto resp = conv.ask(req);
    GenerationResult out;
    for (std::size_t i = 0; i < resp.completions.size(); ++i) {
        std::string sql;
        try {
            auto blocks = parse_sql_blocks(resp.completions[i]);
            sql = sql::render(sql::parse(blocks.back()));
        } catch (const Error&) {
            out.discarded.push_back(i);
            continue;
        }
        auto outcome = db.execute(sql, limits);
        auto key = group_key(outcome);
        out.candidates.push_back({std::move(sql), std::move(outcome), std::move(key), i});
    }
    if (out.candidates.empty()) {
        out.all_unparseable = true;
        auto outcome = db.execute(fallback_sql, limits);
        auto key = group_key(outcome);
        out.candidates.push_back({fallback_sql, std::move(outcome), std::move(key), resp.completions.size()});
    }
    out.selected = select_by_consistency(out.candidates);
    return out;
}

std::size_t select_by_consistency(const std::vector<CandidateSql>& candidates) {
    if (candidates.empty()) throw Error("select_by_consistency needs at least one candidate");
    struct Group {
        std::size_t size = 0;
        std::size_t earliest_sample = 0;
        std::size_t earliest_pos = 0;
    };
    std::map<std::string, Group> groups;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        auto [it, fresh] = groups.try_emplace(c.group_key, Group{0, c.sample_index, i});
        auto& g = it->second;
        ++g.size;
        if (!fresh && c.sample_index < g.earliest_sample) {
            g.earliest_sample = c.sample_index;
            g.earliest_pos = i;
        }
    }
    auto tier = [&](const Group& g) { return status_rank(candidates[g.earliest_pos].outcome.status); };
    const Group* best = nullptr;
    for (const auto& [key, g] : groups) {
        if (!best) {
            best = &g;
            continue;
        }
        int tb = tier(*best), tg = tier(g);
        if (tg != tb) {
            if (tg > tb) best = &g;
            continue;
        }
        if (g.size != best->size) {
            if (g.size > best->size) best = &g;
            continue;
        }
        if (g.earliest_sample < best->earliest_sample) best = &g;
    }
    return best->earliest_pos;
}

}  // namespace sdesql
