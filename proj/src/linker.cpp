#include "sdesql/linker.hpp"

#include <algorithm>

#include "sdesql/executor.hpp"
#include "sdesql/sqlkit.hpp"
#include "sdesql/structured.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

namespace {

const ExecutionLimits kLookupLimits{std::chrono::milliseconds(5000), 1};

bool value_present(Database& db, const ColumnId& col, const std::string& value, bool nocase) {
    std::string sql = "SELECT " + sql::render_identifier(col.column) + " FROM " + sql::render_identifier(col.table) +
                      " WHERE " + sql::render_identifier(col.column) + " = " + sql::render_string_literal(value) +
                      (nocase ? " COLLATE NOCASE" : "") + " LIMIT 1";
    return db.execute(sql, kLookupLimits).status == ExecStatus::rows;
}

std::optional<std::string> exact_lookup(Database& db, const ColumnId& col, const std::string& value) {
    std::string sql = "SELECT " + sql::render_identifier(col.column) + " FROM " + sql::render_identifier(col.table) +
                      " WHERE " + sql::render_identifier(col.column) + " = " + sql::render_string_literal(value) +
                      " COLLATE NOCASE LIMIT 1";
    auto out = db.execute(sql, kLookupLimits);
    if (out.status != ExecStatus::rows) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&out.rows[0][0])) return *s;
    return std::nullopt;
}

std::string column_line(const DatabaseCatalog& catalog, const TableInfo& t, const ColumnInfo& c, bool detailed) {
    std::string line = "  - " + c.name + " (" + (c.type.empty() ? "ANY" : c.type);
    if (c.primary_key) line += ", primary key";
    line += ")";
    if (!detailed) return line;
    auto it = catalog.descriptions.find(ColumnId{t.name, c.name});
    if (it == catalog.descriptions.end()) return line;
    const auto& d = it->second;
    if (!d.column_description.empty()) line += ": " + d.column_description;
    if (!d.value_examples.empty()) {
        line += " | examples: ";
        for (std::size_t i = 0; i < d.value_examples.size(); ++i) {
            if (i) line += ", ";
            line += sql::render_string_literal(text::truncate(d.value_examples[i], 40));
        }
    }
    if (!d.value_description.empty()) line += " | values: " + d.value_description;
    return line;
}

std::string render_tables(const DatabaseCatalog& catalog, const std::set<ColumnId>* selected) {
    std::string out;
    for (const auto& t : catalog.tables) {
        out += "Table " + t.name + ":\n";
        for (const auto& c : t.columns) {
            bool detailed = !selected || selected->count(ColumnId{t.name, c.name}) > 0;
            out += column_line(catalog, t, c, detailed) + "\n";
        }
    }
    auto rel = catalog.relations();
    if (!rel.empty()) {
        out += "Foreign keys:\n";
        for (const auto& fk : rel) {
            out += "  - " + fk.from_table + "." + fk.from_column + " = " + fk.to_table + "." + fk.to_column + "\n";
        }
    }
    return out;
}

}  // namespace

double combine_scores(double lexical, double semantic, const LinkerConfig& config) {
    return config.lexical_weight * lexical + config.semantic_weight * semantic;
}

std::vector<Entity> extract_entities(Conversation& conv, const std::string& question, const std::string& evidence) {
    LlmRequest req{TemplateId::entity_extraction, {{"question", question}, {"evidence", evidence}}, greedy()};
    auto parsed = conv.ask_structured<std::vector<std::string>>(
        req, [](const std::string& c) { return parse_entity_list(c); },
        "Answer only with one '- entity' line per entity, or NONE.");
    std::vector<Entity> out;
    if (!parsed) return out;
    for (auto& s : *parsed) {
        if (text::trim(s).empty()) continue;
        out.push_back({std::move(s), {}, {}});
    }
    return out;
}

std::vector<ValueMatch> retrieve_values(const std::string& entity, const ValueIndex& index, Database& db,
                                        const LinkerConfig& config) {
    std::vector<ValueMatch> matches;
    auto query_shingles = shingles(entity, index.config().shingle_size);
    std::string lower = text::to_lower(entity);
    auto score = [&](const ColumnId& col, const std::string& value) {
        ValueMatch m{col, value, jaccard(query_shingles, shingles(value, index.config().shingle_size)),
                     text::edit_similarity(lower, text::to_lower(value)), 0.0};
        m.combined = combine_scores(m.lexical_score, m.semantic_score, config);
        return m;
    };
    for (std::size_t i : index.candidates(entity)) {
        const auto& v = index.values()[i];
        auto m = score(v.column, v.value);
        if (m.combined >= config.threshold) matches.push_back(std::move(m));
    }
    for (const auto& skipped : index.skipped()) {
        if (skipped.reason != SkippedColumn::Reason::too_many_values) continue;
        if (auto stored = exact_lookup(db, skipped.column, entity)) {
            auto m = score(skipped.column, *stored);
            if (m.combined >= config.threshold) matches.push_back(std::move(m));
        }
    }
    std::sort(matches.begin(), matches.end(), [](const ValueMatch& a, const ValueMatch& b) {
        if (a.combined != b.combined) return a.combined > b.combined;
        if (a.column != b.column) return a.column < b.column;
        return a.stored_value < b.stored_value;
    });
    std::vector<ValueMatch> verified;
    for (auto& m : matches) {
        if (verified.size() == config.top_k) break;
        if (value_present(db, m.column, m.stored_value, false)) verified.push_back(std::move(m));
    }
    return verified;
}

std::vector<std::vector<ColumnId>> select_columns(Conversation& conv, const std::vector<Entity>& entities,
                                                  const DatabaseCatalog& catalog, const std::string& question,
                                                  const std::string& evidence) {
    std::vector<std::vector<ColumnId>> out(entities.size());
    auto fallback = [&] {
        for (std::size_t i = 0; i < entities.size(); ++i) {
            for (const auto& m : entities[i].value_matches) {
                if (std::find(out[i].begin(), out[i].end(), m.column) == out[i].end()) out[i].push_back(m.column);
            }
        }
        return out;
    };
    if (entities.empty()) return out;
    LlmRequest req{TemplateId::column_selection,
                   {{"question", question},
                    {"evidence", evidence},
                    {"schema", render_full_schema(catalog)},
                    {"entities", describe_entities(entities)}},
                   greedy()};
    auto parsed = conv.ask_structured<std::vector<SelectionLine>>(
        req, [](const std::string& c) { return parse_selection_lines(c); },
        "Answer only with lines of the form: entity => table.column, table.column (or NONE).");
    if (!parsed) return fallback();
    for (const auto& line : *parsed) {
        for (std::size_t i = 0; i < entities.size(); ++i) {
            if (!text::iequals(entities[i].surface, line.entity)) continue;
            for (const auto& pick : line.columns) {
                std::optional<ColumnId> id;
                if (pick.table.empty()) {
                    auto hosts = catalog.columns_named(pick.column);
                    if (hosts.size() == 1) id = hosts[0];
                } else {
                    id = catalog.resolve(pick.table, pick.column);
                }
                if (id && std::find(out[i].begin(), out[i].end(), *id) == out[i].end()) out[i].push_back(*id);
            }
        }
    }
    return out;
}

SchemaSelection make_selection(const std::vector<Entity>& entities) {
    SchemaSelection sel;
    for (const auto& e : entities) {
        auto& prov = sel.provenance[e.surface];
        for (const auto& c : e.column_candidates) {
            sel.selected.insert(c);
            if (std::find(prov.begin(), prov.end(), c) == prov.end()) prov.push_back(c);
        }
    }
    return sel;
}

std::string render_schema(const DatabaseCatalog& catalog, const SchemaSelection& selection) {
    return render_tables(catalog, &selection.selected);
}

std::string render_full_schema(const DatabaseCatalog& catalog) { return render_tables(catalog, nullptr); }

std::string describe_entities(const std::vector<Entity>& entities) {
    std::string out;
    for (const auto& e : entities) {
        out += "- " + e.surface;
        if (!e.value_matches.empty()) {
            out += " (stored values:";
            for (std::size_t i = 0; i < e.value_matches.size(); ++i) {
                const auto& m = e.value_matches[i];
                out += (i ? ", " : " ") + m.column.qualified() + " = " + sql::render_string_literal(m.stored_value);
            }
            out += ")";
        }
        if (!e.column_candidates.empty()) {
            out += " [columns:";
            for (std::size_t i = 0; i < e.column_candidates.size(); ++i) {
                out += (i ? ", " : " ") + e.column_candidates[i].qualified();
            }
            out += "]";
        }
        out += "\n";
    }
    if (out.empty()) out = "(none)\n";
    return out;
}

}  // namespace sdesql
