#include "sdesql/explorer.hpp"

#include <algorithm>

#include "sdesql/error.hpp"
#include "sdesql/sqlkit.hpp"
#include "sdesql/structured.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

namespace {

std::optional<ForeignKey> link_between(const DatabaseCatalog& catalog, const std::string& a, const std::string& b) {
    for (const auto& fk : catalog.relations()) {
        if ((text::iequals(fk.from_table, a) && text::iequals(fk.to_table, b)) ||
            (text::iequals(fk.from_table, b) && text::iequals(fk.to_table, a))) {
            return fk;
        }
    }
    return std::nullopt;
}

// SELECT over columns that may span FK-linked tables; nullopt when a table is unreachable.
std::optional<sql::SqlAst> base_query(const std::vector<ColumnId>& columns, const DatabaseCatalog& catalog) {
    std::vector<std::string> tables;
    for (const auto& c : columns) {
        if (std::find(tables.begin(), tables.end(), c.table) == tables.end()) tables.push_back(c.table);
    }
    sql::SqlAst ast;
    ast.core.has_from = true;
    ast.core.from.name = tables.front();
    for (std::size_t i = 1; i < tables.size(); ++i) {
        std::optional<ForeignKey> fk;
        for (std::size_t k = 0; k < i && !fk; ++k) fk = link_between(catalog, tables[k], tables[i]);
        if (!fk) return std::nullopt;
        sql::Join j;
        j.kind = sql::JoinKind::inner;
        j.table.name = tables[i];
        j.on = sql::Expr{sql::BinaryOp{sql::BinaryOp::Op::eq, sql::Expr{sql::ColumnRef{fk->from_table, fk->from_column}},
                                       sql::Expr{sql::ColumnRef{fk->to_table, fk->to_column}}}};
        ast.core.joins.push_back(std::move(j));
    }
    bool qualify = tables.size() > 1;
    for (const auto& c : columns) {
        sql::SelectItem item;
        item.expr = sql::Expr{sql::ColumnRef{qualify ? c.table : "", c.column}};
        ast.core.items.push_back(std::move(item));
    }
    return ast;
}

sql::ProbeCondition probe_condition(const ConditionCandidate& c) { return {c.column.table, c.column.column, c.op, c.value}; }

std::optional<ColumnId> resolve_pick(const DatabaseCatalog& catalog, const ColumnPick& pick) {
    if (pick.table.empty()) {
        auto hosts = catalog.columns_named(pick.column);
        if (hosts.size() == 1) return hosts[0];
        return std::nullopt;
    }
    return catalog.resolve(pick.table, pick.column);
}

void push_unique(std::vector<ColumnId>& v, const ColumnId& c) {
    if (std::find(v.begin(), v.end(), c) == v.end()) v.push_back(c);
}

}  // namespace

std::string_view to_string(ProbeKind k) {
    switch (k) {
        case ProbeKind::base: return "base";
        case ProbeKind::condition: return "condition";
        case ProbeKind::combination: return "combination";
        case ProbeKind::diagnostic: return "diagnostic";
        case ProbeKind::solution: return "solution";
    }
    return "?";
}

std::string ConditionCandidate::describe() const {
    std::string s = column.qualified() + " " + op;
    if (value) s += " " + sql::render_string_literal(*value);
    return s;
}

std::string digest_line(const std::string& sql, const ExecutionOutcome& outcome) {
    std::string line = sql + " → ";
    switch (outcome.status) {
        case ExecStatus::rows: {
            line += std::to_string(outcome.row_count) + " | ";
            const auto& row = outcome.rows.front();
            for (std::size_t i = 0; i < row.size() && i < 5; ++i) {
                if (i) line += ", ";
                line += text::truncate(cell_to_string(row[i]), 40);
            }
            if (row.size() > 5) line += ", ...";
            break;
        }
        case ExecStatus::empty: line += "(no rows)"; break;
        case ExecStatus::error: line += "error: " + text::first_line(outcome.error_message); break;
        case ExecStatus::timeout: line += "timeout"; break;
    }
    return line;
}

CandidateSets propose_candidates(Conversation& conv, const std::string& question, const std::string& evidence,
                                 const std::string& schema_text, const std::vector<Entity>& entities,
                                 const DatabaseCatalog& catalog, std::vector<std::string>* llm_probe_sql) {
    LlmRequest req{TemplateId::candidates_exploration,
                   {{"question", question},
                    {"evidence", evidence},
                    {"schema", schema_text},
                    {"entities", describe_entities(entities)}},
                   greedy()};
    std::string raw;
    auto parsed = conv.ask_structured<CandidateLines>(
        req,
        [&raw](const std::string& c) {
            raw = c;
            return parse_candidate_lines(c);
        },
        "Answer with TARGET and CONDITION lines exactly as in the format section.");

    CandidateSets out;
    if (!parsed) {
        for (const auto& e : entities) {
            if (e.value_matches.empty()) {
                if (!e.column_candidates.empty()) out.targets.push_back({e.surface, e.column_candidates});
                continue;
            }
            ConditionCandidates cc{e.surface, {}, {}};
            for (const auto& m : e.value_matches) {
                push_unique(cc.columns, m.column);
                if (std::find(cc.values.begin(), cc.values.end(), m.stored_value) == cc.values.end()) {
                    cc.values.push_back(m.stored_value);
                }
            }
            out.conditions.push_back(std::move(cc));
        }
        return out;
    }

    if (llm_probe_sql) {
        try {
            *llm_probe_sql = parse_sql_blocks(raw);
        } catch (const ParseFailure&) {
            llm_probe_sql->clear();
        }
    }

    std::string haystack = text::to_lower(question + "\n" + evidence);
    auto match_score = [&](const std::string& v) -> std::optional<double> {
        std::optional<double> best;
        for (const auto& e : entities) {
            for (const auto& m : e.value_matches) {
                if (m.stored_value == v && (!best || m.combined > *best)) best = m.combined;
            }
        }
        return best;
    };
    for (const auto& t : parsed->targets) {
        TargetCandidates tc{t.entity, {}};
        for (const auto& p : t.columns) {
            if (auto id = resolve_pick(catalog, p)) push_unique(tc.columns, *id);
        }
        if (!tc.columns.empty()) out.targets.push_back(std::move(tc));
    }
    for (const auto& c : parsed->conditions) {
        ConditionCandidates cc{c.entity, {}, {}};
        for (const auto& p : c.columns) {
            if (auto id = resolve_pick(catalog, p)) push_unique(cc.columns, *id);
        }
        std::vector<std::pair<double, std::string>> ranked;
        for (const auto& v : c.values) {
            auto score = match_score(v);
            bool in_text = haystack.find(text::to_lower(v)) != std::string::npos;
            if (!score && !in_text) continue;
            if (std::any_of(ranked.begin(), ranked.end(), [&](const auto& r) { return r.second == v; })) continue;
            ranked.emplace_back(score.value_or(0.0), v);
        }
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (auto& r : ranked) cc.values.push_back(std::move(r.second));
        if (!cc.columns.empty()) out.conditions.push_back(std::move(cc));
    }
    return out;
}

std::vector<SqlProbe> generate_base_probes(const CandidateSets& candidates, const DatabaseCatalog& catalog,
                                           std::size_t budget) {
    std::vector<const TargetCandidates*> targets;
    for (const auto& t : candidates.targets) {
        if (!t.columns.empty()) targets.push_back(&t);
    }
    if (targets.empty()) throw EscalateToFullSchema();
    std::vector<SqlProbe> out;
    std::vector<std::size_t> pick(targets.size(), 0);
    while (out.size() < budget) {
        std::vector<ColumnId> cols;
        std::string desc;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const auto& c = targets[i]->columns[pick[i]];
            if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
            desc += (i ? ", " : "") + targets[i]->entity + " -> " + c.qualified();
        }
        if (auto ast = base_query(cols, catalog)) {
            out.push_back({out.size(), ProbeKind::base, sql::render(*ast), std::nullopt, {}, desc});
        }
        std::size_t k = targets.size();
        while (k > 0) {
            --k;
            if (++pick[k] < targets[k]->columns.size()) break;
            pick[k] = 0;
            if (k == 0) {
                if (out.empty()) throw EscalateToFullSchema();
                return out;
            }
        }
    }
    return out;
}

ConditionExpansion expand_condition_probes(const std::vector<SqlProbe>& bases, const CandidateSets& candidates,
                                           std::size_t condition_index, std::size_t budget,
                                           const DatabaseCatalog* catalog, std::size_t first_id) {
    const auto& cond = candidates.conditions.at(condition_index);
    ConditionExpansion ex;
    std::size_t n_values = std::max<std::size_t>(1, cond.values.size());
    ex.enumerated = bases.size() * cond.columns.size() * n_values;
    std::size_t taken = 0;
    for (std::size_t v = 0; v < n_values; ++v) {
        for (const auto& base : bases) {
            auto base_ast = sql::parse(base.sql);
            for (const auto& col : cond.columns) {
                if (taken == budget) {
                    ex.budget_exceeded = true;
                    return ex;
                }
                ++taken;
                ConditionCandidate cc{cond.entity, col, "IS NOT NULL", std::nullopt};
                if (!cond.values.empty()) {
                    cc.op = "=";
                    cc.value = cond.values[v];
                }
                try {
                    auto sql = sql::build_probe_sql(base_ast, probe_condition(cc), catalog);
                    ex.probes.push_back({first_id + ex.probes.size(), ProbeKind::condition, std::move(sql), base.id,
                                         {cc}, cc.describe()});
                } catch (const UnknownColumn&) {
                    ++ex.dropped;
                }
            }
        }
    }
    return ex;
}

std::vector<ProbeResult> run_probes(const std::vector<SqlProbe>& probes, Database& db, const ExecutionLimits& limits) {
    std::vector<ProbeResult> out;
    out.reserve(probes.size());
    for (const auto& p : probes) out.push_back({p, db.execute(p.sql, limits)});
    return out;
}

ExplorationReport explore_candidates(Conversation& conv, const std::string& question, const std::string& evidence,
                                     const std::string& schema_text, const std::vector<Entity>& entities,
                                     const DatabaseCatalog& catalog, Database& db, const ExplorerConfig& config) {
    ExplorationReport report;
    std::vector<std::string> llm_sql;
    report.candidates = propose_candidates(conv, question, evidence, schema_text, entities, catalog, &llm_sql);
    auto bases = generate_base_probes(report.candidates, catalog, config.base_budget);
    for (const auto& s : llm_sql) {
        try {
            auto ast = sql::parse(s);
            if (!sql::is_bare_select(ast)) continue;
            auto rendered = sql::render(ast);
            bool seen = std::any_of(bases.begin(), bases.end(), [&](const SqlProbe& p) { return p.sql == rendered; });
            if (!seen && bases.size() < config.base_budget) {
                bases.push_back({bases.size(), ProbeKind::base, rendered, std::nullopt, {}, "proposed probe"});
            }
        } catch (const SyntaxError&) {
            ++report.dropped_llm_probes;
        }
    }
    report.bases = run_probes(bases, db, config.limits);
    std::size_t next_id = bases.size();
    for (std::size_t i = 0; i < report.candidates.conditions.size(); ++i) {
        ConditionOutcome co;
        co.candidates = report.candidates.conditions[i];
        auto ex = expand_condition_probes(bases, report.candidates, i, config.condition_budget, &catalog, next_id);
        next_id += ex.probes.size();
        co.enumerated = ex.enumerated;
        co.budget_exceeded = ex.budget_exceeded;
        co.results = run_probes(ex.probes, db, config.limits);
        auto add = [&co](const ConditionCandidate& c) {
            if (std::find(co.survivors.begin(), co.survivors.end(), c) == co.survivors.end()) co.survivors.push_back(c);
        };
        for (const auto& r : co.results) {
            if (r.outcome.status == ExecStatus::rows) add(r.probe.conditions.front());
        }
        if (co.survivors.empty() && !co.results.empty()) {
            co.unresolved = true;
            for (const auto& r : co.results) add(r.probe.conditions.front());
        }
        report.conditions.push_back(std::move(co));
    }
    return report;
}

void explore_combinations(ExplorationReport& report, const DatabaseCatalog& catalog, Database& db,
                          const ExplorerConfig& config) {
    if (report.bases.empty()) return;
    std::vector<const std::vector<ConditionCandidate>*> lists;
    for (const auto& c : report.conditions) {
        if (!c.survivors.empty()) lists.push_back(&c.survivors);
    }
    if (lists.empty()) return;
    const auto& base = report.bases.front().probe;
    auto base_ast = sql::parse(base.sql);
    std::size_t next_id = report.bases.size();
    for (const auto& c : report.conditions) next_id += c.results.size();

    std::vector<SqlProbe> probes;
    std::vector<std::size_t> pick(lists.size(), 0);
    while (true) {
        if (probes.size() == config.combination_budget) {
            report.combination_budget_exceeded = true;
            break;
        }
        std::vector<ConditionCandidate> combo;
        for (std::size_t i = 0; i < lists.size(); ++i) combo.push_back((*lists[i])[pick[i]]);
        try {
            sql::SqlAst ast = base_ast;
            std::string desc;
            for (const auto& c : combo) {
                ast = sql::build_probe_ast(ast, probe_condition(c), &catalog);
                desc += (desc.empty() ? "" : " AND ") + c.describe();
            }
            probes.push_back({next_id++, ProbeKind::combination, sql::render(ast), base.id, combo, desc});
        } catch (const UnknownColumn&) {
        }
        std::size_t k = lists.size();
        bool done = false;
        while (true) {
            --k;
            if (++pick[k] < lists[k]->size()) break;
            pick[k] = 0;
            if (k == 0) {
                done = true;
                break;
            }
        }
        if (done) break;
    }
    for (auto& r : run_probes(probes, db, config.limits)) {
        bool ok = r.outcome.status == ExecStatus::rows;
        report.combinations.push_back({std::move(r), ok});
    }
    report.no_suitable_combination =
        !report.combinations.empty() &&
        std::none_of(report.combinations.begin(), report.combinations.end(), [](const auto& c) { return c.suitable; });
}

void summarize_exploration(Conversation& conv, ExplorationReport& report, const std::string& question,
                           const std::string& evidence) {
    LlmRequest req{TemplateId::combinations_exploration,
                   {{"question", question},
                    {"evidence", evidence},
                    {"candidates_report", report.stage1_digest()},
                    {"combinations_report", report.stage2_digest()}},
                   greedy()};
    auto resp = conv.ask(req);
    report.summary = std::string(text::trim(resp.completions.front()));
}

std::string ExplorationReport::stage1_digest() const {
    std::string out = "Base probes:\n";
    if (bases.empty()) out += "  (none)\n";
    for (const auto& b : bases) out += "  " + digest_line(b.probe.sql, b.outcome) + "\n";
    for (const auto& c : conditions) {
        out += "Condition \"" + c.candidates.entity + "\":\n";
        for (const auto& r : c.results) out += "  " + digest_line(r.probe.sql, r.outcome) + "\n";
        if (c.results.empty()) out += "  (no probe could be built)\n";
        if (c.unresolved) out += "  (unresolved: every candidate returned no rows)\n";
    }
    return out;
}

std::string ExplorationReport::stage2_digest() const {
    std::string out = "Combination probes:\n";
    if (combinations.empty()) out += "  (none)\n";
    for (bool want : {true, false}) {
        for (const auto& c : combinations) {
            if (c.suitable != want) continue;
            out += std::string("  [") + (c.suitable ? "suitable" : "unsuitable") + "] " +
                   digest_line(c.probe.probe.sql, c.probe.outcome) + "\n";
        }
    }
    if (no_suitable_combination) out += "No suitable combination found.\n";
    return out;
}

std::string ExplorationReport::digest() const {
    std::string out = stage1_digest() + stage2_digest();
    if (!summary.empty()) out += "Summary:\n" + summary + "\n";
    return out;
}

}  // namespace sdesql
