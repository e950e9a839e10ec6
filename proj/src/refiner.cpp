#include "sdesql/refiner.hpp"

#include <algorithm>
#include <array>

#include "sdesql/error.hpp"
#include "sdesql/linker.hpp"
#include "sdesql/structured.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

namespace {

constexpr std::array<std::string_view, 5> kCauseNames = {
    "condition_conflict", "condition_duplication", "unnecessary_table_joins", "column_value_mismatch",
    "subquery_scope_inconsistency"};

bool is_unit(const SubSqlResult& s) { return s.sub.kind == sql::SubSqlKind::condition_unit; }

std::vector<std::size_t> unit_positions(const std::vector<SubSqlResult>& subs) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (is_unit(subs[i])) out.push_back(i);
    }
    return out;
}

std::string subs_digest(const std::vector<SubSqlResult>& subs) {
    std::string out;
    std::size_t u = 0;
    for (const auto& s : subs) {
        if (is_unit(s)) {
            out += "Unit " + std::to_string(u++) + " [" + s.sub.unit->sql() + "]: ";
        } else {
            out += "Join skeleton: ";
        }
        out += digest_line(s.sub.sql, s.outcome) + "\n";
    }
    if (out.empty()) out = "(the query has no condition units or joins to isolate)\n";
    return out;
}

std::string hypotheses_text(const std::vector<ErrorCause>& hs) {
    std::string out;
    for (const auto& h : hs) {
        out += "- " + std::string(to_string(h.tag));
        if (!h.implicated_units.empty()) {
            out += " (units";
            for (auto u : h.implicated_units) out += " " + std::to_string(u);
            out += ")";
        }
        if (!h.rationale.empty()) out += ": " + h.rationale;
        out += "\n";
    }
    return out.empty() ? "(none)\n" : out;
}

std::string probes_text(const std::vector<ProbeResult>& probes) {
    std::string out;
    for (const auto& p : probes) out += "- " + digest_line(p.probe.sql, p.outcome) + "\n";
    return out.empty() ? "(none)\n" : out;
}

std::optional<std::string> revised_sql(const std::string& completion) {
    try {
        auto blocks = parse_sql_blocks(completion);
        return sql::render(sql::parse(blocks.back()));
    } catch (const Error&) {
        return std::nullopt;
    }
}

// Removes one condition unit from its clause.
sql::SqlAst without_unit(const sql::SqlAst& ast, const sql::ConditionUnit& unit) {
    sql::SqlAst out = ast;
    auto& slot = unit.clause == sql::UnitClause::where ? out.core.where : out.core.having;
    if (!slot) return out;
    if (auto* l = slot->as<sql::Logical>(); l && l->is_and) {
        if (unit.index < l->terms.size()) l->terms.erase(l->terms.begin() + static_cast<std::ptrdiff_t>(unit.index));
        if (l->terms.size() == 1) {
            sql::Expr only = std::move(l->terms.front());
            slot = std::move(only);
        } else if (l->terms.empty()) {
            slot.reset();
        }
    } else {
        slot.reset();
    }
    return out;
}

std::optional<ColumnId> resolve_ref(const sql::SqlAst& ast, const sql::ColumnRef& ref, const DatabaseCatalog& catalog) {
    if (!ref.table.empty()) return catalog.resolve(sql::resolve_table(ast, ref.table), ref.column);
    std::optional<ColumnId> found;
    for (const auto* src : sql::from_sources(ast)) {
        if (src->name.empty()) continue;
        if (auto id = catalog.resolve(src->name, ref.column)) {
            if (found) return std::nullopt;
            found = id;
        }
    }
    return found;
}

bool similar_literals(const sql::ConditionUnit& a, const sql::ConditionUnit& b) {
    for (const auto& la : a.literals) {
        if (la.kind != sql::Literal::Kind::string) continue;
        for (const auto& lb : b.literals) {
            if (lb.kind != sql::Literal::Kind::string) continue;
            std::string x = text::to_lower(la.text), y = text::to_lower(lb.text);
            if (x == y || text::edit_similarity(x, y) >= 0.8 || (!x.empty() && !y.empty() &&
                                                                 (x.find(y) != std::string::npos ||
                                                                  y.find(x) != std::string::npos))) {
                return true;
            }
        }
    }
    return false;
}

bool same_columns(const sql::ConditionUnit& a, const sql::ConditionUnit& b) {
    for (const auto& ca : a.columns) {
        for (const auto& cb : b.columns) {
            if (text::iequals(ca.column, cb.column) && text::iequals(ca.table, cb.table)) return true;
        }
    }
    return false;
}

class ProbeSink {
public:
    ProbeSink(Database& db, const RefinerConfig& config) : db_(db), config_(config) {}

    void add(const std::string& sql, const std::string& description) {
        if (done() || sql.empty()) return;
        if (std::any_of(out.begin(), out.end(), [&](const ProbeResult& p) { return p.probe.sql == sql; })) return;
        SqlProbe p{out.size(), ProbeKind::solution, sql, std::nullopt, {}, description};
        auto outcome = db_.execute(sql, config_.limits);
        out.push_back({std::move(p), std::move(outcome)});
    }
    void add(const sql::SqlAst& ast, const std::string& description) { add(sql::render(ast), description); }
    bool done() const { return out.size() >= config_.solution_budget; }

    std::vector<ProbeResult> out;

private:
    Database& db_;
    const RefinerConfig& config_;
};

ExecutionOutcome run(Database& db, const std::string& sql, const ExecutionLimits& limits) {
    return db.execute(sql, limits);
}

}  // namespace

std::string_view to_string(Route r) {
    switch (r) {
        case Route::no_refinement: return "no_refinement";
        case Route::error_feedback: return "error_feedback";
        case Route::empty_result: return "empty_result";
    }
    return "?";
}

Route route(const ExecutionOutcome& outcome) {
    switch (outcome.status) {
        case ExecStatus::rows: return Route::no_refinement;
        case ExecStatus::empty: return Route::empty_result;
        default: return Route::error_feedback;
    }
}

std::string_view to_string(CauseTag t) { return kCauseNames[static_cast<std::size_t>(t)]; }

CauseTag nearest_cause_tag(std::string_view raw) {
    std::string s = text::to_lower(raw);
    for (std::size_t i = 0; i < kCauseNames.size(); ++i) {
        if (s == kCauseNames[i]) return static_cast<CauseTag>(i);
    }
    if (s.find("subquer") != std::string::npos || s.find("sub-quer") != std::string::npos ||
        s.find("scope") != std::string::npos) {
        return CauseTag::subquery_scope_inconsistency;
    }
    if (s.find("duplic") != std::string::npos || s.find("redundan") != std::string::npos) {
        return CauseTag::condition_duplication;
    }
    if (s.find("join") != std::string::npos) return CauseTag::unnecessary_table_joins;
    if (s.find("conflict") != std::string::npos || s.find("contradict") != std::string::npos) {
        return CauseTag::condition_conflict;
    }
    if (s.find("mismatch") != std::string::npos || s.find("value") != std::string::npos ||
        s.find("format") != std::string::npos) {
        return CauseTag::column_value_mismatch;
    }
    std::size_t best = 0;
    double best_sim = -1;
    for (std::size_t i = 0; i < kCauseNames.size(); ++i) {
        double sim = text::edit_similarity(s, kCauseNames[i]);
        if (sim > best_sim) {
            best_sim = sim;
            best = i;
        }
    }
    return static_cast<CauseTag>(best);
}

std::vector<SubSqlResult> run_sub_sqls(const sql::Decomposition& d, Database& db, const ExecutionLimits& limits) {
    std::vector<SubSqlResult> out;
    for (const auto& s : d.subs) out.push_back({s, db.execute(s.sql, limits)});
    return out;
}

std::vector<ErrorCause> heuristic_causes(const std::vector<SubSqlResult>& subs) {
    std::vector<ErrorCause> out;
    auto units = unit_positions(subs);
    for (const auto& s : subs) {
        if (!is_unit(s) && s.outcome.status == ExecStatus::empty) {
            out.push_back({CauseTag::unnecessary_table_joins, "", "the join skeleton alone returns no rows", {}, true});
        }
    }
    std::vector<std::size_t> empty_units;
    for (std::size_t u = 0; u < units.size(); ++u) {
        if (subs[units[u]].outcome.status == ExecStatus::empty) empty_units.push_back(u);
    }
    for (auto u : empty_units) {
        if (out.size() == 3) break;
        const auto& unit = *subs[units[u]].sub.unit;
        CauseTag tag = unit.has_subquery ? CauseTag::subquery_scope_inconsistency : CauseTag::column_value_mismatch;
        out.push_back({tag, "", "unit " + std::to_string(u) + " alone returns no rows", {u}, true});
    }
    if (empty_units.empty() && !units.empty() && out.empty()) {
        std::optional<std::pair<std::size_t, std::size_t>> dup;
        for (std::size_t a = 0; a < units.size() && !dup; ++a) {
            for (std::size_t b = a + 1; b < units.size() && !dup; ++b) {
                const auto& ua = *subs[units[a]].sub.unit;
                const auto& ub = *subs[units[b]].sub.unit;
                if (!same_columns(ua, ub) && similar_literals(ua, ub)) dup = {a, b};
            }
        }
        if (dup) {
            out.push_back({CauseTag::condition_duplication, "", "two units constrain different columns with similar values",
                           {dup->first, dup->second}, true});
        }
        std::vector<std::size_t> all(units.size());
        for (std::size_t u = 0; u < units.size(); ++u) all[u] = u;
        out.push_back({CauseTag::condition_conflict, "", "every unit returns rows alone but not together", all, true});
    }
    if (out.empty()) {
        out.push_back({CauseTag::column_value_mismatch, "", "no unit can be isolated", {}, true});
    }
    if (out.size() > 3) out.resize(3);
    return out;
}

std::vector<ErrorCause> ground_hypotheses(std::vector<ErrorCause> causes, const std::vector<SubSqlResult>& subs) {
    auto units = unit_positions(subs);
    std::vector<ErrorCause> out;
    for (auto& c : causes) {
        std::vector<std::size_t> valid;
        for (auto u : c.implicated_units) {
            if (u < units.size() && std::find(valid.begin(), valid.end(), u) == valid.end()) valid.push_back(u);
        }
        if (valid.size() != c.implicated_units.size() && valid.empty()) continue;
        c.implicated_units = std::move(valid);
        if (c.tag == CauseTag::column_value_mismatch && !c.implicated_units.empty() &&
            std::all_of(c.implicated_units.begin(), c.implicated_units.end(),
                        [&](std::size_t u) { return subs[units[u]].outcome.status == ExecStatus::rows; })) {
            continue;
        }
        out.push_back(std::move(c));
        if (out.size() == 3) break;
    }
    return out;
}

std::vector<ErrorCause> identify_error_cause(Conversation& conv, const RefineInputs& inputs, const std::string& sql,
                                             const std::vector<SubSqlResult>& subs,
                                             std::vector<std::string>* proposed_probes) {
    LlmRequest req{TemplateId::solution_exploration,
                   {{"question", inputs.question},
                    {"evidence", inputs.evidence},
                    {"schema", inputs.schema_text},
                    {"sql", sql},
                    {"sub_sql_results", subs_digest(subs)}},
                   greedy()};
    std::string raw;
    auto parsed = conv.ask_structured<std::vector<CauseLine>>(
        req,
        [&raw](const std::string& c) {
            raw = c;
            return parse_cause_lines(c);
        },
        "Start every hypothesis line with 'CAUSE: <tag> | units: <i,j> | <rationale>'.");
    std::vector<ErrorCause> causes;
    if (parsed) {
        for (const auto& c : *parsed) {
            causes.push_back({nearest_cause_tag(c.tag), c.tag, c.rationale, c.units, false});
        }
        if (proposed_probes) {
            try {
                *proposed_probes = parse_sql_blocks(raw);
            } catch (const ParseFailure&) {
                proposed_probes->clear();
            }
        }
    }
    causes = ground_hypotheses(std::move(causes), subs);
    if (causes.empty()) causes = heuristic_causes(subs);
    return causes;
}

std::vector<ProbeResult> explore_solutions(const std::string& sql_text, const std::vector<ErrorCause>& hypotheses,
                                           const std::vector<SubSqlResult>& subs, const DatabaseCatalog& catalog,
                                           const ValueIndex* index, Database& db,
                                           const std::vector<std::string>& proposed_probes,
                                           const RefinerConfig& config) {
    ProbeSink sink(db, config);
    sql::SqlAst ast;
    try {
        ast = sql::parse(sql_text);
    } catch (const SyntaxError&) {
        return {};
    }
    auto units = unit_positions(subs);
    auto unit_at = [&](std::size_t u) -> const sql::ConditionUnit& { return *subs[units[u]].sub.unit; };

    auto distinct_probe = [&](const ColumnId& col) {
        sink.add("SELECT DISTINCT " + sql::render_identifier(col.column) + " FROM " + sql::render_identifier(col.table) +
                     " LIMIT 10",
                 "stored values of " + col.qualified());
    };
    auto drop_unit_probe = [&](std::size_t u) {
        sink.add(without_unit(ast, unit_at(u)), "without unit " + std::to_string(u));
    };

    for (const auto& h : hypotheses) {
        if (sink.done()) break;
        switch (h.tag) {
            case CauseTag::column_value_mismatch: {
                for (auto u : h.implicated_units) {
                    const auto& unit = unit_at(u);
                    for (const auto& ref : unit.columns) {
                        if (auto col = resolve_ref(ast, ref, catalog)) distinct_probe(*col);
                    }
                    if (!index) continue;
                    for (const auto& lit : unit.literals) {
                        if (lit.kind != sql::Literal::Kind::string) continue;
                        for (const auto& m : retrieve_values(lit.text, *index, db)) {
                            sink.add("SELECT DISTINCT " + sql::render_identifier(m.column.column) + " FROM " +
                                         sql::render_identifier(m.column.table) + " WHERE " +
                                         sql::render_identifier(m.column.column) + " = " +
                                         sql::render_string_literal(m.stored_value) + " LIMIT 10",
                                     "similar stored value for '" + lit.text + "'");
                        }
                    }
                }
                break;
            }
            case CauseTag::condition_conflict:
            case CauseTag::condition_duplication: {
                for (auto u : h.implicated_units) {
                    drop_unit_probe(u);
                    if (h.tag != CauseTag::condition_conflict || !index) continue;
                    const auto& unit = unit_at(u);
                    std::optional<ColumnId> current;
                    if (!unit.columns.empty()) current = resolve_ref(ast, unit.columns.front(), catalog);
                    for (const auto& lit : unit.literals) {
                        if (lit.kind != sql::Literal::Kind::string) continue;
                        for (const auto& m : retrieve_values(lit.text, *index, db)) {
                            if (current && m.column == *current) continue;
                            try {
                                auto swapped = sql::build_probe_ast(
                                    without_unit(ast, unit),
                                    {m.column.table, m.column.column, "=", m.stored_value}, &catalog);
                                sink.add(swapped, "unit " + std::to_string(u) + " on " + m.column.qualified());
                            } catch (const Error&) {
                            }
                        }
                    }
                }
                break;
            }
            case CauseTag::unnecessary_table_joins: {
                if (ast.core.joins.empty()) break;
                sql::SqlAst left = ast;
                for (auto& j : left.core.joins) {
                    if (j.kind == sql::JoinKind::plain || j.kind == sql::JoinKind::inner) j.kind = sql::JoinKind::left;
                }
                sink.add(left, "inner joins relaxed to LEFT JOIN");
                for (std::size_t k = 0; k < ast.core.joins.size(); ++k) {
                    sql::SqlAst dropped = ast;
                    dropped.core.joins.erase(dropped.core.joins.begin() + static_cast<std::ptrdiff_t>(k));
                    sink.add(dropped, "without join " + ast.core.joins[k].table.visible_name());
                }
                break;
            }
            case CauseTag::subquery_scope_inconsistency: {
                for (auto u : h.implicated_units) {
                    const auto& unit = unit_at(u);
                    auto relaxed = without_unit(ast, unit);
                    for (const auto* sub : sql::nested_selects(unit.predicate)) {
                        sink.add(*sub, "subquery executed standalone");
                        if (sub->is_compound() || sub->core.items.empty()) continue;
                        sql::SqlAst scoped = relaxed;
                        scoped.core.items = sub->core.items;
                        scoped.core.distinct = false;
                        scoped.order_by.clear();
                        scoped.limit.reset();
                        scoped.offset.reset();
                        sink.add(scoped, "subquery expression within the outer join scope");
                    }
                    drop_unit_probe(u);
                }
                break;
            }
        }
    }
    for (const auto& p : proposed_probes) {
        try {
            sink.add(sql::render(sql::parse(p)), "proposed probe");
        } catch (const SyntaxError&) {
        }
    }
    return std::move(sink.out);
}

RefineOutput repair_with_feedback(RefineContext& ctx, const RefineInputs& inputs, const std::string& sql,
                                  const RefinerConfig& config) {
    RefineOutput out;
    out.trace.route = Route::error_feedback;
    out.sql = sql;
    out.outcome = run(ctx.db, sql, config.limits);
    if (route(out.outcome) != Route::error_feedback) return out;

    std::string current = sql;
    ExecutionOutcome current_outcome = out.outcome;
    for (int attempt = 0; attempt < config.max_repairs; ++attempt) {
        LlmRequest req{TemplateId::error_feedback_repair,
                       {{"question", inputs.question},
                        {"evidence", inputs.evidence},
                        {"schema", inputs.schema_text},
                        {"sql", current},
                        {"error", current_outcome.status == ExecStatus::timeout
                                      ? std::string("the query exceeded the execution time limit")
                                      : current_outcome.error_message}},
                       greedy()};
        auto resp = ctx.conv.ask(req);
        auto revised = revised_sql(resp.completions.front());
        if (!revised) break;
        auto outcome = run(ctx.db, *revised, config.limits);
        out.trace.revisions.push_back({"repair", *revised, outcome.status});
        if (route(outcome) != Route::error_feedback) {
            out.sql = *revised;
            out.outcome = std::move(outcome);
            return out;
        }
        if (*revised == current) break;
        current = *revised;
        current_outcome = std::move(outcome);
    }
    out.trace.repair_exhausted = true;
    return out;
}

RefineOutput refine(RefineContext& ctx, const RefineInputs& inputs, const std::string& sql,
                    const ExecutionOutcome& outcome, const RefinerConfig& config) {
    RefineOutput out;
    out.sql = sql;
    out.outcome = outcome;
    out.trace.route = route(outcome);
    if (out.trace.route == Route::no_refinement) return out;

    if (out.trace.route == Route::error_feedback) {
        auto repaired = repair_with_feedback(ctx, inputs, sql, config);
        out.trace.revisions = std::move(repaired.trace.revisions);
        out.trace.repair_exhausted = repaired.trace.repair_exhausted;
        if (status_rank(repaired.outcome.status) > status_rank(out.outcome.status)) {
            out.sql = repaired.sql;
            out.outcome = std::move(repaired.outcome);
        }
        if (out.outcome.status != ExecStatus::empty) return out;
    }

    std::string current = out.sql;
    for (int it = 0; it < config.max_iterations; ++it) {
        RefinementIteration iter;
        iter.input_sql = current;
        Bindings extra{{"sub_sql_results", ""}, {"hypotheses", ""}, {"solution_probes", ""}};
        if (config.exploration) {
            std::optional<sql::SqlAst> ast;
            try {
                ast = sql::parse(current);
            } catch (const SyntaxError&) {
            }
            if (ast) {
                auto d = sql::decompose(*ast);
                iter.not_decomposable = d.not_decomposable;
                iter.sub_sql_results = run_sub_sqls(d, ctx.db, config.limits);
            } else {
                iter.not_decomposable = true;
            }
            std::vector<std::string> proposed;
            iter.hypotheses = identify_error_cause(ctx.conv, inputs, current, iter.sub_sql_results, &proposed);
            iter.solution_probes = explore_solutions(current, iter.hypotheses, iter.sub_sql_results, ctx.catalog,
                                                     ctx.index, ctx.db, proposed, config);
            extra = {{"sub_sql_results", subs_digest(iter.sub_sql_results)},
                     {"hypotheses", hypotheses_text(iter.hypotheses)},
                     {"solution_probes", probes_text(iter.solution_probes)}};
        }
        out.trace.iterations.push_back(std::move(iter));

        LlmRequest req{TemplateId::final_refinement,
                       {{"question", inputs.question},
                        {"evidence", inputs.evidence},
                        {"schema", inputs.schema_text},
                        {"sql", current}},
                       greedy()};
        req.bindings.insert(extra.begin(), extra.end());
        auto resp = ctx.conv.ask(req);
        auto revised = revised_sql(resp.completions.front());
        if (!revised || *revised == current) break;
        auto revised_outcome = run(ctx.db, *revised, config.limits);
        out.trace.revisions.push_back({"modify", *revised, revised_outcome.status});
        if (status_rank(revised_outcome.status) >= status_rank(out.outcome.status)) {
            out.sql = *revised;
            out.outcome = std::move(revised_outcome);
            current = out.sql;
        }
        if (out.outcome.status == ExecStatus::rows) break;
    }
    out.trace.refinement_exhausted = out.outcome.status != ExecStatus::rows;
    return out;
}

TargetCheckResult check_targets(Conversation& conv, const RefineInputs& inputs, const std::string& sql_text,
                                const ExecutionOutcome& outcome, Database& db, const ExecutionLimits& limits) {
    TargetCheckResult res{sql_text, outcome, {}, false, {}};
    sql::SqlAst ast;
    try {
        ast = sql::parse(sql_text);
    } catch (const SyntaxError&) {
        res.rejection = "unparseable";
        return res;
    }
    std::string items;
    for (std::size_t i = 0; i < ast.core.items.size(); ++i) {
        const auto& item = ast.core.items[i];
        std::string t = item.is_star ? (item.star_table.empty() ? "*" : item.star_table + ".*") : sql::render(item.expr);
        if (!item.alias.empty()) t += " AS " + item.alias;
        items += std::to_string(i) + ": " + t + "\n";
    }
    LlmRequest req{TemplateId::target_checking,
                   {{"question", inputs.question}, {"evidence", inputs.evidence}, {"sql", sql_text}, {"select_items", items}},
                   greedy()};
    auto verdict = conv.ask_structured<std::set<std::size_t>>(
        req, [](const std::string& c) { return parse_verdict(c); }, "Answer with KEEP or REMOVE: [indices].");
    if (!verdict) {
        res.rejection = "unparseable verdict";
        return res;
    }
    res.remove = *verdict;
    if (res.remove.empty()) return res;
    std::string stripped;
    try {
        stripped = sql::strip_select_items(ast, res.remove);
    } catch (const WouldEmptySelectList&) {
        res.rejection = "would remove every column";
        return res;
    } catch (const UnsafeSelectEdit& e) {
        res.rejection = e.what();
        return res;
    }
    auto after = db.execute(stripped, limits);
    if (status_rank(after.status) < status_rank(outcome.status) ||
        (outcome.status == ExecStatus::rows && after.status != ExecStatus::rows)) {
        res.rejection = "result got worse";
        return res;
    }
    res.sql = std::move(stripped);
    res.outcome = std::move(after);
    res.applied = true;
    return res;
}

}  // namespace sdesql
