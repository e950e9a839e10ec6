#include "sdesql/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>

#include "sdesql/error.hpp"
#include "sdesql/generator.hpp"
#include "sdesql/sqlkit.hpp"

namespace sdesql {

using nlohmann::json;

namespace {

json column_json(const ColumnId& c) { return c.qualified(); }

json linking_detail(const std::vector<Entity>& entities, const SchemaSelection& sel) {
    json ents = json::array();
    for (const auto& e : entities) {
        json matches = json::array();
        for (const auto& m : e.value_matches) {
            matches.push_back({{"column", column_json(m.column)},
                               {"value", m.stored_value},
                               {"lexical", m.lexical_score},
                               {"semantic", m.semantic_score},
                               {"combined", m.combined}});
        }
        json cols = json::array();
        for (const auto& c : e.column_candidates) cols.push_back(column_json(c));
        ents.push_back({{"surface", e.surface}, {"value_matches", matches}, {"columns", cols}});
    }
    json selected = json::array();
    for (const auto& c : sel.selected) selected.push_back(column_json(c));
    return {{"entities", ents}, {"selected", selected}};
}

json candidates_detail(const ExplorationReport& r, bool escalated) {
    json targets = json::array();
    for (const auto& t : r.candidates.targets) {
        json cols = json::array();
        for (const auto& c : t.columns) cols.push_back(column_json(c));
        targets.push_back({{"entity", t.entity}, {"columns", cols}});
    }
    json probes = json::array();
    for (const auto& b : r.bases) probes.push_back(probe_json("base", b.probe.sql, b.outcome));
    json conditions = json::array();
    for (const auto& c : r.conditions) {
        json cols = json::array();
        for (const auto& col : c.candidates.columns) cols.push_back(column_json(col));
        json survivors = json::array();
        for (const auto& s : c.survivors) survivors.push_back(s.describe());
        for (const auto& p : c.results) probes.push_back(probe_json("condition", p.probe.sql, p.outcome));
        conditions.push_back({{"entity", c.candidates.entity},
                              {"columns", cols},
                              {"values", c.candidates.values},
                              {"enumerated", c.enumerated},
                              {"budget_exceeded", c.budget_exceeded},
                              {"unresolved", c.unresolved},
                              {"survivors", survivors}});
    }
    return {{"targets", targets},
            {"conditions", conditions},
            {"probes", probes},
            {"dropped_llm_probes", r.dropped_llm_probes},
            {"escalated_to_full_schema", escalated},
            {"digest", r.stage1_digest()}};
}

json combinations_detail(const ExplorationReport& r) {
    json probes = json::array();
    for (const auto& c : r.combinations) {
        auto p = probe_json("combination", c.probe.probe.sql, c.probe.outcome);
        p["suitable"] = c.suitable;
        probes.push_back(std::move(p));
    }
    return {{"probes", probes},
            {"no_suitable_combination", r.no_suitable_combination},
            {"budget_exceeded", r.combination_budget_exceeded},
            {"digest", r.stage2_digest()},
            {"summary", r.summary}};
}

json generation_detail(const GenerationResult& g) {
    json cands = json::array();
    for (const auto& c : g.candidates) {
        cands.push_back({{"sample_index", c.sample_index},
                         {"sql", c.sql},
                         {"group_key", c.group_key},
                         {"status", std::string(to_string(c.outcome.status))},
                         {"row_count", c.outcome.row_count}});
    }
    const auto& sel = g.candidates[g.selected];
    return {{"candidates", cands},
            {"discarded", g.discarded},
            {"all_unparseable", g.all_unparseable},
            {"selected_sample_index", sel.sample_index},
            {"selected_sql", sel.sql}};
}

json refinement_detail(const RefineOutput& r, const std::string& input_sql) {
    json iterations = json::array();
    for (const auto& it : r.trace.iterations) {
        json subs = json::array();
        for (const auto& s : it.sub_sql_results) {
            subs.push_back(probe_json(s.sub.kind == sql::SubSqlKind::join_skeleton ? "join_skeleton" : "diagnostic",
                                      s.sub.sql, s.outcome));
        }
        json hyps = json::array();
        for (const auto& h : it.hypotheses) {
            hyps.push_back({{"tag", std::string(to_string(h.tag))},
                            {"raw_tag", h.raw_tag},
                            {"rationale", h.rationale},
                            {"units", h.implicated_units},
                            {"heuristic", h.heuristic}});
        }
        json probes = json::array();
        for (const auto& p : it.solution_probes) {
            auto pj = probe_json("solution", p.probe.sql, p.outcome);
            pj["description"] = p.probe.description;
            probes.push_back(std::move(pj));
        }
        iterations.push_back({{"input_sql", it.input_sql},
                              {"sub_sql_results", subs},
                              {"not_decomposable", it.not_decomposable},
                              {"hypotheses", hyps},
                              {"solution_probes", probes}});
    }
    json revisions = json::array();
    for (const auto& v : r.trace.revisions) {
        revisions.push_back({{"stage", v.stage}, {"sql", v.sql}, {"status", std::string(to_string(v.status))}});
    }
    return {{"route", std::string(to_string(r.trace.route))},
            {"input_sql", input_sql},
            {"iterations", iterations},
            {"revisions", revisions},
            {"repair_exhausted", r.trace.repair_exhausted},
            {"refinement_exhausted", r.trace.refinement_exhausted},
            {"output_sql", r.sql},
            {"output_status", std::string(to_string(r.outcome.status))}};
}

json target_detail(const TargetCheckResult& r, const std::string& input_sql) {
    return {{"input_sql", input_sql},
            {"remove", r.remove},
            {"applied", r.applied},
            {"rejection", r.rejection},
            {"output_sql", r.sql},
            {"output_status", std::string(to_string(r.outcome.status))}};
}

std::string column_select(const ColumnId& c) {
    return "SELECT " + sql::render_identifier(c.column) + " FROM " + sql::render_identifier(c.table);
}

std::string fallback_sql(const ExplorationReport* report, const std::vector<Entity>& entities,
                         const DatabaseCatalog& catalog) {
    if (report && !report->bases.empty()) return report->bases.front().probe.sql;
    if (report) {
        for (const auto& t : report->candidates.targets) {
            if (!t.columns.empty()) return column_select(t.columns.front());
        }
    }
    for (const auto& e : entities) {
        if (!e.column_candidates.empty()) return column_select(e.column_candidates.front());
    }
    for (const auto& t : catalog.tables) {
        if (!t.columns.empty()) return column_select({t.name, t.columns.front().name});
    }
    return "SELECT NULL";
}

struct BudgetExceeded {};

}  // namespace

std::vector<std::string> AblationFlags::disabled() const {
    std::vector<std::string> out;
    const bool on[] = {soft_linker, gen_exploration, refinement, refine_exploration, target_check};
    for (std::size_t i = 0; i < kDisableFlagNames.size(); ++i) {
        if (!on[i]) out.emplace_back(kDisableFlagNames[i]);
    }
    return out;
}

AblationFlags parse_disable_flags(const std::vector<std::string>& names) {
    AblationFlags f;
    for (const auto& n : names) {
        if (n == "soft-linker") f.soft_linker = false;
        else if (n == "gen-exploration") f.gen_exploration = false;
        else if (n == "refinement") f.refinement = false;
        else if (n == "refine-exploration") f.refine_exploration = false;
        else if (n == "target-check") f.target_check = false;
        else throw ConfigError("unknown disable flag: " + n);
    }
    if (!f.refinement && !f.refine_exploration) {
        throw ConfigError("refine-exploration cannot be disabled together with refinement");
    }
    return f;
}

json PipelineConfig::snapshot() const {
    return {{"disabled", flags.disabled()},
            {"consistency_n", consistency_n},
            {"linker", {{"lexical_weight", linker.lexical_weight},
                        {"semantic_weight", linker.semantic_weight},
                        {"threshold", linker.threshold},
                        {"top_k", linker.top_k}}},
            {"explorer", {{"base_budget", explorer.base_budget},
                          {"condition_budget", explorer.condition_budget},
                          {"combination_budget", explorer.combination_budget}}},
            {"refiner", {{"max_repairs", refiner.max_repairs}, {"max_iterations", refiner.max_iterations},
                         {"solution_budget", refiner.solution_budget}}},
            {"limits", {{"timeout_ms", limits.timeout.count()}, {"max_rows", limits.max_rows}}},
            {"question_budget_ms", question_budget.count()}};
}

ResourceCache::ResourceCache(std::filesystem::path db_root, ValueIndexConfig index_config, std::size_t value_examples)
    : db_root_(std::move(db_root)), index_config_(index_config), value_examples_(value_examples) {}

std::shared_ptr<const DatabaseResources> ResourceCache::get(const std::string& db_id) {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(db_id); it != cache_.end()) return it->second;
    auto path = database_path(db_root_, db_id);
    if (!std::filesystem::exists(path)) throw MissingFile(path.string());
    auto db = Database::open_readonly(path);
    auto catalog = introspect_schema(db, db_id);
    attach_descriptions(catalog, description_dir(db_root_, db_id));
    attach_value_examples(catalog, db, value_examples_);
    auto index = ValueIndex::build(catalog, db, index_config_);
    auto res = std::make_shared<const DatabaseResources>(DatabaseResources{path, std::move(catalog), std::move(index)});
    cache_[db_id] = res;
    return res;
}

Trajectory run_pipeline(const QuestionRecord& q, const LlmClient& client, ResourceCache& cache,
                        const PipelineConfig& config) {
    Trajectory t;
    t.question_id = q.id;
    t.db_id = q.db_id;
    t.question = q.text;
    t.evidence = q.evidence;
    t.difficulty = q.difficulty;
    t.config = config.snapshot();

    const auto start = std::chrono::steady_clock::now();
    auto check_budget = [&] {
        if (std::chrono::steady_clock::now() - start > config.question_budget) throw BudgetExceeded{};
    };
    const auto& flags = config.flags;
    Conversation conv(client);
    auto record = [&](std::string_view stage, json detail) {
        t.stages.push_back({std::string(stage), conv.take_calls(), std::move(detail)});
    };
    std::string current_sql;
    ExecutionOutcome current_outcome;
    current_outcome.status = ExecStatus::error;
    std::shared_ptr<const DatabaseResources> res;
    std::optional<Database> db_handle;
    std::vector<Entity> entities;
    ExplorationReport report;

    try {
        res = cache.get(q.db_id);
        const auto& catalog = res->catalog;
        db_handle.emplace(Database::open_readonly(res->path));
        auto& db = *db_handle;

        std::string schema_text = render_full_schema(catalog);
        if (flags.soft_linker) {
            entities = extract_entities(conv, q.text, q.evidence);
            for (auto& e : entities) e.value_matches = retrieve_values(e.surface, res->index, db, config.linker);
            auto picks = select_columns(conv, entities, catalog, q.text, q.evidence);
            for (std::size_t i = 0; i < entities.size(); ++i) entities[i].column_candidates = picks[i];
            auto selection = make_selection(entities);
            if (!entities.empty()) schema_text = render_schema(catalog, selection);
            record(kStageLinking, linking_detail(entities, selection));
        }

        if (flags.gen_exploration) {
            check_budget();
            bool escalated = false;
            try {
                report = explore_candidates(conv, q.text, q.evidence, schema_text, entities, catalog, db,
                                            config.explorer);
            } catch (const EscalateToFullSchema&) {
                escalated = true;
                try {
                    report = explore_candidates(conv, q.text, q.evidence, render_full_schema(catalog), entities,
                                                catalog, db, config.explorer);
                } catch (const EscalateToFullSchema&) {
                    report = ExplorationReport{};
                }
            }
            record(kStageCandidates, candidates_detail(report, escalated));
            check_budget();
            explore_combinations(report, catalog, db, config.explorer);
            summarize_exploration(conv, report, q.text, q.evidence);
            record(kStageCombinations, combinations_detail(report));
        }

        check_budget();
        GenerationInputs gin{q.text, q.evidence, schema_text, flags.gen_exploration ? report.digest() : std::string()};
        auto gen = generate_candidates(conv, gin, config.consistency_n, db, config.limits,
                                       fallback_sql(flags.gen_exploration ? &report : nullptr, entities, catalog));
        record(kStageGeneration, generation_detail(gen));
        current_sql = gen.candidates[gen.selected].sql;
        current_outcome = gen.candidates[gen.selected].outcome;

        if (flags.refinement) {
            check_budget();
            RefineContext ctx{conv, catalog, &res->index, db};
            RefinerConfig rc = config.refiner;
            rc.exploration = flags.refine_exploration;
            rc.limits = config.limits;
            RefineInputs rin{q.text, q.evidence, schema_text};
            auto refined = refine(ctx, rin, current_sql, current_outcome, rc);
            record(kStageRefinement, refinement_detail(refined, current_sql));
            current_sql = refined.sql;
            current_outcome = refined.outcome;

            if (flags.target_check) {
                check_budget();
                auto tc = check_targets(conv, rin, current_sql, current_outcome, db, config.limits);
                record(kStageTargetCheck, target_detail(tc, current_sql));
                current_sql = tc.sql;
                current_outcome = tc.outcome;
            }
        }
    } catch (const BudgetExceeded&) {
        t.error = "budget_exceeded";
    } catch (const ReplayMiss& e) {
        t.error = std::string("replay_miss: ") + e.fingerprint();
    } catch (const std::exception& e) {
        t.error = std::string("error: ") + e.what();
    }
    if (current_sql.empty()) {
        current_sql = res ? fallback_sql(&report, entities, res->catalog) : "SELECT NULL";
        if (db_handle) current_outcome = db_handle->execute(current_sql, config.limits);
    }
    t.final_sql = current_sql;
    t.final_status = current_outcome.status;
    t.final_row_count = current_outcome.row_count;
    return t;
}

std::vector<Trajectory> run_batch(const std::vector<QuestionRecord>& questions, const LlmClient& client,
                                  ResourceCache& cache, const PipelineConfig& config) {
    std::vector<Trajectory> out(questions.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < questions.size(); i = next++) {
            out[i] = run_pipeline(questions[i], client, cache, config);
        }
    };
    int n = std::max(1, std::min<int>(config.workers, static_cast<int>(questions.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    std::stable_sort(out.begin(), out.end(),
                     [](const Trajectory& a, const Trajectory& b) { return question_id_less(a.question_id, b.question_id); });
    return out;
}

}  // namespace sdesql
