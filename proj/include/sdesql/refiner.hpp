#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdesql/catalog.hpp"
#include "sdesql/executor.hpp"
#include "sdesql/explorer.hpp"
#include "sdesql/llm_client.hpp"
#include "sdesql/sqlkit.hpp"
#include "sdesql/value_index.hpp"

namespace sdesql {

enum class Route { no_refinement, error_feedback, empty_result };
std::string_view to_string(Route r);

/// error/timeout -> error_feedback, empty -> empty_result, rows -> no_refinement.
Route route(const ExecutionOutcome& outcome);

enum class CauseTag {
    condition_conflict,
    condition_duplication,
    unnecessary_table_joins,
    column_value_mismatch,
    subquery_scope_inconsistency,
};
std::string_view to_string(CauseTag t);

/// Maps free-form tags onto the closed set.
CauseTag nearest_cause_tag(std::string_view raw);

struct ErrorCause {
    CauseTag tag = CauseTag::condition_conflict;
    std::string raw_tag;
    std::string rationale;
    std::vector<std::size_t> implicated_units;  // positions in the executed sub-SQL list
    bool heuristic = false;
};

struct SubSqlResult {
    sql::SubSql sub;
    ExecutionOutcome outcome;
};

struct Revision {
    std::string stage;  // repair, modify
    std::string sql;
    ExecStatus status = ExecStatus::empty;
};

struct RefinementIteration {
    std::string input_sql;
    std::vector<SubSqlResult> sub_sql_results;
    bool not_decomposable = false;
    std::vector<ErrorCause> hypotheses;
    std::vector<ProbeResult> solution_probes;
};

struct RefinementTrace {
    Route route = Route::no_refinement;
    std::vector<RefinementIteration> iterations;
    std::vector<Revision> revisions;
    bool repair_exhausted = false;
    bool refinement_exhausted = false;
};

struct RefinerConfig {
    int max_repairs = 3;
    int max_iterations = 2;
    bool exploration = true;
    std::size_t solution_budget = 12;
    ExecutionLimits limits{};
};

struct RefineInputs {
    std::string question;
    std::string evidence;
    std::string schema_text;
};

struct RefineContext {
    Conversation& conv;
    const DatabaseCatalog& catalog;
    const ValueIndex* index;
    Database& db;
};

struct RefineOutput {
    std::string sql;
    ExecutionOutcome outcome;
    RefinementTrace trace;
};

/// Condition-unit sub-SQLs followed by the join skeleton, executed.
std::vector<SubSqlResult> run_sub_sqls(const sql::Decomposition& d, Database& db, const ExecutionLimits& limits);

/// Rule-based causes from sub-SQL outcomes (used when the model's answer is unusable).
std::vector<ErrorCause> heuristic_causes(const std::vector<SubSqlResult>& subs);

/// Drops hypotheses that contradict the sub-SQL outcomes and unit indices that do not exist.
std::vector<ErrorCause> ground_hypotheses(std::vector<ErrorCause> causes, const std::vector<SubSqlResult>& subs);

/// solution_exploration call: hypotheses plus optional model-proposed probe SQL.
std::vector<ErrorCause> identify_error_cause(Conversation& conv, const RefineInputs& inputs, const std::string& sql,
                                             const std::vector<SubSqlResult>& subs,
                                             std::vector<std::string>* proposed_probes = nullptr);

/// Mechanical probes per hypothesis plus parseable proposed probes, executed within budget.
std::vector<ProbeResult> explore_solutions(const std::string& sql, const std::vector<ErrorCause>& hypotheses,
                                           const std::vector<SubSqlResult>& subs, const DatabaseCatalog& catalog,
                                           const ValueIndex* index, Database& db,
                                           const std::vector<std::string>& proposed_probes,
                                           const RefinerConfig& config);

/// Feedback repair with up to max_repairs attempts; the input is executed first.
RefineOutput repair_with_feedback(RefineContext& ctx, const RefineInputs& inputs, const std::string& sql,
                                  const RefinerConfig& config);

/// Full refinement of one selected candidate. The output status is never
/// worse than the input status.
RefineOutput refine(RefineContext& ctx, const RefineInputs& inputs, const std::string& sql,
                    const ExecutionOutcome& outcome, const RefinerConfig& config = {});

struct TargetCheckResult {
    std::string sql;
    ExecutionOutcome outcome;
    std::set<std::size_t> remove;
    bool applied = false;
    std::string rejection;  // why a verdict was not applied
};

/// Removal-only select-list check. Anything but a valid strict-subset remove
/// set, or a result that gets worse, leaves the SQL unchanged.
TargetCheckResult check_targets(Conversation& conv, const RefineInputs& inputs, const std::string& sql,
                                const ExecutionOutcome& outcome, Database& db, const ExecutionLimits& limits);

}  // namespace sdesql
