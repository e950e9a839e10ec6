#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sdesql/catalog.hpp"
#include "sdesql/executor.hpp"
#include "sdesql/linker.hpp"
#include "sdesql/llm_client.hpp"

namespace sdesql {

enum class ProbeKind { base, condition, combination, diagnostic, solution };
std::string_view to_string(ProbeKind k);

struct ConditionCandidate {
    std::string entity;
    ColumnId column;
    std::string op = "=";
    std::optional<std::string> value;

    bool operator==(const ConditionCandidate&) const = default;
    std::string describe() const;
};

struct SqlProbe {
    std::size_t id = 0;
    ProbeKind kind = ProbeKind::base;
    std::string sql;
    std::optional<std::size_t> parent_id;
    std::vector<ConditionCandidate> conditions;  // one for condition probes, several for combinations
    std::string description;
};

struct ProbeResult {
    SqlProbe probe;
    ExecutionOutcome outcome;
};

struct TargetCandidates {
    std::string entity;
    std::vector<ColumnId> columns;
};

struct ConditionCandidates {
    std::string entity;
    std::vector<ColumnId> columns;
    std::vector<std::string> values;  // highest-ranked first
};

struct CandidateSets {
    std::vector<TargetCandidates> targets;
    std::vector<ConditionCandidates> conditions;
};

struct ExplorerConfig {
    std::size_t base_budget = 4;
    std::size_t condition_budget = 24;
    std::size_t combination_budget = 16;
    ExecutionLimits limits{};
};

/// Output of expanding one condition over the base probes.
struct ConditionExpansion {
    std::vector<SqlProbe> probes;
    std::size_t enumerated = 0;  // root-to-leaf paths before the cap
    bool budget_exceeded = false;
    std::size_t dropped = 0;  // paths whose column is unreachable from the base scope
};

struct ConditionOutcome {
    ConditionCandidates candidates;
    std::vector<ProbeResult> results;
    std::vector<ConditionCandidate> survivors;
    bool unresolved = false;  // every probe was empty; all candidates kept
    std::size_t enumerated = 0;
    bool budget_exceeded = false;
};

struct CombinationResult {
    ProbeResult probe;
    bool suitable = false;
};

struct ExplorationReport {
    CandidateSets candidates;
    std::vector<ProbeResult> bases;
    std::vector<ConditionOutcome> conditions;
    std::vector<CombinationResult> combinations;
    bool no_suitable_combination = false;
    bool combination_budget_exceeded = false;
    std::size_t dropped_llm_probes = 0;
    std::string summary;

    std::string stage1_digest() const;
    std::string stage2_digest() const;
    /// Text handed to generation: both digests plus the summary.
    std::string digest() const;
};

/// `SQL → row_count | first row`, `SQL → (no rows)` or `SQL → error: ...`.
std::string digest_line(const std::string& sql, const ExecutionOutcome& outcome);

/// candidates_exploration call. Unknown columns are dropped and values are kept
/// only when they come from a value match or the question/evidence text. A
/// failed parse falls back to linking: matched entities become conditions,
/// the others targets.
CandidateSets propose_candidates(Conversation& conv, const std::string& question, const std::string& evidence,
                                 const std::string& schema_text, const std::vector<Entity>& entities,
                                 const DatabaseCatalog& catalog, std::vector<std::string>* llm_probe_sql = nullptr);

/// Bare SELECTs over the cross product of target column candidates. Throws
/// EscalateToFullSchema when there is no target column.
std::vector<SqlProbe> generate_base_probes(const CandidateSets& candidates, const DatabaseCatalog& catalog,
                                           std::size_t budget);

/// |bases| x |columns| x max(1, |values|) paths, enumerated by value rank,
/// then base, then column; truncated to `budget`.
ConditionExpansion expand_condition_probes(const std::vector<SqlProbe>& bases, const CandidateSets& candidates,
                                           std::size_t condition_index, std::size_t budget,
                                           const DatabaseCatalog* catalog, std::size_t first_id = 0);

std::vector<ProbeResult> run_probes(const std::vector<SqlProbe>& probes, Database& db, const ExecutionLimits& limits);

/// Stage 1: base and condition probes, survivors per condition.
ExplorationReport explore_candidates(Conversation& conv, const std::string& question, const std::string& evidence,
                                     const std::string& schema_text, const std::vector<Entity>& entities,
                                     const DatabaseCatalog& catalog, Database& db, const ExplorerConfig& config = {});

/// Stage 2: mechanical cross product of survivors applied to the first base.
void explore_combinations(ExplorationReport& report, const DatabaseCatalog& catalog, Database& db,
                          const ExplorerConfig& config = {});

/// combinations_exploration call summarizing both stages into report.summary.
void summarize_exploration(Conversation& conv, ExplorationReport& report, const std::string& question,
                           const std::string& evidence);

}  // namespace sdesql
