#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sdesql/executor.hpp"
#include "sdesql/llm_client.hpp"

namespace sdesql {

struct CandidateSql {
    std::string sql;
    ExecutionOutcome outcome;
    std::string group_key;
    std::size_t sample_index = 0;
};

/// `rows:<digest>`, `empty`, `error:<class>` or `timeout`.
std::string group_key(const ExecutionOutcome& outcome, bool order_sensitive = false);

/// Coarse class of an engine error message, e.g. no_such_column.
std::string error_class(const std::string& message);

struct GenerationResult {
    std::vector<CandidateSql> candidates;
    std::vector<std::size_t> discarded;  // sample indices without a usable SQL
    std::size_t selected = 0;            // index into candidates
    bool all_unparseable = false;        // candidates holds only the fallback
};

struct GenerationInputs {
    std::string question;
    std::string evidence;
    std::string schema_text;
    std::string exploration_report;  // empty when exploration is disabled
};

/// One zero_shot_generation call with `n` samples. The last SQL block of each
/// completion is parsed, rendered and executed. When nothing parses, the
/// fallback SQL becomes the only candidate.
GenerationResult generate_candidates(Conversation& conv, const GenerationInputs& inputs, int n, Database& db,
                                     const ExecutionLimits& limits, const std::string& fallback_sql);

/// Largest result-equivalent group among rows candidates, else among empty,
/// else among error/timeout; ties go to the group holding the smallest
/// sample_index. Returns the index of that group's earliest member.
std::size_t select_by_consistency(const std::vector<CandidateSql>& candidates);

}  // namespace sdesql
