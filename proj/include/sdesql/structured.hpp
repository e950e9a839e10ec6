#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sdesql {

/// `- item` lines (or a JSON string array). A lone `NONE` yields an empty list.
std::vector<std::string> parse_entity_list(std::string_view completion);

struct ColumnPick {
    std::string table;
    std::string column;
    bool operator==(const ColumnPick&) const = default;
};

/// `<entity> => t.c, t.c [| v1; v2]`; values are optional.
struct SelectionLine {
    std::string entity;
    std::vector<ColumnPick> columns;
    std::vector<std::string> values;
};

/// Lines of the column-selection shape. `NONE` after `=>` gives an empty column list.
std::vector<SelectionLine> parse_selection_lines(std::string_view completion);

/// Candidate sets: `TARGET <entity> => ...` and `CONDITION <entity> => ... | values`.
struct CandidateLines {
    std::vector<SelectionLine> targets;
    std::vector<SelectionLine> conditions;
};
CandidateLines parse_candidate_lines(std::string_view completion);

/// Bodies of fenced code blocks (``` or ```sql). When there is no fence but the
/// text itself starts with SELECT or WITH, the whole text is the single block.
std::vector<std::string> parse_sql_blocks(std::string_view completion);

struct CauseLine {
    std::string tag;  // as written, normalized later
    std::vector<std::size_t> units;
    std::string rationale;
};

/// `CAUSE: tag | units: 0,1 | rationale` lines.
std::vector<CauseLine> parse_cause_lines(std::string_view completion);

/// `KEEP` or `REMOVE: [i, ...]` (zero-based). KEEP yields an empty set.
std::set<std::size_t> parse_verdict(std::string_view completion);

}  // namespace sdesql
