#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sdesql/catalog.hpp"
#include "sdesql/llm_client.hpp"
#include "sdesql/value_index.hpp"

namespace sdesql {

class Database;

struct ValueMatch {
    ColumnId column;
    std::string stored_value;
    double lexical_score = 0.0;
    double semantic_score = 0.0;
    double combined = 0.0;
};

struct Entity {
    std::string surface;
    std::vector<ValueMatch> value_matches;  // descending combined score
    std::vector<ColumnId> column_candidates;
};

struct SchemaSelection {
    std::set<ColumnId> selected;
    std::map<std::string, std::vector<ColumnId>> provenance;  // entity surface -> columns
};

struct LinkerConfig {
    double lexical_weight = 0.5;
    double semantic_weight = 0.5;
    double threshold = 0.6;
    std::size_t top_k = 5;
};

/// Monotone in both scores.
double combine_scores(double lexical, double semantic, const LinkerConfig& config = {});

/// LLM entity extraction over question and evidence. Falls back to an empty
/// list when the completion cannot be parsed twice.
std::vector<Entity> extract_entities(Conversation& conv, const std::string& question, const std::string& evidence);

/// Similar stored values for one entity: LSH candidates plus exact lookups on
/// columns that were too large to index. Every match is confirmed with an
/// equality query before it is returned.
std::vector<ValueMatch> retrieve_values(const std::string& entity, const ValueIndex& index, Database& db,
                                        const LinkerConfig& config = {});

/// One column-selection call for all entities; per entity, columns that do not
/// exist are discarded. A failed parse falls back to the hosts of the entity's matches.
std::vector<std::vector<ColumnId>> select_columns(Conversation& conv, const std::vector<Entity>& entities,
                                                  const DatabaseCatalog& catalog, const std::string& question,
                                                  const std::string& evidence);

SchemaSelection make_selection(const std::vector<Entity>& entities);

/// Selected columns with type, descriptions and examples; the rest as name and
/// type only. Every table and column is always present.
std::string render_schema(const DatabaseCatalog& catalog, const SchemaSelection& selection);

/// Every column fully detailed.
std::string render_full_schema(const DatabaseCatalog& catalog);

std::string describe_entities(const std::vector<Entity>& entities);

}  // namespace sdesql
