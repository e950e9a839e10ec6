#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sdesql {

enum class Difficulty { simple, moderate, challenging, unknown };

std::string_view to_string(Difficulty d);
Difficulty parse_difficulty(std::string_view s);

struct QuestionRecord {
    std::string id;
    std::string db_id;
    std::string text;
    std::string evidence;
    Difficulty difficulty = Difficulty::unknown;
    std::optional<std::string> gold_sql;
};

struct Dataset {
    std::vector<QuestionRecord> questions;
    std::filesystem::path db_root;
};

/// Loads `<root>/<split>.json` with databases under `<root>/databases`.
/// Throws MissingFile or MalformedRecord.
Dataset load_dataset(const std::filesystem::path& root, std::string_view split);

/// Same, from an explicit questions file; the database root is its sibling
/// `databases/` directory.
Dataset load_questions_file(const std::filesystem::path& questions_file);

std::filesystem::path database_path(const std::filesystem::path& db_root, std::string_view db_id);
std::filesystem::path description_dir(const std::filesystem::path& db_root, std::string_view db_id);

/// Orders question ids numerically when both are integers, lexically otherwise.
bool question_id_less(std::string_view a, std::string_view b);

}  // namespace sdesql
