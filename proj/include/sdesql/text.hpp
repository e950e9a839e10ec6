#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sdesql::text {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool starts_with_icase(std::string_view s, std::string_view prefix);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

/// Hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// 1 - distance / max(len); 1.0 for two empty strings.
double edit_similarity(std::string_view a, std::string_view b);

/// Truncate to at most `n` bytes, appending "..." when cut.
std::string truncate(std::string_view s, std::size_t n);

std::string first_line(std::string_view s);

}  // namespace sdesql::text
