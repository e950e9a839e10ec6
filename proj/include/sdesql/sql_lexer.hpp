#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sdesql::sql {

struct Token {
    enum class Kind { identifier, quoted_identifier, string, blob, number, op, end };
    Kind kind = Kind::end;
    std::string text;  // unescaped body for quoted forms, raw text otherwise
    std::string upper; // upper-cased text for bare identifiers (keyword checks)
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Splits SQL text into tokens. Throws SyntaxError on unterminated literals
/// or characters outside the dialect.
std::vector<Token> tokenize(std::string_view sql);

/// Words that cannot appear as bare identifiers in this dialect.
bool is_reserved(std::string_view upper_word);

/// Words that render with quotes when used as identifiers.
bool needs_quoting(std::string_view identifier);

}  // namespace sdesql::sql
