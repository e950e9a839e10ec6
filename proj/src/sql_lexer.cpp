#include "sdesql/sql_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "sdesql/error.hpp"
#include "sdesql/text.hpp"

namespace sdesql::sql {

namespace {

constexpr std::array kReserved = {
    "ALL",     "AND",       "AS",     "ASC",       "BETWEEN", "BY",     "CASE",     "CAST",   "COLLATE",
    "CROSS",   "DESC",      "DISTINCT", "ELSE",    "END",     "ESCAPE", "EXCEPT",   "EXISTS", "FROM",
    "FULL",    "GLOB",      "GROUP",  "HAVING",    "IN",      "INNER",  "INTERSECT", "IS",    "ISNULL",
    "JOIN",    "LEFT",      "LIKE",   "LIMIT",     "MATCH",   "NATURAL", "NOT",     "NOTNULL", "NULL",
    "OFFSET",  "ON",        "OR",     "ORDER",     "OUTER",   "REGEXP", "RIGHT",    "SELECT", "THEN",
    "UNION",   "USING",     "WHEN",   "WHERE",     "WITH",    "VALUES", "RECURSIVE",
};

// Full keyword list of the embedded dialect; identifiers spelled like these
// are quoted on output. TRUE and FALSE are left out on purpose: quoting them
// would turn the boolean into a string literal when no such column exists.
constexpr std::array kKeywords = {
    "ABORT", "ACTION", "ADD", "AFTER", "ALL", "ALTER", "ALWAYS", "ANALYZE", "AND", "AS", "ASC", "ATTACH",
    "AUTOINCREMENT", "BEFORE", "BEGIN", "BETWEEN", "BY", "CASCADE", "CASE", "CAST", "CHECK", "COLLATE",
    "COLUMN", "COMMIT", "CONFLICT", "CONSTRAINT", "CREATE", "CROSS", "CURRENT", "CURRENT_DATE",
    "CURRENT_TIME", "CURRENT_TIMESTAMP", "DATABASE", "DEFAULT", "DEFERRABLE", "DEFERRED", "DELETE", "DESC",
    "DETACH", "DISTINCT", "DO", "DROP", "EACH", "ELSE", "END", "ESCAPE", "EXCEPT", "EXCLUDE", "EXCLUSIVE",
    "EXISTS", "EXPLAIN", "FAIL", "FILTER", "FIRST", "FOLLOWING", "FOR", "FOREIGN", "FROM", "FULL",
    "GENERATED", "GLOB", "GROUP", "GROUPS", "HAVING", "IF", "IGNORE", "IMMEDIATE", "IN", "INDEX",
    "INDEXED", "INITIALLY", "INNER", "INSERT", "INSTEAD", "INTERSECT", "INTO", "IS", "ISNULL", "JOIN",
    "KEY", "LAST", "LEFT", "LIKE", "LIMIT", "MATCH", "MATERIALIZED", "NATURAL", "NO", "NOT", "NOTHING",
    "NOTNULL", "NULL", "NULLS", "OF", "OFFSET", "ON", "OR", "ORDER", "OTHERS", "OUTER", "OVER",
    "PARTITION", "PLAN", "PRAGMA", "PRECEDING", "PRIMARY", "QUERY", "RAISE", "RANGE", "RECURSIVE",
    "REFERENCES", "REGEXP", "REINDEX", "RELEASE", "RENAME", "REPLACE", "RESTRICT", "RETURNING", "RIGHT",
    "ROLLBACK", "ROW", "ROWS", "SAVEPOINT", "SELECT", "SET", "TABLE", "TEMP", "TEMPORARY", "THEN", "TIES",
    "TO", "TRANSACTION", "TRIGGER", "UNBOUNDED", "UNION", "UNIQUE", "UPDATE", "USING", "VACUUM", "VALUES",
    "VIEW", "VIRTUAL", "WHEN", "WHERE", "WINDOW", "WITH", "WITHOUT",
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

}  // namespace

bool is_reserved(std::string_view upper_word) {
    return std::find(kReserved.begin(), kReserved.end(), upper_word) != kReserved.end();
}

bool needs_quoting(std::string_view identifier) {
    if (identifier.empty()) return true;
    if (!ident_start(static_cast<unsigned char>(identifier[0])) || static_cast<unsigned char>(identifier[0]) >= 0x80) {
        return true;
    }
    for (unsigned char c : identifier) {
        if (!(std::isalnum(c) || c == '_')) return true;
    }
    auto upper = text::to_upper(identifier);
    return std::find(kKeywords.begin(), kKeywords.end(), upper) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view sql) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = sql.size();
    auto push = [&](Token::Kind kind, std::string textv, std::size_t b, std::size_t e) {
        Token t;
        t.kind = kind;
        t.text = std::move(textv);
        if (kind == Token::Kind::identifier) t.upper = text::to_upper(t.text);
        t.begin = b;
        t.end = e;
        out.push_back(std::move(t));
    };
    auto read_quoted = [&](char close, std::size_t start) {
        std::string body;
        std::size_t j = start + 1;
        while (true) {
            if (j >= n) throw SyntaxError(start, "unterminated quoted token");
            if (sql[j] == close) {
                if (close != ']' && j + 1 < n && sql[j + 1] == close) {
                    body.push_back(close);
                    j += 2;
                    continue;
                }
                break;
            }
            body.push_back(sql[j++]);
        }
        return std::pair{body, j + 1};
    };

    while (i < n) {
        unsigned char c = static_cast<unsigned char>(sql[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (sql.compare(i, 2, "--") == 0) {
            auto nl = sql.find('\n', i);
            i = nl == std::string_view::npos ? n : nl + 1;
            continue;
        }
        if (sql.compare(i, 2, "/*") == 0) {
            auto end = sql.find("*/", i + 2);
            if (end == std::string_view::npos) throw SyntaxError(i, "unterminated comment");
            i = end + 2;
            continue;
        }
        std::size_t start = i;
        if ((c == 'x' || c == 'X') && i + 1 < n && sql[i + 1] == '\'') {
            auto [body, next] = read_quoted('\'', i + 1);
            if (body.size() % 2 != 0 || !std::all_of(body.begin(), body.end(), [](char h) {
                    return std::isxdigit(static_cast<unsigned char>(h)) != 0;
                })) {
                throw SyntaxError(start, "malformed blob literal");
            }
            push(Token::Kind::blob, std::move(body), start, next);
            i = next;
        } else if (c == '\'') {
            auto [body, next] = read_quoted('\'', i);
            push(Token::Kind::string, std::move(body), start, next);
            i = next;
        } else if (c == '"' || c == '`' || c == '[') {
            char close = c == '[' ? ']' : static_cast<char>(c);
            auto [body, next] = read_quoted(close, i);
            push(Token::Kind::quoted_identifier, std::move(body), start, next);
            i = next;
        } else if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            std::size_t j = i;
            if (c == '0' && j + 1 < n && (sql[j + 1] == 'x' || sql[j + 1] == 'X')) {
                j += 2;
                while (j < n && std::isxdigit(static_cast<unsigned char>(sql[j]))) ++j;
            } else {
                while (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) ++j;
                if (j < n && sql[j] == '.') {
                    ++j;
                    while (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) ++j;
                }
                if (j < n && (sql[j] == 'e' || sql[j] == 'E')) {
                    std::size_t k = j + 1;
                    if (k < n && (sql[k] == '+' || sql[k] == '-')) ++k;
                    if (k < n && std::isdigit(static_cast<unsigned char>(sql[k]))) {
                        j = k;
                        while (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) ++j;
                    }
                }
            }
            if (j < n && ident_char(static_cast<unsigned char>(sql[j]))) {
                throw SyntaxError(j, "malformed number");
            }
            push(Token::Kind::number, std::string(sql.substr(i, j - i)), start, j);
            i = j;
        } else if (ident_start(c)) {
            std::size_t j = i + 1;
            while (j < n && ident_char(static_cast<unsigned char>(sql[j]))) ++j;
            push(Token::Kind::identifier, std::string(sql.substr(i, j - i)), start, j);
            i = j;
        } else {
            static constexpr std::array<std::string_view, 8> two = {"||", "<=", ">=", "==", "!=", "<>", "<<", ">>"};
            bool matched = false;
            for (auto op : two) {
                if (sql.compare(i, 2, op) == 0) {
                    push(Token::Kind::op, std::string(op), start, i + 2);
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            static constexpr std::string_view singles = "()*,.;/%+-<>=&|~";
            if (singles.find(static_cast<char>(c)) == std::string_view::npos) {
                throw SyntaxError(i, std::string("unexpected character '") + static_cast<char>(c) + "'");
            }
            push(Token::Kind::op, std::string(1, static_cast<char>(c)), start, i + 1);
            ++i;
        }
    }
    push(Token::Kind::end, "", n, n);
    return out;
}

}  // namespace sdesql::sql
