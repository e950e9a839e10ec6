#include "sdesql/executor.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstdlib>
#include <optional>
#include <system_error>

#include "sdesql/error.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

std::string_view to_string(ExecStatus s) {
    switch (s) {
        case ExecStatus::rows: return "rows";
        case ExecStatus::empty: return "empty";
        case ExecStatus::error: return "error";
        case ExecStatus::timeout: return "timeout";
    }
    return "error";
}

int status_rank(ExecStatus s) {
    switch (s) {
        case ExecStatus::rows: return 2;
        case ExecStatus::empty: return 1;
        default: return 0;
    }
}

void Database::Closer::operator()(sqlite3* db) const noexcept { sqlite3_close_v2(db); }

Database::Database(std::unique_ptr<sqlite3, Closer> db, std::filesystem::path path)
    : db_(std::move(db)), path_(std::move(path)) {}

Database::~Database() = default;

Database Database::open_readonly(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw UnreadableDatabase("database file not found: " + path.string());
    }
    sqlite3* raw = nullptr;
    int rc = sqlite3_open_v2(path.string().c_str(), &raw, SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX, nullptr);
    std::unique_ptr<sqlite3, Closer> db(raw);
    if (rc != SQLITE_OK) {
        std::string msg = raw ? sqlite3_errmsg(raw) : "out of memory";
        throw UnreadableDatabase("cannot open " + path.string() + ": " + msg);
    }
    char* err = nullptr;
    if (sqlite3_exec(raw, "PRAGMA query_only = 1; SELECT count(*) FROM sqlite_master;", nullptr, nullptr, &err) !=
        SQLITE_OK) {
        std::string msg = err ? err : "unknown";
        sqlite3_free(err);
        throw UnreadableDatabase("cannot read " + path.string() + ": " + msg);
    }
    return Database(std::move(db), path);
}

namespace {

struct StmtFinalizer {
    void operator()(sqlite3_stmt* s) const noexcept { sqlite3_finalize(s); }
};
using StmtPtr = std::unique_ptr<sqlite3_stmt, StmtFinalizer>;

struct Deadline {
    std::chrono::steady_clock::time_point at;
    bool fired = false;
};

int progress_callback(void* ctx) {
    auto* d = static_cast<Deadline*>(ctx);
    if (std::chrono::steady_clock::now() >= d->at) {
        d->fired = true;
        return 1;
    }
    return 0;
}

// Skips whitespace, `--` and `/* */` comments, and statement separators.
std::size_t skip_insignificant(std::string_view s, std::size_t i, bool allow_semicolons) {
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c) || (allow_semicolons && c == ';')) {
            ++i;
        } else if (s.compare(i, 2, "--") == 0) {
            auto nl = s.find('\n', i);
            i = nl == std::string_view::npos ? s.size() : nl + 1;
        } else if (s.compare(i, 2, "/*") == 0) {
            auto end = s.find("*/", i + 2);
            i = end == std::string_view::npos ? s.size() : end + 2;
        } else {
            break;
        }
    }
    return i;
}

bool is_select_form(std::string_view sql) {
    std::size_t i = skip_insignificant(sql, 0, false);
    std::size_t j = i;
    while (j < sql.size() && std::isalpha(static_cast<unsigned char>(sql[j]))) ++j;
    auto word = sql.substr(i, j - i);
    return text::iequals(word, "SELECT") || text::iequals(word, "WITH") || text::iequals(word, "VALUES");
}

Cell read_cell(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT: return sqlite3_column_double(stmt, col);
        case SQLITE_TEXT: {
            auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
            return std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)));
        }
        case SQLITE_BLOB: {
            auto* p = static_cast<const char*>(sqlite3_column_blob(stmt, col));
            return Blob{std::string(p ? p : "", static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)))};
        }
        default: return Null{};
    }
}

ExecutionOutcome error_outcome(std::string message) {
    ExecutionOutcome out;
    out.status = ExecStatus::error;
    out.error_message = std::move(message);
    return out;
}

ExecutionOutcome timeout_outcome() {
    ExecutionOutcome out;
    out.status = ExecStatus::timeout;
    return out;
}

}  // namespace

ExecutionOutcome Database::execute(std::string_view sql, const ExecutionLimits& limits) {
    auto started = std::chrono::steady_clock::now();
    auto finish = [&](ExecutionOutcome out) {
        out.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - started);
        return out;
    };

    if (limits.timeout.count() <= 0 || limits.max_rows == 0) {
        return finish(error_outcome("execution limits must be positive"));
    }
    if (text::trim(sql).empty()) return finish(error_outcome("empty statement"));
    if (!is_select_form(sql)) {
        return finish(error_outcome("only a single SELECT statement may be executed"));
    }

    Deadline deadline{started + limits.timeout};
    sqlite3_progress_handler(db_.get(), 1000, &progress_callback, &deadline);
    struct HandlerReset {
        sqlite3* db;
        ~HandlerReset() { sqlite3_progress_handler(db, 0, nullptr, nullptr); }
    } reset{db_.get()};

    sqlite3_stmt* raw = nullptr;
    const char* tail = nullptr;
    int rc = sqlite3_prepare_v2(db_.get(), sql.data(), static_cast<int>(sql.size()), &raw, &tail);
    StmtPtr stmt(raw);
    if (rc != SQLITE_OK) {
        if (deadline.fired) return finish(timeout_outcome());
        return finish(error_outcome(sqlite3_errmsg(db_.get())));
    }
    if (!stmt) return finish(error_outcome("empty statement"));
    std::size_t consumed = static_cast<std::size_t>(tail - sql.data());
    if (skip_insignificant(sql, consumed, true) != sql.size()) {
        return finish(error_outcome("only a single SELECT statement may be executed"));
    }
    if (!sqlite3_stmt_readonly(stmt.get())) {
        return finish(error_outcome("only read-only SELECT statements may be executed"));
    }

    ExecutionOutcome out;
    int ncols = sqlite3_column_count(stmt.get());
    for (int c = 0; c < ncols; ++c) {
        const char* name = sqlite3_column_name(stmt.get(), c);
        out.columns.emplace_back(name ? name : "");
    }
    while (true) {
        rc = sqlite3_step(stmt.get());
        if (rc == SQLITE_ROW) {
            if (out.rows.size() < limits.max_rows) {
                Row row;
                row.reserve(static_cast<std::size_t>(ncols));
                for (int c = 0; c < ncols; ++c) row.push_back(read_cell(stmt.get(), c));
                out.rows.push_back(std::move(row));
            }
            ++out.row_count;
        } else if (rc == SQLITE_DONE) {
            break;
        } else {
            if (rc == SQLITE_INTERRUPT || deadline.fired) {
                return finish(timeout_outcome());
            }
            return finish(error_outcome(sqlite3_errmsg(db_.get())));
        }
    }
    out.status = out.row_count == 0 ? ExecStatus::empty : ExecStatus::rows;
    return finish(std::move(out));
}

void create_database_from_script(const std::filesystem::path& path, std::string_view script) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    sqlite3* raw = nullptr;
    int rc = sqlite3_open_v2(path.string().c_str(), &raw, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr);
    std::unique_ptr<sqlite3, decltype(&sqlite3_close_v2)> db(raw, &sqlite3_close_v2);
    if (rc != SQLITE_OK) throw UnreadableDatabase("cannot create " + path.string());
    std::string owned(script);
    char* err = nullptr;
    if (sqlite3_exec(raw, owned.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown";
        sqlite3_free(err);
        throw Error("fixture script failed for " + path.string() + ": " + msg);
    }
}

// ---------------------------------------------------------------------------
// Canonicalization

namespace {

std::string format_double(double d) {
    if (d == 0.0) return "0";
    if (std::isfinite(d) && std::nearbyint(d) == d && std::fabs(d) < 1e15) {
        return std::to_string(static_cast<std::int64_t>(d));
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, res.ptr);
}

// Plain decimal grammar: [+-]? (0 | [1-9][0-9]*) (. [0-9]+)? ([eE][+-]?[0-9]+)?
// with at most 15 significant digits so the double reproduces the decimal.
std::optional<std::string> numeric_text(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::size_t i = 0;
    if (s[i] == '+' || s[i] == '-') ++i;
    std::size_t int_begin = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t int_len = i - int_begin;
    if (int_len == 0) return std::nullopt;
    if (int_len > 1 && s[int_begin] == '0') return std::nullopt;
    std::string digits(s.substr(int_begin, int_len));
    bool has_fraction = false;
    bool has_exponent = false;
    if (i < s.size() && s[i] == '.') {
        ++i;
        std::size_t fb = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == fb) return std::nullopt;
        digits += s.substr(fb, i - fb);
        has_fraction = true;
    }
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        std::size_t eb = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == eb) return std::nullopt;
        has_exponent = true;
    }
    if (i != s.size()) return std::nullopt;

    if (!has_fraction && !has_exponent) {
        std::int64_t v = 0;
        std::string_view body = s[0] == '+' ? s.substr(1) : s;
        auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
        if (ec != std::errc{} || p != body.data() + body.size()) return std::nullopt;
        return std::to_string(v);
    }
    auto first = digits.find_first_not_of('0');
    auto last = digits.find_last_not_of('0');
    std::size_t significant = first == std::string::npos ? 0 : last - first + 1;
    if (significant > 15) return std::nullopt;
    std::string owned(s);
    char* end = nullptr;
    double d = std::strtod(owned.c_str(), &end);
    if (!std::isfinite(d)) return std::nullopt;
    return format_double(d);
}

}  // namespace

CanonicalCell canonical_cell(const Cell& cell) {
    using K = CanonicalCell::Kind;
    return std::visit(
        [](const auto& v) -> CanonicalCell {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Null>) {
                return {K::null, ""};
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return {K::number, std::to_string(v)};
            } else if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return {K::text, std::to_string(v)};
                return {K::number, format_double(v)};
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (auto n = numeric_text(v)) return {K::number, *n};
                return {K::text, v};
            } else {
                return {K::blob, v.bytes};
            }
        },
        cell);
}

CanonicalResult canonicalize(const ExecutionOutcome& outcome, bool order_sensitive) {
    if (outcome.status == ExecStatus::error || outcome.status == ExecStatus::timeout) {
        throw NotCanonicalizable("cannot canonicalize a " + std::string(to_string(outcome.status)) + " outcome");
    }
    CanonicalResult out;
    out.ordered = order_sensitive;
    out.complete = !outcome.truncated();
    out.rows.reserve(outcome.rows.size());
    for (const auto& row : outcome.rows) {
        CanonicalTuple t;
        t.reserve(row.size());
        for (const auto& c : row) t.push_back(canonical_cell(c));
        out.rows.push_back(std::move(t));
    }
    return canonicalize(out);
}

CanonicalResult canonicalize(const CanonicalResult& result) {
    CanonicalResult out = result;
    for (auto& row : out.rows) {
        for (auto& c : row) {
            if (c.kind == CanonicalCell::Kind::text) {
                if (auto n = numeric_text(c.repr)) c = {CanonicalCell::Kind::number, *n};
            }
        }
    }
    if (!out.ordered) {
        std::sort(out.rows.begin(), out.rows.end());
        out.rows.erase(std::unique(out.rows.begin(), out.rows.end()), out.rows.end());
    }
    return out;
}

bool results_equal(const CanonicalResult& a, const CanonicalResult& b) { return a.rows == b.rows; }

std::string result_digest(const CanonicalResult& result) {
    std::string buf;
    for (const auto& row : result.rows) {
        for (const auto& c : row) {
            buf.push_back(static_cast<char>('0' + static_cast<int>(c.kind)));
            buf += std::to_string(c.repr.size());
            buf.push_back(':');
            buf += c.repr;
        }
        buf.push_back('\n');
    }
    return text::sha256_hex(buf).substr(0, 16);
}

std::string cell_to_string(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Null>) {
                return "NULL";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(v);
            } else if constexpr (std::is_same_v<T, double>) {
                return format_double(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else {
                return "<blob " + std::to_string(v.bytes.size()) + " bytes>";
            }
        },
        cell);
}

}  // namespace sdesql
