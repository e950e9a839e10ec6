#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

struct sqlite3;

namespace sdesql {

struct Null {
    bool operator==(const Null&) const = default;
};

struct Blob {
    std::string bytes;
    bool operator==(const Blob&) const = default;
};

using Cell = std::variant<Null, std::int64_t, double, std::string, Blob>;
using Row = std::vector<Cell>;

enum class ExecStatus { rows, empty, error, timeout };

std::string_view to_string(ExecStatus s);

/// Ranks statuses for best-so-far selection: rows > empty > error = timeout.
int status_rank(ExecStatus s);

struct ExecutionLimits {
    std::chrono::milliseconds timeout{5000};
    std::size_t max_rows = 500;
};

/// Result of running one statement. `rows` holds at most `max_rows` tuples while
/// `row_count` is the true number produced by the engine.
struct ExecutionOutcome {
    ExecStatus status = ExecStatus::empty;
    std::vector<std::string> columns;
    std::vector<Row> rows;
    std::size_t row_count = 0;
    std::string error_message;
    std::chrono::microseconds elapsed{0};

    bool truncated() const noexcept { return row_count > rows.size(); }
};

/// Read-only handle on an embedded database file. One statement in flight at a time.
class Database {
public:
    static Database open_readonly(const std::filesystem::path& path);

    Database(Database&&) noexcept = default;
    Database& operator=(Database&&) noexcept = default;
    Database(const Database&) = delete;
    Database& operator=(const Database&) = delete;
    ~Database();

    /// Never throws for bad SQL: every failure is mapped into the outcome.
    ExecutionOutcome execute(std::string_view sql, const ExecutionLimits& limits);

    const std::filesystem::path& path() const noexcept { return path_; }
    sqlite3* handle() const noexcept { return db_.get(); }

private:
    struct Closer {
        void operator()(sqlite3* db) const noexcept;
    };
    Database(std::unique_ptr<sqlite3, Closer> db, std::filesystem::path path);

    std::unique_ptr<sqlite3, Closer> db_;
    std::filesystem::path path_;
};

/// Creates (or replaces) a database file and runs a DDL/DML script in it.
void create_database_from_script(const std::filesystem::path& path, std::string_view script);

/// Normalized cell used for result comparison.
struct CanonicalCell {
    enum class Kind { null, number, text, blob };
    Kind kind = Kind::null;
    std::string repr;

    auto operator<=>(const CanonicalCell&) const = default;
    bool operator==(const CanonicalCell&) const = default;
};

using CanonicalTuple = std::vector<CanonicalCell>;

struct CanonicalResult {
    std::vector<CanonicalTuple> rows;  // sorted and unique unless `ordered`
    bool ordered = false;
    bool complete = true;  // false when the source outcome was truncated

    bool operator==(const CanonicalResult&) const = default;
};

CanonicalCell canonical_cell(const Cell& cell);

/// Order-insensitive set of normalized tuples (or an ordered list when
/// `order_sensitive`). Throws NotCanonicalizable for error/timeout outcomes.
CanonicalResult canonicalize(const ExecutionOutcome& outcome, bool order_sensitive = false);
CanonicalResult canonicalize(const CanonicalResult& result);

bool results_equal(const CanonicalResult& a, const CanonicalResult& b);

/// Stable digest of a canonical result, used as a grouping key.
std::string result_digest(const CanonicalResult& result);

/// Short human rendering of a cell for prompts and digests.
std::string cell_to_string(const Cell& cell);

}  // namespace sdesql
