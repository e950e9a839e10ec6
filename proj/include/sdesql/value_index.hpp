#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sdesql/catalog.hpp"

namespace sdesql {

class Database;

struct ValueIndexConfig {
    std::size_t shingle_size = 3;
    std::size_t bands = 32;
    std::size_t rows_per_band = 2;
    std::size_t max_value_length = 128;
    std::size_t max_distinct_values = 50000;
    std::uint64_t seed = 0x5DE5C0DEULL;
};

struct IndexedValue {
    ColumnId column;
    std::string value;
    bool operator==(const IndexedValue&) const = default;
};

struct SkippedColumn {
    enum class Reason { non_textual, too_many_values };
    ColumnId column;
    Reason reason = Reason::non_textual;
    std::size_t distinct_values = 0;
};

/// Lower-cased character n-gram set; strings shorter than n yield themselves.
std::set<std::string> shingles(std::string_view value, std::size_t n = 3);
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// MinHash signatures over character shingles, bucketed by bands. Immutable
/// after build and safe to share between threads.
class ValueIndex {
public:
    static ValueIndex build(const DatabaseCatalog& catalog, Database& db, const ValueIndexConfig& config = {});

    const std::string& db_id() const noexcept { return db_id_; }
    const ValueIndexConfig& config() const noexcept { return config_; }
    const std::vector<IndexedValue>& values() const noexcept { return values_; }
    const std::vector<SkippedColumn>& skipped() const noexcept { return skipped_; }

    std::vector<std::uint64_t> signature(std::string_view value) const;
    std::vector<std::uint64_t> band_keys(std::string_view value) const;

    /// Indices into values() sharing at least one band bucket with `query`, ascending.
    std::vector<std::size_t> candidates(std::string_view query) const;

    const std::map<std::uint64_t, std::vector<std::uint32_t>>& buckets() const noexcept { return buckets_; }

private:
    std::string db_id_;
    ValueIndexConfig config_;
    std::vector<std::uint64_t> mul_, add_;
    std::vector<IndexedValue> values_;
    std::vector<SkippedColumn> skipped_;
    std::map<std::uint64_t, std::vector<std::uint32_t>> buckets_;

    void init_hashes();
};

}  // namespace sdesql
