#include "sdesql/value_index.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "sdesql/executor.hpp"
#include "sdesql/sqlkit.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

namespace {

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t mod_mersenne(unsigned __int128 x) {
    std::uint64_t lo = static_cast<std::uint64_t>(x & kMersenne61);
    std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
    std::uint64_t r = lo + hi;
    while (r >= kMersenne61) r -= kMersenne61;
    return r;
}

bool all_numeric(const std::vector<std::string>& values) {
    for (const auto& v : values) {
        std::string_view t = text::trim(v);
        if (t.empty()) return false;
        bool digit = false;
        for (std::size_t i = 0; i < t.size(); ++i) {
            char c = t[i];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                digit = true;
            } else if (!(c == '.' || ((c == '-' || c == '+') && i == 0))) {
                return false;
            }
        }
        if (!digit) return false;
    }
    return true;
}

}  // namespace

std::set<std::string> shingles(std::string_view value, std::size_t n) {
    std::string lower = text::to_lower(value);
    std::set<std::string> out;
    if (lower.empty()) return out;
    if (lower.size() < n) {
        out.insert(lower);
        return out;
    }
    for (std::size_t i = 0; i + n <= lower.size(); ++i) out.insert(lower.substr(i, n));
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& s : a) inter += b.count(s);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

void ValueIndex::init_hashes() {
    std::mt19937_64 rng(config_.seed);
    std::size_t k = config_.bands * config_.rows_per_band;
    mul_.resize(k);
    add_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        mul_[i] = (rng() % (kMersenne61 - 1)) + 1;
        add_[i] = rng() % kMersenne61;
    }
}

std::vector<std::uint64_t> ValueIndex::signature(std::string_view value) const {
    std::vector<std::uint64_t> sig(mul_.size(), std::numeric_limits<std::uint64_t>::max());
    for (const auto& sh : shingles(value, config_.shingle_size)) {
        std::uint64_t h = fnv1a(sh) % kMersenne61;
        for (std::size_t i = 0; i < sig.size(); ++i) {
            std::uint64_t v = mod_mersenne(static_cast<unsigned __int128>(mul_[i]) * h + add_[i]);
            sig[i] = std::min(sig[i], v);
        }
    }
    return sig;
}

std::vector<std::uint64_t> ValueIndex::band_keys(std::string_view value) const {
    auto sig = signature(value);
    std::vector<std::uint64_t> keys;
    keys.reserve(config_.bands);
    for (std::size_t b = 0; b < config_.bands; ++b) {
        std::uint64_t h = fnv1a(std::string_view(reinterpret_cast<const char*>(&b), sizeof b));
        for (std::size_t r = 0; r < config_.rows_per_band; ++r) {
            std::uint64_t v = sig[b * config_.rows_per_band + r];
            h = fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
        }
        keys.push_back(h);
    }
    return keys;
}

std::vector<std::size_t> ValueIndex::candidates(std::string_view query) const {
    std::set<std::size_t> hits;
    if (shingles(query, config_.shingle_size).empty()) return {};
    for (std::uint64_t key : band_keys(query)) {
        auto it = buckets_.find(key);
        if (it == buckets_.end()) continue;
        hits.insert(it->second.begin(), it->second.end());
    }
    return {hits.begin(), hits.end()};
}

ValueIndex ValueIndex::build(const DatabaseCatalog& catalog, Database& db, const ValueIndexConfig& config) {
    ValueIndex idx;
    idx.db_id_ = catalog.db_id;
    idx.config_ = config;
    idx.init_hashes();
    const ExecutionLimits limits{std::chrono::milliseconds(60000), config.max_distinct_values + 1};

    for (const auto& t : catalog.tables) {
        for (const auto& c : t.columns) {
            ColumnId id{t.name, c.name};
            std::string col = sql::render_identifier(c.name);
            std::string from = " FROM " + sql::render_identifier(t.name) + " WHERE typeof(" + col + ") = 'text'";
            auto count = db.execute("SELECT COUNT(DISTINCT " + col + ")" + from, limits);
            std::size_t distinct = 0;
            if (count.status == ExecStatus::rows && !count.rows.empty()) {
                if (auto* n = std::get_if<std::int64_t>(&count.rows[0][0])) distinct = static_cast<std::size_t>(*n);
            }
            if (distinct == 0) {
                idx.skipped_.push_back({id, SkippedColumn::Reason::non_textual, 0});
                continue;
            }
            if (distinct > config.max_distinct_values) {
                idx.skipped_.push_back({id, SkippedColumn::Reason::too_many_values, distinct});
                continue;
            }
            auto rows = db.execute("SELECT DISTINCT " + col + from + " ORDER BY " + col, limits);
            std::vector<std::string> vals;
            for (const auto& r : rows.rows) {
                if (const auto* s = std::get_if<std::string>(&r[0])) vals.push_back(*s);
            }
            if (all_numeric(vals)) {
                idx.skipped_.push_back({id, SkippedColumn::Reason::non_textual, distinct});
                continue;
            }
            for (auto& v : vals) {
                if (v.size() > config.max_value_length || text::trim(v).empty()) continue;
                auto pos = static_cast<std::uint32_t>(idx.values_.size());
                for (std::uint64_t key : idx.band_keys(v)) idx.buckets_[key].push_back(pos);
                idx.values_.push_back({id, std::move(v)});
            }
        }
    }
    return idx;
}

}  // namespace sdesql
