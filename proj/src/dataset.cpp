#include "sdesql/dataset.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sdesql/error.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

using nlohmann::json;

std::string_view to_string(Difficulty d) {
    switch (d) {
        case Difficulty::simple: return "simple";
        case Difficulty::moderate: return "moderate";
        case Difficulty::challenging: return "challenging";
        case Difficulty::unknown: return "unknown";
    }
    return "unknown";
}

Difficulty parse_difficulty(std::string_view s) {
    auto v = text::to_lower(text::trim(s));
    if (v == "simple") return Difficulty::simple;
    if (v == "moderate") return Difficulty::moderate;
    if (v == "challenging") return Difficulty::challenging;
    return Difficulty::unknown;
}

std::filesystem::path database_path(const std::filesystem::path& db_root, std::string_view db_id) {
    return db_root / std::string(db_id) / (std::string(db_id) + ".sqlite");
}

std::filesystem::path description_dir(const std::filesystem::path& db_root, std::string_view db_id) {
    return db_root / std::string(db_id) / "database_description";
}

namespace {

std::string optional_string(const json& rec, const char* key, std::size_t index) {
    auto it = rec.find(key);
    if (it == rec.end() || it->is_null()) return {};
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw MalformedRecord(index, key, "expected a string");
}

}  // namespace

Dataset load_questions_file(const std::filesystem::path& questions_file) {
    std::ifstream in(questions_file);
    if (!in) throw MissingFile(questions_file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    Dataset ds;
    ds.db_root = questions_file.parent_path() / "databases";

    std::string content = buf.str();
    if (text::trim(content).empty()) return ds;
    json doc;
    try {
        doc = json::parse(content);
    } catch (const json::parse_error& e) {
        throw MalformedRecord(0, "<file>", e.what());
    }
    if (!doc.is_array()) throw MalformedRecord(0, "<file>", "expected a JSON array of records");

    std::set<std::string> seen;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& rec = doc[i];
        if (!rec.is_object()) throw MalformedRecord(i, "<record>", "expected an object");
        QuestionRecord q;
        q.id = optional_string(rec, "question_id", i);
        if (q.id.empty()) q.id = std::to_string(i);
        q.db_id = optional_string(rec, "db_id", i);
        if (q.db_id.empty()) throw MalformedRecord(i, "db_id", "missing");
        q.text = optional_string(rec, "question", i);
        if (q.text.empty()) throw MalformedRecord(i, "question", "missing");
        q.evidence = optional_string(rec, "evidence", i);
        q.difficulty = parse_difficulty(optional_string(rec, "difficulty", i));
        std::string gold = optional_string(rec, "SQL", i);
        if (gold.empty()) gold = optional_string(rec, "query", i);
        if (!gold.empty()) q.gold_sql = gold;
        if (!seen.insert(q.id).second) throw MalformedRecord(i, "question_id", "duplicate id " + q.id);
        auto db = database_path(ds.db_root, q.db_id);
        if (!std::filesystem::exists(db)) throw MissingFile(db.string());
        ds.questions.push_back(std::move(q));
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& root, std::string_view split) {
    return load_questions_file(root / (std::string(split) + ".json"));
}

bool question_id_less(std::string_view a, std::string_view b) {
    long long x = 0, y = 0;
    auto ra = std::from_chars(a.data(), a.data() + a.size(), x);
    auto rb = std::from_chars(b.data(), b.data() + b.size(), y);
    bool na = ra.ec == std::errc{} && ra.ptr == a.data() + a.size();
    bool nb = rb.ec == std::errc{} && rb.ptr == b.data() + b.size();
    if (na && nb) return x < y;
    if (na != nb) return na;
    return a < b;
}

}  // namespace sdesql
