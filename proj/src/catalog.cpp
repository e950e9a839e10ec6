#include "sdesql/catalog.hpp"

#include <fstream>
#include <sstream>

#include "sdesql/error.hpp"
#include "sdesql/executor.hpp"
#include "sdesql/sqlkit.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

const TableInfo* DatabaseCatalog::find_table(std::string_view name) const {
    for (const auto& t : tables) {
        if (text::iequals(t.name, name)) return &t;
    }
    return nullptr;
}

const ColumnInfo* DatabaseCatalog::find_column(std::string_view table, std::string_view column) const {
    const TableInfo* t = find_table(table);
    if (!t) return nullptr;
    for (const auto& c : t->columns) {
        if (text::iequals(c.name, column)) return &c;
    }
    return nullptr;
}

std::optional<ColumnId> DatabaseCatalog::resolve(std::string_view table, std::string_view column) const {
    const TableInfo* t = find_table(table);
    if (!t) return std::nullopt;
    for (const auto& c : t->columns) {
        if (text::iequals(c.name, column)) return ColumnId{t->name, c.name};
    }
    return std::nullopt;
}

std::vector<ColumnId> DatabaseCatalog::columns_named(std::string_view column) const {
    std::vector<ColumnId> out;
    for (const auto& t : tables) {
        for (const auto& c : t.columns) {
            if (text::iequals(c.name, column)) out.push_back({t.name, c.name});
        }
    }
    return out;
}

std::vector<ColumnId> DatabaseCatalog::all_columns() const {
    std::vector<ColumnId> out;
    for (const auto& t : tables) {
        for (const auto& c : t.columns) out.push_back({t.name, c.name});
    }
    return out;
}

std::vector<ForeignKey> DatabaseCatalog::relations() const {
    std::vector<ForeignKey> out;
    for (const auto& t : tables) out.insert(out.end(), t.foreign_keys.begin(), t.foreign_keys.end());
    return out;
}

std::size_t DatabaseCatalog::column_count() const {
    std::size_t n = 0;
    for (const auto& t : tables) n += t.columns.size();
    return n;
}

namespace {

constexpr ExecutionLimits kIntrospectLimits{std::chrono::milliseconds(30000), 100000};

ExecutionOutcome must_execute(Database& db, const std::string& sql) {
    auto out = db.execute(sql, kIntrospectLimits);
    if (out.status == ExecStatus::error || out.status == ExecStatus::timeout) {
        throw UnreadableDatabase("introspection failed on " + db.path().string() + ": " + out.error_message);
    }
    return out;
}

std::string str(const Cell& c) { return std::holds_alternative<Null>(c) ? std::string{} : cell_to_string(c); }

}  // namespace

DatabaseCatalog introspect_schema(Database& db, std::string db_id) {
    DatabaseCatalog cat;
    cat.db_id = db_id.empty() ? db.path().stem().string() : std::move(db_id);
    auto tables = must_execute(db,
                               "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' "
                               "ORDER BY rowid");
    for (const auto& row : tables.rows) {
        TableInfo t;
        t.name = str(row[0]);
        std::string quoted = sql::render_string_literal(t.name);
        auto cols = must_execute(db, "SELECT name, type, pk FROM pragma_table_info(" + quoted + ") ORDER BY cid");
        for (const auto& c : cols.rows) {
            ColumnInfo ci;
            ci.name = str(c[0]);
            ci.type = str(c[1]);
            ci.primary_key = str(c[2]) != "0";
            t.columns.push_back(std::move(ci));
        }
        cat.tables.push_back(std::move(t));
    }
    for (auto& t : cat.tables) {
        std::string quoted = sql::render_string_literal(t.name);
        auto fks = must_execute(db, "SELECT \"from\", \"table\", \"to\" FROM pragma_foreign_key_list(" + quoted +
                                        ") ORDER BY id, seq");
        for (const auto& r : fks.rows) {
            ForeignKey fk{t.name, str(r[0]), str(r[1]), str(r[2])};
            if (const TableInfo* target = cat.find_table(fk.to_table)) {
                fk.to_table = target->name;
                if (fk.to_column.empty()) {
                    for (const auto& c : target->columns) {
                        if (c.primary_key) {
                            fk.to_column = c.name;
                            break;
                        }
                    }
                }
            }
            t.foreign_keys.push_back(std::move(fk));
        }
    }
    return cat;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view content) {
    if (content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field.push_back(c);
        }
    }
    if (any || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

void attach_descriptions(DatabaseCatalog& catalog, const std::filesystem::path& description_dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(description_dir, ec)) return;
    for (const auto& t : catalog.tables) {
        std::filesystem::path file;
        for (const auto& entry : std::filesystem::directory_iterator(description_dir, ec)) {
            if (entry.path().extension() == ".csv" && text::iequals(entry.path().stem().string(), t.name)) {
                file = entry.path();
                break;
            }
        }
        if (file.empty()) continue;
        std::ifstream in(file, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        auto rows = parse_csv(buf.str());
        if (rows.empty()) continue;
        int name_col = -1, desc_col = -1, value_col = -1;
        for (std::size_t i = 0; i < rows[0].size(); ++i) {
            auto h = text::to_lower(text::trim(rows[0][i]));
            if (h == "original_column_name") name_col = static_cast<int>(i);
            if (h == "column_description") desc_col = static_cast<int>(i);
            if (h == "value_description") value_col = static_cast<int>(i);
        }
        if (name_col < 0) continue;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            auto cell = [&](int col) {
                return col >= 0 && static_cast<std::size_t>(col) < row.size()
                           ? std::string(text::trim(row[static_cast<std::size_t>(col)]))
                           : std::string{};
            };
            auto id = catalog.resolve(t.name, cell(name_col));
            if (!id) continue;
            auto& d = catalog.descriptions[*id];
            d.column_description = cell(desc_col);
            d.value_description = cell(value_col);
        }
    }
}

void attach_value_examples(DatabaseCatalog& catalog, Database& db, std::size_t cap) {
    if (cap == 0) return;
    for (const auto& t : catalog.tables) {
        for (const auto& c : t.columns) {
            std::string col = sql::render_identifier(c.name);
            auto out = db.execute("SELECT DISTINCT " + col + " FROM " + sql::render_identifier(t.name) + " WHERE " +
                                      col + " IS NOT NULL LIMIT " + std::to_string(cap),
                                  kIntrospectLimits);
            if (out.status != ExecStatus::rows) continue;
            auto& d = catalog.descriptions[{t.name, c.name}];
            for (const auto& row : out.rows) d.value_examples.push_back(cell_to_string(row[0]));
        }
    }
}

}  // namespace sdesql
