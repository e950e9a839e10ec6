#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sdesql {

class Database;

struct ColumnInfo {
    std::string name;
    std::string type;  // declared type, may be empty
    bool primary_key = false;
};

struct ForeignKey {
    std::string from_table;
    std::string from_column;
    std::string to_table;
    std::string to_column;
    bool operator==(const ForeignKey&) const = default;
};

struct TableInfo {
    std::string name;
    std::vector<ColumnInfo> columns;
    std::vector<ForeignKey> foreign_keys;
};

/// (table, column) pair using the catalog's spelling.
struct ColumnId {
    std::string table;
    std::string column;
    auto operator<=>(const ColumnId&) const = default;
    bool operator==(const ColumnId&) const = default;

    std::string qualified() const { return table + "." + column; }
};

struct ColumnDescription {
    std::string column_description;
    std::string value_description;
    std::vector<std::string> value_examples;
};

/// Schema, descriptions and value examples of one database.
struct DatabaseCatalog {
    std::string db_id;
    std::vector<TableInfo> tables;
    std::map<ColumnId, ColumnDescription> descriptions;

    const TableInfo* find_table(std::string_view name) const;
    const ColumnInfo* find_column(std::string_view table, std::string_view column) const;

    /// Case-insensitive lookup returning the catalog spelling.
    std::optional<ColumnId> resolve(std::string_view table, std::string_view column) const;

    /// Tables hosting a column with this name.
    std::vector<ColumnId> columns_named(std::string_view column) const;

    std::vector<ColumnId> all_columns() const;
    std::vector<ForeignKey> relations() const;
    std::size_t column_count() const;
};

/// Captures every user table with declared column types and key relations.
/// Throws UnreadableDatabase.
DatabaseCatalog introspect_schema(Database& db, std::string db_id = {});

/// Reads `<dir>/<table>.csv` files (original_column_name, column_description,
/// value_description). Absent files or rows leave descriptions empty.
void attach_descriptions(DatabaseCatalog& catalog, const std::filesystem::path& description_dir);

/// Fills up to `cap` verbatim stored values per column.
void attach_value_examples(DatabaseCatalog& catalog, Database& db, std::size_t cap = 3);

/// Minimal RFC 4180 reader: returns rows of fields. Handles quotes and a UTF-8 BOM.
std::vector<std::vector<std::string>> parse_csv(std::string_view content);

}  // namespace sdesql
