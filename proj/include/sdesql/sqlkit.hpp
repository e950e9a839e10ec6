#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sdesql/sql_ast.hpp"

namespace sdesql {
struct DatabaseCatalog;
}

namespace sdesql::sql {

using SqlAst = Select;

/// Parses one SELECT statement (optional trailing semicolon). Throws SyntaxError.
SqlAst parse(std::string_view sql);

/// Canonical single-line rendering. Keywords upper-case, identifiers bare when
/// safe and double-quoted otherwise. parse(render(a)) == a for parsed trees.
std::string render(const SqlAst& ast);
std::string render(const Expr& expr);
std::string render_identifier(std::string_view name);
std::string render_string_literal(std::string_view value);

/// Everything after the select list, starting at " FROM" (may be empty).
std::string render_after_select_list(const SqlAst& ast);

enum class UnitClause { where, having };

struct ConditionUnit {
    std::size_t index = 0;  // position among the units of its clause
    UnitClause clause = UnitClause::where;
    Expr predicate;
    std::vector<ColumnRef> columns;
    std::vector<Literal> literals;
    SourceSpan span;
    bool has_subquery = false;

    std::string sql() const { return render(predicate); }
};

/// Top-level conjuncts of the outermost WHERE. OR subtrees stay whole.
std::vector<ConditionUnit> condition_units(const SqlAst& ast);

/// Same decomposition applied to HAVING.
std::vector<ConditionUnit> having_units(const SqlAst& ast);

/// Per-disjunct split of an OR-rooted unit (off by default in decompose).
std::vector<Expr> disjuncts(const Expr& predicate);

enum class SubSqlKind { condition_unit, join_skeleton };

struct SubSql {
    SubSqlKind kind = SubSqlKind::condition_unit;
    std::optional<ConditionUnit> unit;
    std::string sql;
};

struct Decomposition {
    std::vector<SubSql> subs;
    bool not_decomposable = false;
};

/// One Sub-SQL per condition unit (WHERE units, then HAVING units), each keeping
/// the FROM/JOIN skeleton, select list and GROUP BY, with ORDER BY / LIMIT
/// dropped; plus a WHERE-less join skeleton when two or more tables are joined.
/// `split_or` decomposes OR-rooted WHERE units per disjunct.
Decomposition decompose(const SqlAst& ast, bool split_or = false);

/// Removes select items by zero-based index. Throws WouldEmptySelectList when
/// nothing would remain and UnsafeSelectEdit when the removal would change row
/// multiplicity (DISTINCT, aggregate-only removal) or break an ORDER BY reference.
std::string strip_select_items(const SqlAst& ast, const std::set<std::size_t>& remove);

struct ProbeCondition {
    std::string table;  // may be empty for an unqualified column
    std::string column;
    std::string op = "=";  // =, <>, <, <=, >, >=, LIKE, IS NULL, IS NOT NULL
    std::optional<std::string> value;
};

/// Appends one condition to the skeleton's WHERE conjunction. When the column's
/// table is outside the FROM scope and `catalog` links it by a foreign key to a
/// table in scope, a JOIN is added. Throws UnknownColumn otherwise.
std::string build_probe_sql(const SqlAst& skeleton, const ProbeCondition& condition,
                            const DatabaseCatalog* catalog = nullptr);
SqlAst build_probe_ast(const SqlAst& skeleton, const ProbeCondition& condition,
                       const DatabaseCatalog* catalog = nullptr);

// ---------------------------------------------------------------------------
// Tree utilities shared by the exploration and refinement stages.

/// AND-combines, flattening existing conjunctions. Null boxes are skipped.
Box<Expr> conjoin(const Box<Expr>& a, const Box<Expr>& b);
Expr conjoin_all(const std::vector<Expr>& terms);

std::vector<ColumnRef> referenced_columns(const Expr& expr);
std::vector<Literal> referenced_literals(const Expr& expr);

/// Subqueries nested directly in an expression (not descending into them).
std::vector<const Select*> nested_selects(const Expr& expr);

bool contains_aggregate(const Expr& expr);
bool is_aggregate_function(std::string_view name);

/// FROM sources of the outermost core: first table then joined tables.
std::vector<const TableRef*> from_sources(const SqlAst& ast);

/// Resolves a qualifier (alias or table name) to the base table name; returns
/// the qualifier itself when it is not bound by the FROM clause.
std::string resolve_table(const SqlAst& ast, std::string_view qualifier);

bool is_bare_select(const SqlAst& ast);

}  // namespace sdesql::sql
