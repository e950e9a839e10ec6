#include "sdesql/sqlkit.hpp"

#include <algorithm>
#include <array>
#include <functional>

#include "sdesql/catalog.hpp"
#include "sdesql/error.hpp"
#include "sdesql/text.hpp"

namespace sdesql::sql {

namespace {

// Calls `fn` on each direct child expression; subqueries are not entered.
void for_each_child(const Expr& e, const std::function<void(const Expr&)>& fn) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, UnaryOp>) {
                fn(*n.operand);
            } else if constexpr (std::is_same_v<T, BinaryOp>) {
                fn(*n.lhs);
                fn(*n.rhs);
            } else if constexpr (std::is_same_v<T, Logical>) {
                for (const auto& t : n.terms) fn(t);
            } else if constexpr (std::is_same_v<T, Between>) {
                fn(*n.operand);
                fn(*n.low);
                fn(*n.high);
            } else if constexpr (std::is_same_v<T, InList>) {
                fn(*n.operand);
                for (const auto& t : n.items) fn(t);
            } else if constexpr (std::is_same_v<T, InSelect>) {
                fn(*n.operand);
            } else if constexpr (std::is_same_v<T, Like>) {
                fn(*n.lhs);
                fn(*n.rhs);
                if (n.escape) fn(*n.escape);
            } else if constexpr (std::is_same_v<T, FunctionCall>) {
                for (const auto& t : n.args) fn(t);
            } else if constexpr (std::is_same_v<T, Cast>) {
                fn(*n.operand);
            } else if constexpr (std::is_same_v<T, Case>) {
                if (n.base) fn(*n.base);
                for (const auto& t : n.whens) fn(t);
                for (const auto& t : n.thens) fn(t);
                if (n.otherwise) fn(*n.otherwise);
            } else if constexpr (std::is_same_v<T, Collate>) {
                fn(*n.operand);
            }
        },
        e.node);
}

void walk(const Expr& e, const std::function<void(const Expr&)>& fn) {
    fn(e);
    for_each_child(e, [&](const Expr& c) { walk(c, fn); });
}

std::vector<ConditionUnit> units_of(const Box<Expr>& clause, UnitClause which) {
    std::vector<ConditionUnit> out;
    if (!clause) return out;
    std::vector<const Expr*> terms;
    if (const auto* l = clause->as<Logical>(); l && l->is_and) {
        for (const auto& t : l->terms) terms.push_back(&t);
    } else {
        terms.push_back(clause.get());
    }
    for (const Expr* t : terms) {
        ConditionUnit u;
        u.index = out.size();
        u.clause = which;
        u.predicate = *t;
        u.columns = referenced_columns(*t);
        u.literals = referenced_literals(*t);
        u.span = t->span;
        u.has_subquery = !nested_selects(*t).empty();
        out.push_back(std::move(u));
    }
    return out;
}

Select relaxed_base(const SqlAst& ast) {
    Select base = ast;
    base.order_by.clear();
    base.limit.reset();
    base.offset.reset();
    base.core.where.reset();
    base.core.having.reset();
    return base;
}

bool numeric_affinity(std::string_view declared) {
    auto t = text::to_upper(declared);
    if (t.find("INT") != std::string::npos) return true;
    if (t.find("CHAR") != std::string::npos || t.find("CLOB") != std::string::npos ||
        t.find("TEXT") != std::string::npos || t.find("BLOB") != std::string::npos || t.empty()) {
        return false;
    }
    return true;  // REAL, FLOA, DOUB, NUMERIC, DECIMAL, ...
}

bool looks_numeric(std::string_view v) {
    if (v.empty()) return false;
    std::size_t i = (v[0] == '-' || v[0] == '+') ? 1 : 0;
    bool digit = false, dot = false;
    for (; i < v.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(v[i]))) {
            digit = true;
        } else if (v[i] == '.' && !dot) {
            dot = true;
        } else {
            return false;
        }
    }
    return digit;
}

Expr value_literal(const std::string& value, bool numeric_column) {
    if (numeric_column && looks_numeric(value)) {
        bool neg = value[0] == '-';
        std::string body = (value[0] == '-' || value[0] == '+') ? value.substr(1) : value;
        Expr lit = Literal{body.find('.') != std::string::npos ? Literal::Kind::real : Literal::Kind::integer, body};
        if (!neg) return lit;
        UnaryOp u;
        u.op = UnaryOp::Op::negate;
        u.operand = std::move(lit);
        return Expr{std::move(u)};
    }
    return Literal{Literal::Kind::string, value};
}

// One join step: `table` is attached via table.table_column = known_qualifier.known_column.
struct FkHop {
    std::string table;
    std::string table_column;
    std::string known_qualifier;
    std::string known_column;
};

// Shortest FK path (at most 3 hops) from the tables in scope to `target`.
std::vector<FkHop> fk_path(const DatabaseCatalog& catalog, const std::vector<const TableRef*>& sources,
                           const std::string& target) {
    struct Node {
        std::string table;
        int parent;
        FkHop hop;
    };
    std::vector<Node> nodes;
    auto seen = [&](const std::string& t) {
        return std::any_of(nodes.begin(), nodes.end(), [&](const Node& n) { return text::iequals(n.table, t); });
    };
    for (const TableRef* src : sources) {
        if (src->name.empty() || seen(src->name)) continue;
        nodes.push_back({src->name, -1, {src->name, "", src->alias.empty() ? src->name : src->alias, ""}});
    }
    auto relations = catalog.relations();
    std::size_t frontier = 0;
    for (int depth = 0; depth < 3; ++depth) {
        std::size_t end = nodes.size();
        for (std::size_t i = frontier; i < end; ++i) {
            for (const ForeignKey& fk : relations) {
                bool forward = text::iequals(fk.from_table, nodes[i].table);
                bool backward = text::iequals(fk.to_table, nodes[i].table);
                if (!forward && !backward) continue;
                const std::string& next = forward ? fk.to_table : fk.from_table;
                if (seen(next)) continue;
                FkHop hop{next, forward ? fk.to_column : fk.from_column, nodes[i].hop.known_qualifier,
                          forward ? fk.from_column : fk.to_column};
                if (nodes[i].parent >= 0) hop.known_qualifier = nodes[i].table;
                nodes.push_back({next, static_cast<int>(i), hop});
                if (text::iequals(next, target)) {
                    std::vector<FkHop> path;
                    for (int k = static_cast<int>(nodes.size()) - 1; nodes[k].parent >= 0; k = nodes[k].parent) {
                        path.push_back(nodes[k].hop);
                    }
                    std::reverse(path.begin(), path.end());
                    return path;
                }
            }
        }
        frontier = end;
    }
    return {};
}

// Qualifies bare column references of a single-source query before joins widen its scope.
void qualify_unqualified(SqlAst& ast, const std::string& table) {
    auto fix = [&](const Expr& root) {
        walk(root, [&](const Expr& e) {
            if (const auto* c = e.as<ColumnRef>(); c && c->table.empty()) {
                const_cast<ColumnRef*>(c)->table = table;
            }
        });
    };
    for (auto& item : ast.core.items) {
        if (!item.is_star) fix(item.expr);
    }
    if (ast.core.where) fix(*ast.core.where);
    for (auto& g : ast.core.group_by) fix(g);
    if (ast.core.having) fix(*ast.core.having);
    for (auto& o : ast.order_by) fix(o.expr);
}

}  // namespace

std::vector<ColumnRef> referenced_columns(const Expr& expr) {
    std::vector<ColumnRef> out;
    walk(expr, [&](const Expr& e) {
        if (const auto* c = e.as<ColumnRef>()) out.push_back(*c);
    });
    return out;
}

std::vector<Literal> referenced_literals(const Expr& expr) {
    std::vector<Literal> out;
    walk(expr, [&](const Expr& e) {
        if (const auto* l = e.as<Literal>(); l && l->kind != Literal::Kind::null) out.push_back(*l);
    });
    return out;
}

std::vector<const Select*> nested_selects(const Expr& expr) {
    std::vector<const Select*> out;
    walk(expr, [&](const Expr& e) {
        if (const auto* s = e.as<InSelect>()) out.push_back(s->query.get());
        if (const auto* s = e.as<Exists>()) out.push_back(s->query.get());
        if (const auto* s = e.as<ScalarSubquery>()) out.push_back(s->query.get());
    });
    return out;
}

bool is_aggregate_function(std::string_view name) {
    static constexpr std::array names = {"COUNT", "SUM", "AVG", "MIN", "MAX", "TOTAL", "GROUP_CONCAT"};
    auto upper = text::to_upper(name);
    return std::find(names.begin(), names.end(), upper) != names.end();
}

bool contains_aggregate(const Expr& expr) {
    bool found = false;
    walk(expr, [&](const Expr& e) {
        if (const auto* f = e.as<FunctionCall>()) {
            auto upper = text::to_upper(f->name);
            bool multi_arg_scalar = (upper == "MIN" || upper == "MAX") && f->args.size() > 1;
            if (is_aggregate_function(f->name) && !multi_arg_scalar) found = true;
        }
    });
    return found;
}

Box<Expr> conjoin(const Box<Expr>& a, const Box<Expr>& b) {
    if (!a) return b;
    if (!b) return a;
    Logical l;
    l.is_and = true;
    for (const Box<Expr>* side : {&a, &b}) {
        if (const auto* inner = (*side)->as<Logical>(); inner && inner->is_and) {
            l.terms.insert(l.terms.end(), inner->terms.begin(), inner->terms.end());
        } else {
            l.terms.push_back(**side);
        }
    }
    return Box<Expr>(Expr{std::move(l)});
}

Expr conjoin_all(const std::vector<Expr>& terms) {
    Box<Expr> acc;
    for (const auto& t : terms) acc = conjoin(acc, Box<Expr>(t));
    return acc ? *acc : Expr{Literal{Literal::Kind::integer, "1"}};
}

std::vector<const TableRef*> from_sources(const SqlAst& ast) {
    std::vector<const TableRef*> out;
    if (!ast.core.has_from) return out;
    out.push_back(&ast.core.from);
    for (const auto& j : ast.core.joins) out.push_back(&j.table);
    return out;
}

std::string resolve_table(const SqlAst& ast, std::string_view qualifier) {
    for (const TableRef* t : from_sources(ast)) {
        if (!t->alias.empty() && text::iequals(t->alias, qualifier)) return t->name.empty() ? t->alias : t->name;
        if (t->alias.empty() && text::iequals(t->name, qualifier)) return t->name;
    }
    for (const TableRef* t : from_sources(ast)) {
        if (text::iequals(t->name, qualifier)) return t->name;
    }
    return std::string(qualifier);
}

bool is_bare_select(const SqlAst& ast) {
    return !ast.is_compound() && ast.core.has_from && !ast.core.where && !ast.core.having;
}

std::vector<ConditionUnit> condition_units(const SqlAst& ast) { return units_of(ast.core.where, UnitClause::where); }

std::vector<ConditionUnit> having_units(const SqlAst& ast) { return units_of(ast.core.having, UnitClause::having); }

std::vector<Expr> disjuncts(const Expr& predicate) {
    if (const auto* l = predicate.as<Logical>(); l && !l->is_and) return l->terms;
    return {predicate};
}

Decomposition decompose(const SqlAst& ast, bool split_or) {
    Decomposition d;
    if (ast.is_compound()) {
        d.not_decomposable = true;
        return d;
    }
    const Select base = relaxed_base(ast);
    for (const ConditionUnit& u : condition_units(ast)) {
        std::vector<Expr> parts = split_or ? disjuncts(u.predicate) : std::vector<Expr>{u.predicate};
        for (const Expr& part : parts) {
            Select s = base;
            s.core.where = part;
            ConditionUnit unit = u;
            if (parts.size() > 1) {
                unit.predicate = part;
                unit.columns = referenced_columns(part);
                unit.literals = referenced_literals(part);
                unit.span = part.span;
            }
            d.subs.push_back(SubSql{SubSqlKind::condition_unit, std::move(unit), render(s)});
        }
    }
    for (const ConditionUnit& u : having_units(ast)) {
        Select s = base;
        s.core.having = u.predicate;
        d.subs.push_back(SubSql{SubSqlKind::condition_unit, u, render(s)});
    }
    if (ast.core.source_count() >= 2) {
        d.subs.push_back(SubSql{SubSqlKind::join_skeleton, std::nullopt, render(base)});
    }
    d.not_decomposable = d.subs.empty();
    return d;
}

std::string strip_select_items(const SqlAst& ast, const std::set<std::size_t>& remove) {
    if (ast.is_compound()) throw UnsafeSelectEdit("select-list edits on compound queries are not supported");
    const auto& items = ast.core.items;
    for (std::size_t idx : remove) {
        if (idx >= items.size()) throw UnsafeSelectEdit("select item index " + std::to_string(idx) + " out of range");
    }
    if (remove.size() >= items.size()) throw WouldEmptySelectList();
    if (remove.empty()) return render(ast);
    if (ast.core.distinct) throw UnsafeSelectEdit("removing a column under DISTINCT changes row multiplicity");

    auto item_aggregate = [&](std::size_t i) { return !items[i].is_star && contains_aggregate(items[i].expr); };
    if (ast.core.group_by.empty() && !ast.core.having) {
        bool removed_agg = false, kept_agg = false;
        for (std::size_t i = 0; i < items.size(); ++i) {
            (remove.count(i) ? removed_agg : kept_agg) |= item_aggregate(i);
        }
        if (removed_agg && !kept_agg) {
            throw UnsafeSelectEdit("removing every aggregate changes row multiplicity");
        }
    }

    std::size_t first_removed = *remove.begin();
    for (const OrderItem& o : ast.order_by) {
        if (const auto* l = o.expr.as<Literal>(); l && l->kind == Literal::Kind::integer) {
            if (std::stoull(l->text) > first_removed) {
                throw UnsafeSelectEdit("ORDER BY position refers to a shifted select item");
            }
        }
    }
    std::vector<ColumnRef> refs;
    auto collect = [&](const Expr& e) {
        auto r = referenced_columns(e);
        refs.insert(refs.end(), r.begin(), r.end());
    };
    for (const OrderItem& o : ast.order_by) collect(o.expr);
    for (const Expr& g : ast.core.group_by) collect(g);
    if (ast.core.having) collect(*ast.core.having);
    if (ast.core.where) collect(*ast.core.where);
    for (std::size_t idx : remove) {
        const std::string& alias = items[idx].alias;
        if (alias.empty()) continue;
        for (const ColumnRef& c : refs) {
            if (c.table.empty() && text::iequals(c.column, alias)) {
                throw UnsafeSelectEdit("removed select item alias '" + alias + "' is referenced");
            }
        }
    }

    SqlAst out = ast;
    out.core.items.clear();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!remove.count(i)) out.core.items.push_back(items[i]);
    }
    return render(out);
}

SqlAst build_probe_ast(const SqlAst& skeleton, const ProbeCondition& condition, const DatabaseCatalog* catalog) {
    if (skeleton.is_compound() || !skeleton.core.has_from) throw UnknownColumn(condition.column);
    SqlAst out = skeleton;
    auto sources = from_sources(skeleton);

    std::string table = condition.table;
    std::string column = condition.column;
    const ColumnInfo* column_info = nullptr;
    if (catalog) {
        if (table.empty()) {
            std::vector<std::string> hosts;
            for (const TableRef* src : sources) {
                if (!src->name.empty() && catalog->find_column(src->name, column)) hosts.push_back(src->name);
            }
            if (hosts.size() != 1) throw UnknownColumn(column);
            table = hosts.front();
        }
        auto resolved = catalog->resolve(table, column);
        if (!resolved) throw UnknownColumn(table + "." + column);
        table = resolved->table;
        column = resolved->column;
        column_info = catalog->find_column(table, column);
    }

    std::string qualifier;
    bool in_scope = table.empty();
    for (const TableRef* src : sources) {
        if (!table.empty() && !src->name.empty() && text::iequals(src->name, table)) {
            in_scope = true;
            if (!src->alias.empty()) {
                qualifier = src->alias;
            } else if (sources.size() > 1) {
                qualifier = src->name;
            }
            break;
        }
    }
    if (!in_scope) {
        auto path = catalog ? fk_path(*catalog, sources, table) : std::vector<FkHop>{};
        if (path.empty()) throw UnknownColumn(table + "." + column);
        if (sources.size() == 1 && sources.front()->alias.empty()) qualify_unqualified(out, sources.front()->name);
        for (const auto& hop : path) {
            Join j;
            j.kind = JoinKind::plain;
            j.table.name = hop.table;
            BinaryOp on;
            on.op = BinaryOp::Op::eq;
            on.lhs = Expr{ColumnRef{hop.known_qualifier, hop.known_column}};
            on.rhs = Expr{ColumnRef{hop.table, hop.table_column}};
            j.on = Expr{std::move(on)};
            out.core.joins.push_back(std::move(j));
        }
        qualifier = table;
    }

    Expr col = ColumnRef{qualifier, column};
    std::string op = text::to_upper(text::trim(condition.op));
    Expr predicate;
    if (op == "IS NULL" || op == "IS NOT NULL") {
        BinaryOp b;
        b.op = op == "IS NULL" ? BinaryOp::Op::is : BinaryOp::Op::is_not;
        b.lhs = std::move(col);
        b.rhs = Expr{Literal{Literal::Kind::null, "NULL"}};
        predicate = std::move(b);
    } else {
        if (!condition.value) {
            throw Error("probe condition on " + column + " requires a value for operator " + op);
        }
        bool numeric = column_info && numeric_affinity(column_info->type);
        Expr value = value_literal(*condition.value, numeric);
        if (op == "LIKE") {
            Like l;
            l.lhs = std::move(col);
            l.rhs = std::move(value);
            predicate = std::move(l);
        } else {
            BinaryOp b;
            if (op == "=" || op == "==") {
                b.op = BinaryOp::Op::eq;
            } else if (op == "<>" || op == "!=") {
                b.op = BinaryOp::Op::ne;
            } else if (op == "<") {
                b.op = BinaryOp::Op::lt;
            } else if (op == "<=") {
                b.op = BinaryOp::Op::le;
            } else if (op == ">") {
                b.op = BinaryOp::Op::gt;
            } else if (op == ">=") {
                b.op = BinaryOp::Op::ge;
            } else {
                throw Error("unsupported probe operator " + op);
            }
            b.lhs = std::move(col);
            b.rhs = std::move(value);
            predicate = std::move(b);
        }
    }
    out.core.where = conjoin(out.core.where, Box<Expr>(std::move(predicate)));
    return out;
}

std::string build_probe_sql(const SqlAst& skeleton, const ProbeCondition& condition, const DatabaseCatalog* catalog) {
    return render(build_probe_ast(skeleton, condition, catalog));
}

}  // namespace sdesql::sql
