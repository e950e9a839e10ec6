#include "sdesql/sql_lexer.hpp"
#include "sdesql/sqlkit.hpp"

namespace sdesql::sql {

namespace {

// Binding strength, mirroring the parser's levels.
enum Prec : int {
    kOr = 1,
    kAnd = 2,
    kNot = 3,
    kEquality = 4,
    kRelational = 5,
    kBitwise = 6,
    kAdditive = 7,
    kMultiplicative = 8,
    kConcat = 9,
    kUnary = 10,
    kCollate = 11,
    kPrimary = 12,
};

int binary_prec(BinaryOp::Op op) {
    using O = BinaryOp::Op;
    switch (op) {
        case O::eq: case O::ne: case O::is: case O::is_not: return kEquality;
        case O::lt: case O::le: case O::gt: case O::ge: return kRelational;
        case O::bit_and: case O::bit_or: case O::shl: case O::shr: return kBitwise;
        case O::add: case O::sub: return kAdditive;
        case O::mul: case O::div: case O::mod: return kMultiplicative;
        case O::concat: return kConcat;
    }
    return kPrimary;
}

const char* binary_text(BinaryOp::Op op) {
    using O = BinaryOp::Op;
    switch (op) {
        case O::eq: return "=";
        case O::ne: return "<>";
        case O::is: return "IS";
        case O::is_not: return "IS NOT";
        case O::lt: return "<";
        case O::le: return "<=";
        case O::gt: return ">";
        case O::ge: return ">=";
        case O::bit_and: return "&";
        case O::bit_or: return "|";
        case O::shl: return "<<";
        case O::shr: return ">>";
        case O::add: return "+";
        case O::sub: return "-";
        case O::mul: return "*";
        case O::div: return "/";
        case O::mod: return "%";
        case O::concat: return "||";
    }
    return "?";
}

int precedence(const Expr& e) {
    return std::visit(
        [](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Logical>) {
                return n.is_and ? kAnd : kOr;
            } else if constexpr (std::is_same_v<T, UnaryOp>) {
                return n.op == UnaryOp::Op::logical_not ? kNot : kUnary;
            } else if constexpr (std::is_same_v<T, BinaryOp>) {
                return binary_prec(n.op);
            } else if constexpr (std::is_same_v<T, Between> || std::is_same_v<T, InList> ||
                                 std::is_same_v<T, InSelect> || std::is_same_v<T, Like>) {
                return kEquality;
            } else if constexpr (std::is_same_v<T, Collate>) {
                return kCollate;
            } else {
                return kPrimary;
            }
        },
        e.node);
}

class Renderer {
public:
    std::string out;

    void select(const Select& s) {
        if (!s.ctes.empty()) {
            out += "WITH ";
            if (s.recursive) out += "RECURSIVE ";
            for (std::size_t i = 0; i < s.ctes.size(); ++i) {
                if (i) out += ", ";
                const Cte& c = s.ctes[i];
                out += render_identifier(c.name);
                if (!c.columns.empty()) {
                    out += "(";
                    for (std::size_t k = 0; k < c.columns.size(); ++k) {
                        if (k) out += ", ";
                        out += render_identifier(c.columns[k]);
                    }
                    out += ")";
                }
                out += " AS (";
                select(*c.query);
                out += ")";
            }
            out += " ";
        }
        core(s.core);
        compounds(s);
        tail(s);
    }

    void compounds(const Select& s) {
        for (std::size_t i = 0; i < s.compound_ops.size(); ++i) {
            switch (s.compound_ops[i]) {
                case CompoundOp::union_distinct: out += " UNION "; break;
                case CompoundOp::union_all: out += " UNION ALL "; break;
                case CompoundOp::intersect: out += " INTERSECT "; break;
                case CompoundOp::except: out += " EXCEPT "; break;
            }
            core(s.compound_cores[i]);
        }
    }

    void tail(const Select& s) {
        if (!s.order_by.empty()) {
            out += " ORDER BY ";
            for (std::size_t i = 0; i < s.order_by.size(); ++i) {
                if (i) out += ", ";
                expr(s.order_by[i].expr, 0);
                if (s.order_by[i].direction == OrderItem::Direction::asc) out += " ASC";
                if (s.order_by[i].direction == OrderItem::Direction::desc) out += " DESC";
            }
        }
        if (s.limit) {
            out += " LIMIT ";
            expr(*s.limit, 0);
            if (s.offset) {
                out += " OFFSET ";
                expr(*s.offset, 0);
            }
        }
    }

    void select_items(const SelectCore& c) {
        for (std::size_t i = 0; i < c.items.size(); ++i) {
            if (i) out += ", ";
            const SelectItem& it = c.items[i];
            if (it.is_star) {
                if (!it.star_table.empty()) out += render_identifier(it.star_table) + ".";
                out += "*";
                continue;
            }
            expr(it.expr, 0);
            if (!it.alias.empty()) out += " AS " + render_identifier(it.alias);
        }
    }

    void core(const SelectCore& c) {
        out += "SELECT ";
        if (c.distinct) out += "DISTINCT ";
        select_items(c);
        core_after_items(c);
    }

    void core_after_items(const SelectCore& c) {
        if (c.has_from) {
            out += " FROM ";
            table(c.from);
            for (const Join& j : c.joins) {
                if (j.kind == JoinKind::comma) {
                    out += ", ";
                } else {
                    out += " ";
                    if (j.natural) out += "NATURAL ";
                    switch (j.kind) {
                        case JoinKind::left: out += "LEFT "; break;
                        case JoinKind::right: out += "RIGHT "; break;
                        case JoinKind::full: out += "FULL "; break;
                        case JoinKind::inner: out += "INNER "; break;
                        case JoinKind::cross: out += "CROSS "; break;
                        default: break;
                    }
                    out += "JOIN ";
                }
                table(j.table);
                if (j.on) {
                    out += " ON ";
                    expr(*j.on, 0);
                } else if (!j.using_columns.empty()) {
                    out += " USING (";
                    for (std::size_t i = 0; i < j.using_columns.size(); ++i) {
                        if (i) out += ", ";
                        out += render_identifier(j.using_columns[i]);
                    }
                    out += ")";
                }
            }
        }
        if (c.where) {
            out += " WHERE ";
            expr(*c.where, 0);
        }
        if (!c.group_by.empty()) {
            out += " GROUP BY ";
            for (std::size_t i = 0; i < c.group_by.size(); ++i) {
                if (i) out += ", ";
                expr(c.group_by[i], 0);
            }
        }
        if (c.having) {
            out += " HAVING ";
            expr(*c.having, 0);
        }
    }

    void table(const TableRef& t) {
        if (t.subquery) {
            out += "(";
            select(*t.subquery);
            out += ")";
        } else {
            out += render_identifier(t.name);
        }
        if (!t.alias.empty()) out += " AS " + render_identifier(t.alias);
    }

    // Renders `e`, parenthesized when it binds looser than `min_prec`.
    void expr(const Expr& e, int min_prec) {
        bool wrap = precedence(e) < min_prec;
        if (wrap) out += "(";
        node(e);
        if (wrap) out += ")";
    }

    void node(const Expr& e) {
        std::visit([this](const auto& n) { this->visit(n); }, e.node);
    }

    void visit(const Literal& l) {
        switch (l.kind) {
            case Literal::Kind::string: out += render_string_literal(l.text); break;
            case Literal::Kind::blob: out += "X'" + l.text + "'"; break;
            case Literal::Kind::null: out += "NULL"; break;
            default: out += l.text; break;
        }
    }
    void visit(const ColumnRef& c) {
        if (!c.table.empty()) out += render_identifier(c.table) + ".";
        out += render_identifier(c.column);
    }
    void visit(const UnaryOp& u) {
        switch (u.op) {
            case UnaryOp::Op::logical_not:
                out += "NOT ";
                expr(*u.operand, kNot);
                return;
            case UnaryOp::Op::negate: out += "-"; break;
            case UnaryOp::Op::plus: out += "+"; break;
            case UnaryOp::Op::bit_not: out += "~"; break;
        }
        std::size_t mark = out.size();
        expr(*u.operand, kUnary);
        // Keep `- -x` from lexing as a comment.
        if (mark < out.size() && (out[mark] == '-' || out[mark] == '+')) out.insert(mark, " ");
    }
    void visit(const BinaryOp& b) {
        int p = binary_prec(b.op);
        expr(*b.lhs, p);
        out += " ";
        out += binary_text(b.op);
        out += " ";
        expr(*b.rhs, p + 1);
    }
    void visit(const Logical& l) {
        int p = l.is_and ? kAnd : kOr;
        for (std::size_t i = 0; i < l.terms.size(); ++i) {
            if (i) out += l.is_and ? " AND " : " OR ";
            expr(l.terms[i], p + 1);
        }
    }
    void visit(const Between& b) {
        expr(*b.operand, kEquality);
        out += b.negated ? " NOT BETWEEN " : " BETWEEN ";
        expr(*b.low, kRelational);
        out += " AND ";
        expr(*b.high, kRelational);
    }
    void visit(const InList& in) {
        expr(*in.operand, kEquality);
        out += in.negated ? " NOT IN (" : " IN (";
        for (std::size_t i = 0; i < in.items.size(); ++i) {
            if (i) out += ", ";
            expr(in.items[i], 0);
        }
        out += ")";
    }
    void visit(const InSelect& in) {
        expr(*in.operand, kEquality);
        out += in.negated ? " NOT IN (" : " IN (";
        select(*in.query);
        out += ")";
    }
    void visit(const Like& l) {
        expr(*l.lhs, kEquality);
        out += l.negated ? " NOT " : " ";
        switch (l.kind) {
            case Like::Kind::like: out += "LIKE "; break;
            case Like::Kind::glob: out += "GLOB "; break;
            case Like::Kind::regexp: out += "REGEXP "; break;
            case Like::Kind::match: out += "MATCH "; break;
        }
        expr(*l.rhs, kRelational);
        if (l.escape) {
            out += " ESCAPE ";
            expr(*l.escape, kRelational);
        }
    }
    void visit(const Exists& e) {
        out += "EXISTS (";
        select(*e.query);
        out += ")";
    }
    void visit(const ScalarSubquery& s) {
        out += "(";
        select(*s.query);
        out += ")";
    }
    void visit(const FunctionCall& f) {
        out += f.name;
        out += "(";
        if (f.star) {
            out += "*";
        } else {
            if (f.distinct) out += "DISTINCT ";
            for (std::size_t i = 0; i < f.args.size(); ++i) {
                if (i) out += ", ";
                expr(f.args[i], 0);
            }
        }
        out += ")";
    }
    void visit(const Cast& c) {
        out += "CAST(";
        expr(*c.operand, 0);
        out += " AS " + c.type_name + ")";
    }
    void visit(const Case& c) {
        out += "CASE";
        if (c.base) {
            out += " ";
            expr(*c.base, 0);
        }
        for (std::size_t i = 0; i < c.whens.size(); ++i) {
            out += " WHEN ";
            expr(c.whens[i], 0);
            out += " THEN ";
            expr(c.thens[i], 0);
        }
        if (c.otherwise) {
            out += " ELSE ";
            expr(*c.otherwise, 0);
        }
        out += " END";
    }
    void visit(const Collate& c) {
        expr(*c.operand, kCollate);
        out += " COLLATE " + render_identifier(c.collation);
    }
};

}  // namespace

std::string render_identifier(std::string_view name) {
    if (!needs_quoting(name)) return std::string(name);
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string render_string_literal(std::string_view value) {
    std::string out = "'";
    for (char c : value) {
        if (c == '\'') out += '\'';
        out += c;
    }
    out += '\'';
    return out;
}

std::string render(const SqlAst& ast) {
    Renderer r;
    r.select(ast);
    return std::move(r.out);
}

std::string render(const Expr& expr) {
    Renderer r;
    r.expr(expr, 0);
    return std::move(r.out);
}

std::string render_after_select_list(const SqlAst& ast) {
    Renderer r;
    r.core_after_items(ast.core);
    r.compounds(ast);
    r.tail(ast);
    return std::move(r.out);
}

}  // namespace sdesql::sql
