#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace sdesql::sql {

/// Nullable owning pointer with deep-copy value semantics.
template <class T>
class Box {
public:
    Box() = default;
    Box(T value) : p_(std::make_unique<T>(std::move(value))) {}  // NOLINT(google-explicit-constructor)
    Box(const Box& o) : p_(o.p_ ? std::make_unique<T>(*o.p_) : nullptr) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& o) {
        if (this != &o) p_ = o.p_ ? std::make_unique<T>(*o.p_) : nullptr;
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;

    explicit operator bool() const noexcept { return static_cast<bool>(p_); }
    T& operator*() { return *p_; }
    const T& operator*() const { return *p_; }
    T* operator->() { return p_.get(); }
    const T* operator->() const { return p_.get(); }
    T* get() { return p_.get(); }
    const T* get() const { return p_.get(); }
    void reset() { p_.reset(); }

    friend bool operator==(const Box& a, const Box& b) {
        if (!a.p_ || !b.p_) return !a.p_ && !b.p_;
        return *a.p_ == *b.p_;
    }

private:
    std::unique_ptr<T> p_;
};

/// Byte range in the text the node was parsed from. Not part of node equality.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct Expr;
struct Select;

struct Literal {
    enum class Kind { integer, real, string, blob, null, keyword };
    Kind kind = Kind::null;
    std::string text;  // number as written, unescaped string body, blob hex digits, or keyword
    bool operator==(const Literal&) const = default;
};

struct ColumnRef {
    std::string table;  // empty when unqualified
    std::string column;
    bool operator==(const ColumnRef&) const = default;
};

struct UnaryOp {
    enum class Op { negate, plus, bit_not, logical_not };
    Op op = Op::negate;
    Box<Expr> operand;
    bool operator==(const UnaryOp&) const = default;
};

struct BinaryOp {
    enum class Op {
        eq, ne, is, is_not,
        lt, le, gt, ge,
        bit_and, bit_or, shl, shr,
        add, sub,
        mul, div, mod,
        concat,
    };
    Op op = Op::eq;
    Box<Expr> lhs;
    Box<Expr> rhs;
    bool operator==(const BinaryOp&) const = default;
};

/// N-ary AND / OR. Parsing flattens nested connectives of the same kind.
struct Logical {
    bool is_and = true;
    std::vector<Expr> terms;
    bool operator==(const Logical&) const;
};

struct Between {
    bool negated = false;
    Box<Expr> operand;
    Box<Expr> low;
    Box<Expr> high;
    bool operator==(const Between&) const = default;
};

struct InList {
    bool negated = false;
    Box<Expr> operand;
    std::vector<Expr> items;
    bool operator==(const InList&) const;
};

struct InSelect {
    bool negated = false;
    Box<Expr> operand;
    Box<Select> query;
    bool operator==(const InSelect&) const = default;
};

struct Like {
    enum class Kind { like, glob, regexp, match };
    Kind kind = Kind::like;
    bool negated = false;
    Box<Expr> lhs;
    Box<Expr> rhs;
    Box<Expr> escape;
    bool operator==(const Like&) const = default;
};

struct Exists {
    Box<Select> query;
    bool operator==(const Exists&) const = default;
};

struct ScalarSubquery {
    Box<Select> query;
    bool operator==(const ScalarSubquery&) const = default;
};

struct FunctionCall {
    std::string name;
    bool distinct = false;
    bool star = false;
    std::vector<Expr> args;
    bool operator==(const FunctionCall&) const;
};

struct Cast {
    Box<Expr> operand;
    std::string type_name;
    bool operator==(const Cast&) const = default;
};

struct Case {
    Box<Expr> base;
    std::vector<Expr> whens;
    std::vector<Expr> thens;
    Box<Expr> otherwise;
    bool operator==(const Case&) const;
};

struct Collate {
    Box<Expr> operand;
    std::string collation;
    bool operator==(const Collate&) const = default;
};

struct Expr {
    using Node = std::variant<Literal, ColumnRef, UnaryOp, BinaryOp, Logical, Between, InList, InSelect, Like,
                              Exists, ScalarSubquery, FunctionCall, Cast, Case, Collate>;
    Node node;
    SourceSpan span;

    Expr() = default;
    template <class T>
    Expr(T n, SourceSpan s = {}) : node(std::move(n)), span(s) {}  // NOLINT(google-explicit-constructor)

    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&node);
    }
    template <class T>
    T* as() noexcept {
        return std::get_if<T>(&node);
    }

    friend bool operator==(const Expr& a, const Expr& b) { return a.node == b.node; }
};

struct SelectItem {
    bool is_star = false;
    std::string star_table;  // `t.*` when non-empty
    Expr expr;
    std::string alias;
    bool operator==(const SelectItem&) const = default;
};

struct TableRef {
    std::string name;  // empty for a derived table
    Box<Select> subquery;
    std::string alias;
    bool operator==(const TableRef&) const = default;

    /// Name visible to column qualifiers.
    const std::string& visible_name() const { return alias.empty() ? name : alias; }
};

enum class JoinKind { comma, plain, inner, left, right, full, cross };

struct Join {
    JoinKind kind = JoinKind::plain;
    bool natural = false;
    TableRef table;
    Box<Expr> on;
    std::vector<std::string> using_columns;
    bool operator==(const Join&) const = default;
};

struct SelectCore {
    bool distinct = false;
    std::vector<SelectItem> items;
    bool has_from = false;
    TableRef from;
    std::vector<Join> joins;
    Box<Expr> where;
    std::vector<Expr> group_by;
    Box<Expr> having;
    bool operator==(const SelectCore&) const = default;

    std::size_t source_count() const { return has_from ? 1 + joins.size() : 0; }
};

enum class CompoundOp { union_distinct, union_all, intersect, except };

struct OrderItem {
    enum class Direction { unspecified, asc, desc };
    Expr expr;
    Direction direction = Direction::unspecified;
    bool operator==(const OrderItem&) const = default;
};

struct Cte {
    std::string name;
    std::vector<std::string> columns;
    Box<Select> query;
    bool operator==(const Cte&) const = default;
};

/// A full SELECT statement: optional CTEs, one or more cores joined by
/// compound operators, then statement-level ORDER BY / LIMIT.
struct Select {
    bool recursive = false;
    std::vector<Cte> ctes;
    SelectCore core;
    std::vector<CompoundOp> compound_ops;
    std::vector<SelectCore> compound_cores;
    std::vector<OrderItem> order_by;
    Box<Expr> limit;
    Box<Expr> offset;
    bool operator==(const Select&) const = default;

    bool is_compound() const { return !compound_ops.empty(); }
};

inline bool Logical::operator==(const Logical& o) const { return is_and == o.is_and && terms == o.terms; }
inline bool InList::operator==(const InList& o) const {
    return negated == o.negated && operand == o.operand && items == o.items;
}
inline bool FunctionCall::operator==(const FunctionCall& o) const {
    return name == o.name && distinct == o.distinct && star == o.star && args == o.args;
}
inline bool Case::operator==(const Case& o) const {
    return base == o.base && whens == o.whens && thens == o.thens && otherwise == o.otherwise;
}

}  // namespace sdesql::sql
