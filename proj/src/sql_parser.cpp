#include <utility>

#include "sdesql/error.hpp"
#include "sdesql/sql_lexer.hpp"
#include "sdesql/sqlkit.hpp"
#include "sdesql/text.hpp"

namespace sdesql::sql {

namespace {

class Parser {
public:
    explicit Parser(std::string_view sql) : sql_(sql), toks_(tokenize(sql)) {}

    Select parse_statement() {
        Select s = parse_select();
        while (is_op(";")) advance();
        if (peek().kind != Token::Kind::end) fail("unexpected token '" + peek().text + "'");
        return s;
    }

private:
    std::string_view sql_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    const Token& advance() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    std::size_t prev_end() const { return pos_ == 0 ? 0 : toks_[pos_ - 1].end; }

    [[noreturn]] void fail(const std::string& message) const {
        const Token& t = peek();
        throw SyntaxError(t.begin, t.kind == Token::Kind::end ? message + " at end of input" : message);
    }

    bool is_kw(std::string_view kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Token::Kind::identifier && t.upper == kw;
    }
    bool is_op(std::string_view op, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Token::Kind::op && t.text == op;
    }
    bool accept_kw(std::string_view kw) {
        if (is_kw(kw)) {
            advance();
            return true;
        }
        return false;
    }
    bool accept_op(std::string_view op) {
        if (is_op(op)) {
            advance();
            return true;
        }
        return false;
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) fail("expected " + std::string(kw));
    }
    void expect_op(std::string_view op) {
        if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
    }

    bool at_name() const {
        const Token& t = peek();
        return t.kind == Token::Kind::quoted_identifier ||
               (t.kind == Token::Kind::identifier && !is_reserved(t.upper));
    }
    std::string parse_name(const char* what) {
        if (!at_name()) fail(std::string("expected ") + what);
        return advance().text;
    }

    // -- statements ---------------------------------------------------------

    Select parse_select() {
        Select s;
        if (accept_kw("WITH")) {
            s.recursive = accept_kw("RECURSIVE");
            do {
                Cte cte;
                cte.name = parse_name("common table expression name");
                if (accept_op("(")) {
                    do {
                        cte.columns.push_back(parse_name("column name"));
                    } while (accept_op(","));
                    expect_op(")");
                }
                expect_kw("AS");
                expect_op("(");
                cte.query = parse_select();
                expect_op(")");
                s.ctes.push_back(std::move(cte));
            } while (accept_op(","));
        }
        s.core = parse_core();
        while (true) {
            if (accept_kw("UNION")) {
                s.compound_ops.push_back(accept_kw("ALL") ? CompoundOp::union_all : CompoundOp::union_distinct);
            } else if (accept_kw("INTERSECT")) {
                s.compound_ops.push_back(CompoundOp::intersect);
            } else if (accept_kw("EXCEPT")) {
                s.compound_ops.push_back(CompoundOp::except);
            } else {
                break;
            }
            s.compound_cores.push_back(parse_core());
        }
        if (accept_kw("ORDER")) {
            expect_kw("BY");
            do {
                OrderItem item;
                item.expr = parse_expr();
                if (accept_kw("ASC")) {
                    item.direction = OrderItem::Direction::asc;
                } else if (accept_kw("DESC")) {
                    item.direction = OrderItem::Direction::desc;
                }
                s.order_by.push_back(std::move(item));
            } while (accept_op(","));
        }
        if (accept_kw("LIMIT")) {
            Expr first = parse_expr();
            if (accept_kw("OFFSET")) {
                s.limit = std::move(first);
                s.offset = parse_expr();
            } else if (accept_op(",")) {
                s.offset = std::move(first);
                s.limit = parse_expr();
            } else {
                s.limit = std::move(first);
            }
        }
        return s;
    }

    SelectCore parse_core() {
        SelectCore c;
        expect_kw("SELECT");
        if (accept_kw("DISTINCT")) {
            c.distinct = true;
        } else {
            accept_kw("ALL");
        }
        do {
            c.items.push_back(parse_select_item());
        } while (accept_op(","));
        if (accept_kw("FROM")) {
            c.has_from = true;
            c.from = parse_table_ref();
            while (true) {
                Join j;
                if (accept_op(",")) {
                    j.kind = JoinKind::comma;
                } else {
                    j.natural = accept_kw("NATURAL");
                    if (accept_kw("LEFT")) {
                        accept_kw("OUTER");
                        j.kind = JoinKind::left;
                    } else if (accept_kw("RIGHT")) {
                        accept_kw("OUTER");
                        j.kind = JoinKind::right;
                    } else if (accept_kw("FULL")) {
                        accept_kw("OUTER");
                        j.kind = JoinKind::full;
                    } else if (accept_kw("INNER")) {
                        j.kind = JoinKind::inner;
                    } else if (accept_kw("CROSS")) {
                        j.kind = JoinKind::cross;
                    } else if (j.natural) {
                        j.kind = JoinKind::plain;
                    } else if (!is_kw("JOIN")) {
                        break;
                    }
                    expect_kw("JOIN");
                }
                j.table = parse_table_ref();
                if (j.kind != JoinKind::comma) {
                    if (accept_kw("ON")) {
                        j.on = parse_expr();
                    } else if (accept_kw("USING")) {
                        expect_op("(");
                        do {
                            j.using_columns.push_back(parse_name("column name"));
                        } while (accept_op(","));
                        expect_op(")");
                    }
                }
                c.joins.push_back(std::move(j));
            }
        }
        if (accept_kw("WHERE")) c.where = parse_expr();
        if (accept_kw("GROUP")) {
            expect_kw("BY");
            do {
                c.group_by.push_back(parse_expr());
            } while (accept_op(","));
        }
        if (accept_kw("HAVING")) c.having = parse_expr();
        return c;
    }

    std::string parse_alias() {
        if (accept_kw("AS")) {
            if (peek().kind == Token::Kind::string) return advance().text;
            return parse_name("alias");
        }
        if (at_name()) return advance().text;
        if (peek().kind == Token::Kind::string) return advance().text;
        return {};
    }

    SelectItem parse_select_item() {
        SelectItem item;
        if (accept_op("*")) {
            item.is_star = true;
            return item;
        }
        if (at_name() && is_op(".", 1) && is_op("*", 2)) {
            item.is_star = true;
            item.star_table = advance().text;
            advance();
            advance();
            return item;
        }
        item.expr = parse_expr();
        item.alias = parse_alias();
        return item;
    }

    TableRef parse_table_ref() {
        TableRef t;
        if (accept_op("(")) {
            if (!is_kw("SELECT") && !is_kw("WITH")) fail("parenthesized joins are not supported");
            t.subquery = parse_select();
            expect_op(")");
        } else {
            t.name = parse_name("table name");
            if (accept_op(".")) t.name = parse_name("table name");  // schema-qualified: keep the table
        }
        t.alias = parse_alias();
        return t;
    }

    // -- expressions --------------------------------------------------------

    Expr make(Expr::Node node, std::size_t begin) { return Expr{std::move(node), SourceSpan{begin, prev_end()}}; }

    Expr parse_expr() { return parse_logical(false); }

    Expr parse_logical(bool is_and) {
        std::size_t begin = peek().begin;
        Expr first = is_and ? parse_not() : parse_logical(true);
        if (!is_kw(is_and ? "AND" : "OR")) return first;
        Logical node;
        node.is_and = is_and;
        auto add = [&](Expr e) {
            if (auto* l = e.as<Logical>(); l && l->is_and == is_and) {
                for (auto& t : l->terms) node.terms.push_back(std::move(t));
            } else {
                node.terms.push_back(std::move(e));
            }
        };
        add(std::move(first));
        while (accept_kw(is_and ? "AND" : "OR")) add(is_and ? parse_not() : parse_logical(true));
        return make(std::move(node), begin);
    }

    Expr parse_not() {
        std::size_t begin = peek().begin;
        if (accept_kw("NOT")) {
            UnaryOp u;
            u.op = UnaryOp::Op::logical_not;
            u.operand = parse_not();
            return make(std::move(u), begin);
        }
        return parse_equality();
    }

    Expr binary(BinaryOp::Op op, Expr lhs, Expr rhs, std::size_t begin) {
        BinaryOp b;
        b.op = op;
        b.lhs = std::move(lhs);
        b.rhs = std::move(rhs);
        return make(std::move(b), begin);
    }

    Expr null_literal() { return Expr{Literal{Literal::Kind::null, "NULL"}}; }

    Expr parse_equality() {
        std::size_t begin = peek().begin;
        Expr lhs = parse_relational();
        while (true) {
            if (accept_op("=") || accept_op("==")) {
                lhs = binary(BinaryOp::Op::eq, std::move(lhs), parse_relational(), begin);
            } else if (accept_op("!=") || accept_op("<>")) {
                lhs = binary(BinaryOp::Op::ne, std::move(lhs), parse_relational(), begin);
            } else if (accept_kw("IS")) {
                bool neg = accept_kw("NOT");
                lhs = binary(neg ? BinaryOp::Op::is_not : BinaryOp::Op::is, std::move(lhs), parse_relational(), begin);
            } else if (accept_kw("ISNULL")) {
                lhs = binary(BinaryOp::Op::is, std::move(lhs), null_literal(), begin);
            } else if (accept_kw("NOTNULL")) {
                lhs = binary(BinaryOp::Op::is_not, std::move(lhs), null_literal(), begin);
            } else if (is_kw("NOT") && is_kw("NULL", 1)) {
                advance();
                advance();
                lhs = binary(BinaryOp::Op::is_not, std::move(lhs), null_literal(), begin);
            } else {
                bool neg = false;
                if (is_kw("NOT") && (is_kw("IN", 1) || is_kw("LIKE", 1) || is_kw("GLOB", 1) || is_kw("REGEXP", 1) ||
                                     is_kw("MATCH", 1) || is_kw("BETWEEN", 1))) {
                    advance();
                    neg = true;
                }
                if (accept_kw("IN")) {
                    lhs = parse_in_tail(std::move(lhs), neg, begin);
                } else if (accept_kw("BETWEEN")) {
                    Between b;
                    b.negated = neg;
                    b.operand = std::move(lhs);
                    b.low = parse_relational();
                    expect_kw("AND");
                    b.high = parse_relational();
                    lhs = make(std::move(b), begin);
                } else if (is_kw("LIKE") || is_kw("GLOB") || is_kw("REGEXP") || is_kw("MATCH")) {
                    Like l;
                    const std::string& kw = advance().upper;
                    l.kind = kw == "LIKE"   ? Like::Kind::like
                             : kw == "GLOB" ? Like::Kind::glob
                             : kw == "REGEXP" ? Like::Kind::regexp
                                              : Like::Kind::match;
                    l.negated = neg;
                    l.lhs = std::move(lhs);
                    l.rhs = parse_relational();
                    if (accept_kw("ESCAPE")) l.escape = parse_relational();
                    lhs = make(std::move(l), begin);
                } else {
                    return lhs;
                }
            }
        }
    }

    Expr parse_in_tail(Expr lhs, bool neg, std::size_t begin) {
        expect_op("(");
        if (is_kw("SELECT") || is_kw("WITH")) {
            InSelect in;
            in.negated = neg;
            in.operand = std::move(lhs);
            in.query = parse_select();
            expect_op(")");
            return make(std::move(in), begin);
        }
        InList in;
        in.negated = neg;
        in.operand = std::move(lhs);
        if (!is_op(")")) {
            do {
                in.items.push_back(parse_expr());
            } while (accept_op(","));
        }
        expect_op(")");
        return make(std::move(in), begin);
    }

    template <class Next>
    Expr parse_left_assoc(Next next, std::initializer_list<std::pair<std::string_view, BinaryOp::Op>> ops) {
        std::size_t begin = peek().begin;
        Expr lhs = (this->*next)();
        while (true) {
            bool matched = false;
            for (const auto& [text, op] : ops) {
                if (accept_op(text)) {
                    lhs = binary(op, std::move(lhs), (this->*next)(), begin);
                    matched = true;
                    break;
                }
            }
            if (!matched) return lhs;
        }
    }

    Expr parse_relational() {
        return parse_left_assoc(&Parser::parse_bitwise, {{"<=", BinaryOp::Op::le},
                                                         {">=", BinaryOp::Op::ge},
                                                         {"<", BinaryOp::Op::lt},
                                                         {">", BinaryOp::Op::gt}});
    }
    Expr parse_bitwise() {
        return parse_left_assoc(&Parser::parse_additive, {{"<<", BinaryOp::Op::shl},
                                                          {">>", BinaryOp::Op::shr},
                                                          {"&", BinaryOp::Op::bit_and},
                                                          {"|", BinaryOp::Op::bit_or}});
    }
    Expr parse_additive() {
        return parse_left_assoc(&Parser::parse_multiplicative, {{"+", BinaryOp::Op::add}, {"-", BinaryOp::Op::sub}});
    }
    Expr parse_multiplicative() {
        return parse_left_assoc(&Parser::parse_concat, {{"*", BinaryOp::Op::mul},
                                                        {"/", BinaryOp::Op::div},
                                                        {"%", BinaryOp::Op::mod}});
    }
    Expr parse_concat() { return parse_left_assoc(&Parser::parse_unary, {{"||", BinaryOp::Op::concat}}); }

    Expr parse_unary() {
        std::size_t begin = peek().begin;
        UnaryOp u;
        if (accept_op("-")) {
            u.op = UnaryOp::Op::negate;
        } else if (accept_op("+")) {
            u.op = UnaryOp::Op::plus;
        } else if (accept_op("~")) {
            u.op = UnaryOp::Op::bit_not;
        } else {
            return parse_postfix();
        }
        u.operand = parse_unary();
        return make(std::move(u), begin);
    }

    Expr parse_postfix() {
        std::size_t begin = peek().begin;
        Expr e = parse_primary();
        while (accept_kw("COLLATE")) {
            Collate c;
            c.operand = std::move(e);
            c.collation = parse_name("collation name");
            e = make(std::move(c), begin);
        }
        return e;
    }

    Expr parse_primary() {
        std::size_t begin = peek().begin;
        const Token& t = peek();
        switch (t.kind) {
            case Token::Kind::number: {
                std::string textv = advance().text;
                bool real = textv.find_first_of(".eE") != std::string::npos &&
                            !(textv.size() > 1 && (textv[1] == 'x' || textv[1] == 'X'));
                return make(Literal{real ? Literal::Kind::real : Literal::Kind::integer, textv}, begin);
            }
            case Token::Kind::string: return make(Literal{Literal::Kind::string, advance().text}, begin);
            case Token::Kind::blob: return make(Literal{Literal::Kind::blob, advance().text}, begin);
            case Token::Kind::quoted_identifier: return parse_column_or_call(begin);
            case Token::Kind::end: fail("expected expression");
            case Token::Kind::op:
                if (accept_op("(")) {
                    if (is_kw("SELECT") || is_kw("WITH")) {
                        ScalarSubquery sq;
                        sq.query = parse_select();
                        expect_op(")");
                        return make(std::move(sq), begin);
                    }
                    Expr inner = parse_expr();
                    expect_op(")");
                    inner.span = SourceSpan{begin, prev_end()};
                    return inner;
                }
                fail("unexpected '" + t.text + "'");
            case Token::Kind::identifier: break;
        }
        if (accept_kw("NULL")) return make(Literal{Literal::Kind::null, "NULL"}, begin);
        if (is_kw("CURRENT_DATE") || is_kw("CURRENT_TIME") || is_kw("CURRENT_TIMESTAMP")) {
            return make(Literal{Literal::Kind::keyword, advance().upper}, begin);
        }
        if (accept_kw("EXISTS")) {
            expect_op("(");
            Exists e;
            e.query = parse_select();
            expect_op(")");
            return make(std::move(e), begin);
        }
        if (accept_kw("CASE")) {
            Case c;
            if (!is_kw("WHEN")) c.base = parse_expr();
            while (accept_kw("WHEN")) {
                c.whens.push_back(parse_expr());
                expect_kw("THEN");
                c.thens.push_back(parse_expr());
            }
            if (c.whens.empty()) fail("CASE without WHEN");
            if (accept_kw("ELSE")) c.otherwise = parse_expr();
            expect_kw("END");
            return make(std::move(c), begin);
        }
        if (accept_kw("CAST")) {
            expect_op("(");
            Cast c;
            c.operand = parse_expr();
            expect_kw("AS");
            std::string type_name;
            while (!is_op(")")) {
                if (peek().kind == Token::Kind::end) fail("unterminated CAST");
                const Token& tt = advance();
                if (!type_name.empty() && tt.text != "(" && tt.text != ")" && tt.text != "," &&
                    type_name.back() != '(') {
                    type_name.push_back(' ');
                }
                type_name += tt.kind == Token::Kind::identifier ? tt.upper : tt.text;
                if (tt.text == "(") {
                    while (!is_op(")")) {
                        if (peek().kind == Token::Kind::end) fail("unterminated type");
                        type_name += advance().text;
                    }
                    type_name += advance().text;
                }
            }
            if (type_name.empty()) fail("expected type name");
            expect_op(")");
            c.type_name = std::move(type_name);
            return make(std::move(c), begin);
        }
        if (is_reserved(t.upper)) fail("unexpected keyword " + t.upper);
        return parse_column_or_call(begin);
    }

    Expr parse_column_or_call(std::size_t begin) {
        const Token& t = advance();
        std::string first = t.text;
        if (t.kind == Token::Kind::identifier && is_op("(")) {
            advance();
            FunctionCall f;
            f.name = first;
            if (accept_op("*")) {
                f.star = true;
            } else if (!is_op(")")) {
                if (accept_kw("DISTINCT")) f.distinct = true;
                do {
                    f.args.push_back(parse_expr());
                } while (accept_op(","));
            }
            expect_op(")");
            if (is_kw("OVER") || is_kw("FILTER")) fail("window functions are not supported");
            return make(std::move(f), begin);
        }
        if (accept_op(".")) {
            ColumnRef c;
            c.table = std::move(first);
            c.column = parse_name("column name");
            return make(std::move(c), begin);
        }
        return make(ColumnRef{"", std::move(first)}, begin);
    }
};

}  // namespace

SqlAst parse(std::string_view sql) { return Parser(sql).parse_statement(); }

}  // namespace sdesql::sql
