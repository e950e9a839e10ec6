#include <gtest/gtest.h>

#include "sdesql/catalog.hpp"
#include "sdesql/error.hpp"
#include "sdesql/sqlkit.hpp"

using namespace sdesql;
using namespace sdesql::sql;

namespace {

void expect_fixpoint(const std::string& s) {
    SCOPED_TRACE(s);
    auto a = parse(s);
    auto text = render(a);
    auto b = parse(text);
    EXPECT_EQ(a, b) << text;
    EXPECT_EQ(render(b), text);
}

}  // namespace

TEST(Parse, ConditionTreeShape) {
    auto ast = parse("SELECT a FROM t WHERE x=1 AND (y=2 OR z=3)");
    ASSERT_TRUE(ast.core.where);
    auto* top = ast.core.where->as<Logical>();
    ASSERT_NE(top, nullptr);
    EXPECT_TRUE(top->is_and);
    ASSERT_EQ(top->terms.size(), 2u);
    EXPECT_NE(top->terms[0].as<BinaryOp>(), nullptr);
    auto* inner = top->terms[1].as<Logical>();
    ASSERT_NE(inner, nullptr);
    EXPECT_FALSE(inner->is_and);
    EXPECT_EQ(inner->terms.size(), 2u);
}

TEST(Parse, BareSelectIsSyntaxErrorAtEnd) {
    try {
        parse("SELECT");
        FAIL() << "expected SyntaxError";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.position(), 6u);
        EXPECT_NE(std::string(e.what()).find("end of input"), std::string::npos);
    }
}

TEST(Parse, NestedSubqueryAttachedToPredicate) {
    auto ast = parse("SELECT a FROM t WHERE b IN (SELECT b FROM u WHERE c > 2)");
    ASSERT_TRUE(ast.core.where);
    auto* in = ast.core.where->as<InSelect>();
    ASSERT_NE(in, nullptr);
    ASSERT_TRUE(in->query);
    EXPECT_EQ(in->query->core.from.name, "u");
    EXPECT_TRUE(in->query->core.where);
}

TEST(Parse, RejectsTrailingGarbageAndWriteStatements) {
    EXPECT_THROW(parse("SELECT a FROM t garbage garbage"), SyntaxError);
    EXPECT_THROW(parse("DELETE FROM t"), SyntaxError);
    EXPECT_THROW(parse("SELECT a FROM t; SELECT b FROM t"), SyntaxError);
    EXPECT_NO_THROW(parse("SELECT a FROM t;"));
}

TEST(Render, QuotesOnlyWhenNeeded) {
    EXPECT_EQ(render(parse("select Phone from users where name='O''Brien'")),
              "SELECT Phone FROM users WHERE name = 'O''Brien'");
    EXPECT_EQ(render(parse("SELECT `order`, [my col] FROM \"t\"")), "SELECT \"order\", \"my col\" FROM t");
    EXPECT_EQ(render(parse("SELECT a FROM t LIMIT 5, 10")), "SELECT a FROM t LIMIT 10 OFFSET 5");
}

TEST(Render, PrecedenceKeepsMeaning) {
    EXPECT_EQ(render(parse("SELECT (a + b) * c, a + b * c, a - (b - c), -(-a) FROM t")),
              "SELECT (a + b) * c, a + b * c, a - (b - c), - -a FROM t");
    EXPECT_EQ(render(parse("SELECT a FROM t WHERE NOT (x = 1 OR y = 2) AND z")),
              "SELECT a FROM t WHERE NOT (x = 1 OR y = 2) AND z");
}

TEST(Render, FixpointSamples) {
    for (const char* s : {
             "SELECT DISTINCT T1.name, COUNT(*) AS n FROM users AS T1 INNER JOIN orders AS T2 ON T1.id = T2.user_id "
             "WHERE T2.amount BETWEEN 1 AND 10 GROUP BY T1.name HAVING COUNT(*) > 1 ORDER BY n DESC LIMIT 3",
             "SELECT CAST(SUM(CASE WHEN x = 'a' THEN 1 ELSE 0 END) AS REAL) * 100 / COUNT(*) FROM t",
             "WITH c AS (SELECT 1 AS v) SELECT v FROM c UNION ALL SELECT 2 ORDER BY 1",
             "SELECT a FROM t WHERE b NOT LIKE '%x%' ESCAPE '\\' AND c IS NOT NULL AND d NOT IN (1, 2, 3)",
             "SELECT a FROM t WHERE EXISTS (SELECT 1 FROM u WHERE u.id = t.id) AND a = (SELECT MAX(a) FROM t)",
             "SELECT a || '-' || b, ~c, d % 2, e << 1 FROM t LEFT JOIN u USING (id)",
             "SELECT * FROM (SELECT a FROM t) AS s WHERE s.a ISNULL",
             "SELECT iif(a > 1, 'y', 'n'), substr(b, 1, 4) COLLATE NOCASE FROM t",
             "SELECT a FROM t WHERE x = -1 AND y = +2.5e3 AND z = X'0A'",
         }) {
        expect_fixpoint(s);
    }
}

TEST(Units, TwoConjuncts) {
    EXPECT_EQ(condition_units(parse("SELECT a FROM t WHERE x=1 AND y=2")).size(), 2u);
}

TEST(Units, OrSubtreeIsOneUnit) {
    auto units = condition_units(parse("SELECT a FROM t WHERE (x=1 OR y=2) AND z>3"));
    ASSERT_EQ(units.size(), 2u);
    auto* first = units[0].predicate.as<Logical>();
    ASSERT_NE(first, nullptr);
    EXPECT_FALSE(first->is_and);
    EXPECT_EQ(units[0].sql(), "x = 1 OR y = 2");
}

TEST(Units, NoWhereNoUnits) { EXPECT_TRUE(condition_units(parse("SELECT a FROM t")).empty()); }

TEST(Units, ColumnsAndLiterals) {
    auto units = condition_units(parse("SELECT a FROM t WHERE t.loc = 'UK' AND n > 3"));
    ASSERT_EQ(units.size(), 2u);
    ASSERT_EQ(units[0].columns.size(), 1u);
    EXPECT_EQ(units[0].columns[0].column, "loc");
    ASSERT_EQ(units[0].literals.size(), 1u);
    EXPECT_EQ(units[0].literals[0].text, "UK");
}

TEST(Decompose, SingleTableTwoUnits) {
    auto d = decompose(parse("SELECT a FROM t WHERE x = 1 AND y = 2"));
    ASSERT_EQ(d.subs.size(), 2u);
    EXPECT_FALSE(d.not_decomposable);
    EXPECT_EQ(d.subs[0].sql, "SELECT a FROM t WHERE x = 1");
    EXPECT_EQ(d.subs[1].sql, "SELECT a FROM t WHERE y = 2");
}

TEST(Decompose, ThreeJoinedTablesAddsSkeleton) {
    auto d = decompose(parse(
        "SELECT u.name FROM users AS u JOIN orders AS o ON o.user_id = u.id JOIN products AS p ON p.id = o.product_id "
        "WHERE p.category = 'tools' AND u.location = 'UK' ORDER BY u.name LIMIT 1"));
    ASSERT_EQ(d.subs.size(), 3u);
    EXPECT_EQ(d.subs[2].kind, SubSqlKind::join_skeleton);
    EXPECT_EQ(d.subs[2].sql.find("WHERE"), std::string::npos);
    EXPECT_EQ(d.subs[0].sql.find("LIMIT"), std::string::npos);
}

TEST(Decompose, BareSelectNotDecomposable) {
    auto d = decompose(parse("SELECT a FROM t"));
    EXPECT_TRUE(d.subs.empty());
    EXPECT_TRUE(d.not_decomposable);
}

TEST(Decompose, HavingUnitsKeepGroupBy) {
    auto d = decompose(parse("SELECT a, COUNT(*) FROM t WHERE b = 1 GROUP BY a HAVING COUNT(*) > 2"));
    ASSERT_EQ(d.subs.size(), 2u);
    EXPECT_EQ(d.subs[1].sql, "SELECT a, COUNT(*) FROM t GROUP BY a HAVING COUNT(*) > 2");
}

TEST(Decompose, SplitOrFlag) {
    auto ast = parse("SELECT a FROM t WHERE (x = 1 OR y = 2) AND z = 3");
    EXPECT_EQ(decompose(ast).subs.size(), 2u);
    EXPECT_EQ(decompose(ast, true).subs.size(), 3u);
}

TEST(Strip, RemoveOne) { EXPECT_EQ(strip_select_items(parse("SELECT a, b FROM t"), {1}), "SELECT a FROM t"); }

TEST(Strip, RemoveNoneIsIdentity) {
    auto ast = parse("SELECT a, b FROM t WHERE c = 1");
    EXPECT_EQ(strip_select_items(ast, {}), render(ast));
}

TEST(Strip, RemoveAllThrows) {
    EXPECT_THROW(strip_select_items(parse("SELECT a, b FROM t"), {0, 1}), WouldEmptySelectList);
}

TEST(Strip, UnsafeEditsRejected) {
    EXPECT_THROW(strip_select_items(parse("SELECT DISTINCT a, b FROM t"), {1}), UnsafeSelectEdit);
    EXPECT_THROW(strip_select_items(parse("SELECT a, COUNT(*) FROM t"), {1}), UnsafeSelectEdit);
    EXPECT_THROW(strip_select_items(parse("SELECT a, b FROM t ORDER BY 2"), {0}), UnsafeSelectEdit);
    EXPECT_THROW(strip_select_items(parse("SELECT a, b AS k FROM t ORDER BY k"), {1}), UnsafeSelectEdit);
    EXPECT_THROW(strip_select_items(parse("SELECT a FROM t"), {3}), UnsafeSelectEdit);
}

TEST(Strip, KeepsRemainingClauses) {
    auto ast = parse("SELECT name, Phone FROM users WHERE name = 'X' ORDER BY name LIMIT 2");
    auto out = strip_select_items(ast, {0});
    EXPECT_EQ(out, "SELECT Phone FROM users WHERE name = 'X' ORDER BY name LIMIT 2");
    EXPECT_EQ(render_after_select_list(parse(out)), render_after_select_list(ast));
}

TEST(Probe, AddsCondition) {
    auto base = parse("SELECT Phone FROM users");
    EXPECT_EQ(build_probe_sql(base, {"", "name", "=", std::string("John Charlie Hinton")}),
              "SELECT Phone FROM users WHERE name = 'John Charlie Hinton'");
}

TEST(Probe, EscapesQuotes) {
    auto base = parse("SELECT Phone FROM users");
    auto sql = build_probe_sql(base, {"users", "name", "=", std::string("O'Brien")});
    EXPECT_NE(sql.find("'O''Brien'"), std::string::npos);
    EXPECT_EQ(render(parse(sql)), sql);
}

TEST(Probe, ValuelessCondition) {
    auto base = parse("SELECT Phone FROM users WHERE id > 0");
    EXPECT_EQ(build_probe_sql(base, {"", "location", "IS NOT NULL", std::nullopt}),
              "SELECT Phone FROM users WHERE id > 0 AND location IS NOT NULL");
}

TEST(Probe, UnknownColumnWithCatalog) {
    DatabaseCatalog cat;
    cat.tables.push_back({"users", {{"id", "INTEGER", true}, {"Phone", "TEXT", false}}, {}});
    cat.tables.push_back({"orders", {{"id", "INTEGER", true}, {"user_id", "INTEGER", false}, {"amount", "REAL", false}},
                          {{"orders", "user_id", "users", "id"}}});
    cat.tables.push_back({"misc", {{"note", "TEXT", false}}, {}});
    auto base = parse("SELECT Phone FROM users");
    EXPECT_THROW(build_probe_sql(base, {"", "nope", "=", std::string("x")}, &cat), UnknownColumn);
    EXPECT_THROW(build_probe_sql(base, {"misc", "note", "=", std::string("x")}, &cat), UnknownColumn);
    auto joined = build_probe_sql(base, {"orders", "amount", ">", std::string("10")}, &cat);
    EXPECT_EQ(joined,
              "SELECT users.Phone FROM users JOIN orders ON users.id = orders.user_id WHERE orders.amount > 10");
}

TEST(Probe, JoinsAcrossTwoHops) {
    DatabaseCatalog cat;
    cat.tables.push_back({"users", {{"id", "INTEGER", true}, {"name", "TEXT", false}}, {}});
    cat.tables.push_back({"orders",
                          {{"id", "INTEGER", true}, {"user_id", "INTEGER", false}, {"product_id", "INTEGER", false}},
                          {{"orders", "user_id", "users", "id"}, {"orders", "product_id", "products", "id"}}});
    cat.tables.push_back({"products", {{"id", "INTEGER", true}, {"name", "TEXT", false}}, {}});
    auto sql = build_probe_sql(parse("SELECT name FROM users"), {"products", "name", "=", std::string("Lamp")}, &cat);
    EXPECT_EQ(sql,
              "SELECT users.name FROM users JOIN orders ON users.id = orders.user_id JOIN products ON "
              "orders.product_id = products.id WHERE products.name = 'Lamp'");
}
