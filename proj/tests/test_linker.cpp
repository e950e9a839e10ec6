#include <gtest/gtest.h>

#include <random>

#include "sdesql/linker.hpp"
#include "sdesql/value_index.hpp"
#include "test_support.hpp"

using namespace sdesql;
using namespace sdesql::testing;

namespace {

struct CountryDb {
    TempDir dir;
    Database db;
    DatabaseCatalog catalog;
    ValueIndex index;
    CountryDb()
        : db(Database::open_readonly(make_db(dir, "c",
                                             "CREATE TABLE users(id INTEGER PRIMARY KEY, name TEXT, location TEXT);"
                                             "INSERT INTO users VALUES (1,'John Charlie Hinton','United Kingdom'),"
                                             "(2,'Maria Lopez','Spain'),(3,'Ann Lee','United States');"))),
          catalog(introspect_schema(db, "c")),
          index(ValueIndex::build(catalog, db)) {}
};

}  // namespace

TEST(Linker, ExtractsEntitiesFromTheRunningExample) {
    auto fake = std::make_shared<FakeBackend>();
    fake->reply(TemplateId::entity_extraction, "- phone number\n- John Charlie Hinton\n- United Kingdom\n- John Charlie Hinton");
    auto client = live_client(fake);
    Conversation conv(*client);
    auto e = extract_entities(conv, "What is the phone number of John Charlie Hinton from the United Kingdom?", "");
    std::vector<std::string> surfaces;
    for (const auto& x : e) surfaces.push_back(x.surface);
    EXPECT_EQ(surfaces, (std::vector<std::string>{"phone number", "John Charlie Hinton", "United Kingdom"}));
    EXPECT_NE(fake->prompts[0].find("John Charlie Hinton from the United Kingdom"), std::string::npos);
}

TEST(Linker, RepeatedParseFailureYieldsNoEntities) {
    auto fake = std::make_shared<FakeBackend>();
    fake->reply(TemplateId::entity_extraction, "");
    auto client = live_client(fake);
    Conversation conv(*client);
    EXPECT_TRUE(extract_entities(conv, "q", "").empty());
    EXPECT_EQ(fake->count(TemplateId::entity_extraction), 2u);
}

TEST(Linker, ExactValueRanksFirstWithFullLexicalScore) {
    CountryDb c;
    auto m = retrieve_values("United Kingdom", c.index, c.db);
    ASSERT_FALSE(m.empty());
    EXPECT_EQ(m[0].stored_value, "United Kingdom");
    EXPECT_EQ(m[0].column, (ColumnId{"users", "location"}));
    EXPECT_DOUBLE_EQ(m[0].lexical_score, 1.0);
}

TEST(Linker, TypoRetrievesStoredValue) {
    CountryDb c;
    auto m = retrieve_values("United Kingdon", c.index, c.db);
    ASSERT_FALSE(m.empty());
    EXPECT_EQ(m[0].stored_value, "United Kingdom");
    EXPECT_LT(m[0].lexical_score, 1.0);
    EXPECT_NEAR(m[0].lexical_score, 11.0 / 13.0, 1e-9);
    for (std::size_t i = 1; i < m.size(); ++i) EXPECT_GE(m[i - 1].combined, m[i].combined);
}

TEST(Linker, NoSimilarValuesGivesEmptyList) {
    CountryDb c;
    EXPECT_TRUE(retrieve_values("phone number", c.index, c.db).empty());
}

TEST(Linker, EveryMatchIsStoredVerbatim) {
    CountryDb c;
    for (const char* q : {"united kingdom", "Spain", "United States", "Maria Lopes", "Ann"}) {
        for (const auto& m : retrieve_values(q, c.index, c.db)) {
            auto out = c.db.execute("SELECT 1 FROM " + m.column.table + " WHERE " + m.column.column + " = '" +
                                        m.stored_value + "'",
                                    {});
            EXPECT_EQ(out.status, ExecStatus::rows) << q << " -> " << m.stored_value;
        }
    }
}

TEST(Linker, LargeColumnsFallBackToExactLookup) {
    TempDir dir;
    std::string script = "CREATE TABLE t(code TEXT);";
    for (int i = 0; i < 30; ++i) script += "INSERT INTO t VALUES ('code-" + std::to_string(i) + "');";
    auto db = Database::open_readonly(make_db(dir, "big", script));
    auto catalog = introspect_schema(db, "big");
    ValueIndexConfig cfg;
    cfg.max_distinct_values = 10;
    auto index = ValueIndex::build(catalog, db, cfg);
    ASSERT_EQ(index.skipped().size(), 1u);
    auto m = retrieve_values("CODE-7", index, db);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].stored_value, "code-7");
}

TEST(Linker, ScoreIsMonotoneInBothComponents) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double l = u(rng), s = u(rng), dl = u(rng) * (1 - l), ds = u(rng) * (1 - s);
        EXPECT_LE(combine_scores(l, s), combine_scores(l + dl, s));
        EXPECT_LE(combine_scores(l, s), combine_scores(l, s + ds));
    }
    EXPECT_DOUBLE_EQ(combine_scores(1.0, 1.0), 1.0);
}

TEST(Linker, ColumnSelectionFromTheModel) {
    ToyDb toy;
    auto fake = std::make_shared<FakeBackend>();
    fake->reply(TemplateId::column_selection,
                "United Kingdom => users.location\nphone number => users.Phone, users.phone_number, users.nope\n"
                "ghost => NONE");
    auto client = live_client(fake);
    Conversation conv(*client);
    std::vector<Entity> entities{{"United Kingdom", {}, {}}, {"phone number", {}, {}}, {"ghost", {}, {}}};
    auto cols = select_columns(conv, entities, toy.catalog, "q", "");
    ASSERT_EQ(cols.size(), 3u);
    EXPECT_EQ(cols[0], (std::vector<ColumnId>{{"users", "location"}}));
    EXPECT_EQ(cols[1], (std::vector<ColumnId>{{"users", "Phone"}, {"users", "phone_number"}}));
    EXPECT_TRUE(cols[2].empty());
}

TEST(Linker, ColumnSelectionFallsBackToMatchHosts) {
    ToyDb toy;
    auto fake = std::make_shared<FakeBackend>();
    fake->reply(TemplateId::column_selection, "");
    auto client = live_client(fake);
    Conversation conv(*client);
    Entity uk{"United Kingdom", {{{"users", "location"}, "UK", 0.3, 0.3, 0.3}}, {}};
    auto cols = select_columns(conv, {uk}, toy.catalog, "q", "");
    EXPECT_EQ(cols[0], (std::vector<ColumnId>{{"users", "location"}}));
}

TEST(Linker, SelectionIsASetUnion) {
    std::vector<Entity> e{{"a", {}, {{"users", "name"}}}, {"b", {}, {{"users", "name"}, {"users", "age"}}}};
    auto sel = make_selection(e);
    EXPECT_EQ(sel.selected.size(), 2u);
    EXPECT_EQ(sel.provenance.at("b").size(), 2u);
}

TEST(Linker, RenderedSchemaBounds) {
    ToyDb toy;
    SchemaSelection none;
    SchemaSelection all;
    for (const auto& c : toy.catalog.all_columns()) all.selected.insert(c);
    SchemaSelection mixed;
    mixed.selected.insert({"users", "location"});
    auto lo = render_schema(toy.catalog, none);
    auto hi = render_schema(toy.catalog, all);
    auto mid = render_schema(toy.catalog, mixed);
    EXPECT_EQ(hi, render_full_schema(toy.catalog));
    EXPECT_LT(lo.size(), mid.size());
    EXPECT_LT(mid.size(), hi.size());
    for (const auto* text : {&lo, &mid, &hi}) {
        for (const auto& t : toy.catalog.tables) {
            EXPECT_NE(text->find("Table " + t.name + ":"), std::string::npos);
            for (const auto& c : t.columns) EXPECT_NE(text->find("  - " + c.name + " ("), std::string::npos);
        }
    }
    EXPECT_EQ(lo.find("examples:"), std::string::npos);
    EXPECT_NE(hi.find("examples:"), std::string::npos);
}
