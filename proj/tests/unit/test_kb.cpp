#include <algorithm>

#include "doctest.h"
#include "knowbench/kb.hpp"
#include "../support/fixtures.hpp"

using namespace knowbench;

namespace {

std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(KNOWBENCH_SOURCE_DIR) / "tests" / "fixtures" / name;
}

KnowledgeBase toy_kb() {
    ordered_json doc = ordered_json::parse(R"({
        "classes": [{"id": "camels", "name": "Camels", "rank": "genus"}],
        "entities": [
            {"id": "alpaca", "name": "Alpaca", "rank": "species", "class_id": "camels",
             "property": {"body mass": [{"value": 60.0, "unit": "kg"}]},
             "relations": [{"relation": "eaten by", "object_id": "cougar"}]},
            {"id": "vicuna", "name": "Vicuna", "rank": "species", "class_id": "camels",
             "property": {"habitat": ["mountains"]}, "relations": []}
        ]
    })");
    return KnowledgeBase::ingest(doc);
}

}  // namespace

TEST_CASE("ingest builds the toy KB from the running example") {
    KnowledgeBase kb = toy_kb();
    CHECK(kb.entities().size() == 2);
    CHECK(kb.classes().size() == 1);
    const Entity& alpaca = kb.entity("alpaca");
    CHECK(alpaca.attributes.size() == 1);
    CHECK(alpaca.attributes[0].attribute == "body mass");
    CHECK(alpaca.attributes[0].value.magnitude == doctest::Approx(60.0));
    CHECK(alpaca.relations.size() == 1);
    CHECK(alpaca.relations[0].object == "cougar");
}

TEST_CASE("ingest of an empty document yields an empty KB") {
    KnowledgeBase kb = KnowledgeBase::ingest(ordered_json::object());
    CHECK(kb.entities().empty());
    CHECK(kb.classes().empty());
    CHECK(kb.dangling_count() == 0);
}

TEST_CASE("dangling relation objects are counted and kept") {
    KnowledgeBase kb = toy_kb();
    CHECK(kb.dangling_count() == 1);
    CHECK(kb.is_dangling("cougar"));
    CHECK(kb.entity_name("cougar") == "cougar");  // carries only a name
}

TEST_CASE("ingest rejects malformed and inconsistent documents") {
    CHECK_THROWS_AS(KnowledgeBase::ingest(ordered_json::parse(R"({"classes": 3})")), ParseError);

    ordered_json dup = ordered_json::parse(R"({
        "classes": [{"id": "c"}],
        "entities": [
            {"id": "e", "name": "A", "class_id": "c"},
            {"id": "e", "name": "B", "class_id": "c"}
        ]
    })");
    CHECK_THROWS_AS(KnowledgeBase::ingest(dup), ValidationError);

    ordered_json cycle = ordered_json::parse(R"({
        "classes": [
            {"id": "a", "parent_id": "b"},
            {"id": "b", "parent_id": "a"}
        ]
    })");
    CHECK_THROWS_AS(KnowledgeBase::ingest(cycle), ValidationError);

    ordered_json unknown_class = ordered_json::parse(R"({
        "classes": [],
        "entities": [{"id": "e", "name": "A", "class_id": "nope"}]
    })");
    CHECK_THROWS_AS(KnowledgeBase::ingest(unknown_class), ValidationError);

    ordered_json self_loop = ordered_json::parse(R"({
        "classes": [{"id": "c"}],
        "entities": [{"id": "e", "name": "A", "class_id": "c",
                      "relations": [{"relation": "eats", "object_id": "e"}]}]
    })");
    CHECK_THROWS_AS(KnowledgeBase::ingest(self_loop), ValidationError);
}

TEST_CASE("ingest-then-emit reaches a canonical fixpoint") {
    KnowledgeBase kb = KnowledgeBase::ingest_file(fixture("fig1.json"));
    ordered_json first = kb.to_json();
    KnowledgeBase again = KnowledgeBase::ingest(first);
    CHECK(again.to_json().dump() == first.dump());
}

TEST_CASE("siblings excludes the entity and is symmetric") {
    KnowledgeBase kb = KnowledgeBase::ingest_file(fixture("fig1.json"));
    auto sibs = kb.siblings("alpaca");
    REQUIRE(sibs.size() == 1);
    CHECK(sibs[0]->name == "Vicuna");
    auto back = kb.siblings("vicuna");
    REQUIRE(back.size() == 1);
    CHECK(back[0]->name == "Alpaca");
    CHECK_THROWS_AS(kb.siblings("nobody"), NotFoundError);

    // symmetry on a synthetic KB
    KnowledgeBase big = testsupport::synthetic_kb(7, 4, 5);
    for (const auto& [id, e] : big.entities()) {
        for (const Entity* s : big.siblings(id)) {
            auto their = big.siblings(s->id);
            bool found = std::any_of(their.begin(), their.end(),
                                     [&](const Entity* t) { return t->id == id; });
            CHECK(found);
            CHECK(s->id != id);
        }
    }
}

TEST_CASE("sole class member has no siblings") {
    KnowledgeBase kb = KnowledgeBase::ingest_file(fixture("fig1.json"));
    CHECK(kb.siblings("maned_wolf").empty());
}

TEST_CASE("class commons equal the brute-force intersection") {
    ordered_json doc = ordered_json::parse(R"({
        "classes": [{"id": "c", "rank": "genus"}],
        "entities": [
            {"id": "a", "name": "A", "class_id": "c",
             "property": {"cellularity": ["multicellular"], "color": ["red"]}},
            {"id": "b", "name": "B", "class_id": "c",
             "property": {"cellularity": ["multicellular"], "color": ["blue"]}}
        ]
    })");
    KnowledgeBase kb = KnowledgeBase::ingest(doc);
    auto [attrs, rels] = kb.class_common_properties("c");
    REQUIRE(attrs.size() == 1);
    CHECK(attrs[0].attribute == "cellularity");
    CHECK(rels.empty());

    // single-member class: full property set
    ordered_json solo = ordered_json::parse(R"({
        "classes": [{"id": "c"}],
        "entities": [{"id": "a", "name": "A", "class_id": "c",
                      "property": {"x": ["1"], "y": ["2"]}}]
    })");
    auto [sa, sr] = KnowledgeBase::ingest(solo).class_common_properties("c");
    CHECK(sa.size() == 2);
    CHECK(sr.empty());

    // disjoint properties: empty commons
    ordered_json disjoint = ordered_json::parse(R"({
        "classes": [{"id": "c"}],
        "entities": [
            {"id": "a", "name": "A", "class_id": "c", "property": {"x": ["1"]}},
            {"id": "b", "name": "B", "class_id": "c", "property": {"y": ["2"]}}
        ]
    })");
    auto [da, dr] = KnowledgeBase::ingest(disjoint).class_common_properties("c");
    CHECK(da.empty());
    CHECK(dr.empty());
    CHECK_THROWS_AS(KnowledgeBase::ingest(disjoint).class_common_properties("zzz"), NotFoundError);
}

TEST_CASE("class commons match brute force on synthetic KBs") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        KnowledgeBase kb = testsupport::synthetic_kb(seed, 5, 4);
        for (const auto& [cid, cls] : kb.classes()) {
            auto [attrs, rels] = kb.class_common_properties(cid);
            // every common occurs on every member
            for (const auto& mid : cls.member_ids) {
                const Entity& m = kb.entity(mid);
                for (const auto& a : attrs) {
                    bool present =
                        std::any_of(m.attributes.begin(), m.attributes.end(), [&](const auto& o) {
                            return o.attribute == a.attribute && value_equal(o.value, a.value);
                        });
                    CHECK(present);
                }
            }
            // maximality: no member-0 property outside the commons is shared by all
            const Entity& first = kb.entity(cls.member_ids[0]);
            for (const auto& a : first.attributes) {
                bool in_commons = std::any_of(attrs.begin(), attrs.end(), [&](const auto& c) {
                    return c.attribute == a.attribute && value_equal(c.value, a.value);
                });
                if (in_commons) continue;
                bool everywhere = true;
                for (const auto& mid : cls.member_ids) {
                    const Entity& m = kb.entity(mid);
                    everywhere =
                        everywhere &&
                        std::any_of(m.attributes.begin(), m.attributes.end(), [&](const auto& o) {
                            return o.attribute == a.attribute && value_equal(o.value, a.value);
                        });
                }
                CHECK_FALSE(everywhere);
            }
        }
    }
}

TEST_CASE("declared class commons are validated against members") {
    ordered_json bad = ordered_json::parse(R"({
        "classes": [{"id": "c", "property": {"habitat": ["aquatic"]}}],
        "entities": [{"id": "a", "name": "A", "class_id": "c",
                      "property": {"habitat": ["terrestrial"]}}]
    })");
    CHECK_THROWS_AS(KnowledgeBase::ingest(bad), ValidationError);
}

TEST_CASE("screen_classes drops high ranks and property-poor classes") {
    ordered_json doc = ordered_json::parse(R"({
        "classes": [
            {"id": "p", "rank": "phylum"},
            {"id": "poor", "rank": "genus"},
            {"id": "rich", "rank": "species"}
        ],
        "entities": [
            {"id": "p1", "name": "P1", "class_id": "p",
             "property": {"a": ["1"], "b": ["2"], "c": ["3"], "d": ["4"]}},
            {"id": "p2", "name": "P2", "class_id": "p", "property": {"z": ["9"]}},
            {"id": "q1", "name": "Q1", "class_id": "poor", "property": {"a": ["1"], "b": ["2"]}},
            {"id": "q2", "name": "Q2", "class_id": "poor", "property": {"z": ["9"]}},
            {"id": "r1", "name": "R1", "class_id": "rich",
             "property": {"a": ["1"], "b": ["2"], "c": ["3"], "d": ["4"], "e": ["5"]}},
            {"id": "r2", "name": "R2", "class_id": "rich", "property": {"z": ["9"]}}
        ]
    })");
    KnowledgeBase kb = KnowledgeBase::ingest(doc);
    auto eligible = kb.screen_classes(3);
    REQUIRE(eligible.size() == 1);  // "p" is a phylum, "poor" tops out at 2 uniques
    CHECK(eligible[0] == "rich");
}

TEST_CASE("property_similarity follows the overlap definition") {
    auto attr = [](const std::string& name, const std::string& v) {
        return Property{AttributeTriplet{"s", name, AttributeValue::category({v})}};
    };
    std::vector<Property> abc{attr("a", "1"), attr("b", "2"), attr("c", "3")};
    std::vector<Property> bcd{attr("b", "2"), attr("c", "3"), attr("d", "4")};
    CHECK(property_similarity(abc, abc) == doctest::Approx(1.0));
    CHECK(property_similarity(abc, bcd) == doctest::Approx(0.5));
    CHECK(property_similarity(abc, bcd) == doctest::Approx(property_similarity(bcd, abc)));
    std::vector<Property> disjoint{attr("x", "9")};
    CHECK(property_similarity(abc, disjoint) == doctest::Approx(0.0));
    std::vector<Property> empty;
    CHECK_THROWS_AS(property_similarity(empty, empty), ValidationError);

    // adding a shared triplet never decreases the ratio
    double before = property_similarity(abc, bcd);
    std::vector<Property> abce = abc;
    std::vector<Property> bcde = bcd;
    abce.push_back(attr("e", "5"));
    bcde.push_back(attr("e", "5"));
    CHECK(property_similarity(abce, bcde) >= before);
}

TEST_CASE("numeric values compare with unit normalization and tolerance") {
    auto a = AttributeValue::number(60.0, "kg");
    auto b = AttributeValue::number(60.0 + 1e-12, " KG ");
    auto c = AttributeValue::number(60.1, "kg");
    auto d = AttributeValue::number(60.0, "g");
    CHECK(value_equal(a, b));
    CHECK_FALSE(value_equal(a, c));
    CHECK_FALSE(value_equal(a, d));
    auto cat1 = AttributeValue::category({"x", "y"});
    auto cat2 = AttributeValue::category({"y", "x"});
    CHECK(value_equal(cat1, cat2));  // multi-valued attributes are sets
    CHECK_FALSE(value_equal(a, cat1));
}

TEST_CASE("multi-valued attributes expose every member as a gold answer") {
    auto v = AttributeValue::category({"Ecuador", "Peru"});
    auto answers = v.answer_strings();
    REQUIRE(answers.size() == 2);
    CHECK(std::find(answers.begin(), answers.end(), "Peru") != answers.end());
    auto n = AttributeValue::number(500.0, "cm");
    CHECK(n.answer_strings() == std::vector<std::string>{"500.0 cm"});
}
