#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "knowbench/synth.hpp"
#include "../support/fixtures.hpp"

using namespace knowbench;

namespace {

std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(KNOWBENCH_SOURCE_DIR) / "tests" / "fixtures" / name;
}

Property attr(const std::string& name, const std::string& v) {
    return AttributeTriplet{"p", name, AttributeValue::category({v})};
}

}  // namespace

TEST_CASE("split_properties partitions the input") {
    SynthesisConfig cfg;
    Rng rng(1);

    SUBCASE("empty input gives three empty sets") {
        auto s = split_properties({}, cfg, rng);
        CHECK(s.heredity.empty());
        CHECK(s.variation.empty());
        CHECK(s.dropout.empty());
    }

    SUBCASE("degenerate weights push everything into heredity") {
        cfg.heredity_weight = 1.0;
        cfg.variation_weight = 0.0;
        cfg.dropout_weight = 0.0;
        std::vector<Property> props{attr("a", "1"), attr("b", "2"), attr("c", "3")};
        auto s = split_properties(props, cfg, rng);
        CHECK(s.heredity.size() == 3);
        CHECK(s.variation.empty());
        CHECK(s.dropout.empty());
    }

    SUBCASE("bad weights raise a config error") {
        cfg.heredity_weight = 0.9;
        CHECK_THROWS_AS(split_properties({}, cfg, rng), ConfigError);
    }

    SUBCASE("same seed produces the same partition") {
        std::vector<Property> props;
        for (int i = 0; i < 12; ++i) props.push_back(attr("a" + std::to_string(i), "v"));
        Rng r1(99), r2(99);
        auto s1 = split_properties(props, cfg, r1);
        auto s2 = split_properties(props, cfg, r2);
        CHECK(s1.heredity.size() == s2.heredity.size());
        CHECK(s1.variation.size() == s2.variation.size());
        CHECK(s1.dropout.size() == s2.dropout.size());
    }
}

TEST_CASE("split sizes converge to the multinomial expectation") {
    // 10 triplets, weights (0.5, 0.3, 0.2), 10000 seeded trials:
    // per-set size means within 2% of (5, 3, 2).
    SynthesisConfig cfg;
    std::vector<Property> props;
    for (int i = 0; i < 10; ++i) props.push_back(attr("a" + std::to_string(i), "v"));
    Rng rng(4242);
    double h = 0, v = 0, d = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        auto s = split_properties(props, cfg, rng);
        h += static_cast<double>(s.heredity.size());
        v += static_cast<double>(s.variation.size());
        d += static_cast<double>(s.dropout.size());
    }
    CHECK(std::abs(h / trials - 5.0) < 0.1);
    CHECK(std::abs(v / trials - 3.0) < 0.06);
    CHECK(std::abs(d / trials - 2.0) < 0.04);
}

TEST_CASE("name-groups are never split across sets") {
    SynthesisConfig cfg;
    std::vector<Property> props;
    props.push_back(RelationTriplet{"p", "eats", "x1"});
    props.push_back(RelationTriplet{"p", "eats", "x2"});
    props.push_back(RelationTriplet{"p", "eats", "x3"});
    props.push_back(attr("habitat", "terrestrial"));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        auto s = split_properties(props, cfg, rng);
        auto names_of = [](const std::vector<Property>& set) {
            std::set<std::string> names;
            for (const auto& p : set) names.insert(property_name(p));
            return names;
        };
        auto hn = names_of(s.heredity), vn = names_of(s.variation), dn = names_of(s.dropout);
        for (const auto& n : hn) {
            CHECK(vn.count(n) == 0);
            CHECK(dn.count(n) == 0);
        }
        for (const auto& n : vn) CHECK(dn.count(n) == 0);
        // all three same-name relation triplets travel together
        std::size_t eats_sets = (hn.count("eats") ? 1 : 0) + (vn.count("eats") ? 1 : 0) +
                                (dn.count("eats") ? 1 : 0);
        CHECK(eats_sets == 1);
    }
}

TEST_CASE("fixed-size split cuts the pool into slices") {
    SynthesisConfig cfg;
    cfg.fixed_size_split = true;
    std::vector<Property> props;
    for (int i = 0; i < 10; ++i) props.push_back(attr("a" + std::to_string(i), "v"));
    Rng rng(7);
    auto s = split_properties(props, cfg, rng);
    CHECK(s.heredity.size() == 5);
    CHECK(s.variation.size() == 3);
    CHECK(s.dropout.size() == 2);
}

TEST_CASE("vary_relation draws a sibling of the object") {
    KnowledgeBase kb = KnowledgeBase::ingest_file(fixture("fig1.json"));
    RelationTriplet eaten{"alcuna", "eaten by", "cougar"};
    Rng rng(5);

    SUBCASE("single sibling is chosen with probability one") {
        auto varied = vary_relation(eaten, kb, rng);
        REQUIRE(varied.has_value());
        CHECK(varied->relation == "eaten by");
        CHECK(varied->object == "jaguar");
    }

    SUBCASE("dangling or sibling-less objects signal unavailability") {
        RelationTriplet dangling{"alcuna", "eaten by", "ghost"};
        CHECK_FALSE(vary_relation(dangling, kb, rng).has_value());
        RelationTriplet lonely{"alcuna", "eats", "maned_wolf"};  // sole member of its class
        CHECK_FALSE(vary_relation(lonely, kb, rng).has_value());
    }
}

TEST_CASE("vary_relation is uniform over siblings") {
    // object with 4 siblings, 10000 seeded draws: each frequency 0.25 +- 0.02
    ordered_json doc = ordered_json::parse(R"({
        "classes": [{"id": "c"}, {"id": "targets"}],
        "entities": [
            {"id": "root", "name": "Root", "class_id": "c"},
            {"id": "t0", "name": "T0", "class_id": "targets"},
            {"id": "t1", "name": "T1", "class_id": "targets"},
            {"id": "t2", "name": "T2", "class_id": "targets"},
            {"id": "t3", "name": "T3", "class_id": "targets"},
            {"id": "t4", "name": "T4", "class_id": "targets"}
        ]
    })");
    KnowledgeBase kb = KnowledgeBase::ingest(doc);
    RelationTriplet rel{"x", "eats", "t0"};
    Rng rng(2024);
    std::map<std::string, int> freq;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto varied = vary_relation(rel, kb, rng);
        REQUIRE(varied.has_value());
        CHECK(varied->object != "t0");
        freq[varied->object]++;
    }
    CHECK(freq.size() == 4);
    for (const auto& [obj, n] : freq) {
        CHECK(std::abs(static_cast<double>(n) / draws - 0.25) < 0.02);
    }
}

TEST_CASE("numeric variation adds gaussian noise with std v/10") {
    // v = 60: 100000 draws give mean in [59.94, 60.06], std in [5.9, 6.1]
    AttributeTriplet triplet{"e", "body mass", AttributeValue::number(60.0, "kg")};
    Rng rng(31337);
    const int draws = 100000;
    double sum = 0, sq = 0;
    for (int i = 0; i < draws; ++i) {
        auto varied = vary_attribute(triplet, {}, 0.1, rng);
        REQUIRE(varied.has_value());
        CHECK(varied->value.unit == "kg");
        double v = varied->value.magnitude;
        sum += v;
        sq += v * v;
    }
    double mean = sum / draws;
    double stddev = std::sqrt(sq / draws - mean * mean);
    CHECK(mean > 59.94);
    CHECK(mean < 60.06);
    CHECK(stddev > 5.9);
    CHECK(stddev < 6.1);
}

TEST_CASE("numeric variation of zero signals unavailability") {
    AttributeTriplet zero{"e", "depth", AttributeValue::number(0.0, "m")};
    Rng rng(1);
    CHECK_FALSE(vary_attribute(zero, {}, 0.1, rng).has_value());
}

TEST_CASE("negative magnitudes scale the noise by |v|") {
    AttributeTriplet t{"e", "elevation", AttributeValue::number(-50.0, "m")};
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        auto varied = vary_attribute(t, {}, 0.1, rng);
        REQUIRE(varied.has_value());
        CHECK(varied->value.magnitude != doctest::Approx(-50.0));
        CHECK(std::abs(varied->value.magnitude + 50.0) < 50.0);  // |noise| well under 10 sigma
    }
}

TEST_CASE("categorical variation copies a differing sibling value") {
    Entity s1{"s1", "S1", "species", "c", {{"s1", "habitat", AttributeValue::category({"aquatic"})}}, {}};
    Entity s2{"s2", "S2", "species", "c", {{"s2", "color", AttributeValue::category({"red"})}}, {}};
    std::vector<const Entity*> sibs{&s1, &s2};
    AttributeTriplet habitat{"e", "habitat", AttributeValue::category({"terrestrial"})};
    Rng rng(3);

    SUBCASE("single donor value is copied") {
        auto varied = vary_attribute(habitat, sibs, 0.1, rng);
        REQUIRE(varied.has_value());
        CHECK(varied->value.values == std::vector<std::string>{"aquatic"});
    }

    SUBCASE("attribute absent from every sibling signals unavailability") {
        AttributeTriplet rare{"e", "song", AttributeValue::category({"chirp"})};
        CHECK_FALSE(vary_attribute(rare, sibs, 0.1, rng).has_value());
    }

    SUBCASE("siblings holding only the same value signal unavailability") {
        AttributeTriplet same{"e", "habitat", AttributeValue::category({"aquatic"})};
        std::vector<const Entity*> only{&s1};
        CHECK_FALSE(vary_attribute(same, only, 0.1, rng).has_value());
    }
}

TEST_CASE("categorical variation picks donors uniformly") {
    // 3 siblings with distinct values, 10000 draws: each ~1/3 +- 0.02
    Entity s1{"s1", "S1", "species", "c", {{"s1", "habitat", AttributeValue::category({"aquatic"})}}, {}};
    Entity s2{"s2", "S2", "species", "c", {{"s2", "habitat", AttributeValue::category({"arboreal"})}}, {}};
    Entity s3{"s3", "S3", "species", "c", {{"s3", "habitat", AttributeValue::category({"fossorial"})}}, {}};
    std::vector<const Entity*> sibs{&s1, &s2, &s3};
    AttributeTriplet habitat{"e", "habitat", AttributeValue::category({"terrestrial"})};
    Rng rng(88);
    std::map<std::string, int> freq;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto varied = vary_attribute(habitat, sibs, 0.1, rng);
        REQUIRE(varied.has_value());
        freq[varied->value.values[0]]++;
    }
    CHECK(freq.size() == 3);
    for (const auto& [v, n] : freq) {
        CHECK(std::abs(static_cast<double>(n) / draws - 1.0 / 3.0) < 0.02);
    }
}

TEST_CASE("sample_extension draws without replacement from the sibling pool") {
    KnowledgeBase kb = KnowledgeBase::ingest_file(fixture("fig1.json"));
    auto sibs = kb.siblings("alpaca");  // [Vicuna]
    Rng rng(11);

    SUBCASE("the running example extends first appearance from Vicuna") {
        auto ext = sample_extension(kb, sibs, 1, rng, {"family"}, "Alcuna");
        REQUIRE(ext.size() == 1);
        CHECK(property_name(ext[0].prop) == "first appearance");
        CHECK(property_subject(ext[0].prop) == "Alcuna");
        CHECK(ext[0].tag.source_entity_id == "vicuna");
        CHECK(ext[0].tag.origin == Origin::extension);
    }

    SUBCASE("count zero yields the empty set") {
        CHECK(sample_extension(kb, sibs, 0, rng, {}, "X").empty());
    }

    SUBCASE("excluded names never appear") {
        auto ext = sample_extension(kb, sibs, 5, rng, {"family", "first appearance"}, "X");
        CHECK(ext.empty());
    }
}

TEST_CASE("extension sampling covers every subset without duplicates") {
    // pool of 8 distinct triplets, count 3: every 3-subset observed over many
    // seeds, no triplet duplicated within a draw
    ordered_json doc;
    doc["classes"] = ordered_json::array({ordered_json::parse(R"({"id": "c"})")});
    doc["entities"] = ordered_json::array();
    ordered_json parent = ordered_json::parse(
        R"({"id": "p", "name": "Parent", "class_id": "c", "property": {"zzz": ["base"]}})");
    doc["entities"].push_back(parent);
    ordered_json sib = ordered_json::parse(R"({"id": "s", "name": "Sib", "class_id": "c"})");
    ordered_json prop = ordered_json::object();
    for (int i = 0; i < 8; ++i) prop["attr" + std::to_string(i)] = ordered_json::array({"v"});
    sib["property"] = prop;
    doc["entities"].push_back(sib);
    KnowledgeBase kb = KnowledgeBase::ingest(doc);
    auto sibs = kb.siblings("p");

    std::set<std::set<std::string>> seen;
    for (std::uint64_t seed = 0; seed < 4000; ++seed) {
        Rng rng(seed);
        auto ext = sample_extension(kb, sibs, 3, rng, {}, "X");
        REQUIRE(ext.size() == 3);
        std::set<std::string> names;
        for (const auto& tp : ext) names.insert(property_name(tp.prop));
        CHECK(names.size() == 3);  // no duplicates within a draw
        seen.insert(names);
    }
    CHECK(seen.size() == 56);  // C(8,3)
}

TEST_CASE("subword segmentation splits on vowel clusters") {
    CHECK(segment_subwords("alpaca") == std::vector<std::string>{"a", "lpa", "ca"});
    CHECK(segment_subwords("vicuna") == std::vector<std::string>{"vi", "cu", "na"});
    CHECK(segment_subwords("ox") == std::vector<std::string>{"ox"});
    CHECK(segment_subwords("") == std::vector<std::string>{""});
    // subwords concatenate back to the input
    for (const std::string s : {"Alpaca", "Maned Wolf", "xyzzy", "aeiou"}) {
        auto parts = segment_subwords(s);
        CHECK(join(parts, "") == s);
    }
}

TEST_CASE("synthesize_name fuses related names deterministically") {
    auto never_taken = [](const std::string&) { return false; };
    std::vector<std::string> related{"Alpaca", "Vicuna"};

    Rng r1(42), r2(42);
    std::string n1 = synthesize_name(related, default_segmenter(), r1, never_taken);
    std::string n2 = synthesize_name(related, default_segmenter(), r2, never_taken);
    CHECK(n1 == n2);  // fixed seed, identical name
    CHECK(!n1.empty());

    // fusion uses the i-th subword of the i-th selected name
    bool acu_seen = false, vilpa_seen = false;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        Rng rng(seed);
        std::string name = synthesize_name(related, default_segmenter(), rng, never_taken);
        if (name == "Acu") acu_seen = true;
        if (name == "Vilpa") vilpa_seen = true;
    }
    CHECK(acu_seen);
    CHECK(vilpa_seen);
}

TEST_CASE("name collisions fall back to a numeric suffix") {
    // single one-subword name that already exists in the KB
    std::vector<std::string> related{"Ox"};
    auto taken = [](const std::string& n) { return n == "Ox"; };
    Rng rng(1);
    std::string name = synthesize_name(related, default_segmenter(), rng, taken);
    CHECK(name == "Ox2");
}

TEST_CASE("generate_entity keeps the partition and disjointness contracts") {
    KnowledgeBase kb = testsupport::synthetic_kb(12, 6, 5);
    SynthesisConfig cfg;
    cfg.min_parent_properties = 3;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        for (const auto& cid : kb.screen_classes(cfg.min_parent_properties)) {
            Rng rng(derive_seed(seed, cid));
            auto outcome = generate_entity(kb, cid, cfg, rng);
            REQUIRE(outcome.entity.has_value());
            const ArtificialEntity& e = *outcome.entity;

            // re-derive the partition from provenance tags
            std::vector<Property> reunion;
            std::set<std::string> heredity_names, variation_names, extension_names, dropout_names,
                common_names;
            for (const auto& tp : e.properties) {
                switch (tp.tag.origin) {
                    case Origin::heredity:
                        reunion.push_back(tp.prop);
                        heredity_names.insert(property_name(tp.prop));
                        break;
                    case Origin::variation:
                        REQUIRE(tp.tag.original.has_value());
                        reunion.push_back(*tp.tag.original);
                        variation_names.insert(property_name(tp.prop));
                        break;
                    case Origin::extension:
                        extension_names.insert(property_name(tp.prop));
                        break;
                    case Origin::class_common:
                        common_names.insert(property_name(tp.prop));
                        break;
                }
            }
            for (const auto& d : e.dropped) {
                reunion.push_back(d);
                dropout_names.insert(property_name(d));
            }

            auto uniques = kb.unique_properties(kb.entity(e.parent_id));
            REQUIRE(reunion.size() == uniques.size());
            for (const auto& p : uniques) {
                bool found = std::any_of(reunion.begin(), reunion.end(),
                                         [&](const Property& q) { return property_equal(p, q); });
                CHECK(found);
            }

            // pairwise name-disjointness of heredity/variation/extension/dropout
            auto disjoint = [](const std::set<std::string>& a, const std::set<std::string>& b) {
                return std::none_of(a.begin(), a.end(),
                                    [&](const std::string& n) { return b.count(n) > 0; });
            };
            CHECK(disjoint(heredity_names, variation_names));
            CHECK(disjoint(heredity_names, extension_names));
            CHECK(disjoint(heredity_names, dropout_names));
            CHECK(disjoint(variation_names, extension_names));
            CHECK(disjoint(variation_names, dropout_names));
            CHECK(disjoint(extension_names, dropout_names));

            // class commons are always preserved
            for (const auto& c : kb.class_node(cid).common_properties()) {
                bool found = std::any_of(e.properties.begin(), e.properties.end(), [&](const auto& tp) {
                    return tp.tag.origin == Origin::class_common && property_equal(tp.prop, c);
                });
                CHECK(found);
            }

            // relation variation keeps the name and never the original object
            for (const auto& tp : e.properties) {
                if (tp.tag.origin != Origin::variation || is_attribute(tp.prop)) continue;
                const auto& now = std::get<RelationTriplet>(tp.prop);
                const auto& before = std::get<RelationTriplet>(*tp.tag.original);
                CHECK(now.relation == before.relation);
                CHECK(now.object != before.object);
            }
        }
    }
}

TEST_CASE("pure-heredity config clones the parent's unique properties") {
    KnowledgeBase kb = KnowledgeBase::ingest_file(fixture("fig1.json"));
    SynthesisConfig cfg;
    cfg.heredity_weight = 1.0;
    cfg.variation_weight = 0.0;
    cfg.dropout_weight = 0.0;
    cfg.extension_count = 0;
    Rng rng(9);
    auto outcome = generate_entity(kb, "camels", cfg, rng);
    REQUIRE(outcome.entity.has_value());
    const auto& e = *outcome.entity;
    CHECK(e.dropped.empty());
    CHECK(e.parent_id == "alpaca");
    auto uniques = kb.unique_properties(kb.entity("alpaca"));
    std::size_t heredity = 0;
    for (const auto& tp : e.properties) {
        if (tp.tag.origin == Origin::heredity) heredity++;
    }
    CHECK(heredity == uniques.size());
}

TEST_CASE("generation skips classes without an eligible parent") {
    ordered_json doc = ordered_json::parse(R"({
        "classes": [{"id": "c", "rank": "genus"}],
        "entities": [{"id": "a", "name": "A", "class_id": "c", "property": {"x": ["1"]}}]
    })");
    KnowledgeBase kb = KnowledgeBase::ingest(doc);
    SynthesisConfig cfg;
    Rng rng(0);
    auto outcome = generate_entity(kb, "c", cfg, rng);
    CHECK_FALSE(outcome.entity.has_value());
    CHECK(!outcome.skip_reason.empty());
}

TEST_CASE("a KB with two eligible classes yields two entities") {
    ordered_json doc = ordered_json::parse(R"({
        "classes": [{"id": "c1", "rank": "genus"}, {"id": "c2", "rank": "genus"}],
        "entities": [
            {"id": "a1", "name": "Kelora", "class_id": "c1",
             "property": {"x": ["1"], "y": ["2"], "z": ["3"]}},
            {"id": "a2", "name": "Morut", "class_id": "c1", "property": {"w": ["9"]}},
            {"id": "b1", "name": "Saveti", "class_id": "c2",
             "property": {"x": ["4"], "y": ["5"], "z": ["6"]}},
            {"id": "b2", "name": "Ulivo", "class_id": "c2", "property": {"w": ["8"]}}
        ]
    })");
    KnowledgeBase kb = KnowledgeBase::ingest(doc);
    SynthesisConfig cfg;
    cfg.rng_seed = 11;
    cfg.entities_per_class = 1;
    auto batch = generate_batch(kb, cfg);
    CHECK(batch.entities.size() == 2);
    CHECK(batch.skips.empty());
}

TEST_CASE("generate_batch is deterministic and round-trips through JSONL") {
    KnowledgeBase kb = testsupport::synthetic_kb(3, 4, 4);
    SynthesisConfig cfg;
    cfg.rng_seed = 77;
    cfg.entities_per_class = 2;
    auto b1 = generate_batch(kb, cfg);
    auto b2 = generate_batch(kb, cfg);
    REQUIRE(b1.entities.size() == b2.entities.size());
    CHECK(b1.entities.size() >= 2);
    for (std::size_t i = 0; i < b1.entities.size(); ++i) {
        CHECK(b1.entities[i].to_json().dump() == b2.entities[i].to_json().dump());
    }

    auto tmp = std::filesystem::temp_directory_path() / "knowbench_entities_test.jsonl";
    write_entities(tmp, b1.entities);
    auto loaded = read_entities(tmp);
    REQUIRE(loaded.size() == b1.entities.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].to_json().dump() == b1.entities[i].to_json().dump());
    }
    std::filesystem::remove(tmp);
}

TEST_CASE("batch names are unique against the KB and within a class") {
    KnowledgeBase kb = testsupport::synthetic_kb(5, 3, 6);
    SynthesisConfig cfg;
    cfg.rng_seed = 5;
    cfg.entities_per_class = 3;
    auto batch = generate_batch(kb, cfg);
    std::map<std::string, std::set<std::string>> per_class;
    for (const auto& e : batch.entities) {
        CHECK_FALSE(kb.has_entity_name(e.name));
        CHECK(per_class[e.class_id].insert(e.name).second);
    }
}
