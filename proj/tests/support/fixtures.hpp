#pragma once

#include <string>
#include <vector>

#include "knowbench/kb.hpp"
#include "knowbench/rng.hpp"
#include "knowbench/synth.hpp"

namespace knowbench::testsupport {

// Deterministic synthetic knowledge bases for property tests and pipeline
// fixtures: a few classes of word-like species with mixed numeric and
// categorical attributes plus cross-entity relations.

inline std::string synthetic_name(Rng& rng) {
    static const char* consonants = "bcdfgklmnprstvz";
    static const char* vowels = "aeiou";
    std::string name;
    std::size_t syllables = 2 + rng.uniform_index(2);
    for (std::size_t s = 0; s < syllables; ++s) {
        name += consonants[rng.uniform_index(15)];
        name += vowels[rng.uniform_index(5)];
    }
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    return name;
}

inline ordered_json synthetic_kb_doc(std::uint64_t seed, int n_classes, int members_per_class) {
    struct AttrSpec {
        const char* name;
        bool numeric;
        const char* unit;
        std::vector<const char*> pool;
    };
    static const std::vector<AttrSpec> kAttrs = {
        {"habitat", false, "", {"terrestrial", "aquatic", "arboreal", "fossorial", "alpine", "marine"}},
        {"diet", false, "", {"herbivore", "carnivore", "omnivore", "insectivore"}},
        {"leaf morphology", false, "", {"broad", "needle", "scale", "frond"}},
        {"activity cycle", false, "", {"diurnal", "nocturnal", "crepuscular"}},
        {"body mass", true, "kg", {}},
        {"life span", true, "years", {}},
        {"population size", true, "", {}},
    };
    static const std::vector<const char*> kRelations = {"prey on", "compete with", "live with",
                                                        "pollinate"};

    Rng rng(seed);
    ordered_json doc;
    doc["classes"] = ordered_json::array();
    doc["entities"] = ordered_json::array();

    std::vector<std::string> entity_ids;
    std::set<std::string> used_names;
    for (int c = 0; c < n_classes; ++c) {
        for (int m = 0; m < members_per_class; ++m)
            entity_ids.push_back("e" + std::to_string(c) + "_" + std::to_string(m));
    }

    for (int c = 0; c < n_classes; ++c) {
        ordered_json cls;
        cls["id"] = "c" + std::to_string(c);
        cls["name"] = "Class " + std::to_string(c);
        cls["rank"] = "genus";
        doc["classes"].push_back(cls);
        for (int m = 0; m < members_per_class; ++m) {
            ordered_json e;
            std::string id = "e" + std::to_string(c) + "_" + std::to_string(m);
            e["id"] = id;
            std::string name = synthetic_name(rng);
            while (used_names.count(name)) name += "a";
            used_names.insert(name);
            e["name"] = name;
            e["rank"] = "species";
            e["class_id"] = "c" + std::to_string(c);
            ordered_json prop = ordered_json::object();
            std::size_t n_attrs = 3 + rng.uniform_index(4);
            auto picks = rng.sample_indices(kAttrs.size(), n_attrs);
            for (std::size_t ai : picks) {
                const AttrSpec& spec = kAttrs[ai];
                if (spec.numeric) {
                    ordered_json v;
                    v["value"] = 1.0 + static_cast<double>(rng.uniform_index(5000)) / 10.0;
                    if (spec.unit[0] != '\0') v["unit"] = spec.unit;
                    prop[spec.name] = ordered_json::array({v});
                } else {
                    prop[spec.name] =
                        ordered_json::array({spec.pool[rng.uniform_index(spec.pool.size())]});
                }
            }
            e["property"] = prop;
            ordered_json rels = ordered_json::array();
            std::size_t n_rels = rng.uniform_index(3);
            for (std::size_t r = 0; r < n_rels; ++r) {
                std::string target = entity_ids[rng.uniform_index(entity_ids.size())];
                if (target == id) continue;
                ordered_json rj;
                rj["relation"] = kRelations[rng.uniform_index(kRelations.size())];
                rj["object_id"] = target;
                rels.push_back(rj);
            }
            e["relations"] = rels;
            doc["entities"].push_back(e);
        }
    }
    return doc;
}

inline KnowledgeBase synthetic_kb(std::uint64_t seed, int n_classes, int members_per_class) {
    return KnowledgeBase::ingest(synthetic_kb_doc(seed, n_classes, members_per_class));
}

// Artificial entity with the given out-edges, all tagged heredity; used to
// root graph/chain fixtures.
inline ArtificialEntity graph_root(const std::string& name,
                                   const std::vector<std::pair<std::string, std::string>>& edges) {
    ArtificialEntity e;
    e.name = name;
    e.parent_id = "";
    e.class_id = "";
    e.rank = "species";
    for (const auto& [relation, object] : edges) {
        TaggedProperty tp;
        tp.prop = RelationTriplet{name, relation, object};
        tp.tag.origin = Origin::heredity;
        e.properties.push_back(tp);
    }
    return e;
}

}  // namespace knowbench::testsupport
