#include "knowbench/synth.hpp"

#include <algorithm>
#include <cmath>

namespace knowbench {

void SynthesisConfig::validate() const {
    if (heredity_weight < 0 || variation_weight < 0 || dropout_weight < 0)
        throw ConfigError("split weights must be non-negative");
    double sum = heredity_weight + variation_weight + dropout_weight;
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("split weights must sum to 1 (got " + format_magnitude(sum) + ")");
    if (noise_scale <= 0) throw ConfigError("noise_scale must be positive");
    if (extension_count < 0) throw ConfigError("extension_count must be non-negative");
    if (min_parent_properties < 0) throw ConfigError("min_parent_properties must be non-negative");
    if (entities_per_class < 0) throw ConfigError("entities_per_class must be non-negative");
}

ordered_json SynthesisConfig::to_json() const {
    ordered_json j;
    j["heredity_weight"] = heredity_weight;
    j["variation_weight"] = variation_weight;
    j["dropout_weight"] = dropout_weight;
    j["extension_count"] = extension_count;
    j["fixed_size_split"] = fixed_size_split;
    j["noise_scale"] = noise_scale;
    j["min_parent_properties"] = min_parent_properties;
    j["rng_seed"] = rng_seed;
    j["entities_per_class"] = entities_per_class;
    return j;
}

SynthesisConfig SynthesisConfig::from_json(const json& j) {
    SynthesisConfig c;
    c.heredity_weight = j.value("heredity_weight", c.heredity_weight);
    c.variation_weight = j.value("variation_weight", c.variation_weight);
    c.dropout_weight = j.value("dropout_weight", c.dropout_weight);
    c.extension_count = j.value("extension_count", c.extension_count);
    c.fixed_size_split = j.value("fixed_size_split", c.fixed_size_split);
    c.noise_scale = j.value("noise_scale", c.noise_scale);
    c.min_parent_properties = j.value("min_parent_properties", c.min_parent_properties);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.entities_per_class = j.value("entities_per_class", c.entities_per_class);
    c.validate();
    return c;
}

std::string origin_name(Origin o) {
    switch (o) {
        case Origin::class_common: return "class_common";
        case Origin::heredity: return "heredity";
        case Origin::variation: return "variation";
        case Origin::extension: return "extension";
    }
    throw ConfigError("invalid origin");
}

Origin origin_from_name(const std::string& s) {
    if (s == "class_common") return Origin::class_common;
    if (s == "heredity") return Origin::heredity;
    if (s == "variation") return Origin::variation;
    if (s == "extension") return Origin::extension;
    throw ParseError("unknown provenance origin: " + s);
}

std::vector<AttributeTriplet> ArtificialEntity::attributes() const {
    std::vector<AttributeTriplet> out;
    for (const auto& tp : properties) {
        if (const auto* a = std::get_if<AttributeTriplet>(&tp.prop)) out.push_back(*a);
    }
    return out;
}

std::vector<RelationTriplet> ArtificialEntity::relations() const {
    std::vector<RelationTriplet> out;
    for (const auto& tp : properties) {
        if (const auto* r = std::get_if<RelationTriplet>(&tp.prop)) out.push_back(*r);
    }
    return out;
}

std::vector<Property> ArtificialEntity::plain_properties() const {
    std::vector<Property> out;
    out.reserve(properties.size());
    for (const auto& tp : properties) out.push_back(tp.prop);
    return out;
}

namespace {

// Canonical serialization order: attributes sorted by name, then relations
// sorted by (relation, object).
std::vector<const TaggedProperty*> serialization_order(const ArtificialEntity& e) {
    std::vector<const TaggedProperty*> attrs, rels;
    for (const auto& tp : e.properties) {
        (is_attribute(tp.prop) ? attrs : rels).push_back(&tp);
    }
    std::sort(attrs.begin(), attrs.end(), [](const TaggedProperty* a, const TaggedProperty* b) {
        return std::get<AttributeTriplet>(a->prop).attribute < std::get<AttributeTriplet>(b->prop).attribute;
    });
    std::sort(rels.begin(), rels.end(), [](const TaggedProperty* a, const TaggedProperty* b) {
        const auto& x = std::get<RelationTriplet>(a->prop);
        const auto& y = std::get<RelationTriplet>(b->prop);
        return std::tie(x.relation, x.object) < std::tie(y.relation, y.object);
    });
    attrs.insert(attrs.end(), rels.begin(), rels.end());
    return attrs;
}

}  // namespace

ordered_json ArtificialEntity::to_json() const {
    ordered_json j;
    j["name"] = name;
    j["parent_id"] = parent_id;
    j["class_id"] = class_id;
    j["rank"] = rank;
    auto order = serialization_order(*this);
    ordered_json prop = ordered_json::object();
    ordered_json rels = ordered_json::array();
    ordered_json prov = ordered_json::array();
    for (const TaggedProperty* tp : order) {
        ordered_json pj;
        if (const auto* a = std::get_if<AttributeTriplet>(&tp->prop)) {
            prop[a->attribute] = a->value.to_json();
            pj["kind"] = "attribute";
            pj["name"] = a->attribute;
        } else {
            const auto& r = std::get<RelationTriplet>(tp->prop);
            ordered_json rj;
            rj["relation"] = r.relation;
            rj["object_id"] = r.object;
            rels.push_back(rj);
            pj["kind"] = "relation";
            pj["name"] = r.relation;
            pj["object_id"] = r.object;
        }
        pj["origin"] = origin_name(tp->tag.origin);
        if (tp->tag.original) {
            if (const auto* oa = std::get_if<AttributeTriplet>(&*tp->tag.original)) {
                pj["original"] = oa->value.to_json();
            } else {
                pj["original_object"] = std::get<RelationTriplet>(*tp->tag.original).object;
            }
        }
        if (!tp->tag.source_entity_id.empty()) pj["source_entity_id"] = tp->tag.source_entity_id;
        prov.push_back(pj);
    }
    j["property"] = prop;
    j["relations"] = rels;
    j["provenance"] = prov;
    ordered_json dropped = ordered_json::array();
    for (const auto& p : this->dropped) dropped.push_back(property_to_json(p));
    j["dropped"] = dropped;
    return j;
}

ArtificialEntity ArtificialEntity::from_json(const json& j) {
    ArtificialEntity e;
    e.name = j.at("name").get<std::string>();
    e.parent_id = j.at("parent_id").get<std::string>();
    e.class_id = j.at("class_id").get<std::string>();
    e.rank = j.value("rank", "");
    const std::string where = "entity " + e.name;
    if (!j.contains("provenance") || !j["provenance"].is_array())
        throw ParseError(where + ": missing provenance");
    for (const auto& pj : j["provenance"]) {
        TaggedProperty tp;
        tp.tag.origin = origin_from_name(pj.at("origin").get<std::string>());
        tp.tag.source_entity_id = pj.value("source_entity_id", "");
        std::string kind = pj.at("kind").get<std::string>();
        std::string pname = pj.at("name").get<std::string>();
        if (kind == "attribute") {
            if (!j.contains("property") || !j["property"].contains(pname))
                throw ParseError(where + ": provenance names unknown attribute " + pname);
            AttributeTriplet a;
            a.subject = e.name;
            a.attribute = pname;
            a.value = AttributeValue::from_json(j["property"][pname], where + "/" + pname);
            tp.prop = a;
            if (pj.contains("original")) {
                AttributeTriplet orig;
                orig.subject = e.parent_id;
                orig.attribute = pname;
                orig.value = AttributeValue::from_json(pj["original"], where + "/original/" + pname);
                tp.tag.original = orig;
            }
        } else if (kind == "relation") {
            RelationTriplet r;
            r.subject = e.name;
            r.relation = pname;
            r.object = pj.at("object_id").get<std::string>();
            tp.prop = r;
            if (pj.contains("original_object")) {
                RelationTriplet orig;
                orig.subject = e.parent_id;
                orig.relation = pname;
                orig.object = pj["original_object"].get<std::string>();
                tp.tag.original = orig;
            }
        } else {
            throw ParseError(where + ": bad provenance kind " + kind);
        }
        e.properties.push_back(std::move(tp));
    }
    if (j.contains("dropped")) {
        for (const auto& dj : j["dropped"]) {
            e.dropped.push_back(property_from_json(dj, where + "/dropped"));
        }
    }
    return e;
}

ordered_json ArtificialEntity::knowledge_record() const {
    ordered_json full = to_json();
    ordered_json j;
    j["name"] = full["name"];
    j["parent_id"] = full["parent_id"];
    j["class_id"] = full["class_id"];
    j["rank"] = full["rank"];
    j["property"] = full["property"];
    j["relations"] = full["relations"];
    return j;
}

namespace {

// Triplets sharing a property name move through the split as one unit,
// so a name can never land in two of the three sets.
std::vector<std::vector<Property>> group_by_name(std::span<const Property> props) {
    std::vector<std::vector<Property>> groups;
    std::vector<std::string> names;
    for (const auto& p : props) {
        const std::string& n = property_name(p);
        auto it = std::find(names.begin(), names.end(), n);
        if (it == names.end()) {
            names.push_back(n);
            groups.push_back({p});
        } else {
            groups[static_cast<std::size_t>(it - names.begin())].push_back(p);
        }
    }
    return groups;
}

}  // namespace

PropertySplit split_properties(std::span<const Property> props, const SynthesisConfig& config, Rng& rng) {
    config.validate();
    auto groups = group_by_name(props);
    PropertySplit out;
    auto emit = [&](std::size_t bucket, const std::vector<Property>& group) {
        auto& dst = bucket == 0 ? out.heredity : bucket == 1 ? out.variation : out.dropout;
        dst.insert(dst.end(), group.begin(), group.end());
    };
    if (config.fixed_size_split) {
        std::vector<std::size_t> idx(groups.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        rng.shuffle(idx);
        std::size_t n = groups.size();
        auto nh = static_cast<std::size_t>(std::llround(config.heredity_weight * static_cast<double>(n)));
        auto nv = static_cast<std::size_t>(std::llround(config.variation_weight * static_cast<double>(n)));
        nh = std::min(nh, n);
        nv = std::min(nv, n - nh);
        std::vector<std::size_t> bucket_of(n, 2);
        for (std::size_t i = 0; i < nh; ++i) bucket_of[idx[i]] = 0;
        for (std::size_t i = nh; i < nh + nv; ++i) bucket_of[idx[i]] = 1;
        for (std::size_t i = 0; i < n; ++i) emit(bucket_of[i], groups[i]);
    } else {
        const double weights[3] = {config.heredity_weight, config.variation_weight, config.dropout_weight};
        for (const auto& group : groups) emit(rng.weighted_index(weights), group);
    }
    return out;
}

std::optional<RelationTriplet> vary_relation(const RelationTriplet& triplet, const KnowledgeBase& kb,
                                             Rng& rng, std::span<const std::string> exclude_objects) {
    if (!kb.find_entity(triplet.object)) return std::nullopt;  // dangling object, no class known
    auto sibs = kb.siblings(triplet.object);
    std::vector<const Entity*> candidates;
    for (const Entity* s : sibs) {
        bool excluded = std::find(exclude_objects.begin(), exclude_objects.end(), s->id) != exclude_objects.end();
        if (!excluded) candidates.push_back(s);
    }
    if (candidates.empty()) return std::nullopt;
    RelationTriplet out = triplet;
    out.object = candidates[rng.uniform_index(candidates.size())]->id;
    return out;
}

std::optional<AttributeTriplet> vary_attribute(const AttributeTriplet& triplet,
                                               std::span<const Entity* const> parent_siblings,
                                               double noise_scale, Rng& rng) {
    if (triplet.value.kind == AttributeValue::Kind::numeric) {
        double v = triplet.value.magnitude;
        if (v == 0.0) return std::nullopt;  // std would degenerate to zero
        for (int attempt = 0; attempt < 100; ++attempt) {
            double noisy = v + rng.normal(0.0, noise_scale * std::abs(v));
            if (!std::isfinite(noisy)) continue;
            AttributeTriplet out = triplet;
            out.value = AttributeValue::number(noisy, triplet.value.unit);
            if (!value_equal(out.value, triplet.value)) return out;
        }
        return std::nullopt;
    }
    std::vector<const AttributeValue*> donors;
    for (const Entity* s : parent_siblings) {
        for (const auto& a : s->attributes) {
            if (a.attribute == triplet.attribute && !value_equal(a.value, triplet.value))
                donors.push_back(&a.value);
        }
    }
    if (donors.empty()) return std::nullopt;
    AttributeTriplet out = triplet;
    out.value = *donors[rng.uniform_index(donors.size())];
    return out;
}

std::vector<TaggedProperty> sample_extension(const KnowledgeBase& kb,
                                             std::span<const Entity* const> parent_siblings,
                                             double count_spec, Rng& rng,
                                             const std::set<std::string>& exclude,
                                             const std::string& new_subject) {
    struct PoolEntry {
        Property prop;
        std::string source;
    };
    std::vector<PoolEntry> pool;
    std::set<std::string> seen_names;
    for (const Entity* s : parent_siblings) {
        for (const auto& p : kb.unique_properties(*s)) {
            const std::string& name = property_name(p);
            if (exclude.count(name) || seen_names.count(name)) continue;
            seen_names.insert(name);
            pool.push_back({p, s->id});
        }
    }
    std::size_t count = 0;
    if (count_spec >= 1.0) {
        count = static_cast<std::size_t>(count_spec);
    } else if (count_spec > 0.0) {
        count = static_cast<std::size_t>(std::llround(count_spec * static_cast<double>(pool.size())));
    }
    count = std::min(count, pool.size());
    std::vector<TaggedProperty> out;
    if (count == 0) return out;
    for (std::size_t i : rng.sample_indices(pool.size(), count)) {
        TaggedProperty tp;
        tp.prop = with_subject(pool[i].prop, new_subject);
        tp.tag.origin = Origin::extension;
        tp.tag.source_entity_id = pool[i].source;
        out.push_back(std::move(tp));
    }
    return out;
}

std::vector<std::string> segment_subwords(const std::string& name) {
    auto is_vowel = [](char c) {
        char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return l == 'a' || l == 'e' || l == 'i' || l == 'o' || l == 'u';
    };
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < name.size()) {
        std::size_t start = i;
        while (i < name.size() && !is_vowel(name[i])) ++i;  // consonant onset
        bool has_vowel = false;
        while (i < name.size() && is_vowel(name[i])) {  // vowel run
            ++i;
            has_vowel = true;
        }
        std::string piece = name.substr(start, i - start);
        if (has_vowel || out.empty()) {
            out.push_back(std::move(piece));
        } else {
            out.back() += piece;  // trailing consonant cluster
        }
    }
    if (out.empty()) out.push_back(name);
    return out;
}

Segmenter default_segmenter() {
    return [](const std::string& s) { return segment_subwords(s); };
}

namespace {

std::string fuse_parts(const std::vector<std::string>& parts) {
    std::string joined;
    for (const auto& p : parts) joined += p;
    std::string out = to_lower(joined);
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

}  // namespace

std::string synthesize_name(std::span<const std::string> related_names, const Segmenter& segmenter,
                            Rng& rng, const std::function<bool(const std::string&)>& taken) {
    std::vector<std::string> pool;
    for (const auto& n : related_names) {
        std::string t = trim(n);
        if (!t.empty() && std::find(pool.begin(), pool.end(), t) == pool.end()) pool.push_back(std::move(t));
    }
    if (pool.empty()) throw ConfigError("synthesize_name: no related names");

    std::vector<std::vector<std::string>> subwords;
    subwords.reserve(pool.size());
    for (const auto& n : pool) {
        auto sw = segmenter(n);
        if (sw.empty()) sw.push_back(n);
        subwords.push_back(std::move(sw));
    }

    std::size_t k_max = std::min<std::size_t>(3, pool.size());
    std::size_t k_target = 1;
    if (pool.size() >= 2) k_target = 2 + (k_max > 2 ? rng.uniform_index(k_max - 1) : 0);

    std::string last_candidate;
    for (int attempt = 0; attempt < 16; ++attempt) {
        std::vector<std::size_t> available(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) available[i] = i;
        std::vector<std::string> parts;
        for (std::size_t slot = 1; slot <= k_target && !available.empty(); ++slot) {
            std::vector<std::size_t> candidates;
            for (std::size_t idx : available) {
                if (subwords[idx].size() >= slot) candidates.push_back(idx);
            }
            if (candidates.empty()) break;  // nobody has an i-th subword left
            std::size_t pick = candidates[rng.uniform_index(candidates.size())];
            available.erase(std::find(available.begin(), available.end(), pick));
            parts.push_back(subwords[pick][slot - 1]);
        }
        if (parts.empty()) parts.push_back(subwords[0][0]);
        std::string candidate = fuse_parts(parts);
        if (!candidate.empty() && !taken(candidate)) return candidate;
        last_candidate = candidate;
    }
    if (last_candidate.empty()) last_candidate = fuse_parts({subwords[0][0]});
    for (int n = 2;; ++n) {
        std::string candidate = last_candidate + std::to_string(n);
        if (!taken(candidate)) return candidate;
    }
}

GenerationOutcome generate_entity(const KnowledgeBase& kb, const std::string& class_id,
                                  const SynthesisConfig& config, Rng& rng,
                                  const std::set<std::string>* extra_taken_names) {
    config.validate();
    const ClassNode& cls = kb.class_node(class_id);

    std::vector<const Entity*> eligible;
    for (const auto& mid : cls.member_ids) {
        const Entity& m = kb.entity(mid);
        if (kb.unique_properties(m).size() >= static_cast<std::size_t>(config.min_parent_properties))
            eligible.push_back(&m);
    }
    if (eligible.empty()) {
        return {std::nullopt, "no member with >= " + std::to_string(config.min_parent_properties) +
                                  " unique properties"};
    }

    const Entity& parent = *eligible[rng.uniform_index(eligible.size())];
    auto siblings = kb.siblings(parent.id);
    auto uniques = kb.unique_properties(parent);
    auto commons = cls.common_properties();

    PropertySplit split = split_properties(uniques, config, rng);

    // Variation runs per name-group: if any triplet of a group cannot vary,
    // the whole group reverts to heredity, keeping group names in one bucket.
    std::vector<TaggedProperty> varied;
    std::vector<Property> reverted;
    for (const auto& group : group_by_name(split.variation)) {
        std::vector<TaggedProperty> group_result;
        bool ok = true;
        std::vector<std::string> used_objects;
        for (const auto& p : group) {
            if (const auto* r = std::get_if<RelationTriplet>(&p)) used_objects.push_back(r->object);
        }
        for (const auto& c : commons) {
            if (const auto* r = std::get_if<RelationTriplet>(&c)) {
                if (r->relation == property_name(group[0])) used_objects.push_back(r->object);
            }
        }
        for (const auto& p : group) {
            std::optional<Property> result;
            if (const auto* r = std::get_if<RelationTriplet>(&p)) {
                if (auto v = vary_relation(*r, kb, rng, used_objects)) {
                    used_objects.push_back(v->object);
                    result = *v;
                }
            } else {
                const auto& a = std::get<AttributeTriplet>(p);
                if (auto v = vary_attribute(a, siblings, config.noise_scale, rng)) result = *v;
            }
            if (result) {
                bool clashes = std::any_of(commons.begin(), commons.end(), [&](const Property& c) {
                    return property_equal(c, *result);
                });
                if (clashes) result.reset();
            }
            if (!result) {
                ok = false;
                break;
            }
            TaggedProperty tp;
            tp.prop = *result;
            tp.tag.origin = Origin::variation;
            tp.tag.original = p;
            group_result.push_back(std::move(tp));
        }
        if (ok) {
            varied.insert(varied.end(), group_result.begin(), group_result.end());
        } else {
            reverted.insert(reverted.end(), group.begin(), group.end());
        }
    }
    split.heredity.insert(split.heredity.end(), reverted.begin(), reverted.end());

    std::vector<std::string> related{parent.name};
    for (const Entity* s : siblings) related.push_back(s->name);
    // ids count as taken too: the name doubles as a graph node key
    auto taken = [&](const std::string& n) {
        return kb.has_entity_name(n) || kb.find_entity(n) != nullptr ||
               (extra_taken_names && extra_taken_names->count(n) > 0);
    };
    std::string name = synthesize_name(related, default_segmenter(), rng, taken);

    std::set<std::string> exclude;
    for (const auto& c : commons) exclude.insert(property_name(c));
    for (const auto& p : uniques) exclude.insert(property_name(p));
    auto extensions = sample_extension(kb, siblings, config.extension_count, rng, exclude, name);

    ArtificialEntity out;
    out.name = name;
    out.parent_id = parent.id;
    out.class_id = class_id;
    out.rank = parent.rank;
    for (const auto& c : commons) {
        TaggedProperty tp;
        tp.prop = with_subject(c, name);
        tp.tag.origin = Origin::class_common;
        out.properties.push_back(std::move(tp));
    }
    for (const auto& h : split.heredity) {
        TaggedProperty tp;
        tp.prop = with_subject(h, name);
        tp.tag.origin = Origin::heredity;
        out.properties.push_back(std::move(tp));
    }
    for (auto& v : varied) {
        v.prop = with_subject(v.prop, name);
        out.properties.push_back(std::move(v));
    }
    for (auto& x : extensions) out.properties.push_back(std::move(x));
    out.dropped = split.dropout;
    return {std::move(out), ""};
}

BatchResult generate_batch(const KnowledgeBase& kb, const SynthesisConfig& config) {
    config.validate();
    BatchResult result;
    for (const auto& class_id : kb.screen_classes(config.min_parent_properties)) {
        Rng rng(derive_seed(config.rng_seed, "class:" + class_id));
        std::set<std::string> taken;
        for (int i = 0; i < config.entities_per_class; ++i) {
            auto outcome = generate_entity(kb, class_id, config, rng, &taken);
            if (!outcome.entity) {
                result.skips.emplace_back(class_id, outcome.skip_reason);
                break;
            }
            taken.insert(outcome.entity->name);
            result.entities.push_back(std::move(*outcome.entity));
        }
    }
    return result;
}

void write_entities(const std::filesystem::path& path, std::span<const ArtificialEntity> entities) {
    std::vector<ordered_json> lines;
    lines.reserve(entities.size());
    for (const auto& e : entities) lines.push_back(e.to_json());
    write_jsonl(path, lines);
}

std::vector<ArtificialEntity> read_entities(const std::filesystem::path& path) {
    std::vector<ArtificialEntity> out;
    for (const auto& j : read_jsonl(path)) out.push_back(ArtificialEntity::from_json(j));
    return out;
}

}  // namespace knowbench
