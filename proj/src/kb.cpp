#include "knowbench/kb.hpp"

#include <algorithm>
#include <cmath>

namespace knowbench {

namespace {

std::string id_from_json(const json& j, const std::string& where) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (j.is_number_unsigned()) return std::to_string(j.get<unsigned long long>());
    throw ParseError(where + ": id must be a string or integer");
}

std::string normalize_unit(std::string_view unit) { return to_lower(trim(unit)); }

bool magnitude_equal(double a, double b) {
    if (a == b) return true;
    double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= 1e-9 * scale;
}

std::vector<std::string> sorted_unique(std::vector<std::string> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

}  // namespace

AttributeValue AttributeValue::number(double magnitude, std::string unit) {
    if (!std::isfinite(magnitude)) throw ValidationError("numeric attribute value must be finite");
    AttributeValue v;
    v.kind = Kind::numeric;
    v.magnitude = magnitude;
    v.unit = trim(unit);
    return v;
}

AttributeValue AttributeValue::category(std::vector<std::string> values) {
    std::vector<std::string> cleaned;
    for (auto& s : values) {
        std::string t = trim(s);
        if (t.empty()) continue;
        if (std::find(cleaned.begin(), cleaned.end(), t) == cleaned.end()) cleaned.push_back(std::move(t));
    }
    if (cleaned.empty()) throw ValidationError("categorical attribute value must have at least one entry");
    std::sort(cleaned.begin(), cleaned.end());
    AttributeValue v;
    v.kind = Kind::categorical;
    v.values = std::move(cleaned);
    return v;
}

std::vector<std::string> AttributeValue::answer_strings() const {
    if (kind == Kind::numeric) return {format_quantity(magnitude, unit)};
    return values;
}

std::string AttributeValue::display() const {
    if (kind == Kind::numeric) return format_quantity(magnitude, unit);
    return join(values, ", ");
}

ordered_json AttributeValue::to_json() const {
    ordered_json arr = ordered_json::array();
    if (kind == Kind::numeric) {
        ordered_json obj;
        obj["value"] = magnitude;
        if (!unit.empty()) obj["unit"] = unit;
        arr.push_back(obj);
    } else {
        for (const auto& v : values) arr.push_back(v);
    }
    return arr;
}

AttributeValue AttributeValue::from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw ParseError(where + ": property value must be a non-empty array");
    if (j.size() == 1 && (j[0].is_number() || j[0].is_object())) {
        const json& v = j[0];
        if (v.is_number()) return AttributeValue::number(v.get<double>());
        if (!v.contains("value") || !v["value"].is_number())
            throw ParseError(where + ": numeric property object needs a \"value\" number");
        std::string unit = v.contains("unit") ? v["unit"].get<std::string>() : "";
        return AttributeValue::number(v["value"].get<double>(), unit);
    }
    std::vector<std::string> vals;
    for (const auto& v : j) {
        if (v.is_string()) {
            vals.push_back(v.get<std::string>());
        } else if (v.is_number()) {
            vals.push_back(format_magnitude(v.get<double>()));
        } else if (v.is_object() && v.contains("value") && v["value"].is_number()) {
            std::string unit = v.contains("unit") ? v["unit"].get<std::string>() : "";
            vals.push_back(format_quantity(v["value"].get<double>(), unit));
        } else {
            throw ParseError(where + ": property values must be strings or numbers");
        }
    }
    return AttributeValue::category(std::move(vals));
}

bool value_equal(const AttributeValue& a, const AttributeValue& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == AttributeValue::Kind::numeric) {
        return normalize_unit(a.unit) == normalize_unit(b.unit) && magnitude_equal(a.magnitude, b.magnitude);
    }
    return sorted_unique(a.values) == sorted_unique(b.values);
}

bool is_attribute(const Property& p) { return std::holds_alternative<AttributeTriplet>(p); }

const std::string& property_name(const Property& p) {
    if (const auto* a = std::get_if<AttributeTriplet>(&p)) return a->attribute;
    return std::get<RelationTriplet>(p).relation;
}

const std::string& property_subject(const Property& p) {
    if (const auto* a = std::get_if<AttributeTriplet>(&p)) return a->subject;
    return std::get<RelationTriplet>(p).subject;
}

Property with_subject(const Property& p, const std::string& subject) {
    Property out = p;
    if (auto* a = std::get_if<AttributeTriplet>(&out)) {
        a->subject = subject;
    } else {
        std::get<RelationTriplet>(out).subject = subject;
    }
    return out;
}

bool property_equal(const Property& a, const Property& b) {
    if (is_attribute(a) != is_attribute(b)) return false;
    if (is_attribute(a)) {
        const auto& x = std::get<AttributeTriplet>(a);
        const auto& y = std::get<AttributeTriplet>(b);
        return x.attribute == y.attribute && value_equal(x.value, y.value);
    }
    const auto& x = std::get<RelationTriplet>(a);
    const auto& y = std::get<RelationTriplet>(b);
    return x.relation == y.relation && x.object == y.object;
}

ordered_json property_to_json(const Property& p) {
    ordered_json j;
    if (const auto* a = std::get_if<AttributeTriplet>(&p)) {
        j["kind"] = "attribute";
        j["subject"] = a->subject;
        j["attribute"] = a->attribute;
        j["value"] = a->value.to_json();
    } else {
        const auto& r = std::get<RelationTriplet>(p);
        j["kind"] = "relation";
        j["subject"] = r.subject;
        j["relation"] = r.relation;
        j["object_id"] = r.object;
    }
    return j;
}

Property property_from_json(const json& j, const std::string& where) {
    std::string kind = j.value("kind", "");
    if (kind == "attribute") {
        AttributeTriplet a;
        a.subject = j.value("subject", "");
        a.attribute = j.at("attribute").get<std::string>();
        a.value = AttributeValue::from_json(j.at("value"), where);
        return a;
    }
    if (kind == "relation") {
        RelationTriplet r;
        r.subject = j.value("subject", "");
        r.relation = j.at("relation").get<std::string>();
        r.object = j.at("object_id").get<std::string>();
        return r;
    }
    throw ParseError(where + ": property kind must be \"attribute\" or \"relation\"");
}

std::vector<Property> Entity::properties() const {
    std::vector<Property> out;
    out.reserve(attributes.size() + relations.size());
    for (const auto& a : attributes) out.emplace_back(a);
    for (const auto& r : relations) out.emplace_back(r);
    return out;
}

std::vector<Property> ClassNode::common_properties() const {
    std::vector<Property> out;
    out.reserve(common_attributes.size() + common_relations.size());
    for (const auto& a : common_attributes) out.emplace_back(a);
    for (const auto& r : common_relations) out.emplace_back(r);
    return out;
}

namespace {

void parse_property_block(const json& j, const std::string& subject, const std::string& where,
                          std::vector<AttributeTriplet>& attributes) {
    if (!j.is_object()) throw ParseError(where + ": \"property\" must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        AttributeTriplet t;
        t.subject = subject;
        t.attribute = trim(it.key());
        if (t.attribute.empty()) throw ValidationError(where + ": empty attribute name");
        t.value = AttributeValue::from_json(it.value(), where + "/" + it.key());
        attributes.push_back(std::move(t));
    }
    std::sort(attributes.begin(), attributes.end(),
              [](const auto& a, const auto& b) { return a.attribute < b.attribute; });
}

void parse_relation_block(const json& j, const std::string& subject, const std::string& where,
                          std::vector<RelationTriplet>& relations) {
    if (!j.is_array()) throw ParseError(where + ": \"relations\" must be an array");
    for (const auto& rj : j) {
        RelationTriplet r;
        r.subject = subject;
        r.relation = trim(rj.at("relation").get<std::string>());
        r.object = id_from_json(rj.at("object_id"), where);
        if (r.relation.empty()) throw ValidationError(where + ": empty relation name");
        if (r.subject == r.object)
            throw ValidationError(where + ": relation subject equals object (" + r.subject + ")");
        relations.push_back(std::move(r));
    }
    std::sort(relations.begin(), relations.end(), [](const auto& a, const auto& b) {
        return std::tie(a.relation, a.object) < std::tie(b.relation, b.object);
    });
    relations.erase(std::unique(relations.begin(), relations.end(),
                                [](const auto& a, const auto& b) {
                                    return a.relation == b.relation && a.object == b.object;
                                }),
                    relations.end());
}

ordered_json property_map_json(const std::vector<AttributeTriplet>& attributes) {
    ordered_json obj = ordered_json::object();
    for (const auto& a : attributes) obj[a.attribute] = a.value.to_json();
    return obj;
}

ordered_json relations_json(const std::vector<RelationTriplet>& relations) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : relations) {
        ordered_json e;
        e["relation"] = r.relation;
        e["object_id"] = r.object;
        arr.push_back(e);
    }
    return arr;
}

// Intersection of member property sets by (name, value).
std::pair<std::vector<AttributeTriplet>, std::vector<RelationTriplet>>
intersect_members(const std::vector<const Entity*>& members, const std::string& class_id) {
    std::pair<std::vector<AttributeTriplet>, std::vector<RelationTriplet>> out;
    if (members.empty()) return out;
    for (const auto& a : members[0]->attributes) {
        bool everywhere = true;
        for (std::size_t i = 1; i < members.size() && everywhere; ++i) {
            everywhere = std::any_of(members[i]->attributes.begin(), members[i]->attributes.end(),
                                     [&](const AttributeTriplet& o) {
                                         return o.attribute == a.attribute && value_equal(o.value, a.value);
                                     });
        }
        if (everywhere) {
            AttributeTriplet t = a;
            t.subject = class_id;
            out.first.push_back(std::move(t));
        }
    }
    for (const auto& r : members[0]->relations) {
        bool everywhere = true;
        for (std::size_t i = 1; i < members.size() && everywhere; ++i) {
            everywhere = std::any_of(members[i]->relations.begin(), members[i]->relations.end(),
                                     [&](const RelationTriplet& o) {
                                         return o.relation == r.relation && o.object == r.object;
                                     });
        }
        if (everywhere) {
            RelationTriplet t = r;
            t.subject = class_id;
            out.second.push_back(std::move(t));
        }
    }
    return out;
}

}  // namespace

KnowledgeBase KnowledgeBase::ingest(const json& doc, const std::string& origin) {
    if (!doc.is_object() && !doc.is_null())
        throw ParseError(origin + ": document root must be an object");

    KnowledgeBase kb;

    if (doc.is_object() && doc.contains("classes")) {
        if (!doc["classes"].is_array()) throw ParseError(origin + ": \"classes\" must be an array");
        for (const auto& cj : doc["classes"]) {
            ClassNode c;
            c.id = id_from_json(cj.at("id"), origin + "/classes");
            const std::string where = origin + "/classes/" + c.id;
            if (kb.classes_.count(c.id)) throw ValidationError(where + ": duplicate class id");
            c.name = cj.value("name", c.id);
            c.rank = cj.value("rank", "");
            if (cj.contains("parent_id") && !cj["parent_id"].is_null())
                c.parent_id = id_from_json(cj["parent_id"], where);
            if (cj.contains("property")) parse_property_block(cj["property"], c.id, where, c.common_attributes);
            if (cj.contains("relations")) parse_relation_block(cj["relations"], c.id, where, c.common_relations);
            kb.classes_.emplace(c.id, std::move(c));
        }
    }

    // Taxonomy must be a tree: parents resolve, no cycles.
    for (const auto& [id, c] : kb.classes_) {
        std::set<std::string> seen{id};
        const ClassNode* cur = &c;
        while (cur->parent_id) {
            auto it = kb.classes_.find(*cur->parent_id);
            if (it == kb.classes_.end())
                throw ValidationError(origin + ": class " + cur->id + " has unknown parent " + *cur->parent_id);
            if (!seen.insert(it->first).second)
                throw ValidationError(origin + ": taxonomy cycle through class " + it->first);
            cur = &it->second;
        }
    }

    if (doc.is_object() && doc.contains("entities")) {
        if (!doc["entities"].is_array()) throw ParseError(origin + ": \"entities\" must be an array");
        for (const auto& ej : doc["entities"]) {
            Entity e;
            e.id = id_from_json(ej.at("id"), origin + "/entities");
            const std::string where = origin + "/entities/" + e.id;
            if (kb.entities_.count(e.id)) throw ValidationError(where + ": duplicate entity id");
            e.name = ej.value("name", e.id);
            e.rank = ej.value("rank", "");
            e.class_id = id_from_json(ej.at("class_id"), where);
            auto cit = kb.classes_.find(e.class_id);
            if (cit == kb.classes_.end())
                throw ValidationError(where + ": unknown class_id " + e.class_id);
            if (ej.contains("property")) parse_property_block(ej["property"], e.id, where, e.attributes);
            if (ej.contains("relations")) parse_relation_block(ej["relations"], e.id, where, e.relations);
            cit->second.member_ids.push_back(e.id);
            kb.entities_.emplace(e.id, std::move(e));
        }
    }

    for (auto& [id, c] : kb.classes_) std::sort(c.member_ids.begin(), c.member_ids.end());

    // Dangling relation objects are retained but flagged; they can still act
    // as chain endpoints.
    for (const auto& [id, e] : kb.entities_) {
        for (const auto& r : e.relations) {
            if (!kb.entities_.count(r.object)) kb.dangling_.insert(r.object);
        }
    }

    // Class commons: validate declared ones against members, or derive the
    // intersection when the document does not provide them.
    for (auto& [id, c] : kb.classes_) {
        std::vector<const Entity*> members;
        for (const auto& mid : c.member_ids) members.push_back(&kb.entities_.at(mid));
        if (c.common_attributes.empty() && c.common_relations.empty()) {
            auto [attrs, rels] = intersect_members(members, id);
            c.common_attributes = std::move(attrs);
            c.common_relations = std::move(rels);
        } else if (!members.empty()) {
            for (const auto& a : c.common_attributes) {
                for (const Entity* m : members) {
                    bool present = std::any_of(m->attributes.begin(), m->attributes.end(),
                                               [&](const AttributeTriplet& o) {
                                                   return o.attribute == a.attribute && value_equal(o.value, a.value);
                                               });
                    if (!present)
                        throw ValidationError(origin + ": class " + id + " common attribute \"" + a.attribute +
                                              "\" missing on member " + m->id);
                }
            }
            for (const auto& r : c.common_relations) {
                for (const Entity* m : members) {
                    bool present = std::any_of(m->relations.begin(), m->relations.end(),
                                               [&](const RelationTriplet& o) {
                                                   return o.relation == r.relation && o.object == r.object;
                                               });
                    if (!present)
                        throw ValidationError(origin + ": class " + id + " common relation \"" + r.relation +
                                              "\" missing on member " + m->id);
                }
            }
        }
    }

    for (const auto& [id, e] : kb.entities_) {
        if (!kb.name_index_.count(e.name)) kb.name_index_.emplace(e.name, id);
    }

    return kb;
}

KnowledgeBase KnowledgeBase::ingest_file(const std::filesystem::path& path) {
    return ingest(load_json_file(path), path.string());
}

ordered_json KnowledgeBase::to_json() const {
    ordered_json doc;
    doc["classes"] = ordered_json::array();
    for (const auto& [id, c] : classes_) {
        ordered_json cj;
        cj["id"] = c.id;
        cj["name"] = c.name;
        cj["rank"] = c.rank;
        if (c.parent_id) cj["parent_id"] = *c.parent_id;
        cj["property"] = property_map_json(c.common_attributes);
        cj["relations"] = relations_json(c.common_relations);
        doc["classes"].push_back(cj);
    }
    doc["entities"] = ordered_json::array();
    for (const auto& [id, e] : entities_) {
        ordered_json ej;
        ej["id"] = e.id;
        ej["name"] = e.name;
        ej["rank"] = e.rank;
        ej["class_id"] = e.class_id;
        ej["property"] = property_map_json(e.attributes);
        ej["relations"] = relations_json(e.relations);
        doc["entities"].push_back(ej);
    }
    return doc;
}

const Entity& KnowledgeBase::entity(const std::string& id) const {
    auto it = entities_.find(id);
    if (it == entities_.end()) throw NotFoundError("unknown entity id: " + id);
    return it->second;
}

const Entity* KnowledgeBase::find_entity(const std::string& id) const {
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : &it->second;
}

const ClassNode& KnowledgeBase::class_node(const std::string& id) const {
    auto it = classes_.find(id);
    if (it == classes_.end()) throw NotFoundError("unknown class id: " + id);
    return it->second;
}

const Entity* KnowledgeBase::find_entity_by_name(const std::string& name) const {
    auto it = name_index_.find(name);
    return it == name_index_.end() ? nullptr : &entities_.at(it->second);
}

bool KnowledgeBase::has_entity_name(const std::string& name) const {
    return name_index_.count(name) > 0;
}

std::string KnowledgeBase::entity_name(const std::string& id) const {
    if (const Entity* e = find_entity(id)) return e->name;
    return id;
}

std::vector<const Entity*> KnowledgeBase::siblings(const std::string& entity_id) const {
    const Entity& e = entity(entity_id);
    const ClassNode& c = class_node(e.class_id);
    std::vector<const Entity*> out;
    for (const auto& mid : c.member_ids) {
        if (mid != entity_id) out.push_back(&entities_.at(mid));
    }
    return out;
}

std::pair<std::vector<AttributeTriplet>, std::vector<RelationTriplet>>
KnowledgeBase::class_common_properties(const std::string& class_id) const {
    const ClassNode& c = class_node(class_id);
    if (c.member_ids.empty())
        throw ValidationError("class " + class_id + " has no members");
    std::vector<const Entity*> members;
    for (const auto& mid : c.member_ids) members.push_back(&entities_.at(mid));
    return intersect_members(members, class_id);
}

std::vector<Property> KnowledgeBase::unique_properties(const Entity& e) const {
    auto commons = class_node(e.class_id).common_properties();
    std::vector<Property> out;
    for (const auto& p : e.properties()) {
        bool common = std::any_of(commons.begin(), commons.end(),
                                  [&](const Property& c) { return property_equal(c, p); });
        if (!common) out.push_back(p);
    }
    return out;
}

std::vector<std::string> KnowledgeBase::screen_classes(int min_parent_properties) const {
    static const std::set<std::string> kHighRanks = {"kingdom", "phylum", "domain"};
    std::vector<std::string> out;
    for (const auto& [id, c] : classes_) {
        if (kHighRanks.count(to_lower(c.rank))) continue;
        bool eligible = false;
        for (const auto& mid : c.member_ids) {
            if (unique_properties(entities_.at(mid)).size() >= static_cast<std::size_t>(min_parent_properties)) {
                eligible = true;
                break;
            }
        }
        if (eligible) out.push_back(id);
    }
    return out;
}

double property_similarity(std::span<const Property> a, std::span<const Property> b) {
    auto dedupe = [](std::span<const Property> props) {
        std::vector<Property> out;
        for (const auto& p : props) {
            if (!std::any_of(out.begin(), out.end(), [&](const Property& q) { return property_equal(p, q); }))
                out.push_back(p);
        }
        return out;
    };
    auto da = dedupe(a);
    auto db = dedupe(b);
    if (da.empty() && db.empty())
        throw ValidationError("property_similarity: both property sets are empty");
    std::size_t inter = 0;
    for (const auto& p : da) {
        if (std::any_of(db.begin(), db.end(), [&](const Property& q) { return property_equal(p, q); })) ++inter;
    }
    std::size_t uni = da.size() + db.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace knowbench
