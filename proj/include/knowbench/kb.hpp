#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "knowbench/util.hpp"

namespace knowbench {

// A property value: a scalar magnitude with a unit, or a set of categorical
// labels (many attributes, e.g. geographic distribution, are multi-valued).
struct AttributeValue {
    enum class Kind { numeric, categorical };

    Kind kind = Kind::categorical;
    double magnitude = 0.0;
    std::string unit;                 // numeric only, may be empty
    std::vector<std::string> values;  // categorical only, >=1 entry, no duplicates

    static AttributeValue number(double magnitude, std::string unit = "");
    static AttributeValue category(std::vector<std::string> values);

    // One string per acceptable gold answer.
    std::vector<std::string> answer_strings() const;
    // Human-readable single string ("60.0 kg", "terrestrial, aquatic").
    std::string display() const;

    ordered_json to_json() const;  // property-map entry: array of values
    static AttributeValue from_json(const json& j, const std::string& where);
};

// Numeric magnitudes compare within 1e-9 relative tolerance after unit
// normalization (trim + case-fold); categorical values compare as sets.
bool value_equal(const AttributeValue& a, const AttributeValue& b);

struct AttributeTriplet {
    std::string subject;
    std::string attribute;
    AttributeValue value;
};

struct RelationTriplet {
    std::string subject;
    std::string relation;
    std::string object;
};

using Property = std::variant<AttributeTriplet, RelationTriplet>;

bool is_attribute(const Property& p);
const std::string& property_name(const Property& p);
const std::string& property_subject(const Property& p);
Property with_subject(const Property& p, const std::string& subject);
// Equality by (name, value/object); subjects are ignored.
bool property_equal(const Property& a, const Property& b);
ordered_json property_to_json(const Property& p);
Property property_from_json(const json& j, const std::string& where);

struct Entity {
    std::string id;
    std::string name;
    std::string rank;
    std::string class_id;
    std::vector<AttributeTriplet> attributes;
    std::vector<RelationTriplet> relations;

    std::vector<Property> properties() const;
};

struct ClassNode {
    std::string id;
    std::string name;
    std::string rank;
    std::optional<std::string> parent_id;
    std::vector<std::string> member_ids;  // sorted
    std::vector<AttributeTriplet> common_attributes;
    std::vector<RelationTriplet> common_relations;

    std::vector<Property> common_properties() const;
};

// Immutable after ingest; safe to share across threads.
class KnowledgeBase {
public:
    static KnowledgeBase ingest(const json& doc, const std::string& origin = "<memory>");
    static KnowledgeBase ingest_file(const std::filesystem::path& path);

    // Canonical form: classes/entities sorted by id, property keys sorted,
    // categorical values sorted, relations sorted by (relation, object).
    ordered_json to_json() const;

    const std::map<std::string, ClassNode>& classes() const { return classes_; }
    const std::map<std::string, Entity>& entities() const { return entities_; }

    const Entity& entity(const std::string& id) const;
    const Entity* find_entity(const std::string& id) const;
    const ClassNode& class_node(const std::string& id) const;
    const Entity* find_entity_by_name(const std::string& name) const;
    bool has_entity_name(const std::string& name) const;

    // Display name for any id a relation can point at; dangling ids resolve
    // to themselves (they carry only a name).
    std::string entity_name(const std::string& id) const;
    bool is_dangling(const std::string& id) const { return dangling_.count(id) > 0; }
    std::size_t dangling_count() const { return dangling_.size(); }
    const std::set<std::string>& dangling_ids() const { return dangling_; }

    // All other members of the entity's class, sorted by id.
    std::vector<const Entity*> siblings(const std::string& entity_id) const;

    // Maximal set of (name, value) templates present on every member.
    std::pair<std::vector<AttributeTriplet>, std::vector<RelationTriplet>>
    class_common_properties(const std::string& class_id) const;

    // The entity's triplets minus its class commons (the paper's T(e)).
    std::vector<Property> unique_properties(const Entity& e) const;

    // Classes eligible as generation sources: rank not in
    // {kingdom, phylum, domain} and at least one member with
    // >= min_parent_properties unique properties. Sorted by id.
    std::vector<std::string> screen_classes(int min_parent_properties = 3) const;

private:
    std::map<std::string, ClassNode> classes_;
    std::map<std::string, Entity> entities_;
    std::map<std::string, std::string> name_index_;
    std::set<std::string> dangling_;
};

// |intersection| / |union| of two property sets by (name, value) equality.
// Throws ValidationError when both sets are empty.
double property_similarity(std::span<const Property> a, std::span<const Property> b);

}  // namespace knowbench
