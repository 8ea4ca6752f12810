#pragma once

#include <functional>
#include <optional>
#include <set>

#include "knowbench/kb.hpp"
#include "knowbench/rng.hpp"

namespace knowbench {

struct SynthesisConfig {
    // Split of the parent's unique properties into keep / perturb / remove.
    double heredity_weight = 0.5;
    double variation_weight = 0.3;
    double dropout_weight = 0.2;
    // >= 1: absolute number of extension properties; in (0, 1): fraction of
    // the sibling property pool; 0: none.
    double extension_count = 2.0;
    // Assign whole name-groups by weighted draw (default), or shuffle and cut
    // the pool into fixed-size slices.
    bool fixed_size_split = false;
    // Gaussian std for numeric variation is noise_scale * |value|.
    double noise_scale = 0.1;
    int min_parent_properties = 3;
    std::uint64_t rng_seed = 0;
    int entities_per_class = 1;

    void validate() const;
    ordered_json to_json() const;
    static SynthesisConfig from_json(const json& j);
};

enum class Origin { class_common, heredity, variation, extension };
std::string origin_name(Origin o);
Origin origin_from_name(const std::string& s);

struct ProvenanceTag {
    Origin origin = Origin::heredity;
    std::optional<Property> original;  // variation: the pre-perturbation triplet
    std::string source_entity_id;      // extension: the sibling that donated
};

struct TaggedProperty {
    Property prop;
    ProvenanceTag tag;
};

struct ArtificialEntity {
    std::string name;  // also acts as the entity's id in triplets and graphs
    std::string parent_id;
    std::string class_id;
    std::string rank;
    std::vector<TaggedProperty> properties;
    std::vector<Property> dropped;  // parent triplets removed by dropout

    std::vector<AttributeTriplet> attributes() const;
    std::vector<RelationTriplet> relations() const;
    std::vector<Property> plain_properties() const;

    ordered_json to_json() const;
    static ArtificialEntity from_json(const json& j);
    // The {"name", "parent_id", "class_id", "rank", "property", "relations"}
    // block questions carry as context knowledge.
    ordered_json knowledge_record() const;
};

struct PropertySplit {
    std::vector<Property> heredity;
    std::vector<Property> variation;
    std::vector<Property> dropout;
};

// Partitions the parent's unique properties. Triplets sharing a name travel
// together so no name ever lands in two groups.
PropertySplit split_properties(std::span<const Property> props, const SynthesisConfig& config, Rng& rng);

// Replaces the object with one of its siblings. Objects listed in
// exclude_objects are never chosen. Empty optional = variation unavailable;
// the caller reassigns the triplet to heredity.
std::optional<RelationTriplet> vary_relation(const RelationTriplet& triplet, const KnowledgeBase& kb,
                                             Rng& rng, std::span<const std::string> exclude_objects = {});

// Numeric: adds Normal(0, noise_scale*|v|) noise. Categorical: copies the
// value of the same attribute from a uniformly chosen sibling that holds a
// differing value. Empty optional = variation unavailable.
std::optional<AttributeTriplet> vary_attribute(const AttributeTriplet& triplet,
                                               std::span<const Entity* const> parent_siblings,
                                               double noise_scale, Rng& rng);

// Uniform sample without replacement from the sibling unique-property pool,
// one entry per property name, skipping names in exclude. Subjects are
// rewritten to new_subject (the artificial entity).
std::vector<TaggedProperty> sample_extension(const KnowledgeBase& kb,
                                             std::span<const Entity* const> parent_siblings,
                                             double count_spec, Rng& rng,
                                             const std::set<std::string>& exclude,
                                             const std::string& new_subject);

using Segmenter = std::function<std::vector<std::string>(const std::string&)>;

// Greedy splitter into consonant-onset + vowel-run clusters; a trailing
// consonant cluster joins the last subword ("alpaca" -> a, lpa, ca).
std::vector<std::string> segment_subwords(const std::string& name);
Segmenter default_segmenter();

// Fuses related names (parent first, then parent-siblings) by concatenating
// the i-th subword of the i-th selected name. Collisions against `taken`
// redraw a bounded number of times, then fall back to a numeric suffix.
std::string synthesize_name(std::span<const std::string> related_names, const Segmenter& segmenter,
                            Rng& rng, const std::function<bool(const std::string&)>& taken);

struct GenerationOutcome {
    std::optional<ArtificialEntity> entity;
    std::string skip_reason;
};

GenerationOutcome generate_entity(const KnowledgeBase& kb, const std::string& class_id,
                                  const SynthesisConfig& config, Rng& rng,
                                  const std::set<std::string>* extra_taken_names = nullptr);

struct BatchResult {
    std::vector<ArtificialEntity> entities;
    std::vector<std::pair<std::string, std::string>> skips;  // class id -> reason
};

// One independent generator per class, derived from (seed, class id), so the
// loop could run in parallel without changing its output.
BatchResult generate_batch(const KnowledgeBase& kb, const SynthesisConfig& config);

void write_entities(const std::filesystem::path& path, std::span<const ArtificialEntity> entities);
std::vector<ArtificialEntity> read_entities(const std::filesystem::path& path);

}  // namespace knowbench
