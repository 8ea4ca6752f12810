#pragma once

#include <optional>

#include "knowbench/kb.hpp"
#include "knowbench/rng.hpp"
#include "knowbench/synth.hpp"
#include "knowbench/templates.hpp"

namespace knowbench {

enum class Category { KU, KD, KA };
std::string category_name(Category c);
Category category_from_name(const std::string& s);

// Simple path of relation triplets rooted at the artificial entity; the tail
// object is the multi-hop gold answer.
struct RelationChain {
    std::vector<RelationTriplet> links;

    std::vector<std::string> relation_names() const;
    const std::string& tail() const { return links.back().object; }
};

struct Question {
    std::string id;
    Category category = Category::KU;
    Form form = Form::fill_in_blank;
    std::string text;
    std::vector<std::string> choices;       // exactly 4 when multiple_choice
    std::vector<std::string> gold_answers;  // non-empty
    ordered_json evidence = ordered_json::array();
    ordered_json knowledge;                 // artificial-entity record
    std::string entity_name;

    ordered_json to_json() const;
    static Question from_json(const ordered_json& j);
};

class RelationGraph {
public:
    struct Edge {
        std::string relation;
        std::string object;
    };

    // Nodes: every KB entity (plus dangling targets) and the artificial
    // entity; edges: every KB relation triplet plus the artificial entity's
    // relations. Adjacency lists are sorted for deterministic traversal.
    static RelationGraph build(const KnowledgeBase& kb, const ArtificialEntity& entity);

    const std::vector<Edge>& edges_from(const std::string& node) const;
    std::size_t edge_count() const { return edge_count_; }
    // Entities reachable from root in at most max_hops hops, sorted; the root
    // itself is excluded.
    std::vector<std::string> reachable_within(const std::string& root, int max_hops) const;

private:
    std::map<std::string, std::vector<Edge>> adjacency_;
    std::size_t edge_count_ = 0;
};

// Breadth-first enumeration of simple paths rooted at `root` with length in
// [min_hops, max_hops]. When more than `limit` paths exist, a seeded uniform
// subsample (in enumeration order) is returned; limit 0 means no limit.
std::vector<RelationChain> sample_chains(const RelationGraph& graph, const std::string& root,
                                         int min_hops, int max_hops, std::size_t limit, Rng& rng);

// Replaces "[T]" (and "[V]" when given) and checks the placeholders existed.
std::string instantiate_template(const std::string& text, const std::string& entity_name,
                                 const std::string& value = "");

Question make_onehop_question(const Property& triplet, const QuestionTemplate& tmpl,
                              const std::string& entity_name, const KnowledgeBase& kb);

Question make_multihop_question(const RelationChain& chain, const QuestionTemplate& tmpl,
                                const std::string& entity_name, const KnowledgeBase& kb);

struct ChoiceContext {
    std::string class_id;
    std::string artificial_name;
    const RelationGraph* graph = nullptr;  // KA reachability pool
    int max_hops = 3;
};

// Fills in four shuffled choices (one gold + three distractors, sourced from
// sibling values, then KB-wide values, then KA-reachable entities). Returns
// false when fewer than three distractors exist; the question is dropped.
bool make_choices(Question& question, const KnowledgeBase& kb, Rng& rng, const ChoiceContext& ctx);

// Boolean question about an attribute triplet. Positive polarity asserts a
// true value (gold "Yes"); negative polarity substitutes a distractor value
// (gold "No") and returns nullopt when no distractor exists.
std::optional<Question> make_boolean(const AttributeTriplet& triplet, const QuestionTemplate& tmpl,
                                     Rng& rng, bool positive, const KnowledgeBase& kb,
                                     const ChoiceContext& ctx, const std::string& entity_name);

struct KdItem {
    Property triplet;                  // varied triplet, or the dropped parent triplet
    bool from_dropout = false;
    std::optional<Property> original;  // variation: pre-perturbation triplet
};

struct CategoryPools {
    std::vector<TaggedProperty> ku;
    std::vector<KdItem> kd;
    std::vector<RelationChain> ka;
};

// KD: seeded sample of variation + dropout attribute triplets. KU: properties
// with heredity / class_common / extension provenance. KA: the chains.
CategoryPools assign_categories(const ArtificialEntity& entity, std::vector<RelationChain> chains,
                                double kd_sample_rate, Rng& rng);

struct QuestionGenConfig {
    int min_hops = 2;
    int max_hops = 3;
    std::size_t max_chains = 20;
    double kd_sample_rate = 1.0;
    bool emit_fill = true;
    bool emit_multiple_choice = true;
    bool emit_boolean = true;
    std::uint64_t seed = 0;

    ordered_json to_json() const;
    static QuestionGenConfig from_json(const json& j);
};

struct BenchmarkResult {
    std::vector<Question> questions;
    std::vector<std::string> dropped;  // one log line per dropped question
};

BenchmarkResult generate_questions(const KnowledgeBase& kb, std::span<const ArtificialEntity> entities,
                                   const TemplateStore& store, const QuestionGenConfig& config,
                                   ModelEndpoint* template_client = nullptr);

void write_benchmark(const std::filesystem::path& path, std::span<const Question> questions);
std::vector<Question> read_benchmark(const std::filesystem::path& path);

}  // namespace knowbench
