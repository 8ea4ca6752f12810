#pragma once

#include "knowbench/eval.hpp"

namespace knowbench {

enum class ExperimentVariant {
    similarity_bins,
    name_variant,
    context_parent,
    context_irrelevant,
    context_chain,
    format_nl_vs_json,
};

std::string experiment_variant_name(ExperimentVariant v);
ExperimentVariant experiment_variant_from_name(const std::string& s);  // UsageError when unknown

struct ExperimentConfig {
    ExperimentVariant variant = ExperimentVariant::similarity_bins;
    NameVariant name_mode = NameVariant::similar;
    // Bin i covers [edges[i], edges[i+1]); the last bin includes its upper edge.
    std::vector<double> bin_edges{0.0, 0.25, 0.5, 0.75, 1.0};
    PromptSpec base_spec;
    std::uint64_t seed = 0;
    EvalOptions eval;
};

struct LabeledReport {
    std::string label;
    EvalReport report;
};

// Overlap between the artificial entity's property set (from the question's
// knowledge record) and its parent's property set in the KB.
double parent_similarity(const Question& question, const KnowledgeBase& kb);

// Question indices per bin, in input order.
std::vector<std::vector<std::size_t>> bin_by_similarity(std::span<const Question> questions,
                                                        const KnowledgeBase& kb,
                                                        std::span<const double> edges);

// similar: one seeded character substitution in the parent name (edit
// distance exactly 1); random: a seeded random letter sequence of the same
// length (word shape preserved).
std::string make_variant_name(const std::string& parent_name, NameVariant mode, Rng& rng);

// Rewrites the question (text, knowledge record, evidence subjects) to use a
// new entity name.
Question rename_question_entity(const Question& question, const std::string& new_name);

std::vector<LabeledReport> run_experiment(std::span<const Question> questions, const KnowledgeBase& kb,
                                          const ExperimentConfig& config, ModelEndpoint& endpoint,
                                          const PromptBuilder& prompts);

}  // namespace knowbench
