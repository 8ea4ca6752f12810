#pragma once

#include "knowbench/endpoint.hpp"
#include "knowbench/qgen.hpp"

namespace knowbench {

enum class Shots { zero, few };
enum class Reasoning { vanilla, cot };
enum class KnowledgeFormat { structured, natural_language };
enum class ContextInjection { none, parent_entity, irrelevant_entity, chain_entities };
enum class NameVariant { original, similar, random };

std::string shots_name(Shots s);
Shots shots_from_name(const std::string& s);
std::string reasoning_name(Reasoning r);
Reasoning reasoning_from_name(const std::string& s);
std::string knowledge_format_name(KnowledgeFormat f);
KnowledgeFormat knowledge_format_from_name(const std::string& s);
std::string context_injection_name(ContextInjection c);
ContextInjection context_injection_from_name(const std::string& s);
std::string name_variant_name(NameVariant v);
NameVariant name_variant_from_name(const std::string& s);

struct PromptSpec {
    Shots shots = Shots::zero;
    int few_shot_count = 3;  // exemplars per question form, in [3, 5]
    Reasoning reasoning = Reasoning::vanilla;
    KnowledgeFormat knowledge_format = KnowledgeFormat::structured;
    ContextInjection context_injection = ContextInjection::none;
    NameVariant name_variant = NameVariant::original;

    void validate() const;
    ordered_json to_json() const;
    static PromptSpec from_json(const json& j);
};

struct Exemplar {
    std::string question;
    std::string answer;
    std::string thought;  // shown in CoT form
};

class ExemplarStore {
public:
    static ExemplarStore builtin();
    std::vector<Exemplar> for_form(Form form, int count) const;

private:
    std::map<std::string, std::vector<Exemplar>> exemplars_;  // keyed by form name
};

// {"name", "rank", "property", "relations"} record for an existing entity,
// usable as a prompt knowledge block.
ordered_json entity_record(const KnowledgeBase& kb, const std::string& entity_id);

// structured: the canonical {"name", "property", ..., "rank"} block with
// relations folded into the property map as object names. natural_language:
// one declarative sentence per property from the statement templates.
std::string render_knowledge(const ordered_json& record, KnowledgeFormat format,
                             const TemplateStore* store = nullptr, const KnowledgeBase* kb = nullptr);

class PromptBuilder {
public:
    PromptBuilder(const KnowledgeBase& kb, const TemplateStore& store, ExemplarStore exemplars,
                  std::uint64_t seed);

    // Byte-deterministic for identical (question, spec, seed).
    std::string build(const Question& question, const PromptSpec& spec) const;
    // Few-shot recall probe without any knowledge block; used by filtering.
    std::string build_recall_probe(const std::string& question_text, int few_shot_count = 3) const;

    const KnowledgeBase& kb() const { return *kb_; }

private:
    std::vector<ordered_json> context_blocks(const Question& question, const PromptSpec& spec) const;

    const KnowledgeBase* kb_;
    const TemplateStore* store_;
    ExemplarStore exemplars_;
    std::uint64_t seed_;
};

enum class Verdict { correct, wrong, refuse, multi };
std::string verdict_name(Verdict v);

struct MatchOptions {
    std::vector<std::string> refusal_phrases{"I don't know", "I am sorry"};
};

// Extracts the final-answer span (text after the last "answer:" marker, else
// the whole output), normalizes tokens (case, punctuation, numeric formats
// like "500 cm" == "500.0 cm"), and classifies the output.
Verdict match_answer(const std::string& raw_output, std::span<const std::string> gold_answers,
                     Form form, std::span<const std::string> choices = {},
                     const MatchOptions& options = {}, std::string* matched = nullptr);

struct Judgment {
    std::string question_id;
    std::string raw_output;
    Verdict verdict = Verdict::wrong;
    std::string matched_answer;
};

struct CategoryScore {
    std::size_t total = 0;
    std::size_t correct = 0;
    double percent() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total); }
};

struct EvalReport {
    std::map<std::string, CategoryScore> per_category;  // keyed KU/KD/KA
    std::size_t total = 0;
    std::size_t correct = 0;
    double average = 0.0;  // question-count-weighted percent correct
    std::map<std::string, std::size_t> verdict_counts;
    std::map<std::string, double> verdict_percentages;  // share of all judgments, sums to 100
    std::map<std::string, double> error_breakdown;      // % of incorrect outputs
    std::vector<Judgment> judgments;
    ordered_json config_echo;

    ordered_json to_json() const;
    std::string text_table(const std::string& label = "") const;
};

EvalReport score(std::span<const Judgment> judgments, const std::map<std::string, Category>& category_of);

struct EvalOptions {
    int max_concurrency = 0;  // 0: use the endpoint's limit
    int max_retries = 2;
    int backoff_ms = 25;
};

EvalReport evaluate(std::span<const Question> questions, const PromptSpec& spec, ModelEndpoint& endpoint,
                    const PromptBuilder& prompts, const EvalOptions& options = {});

// Per-model benchmark filtering: an artificial entity survives only if every
// property of its parent is recalled by the model; a KA chain survives only
// if every link between existing entities is recalled.
class QuestionFilter {
public:
    struct Probe {
        std::string id;
        std::string question;
        std::vector<std::string> golds;
    };

    QuestionFilter(const KnowledgeBase& kb, const TemplateStore& store, const PromptBuilder& prompts);

    std::vector<Probe> probes_for(std::span<const Question> questions) const;
    // id -> gold answers; feeds a mock endpoint's oracle section.
    ordered_json probe_manifest(std::span<const Question> questions) const;

    struct Outcome {
        std::vector<Question> retained;
        ordered_json manifest;
    };
    // Probe outputs stream into the checkpoint file as they arrive; rerunning
    // with the same checkpoint skips already-answered probes.
    Outcome run(std::span<const Question> questions, ModelEndpoint& endpoint,
                const std::optional<std::filesystem::path>& checkpoint = std::nullopt) const;

private:
    const KnowledgeBase* kb_;
    const TemplateStore* store_;
    const PromptBuilder* prompts_;
};

}  // namespace knowbench
