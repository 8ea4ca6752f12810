#include "knowbench/experiments.hpp"

#include <algorithm>
#include <cctype>

namespace knowbench {

std::string experiment_variant_name(ExperimentVariant v) {
    switch (v) {
        case ExperimentVariant::similarity_bins: return "similarity_bins";
        case ExperimentVariant::name_variant: return "name_variant";
        case ExperimentVariant::context_parent: return "context_parent";
        case ExperimentVariant::context_irrelevant: return "context_irrelevant";
        case ExperimentVariant::context_chain: return "context_chain";
        case ExperimentVariant::format_nl_vs_json: return "format_nl_vs_json";
    }
    throw ConfigError("invalid experiment variant");
}

ExperimentVariant experiment_variant_from_name(const std::string& s) {
    if (s == "similarity_bins") return ExperimentVariant::similarity_bins;
    if (s == "name_variant") return ExperimentVariant::name_variant;
    if (s == "context_parent") return ExperimentVariant::context_parent;
    if (s == "context_irrelevant") return ExperimentVariant::context_irrelevant;
    if (s == "context_chain") return ExperimentVariant::context_chain;
    if (s == "format_nl_vs_json") return ExperimentVariant::format_nl_vs_json;
    throw UsageError("unknown experiment variant: " + s);
}

namespace {

std::vector<Property> knowledge_properties(const ordered_json& record) {
    std::vector<Property> props;
    std::string subject = record.value("name", "");
    if (record.contains("property")) {
        for (auto it = record["property"].begin(); it != record["property"].end(); ++it) {
            AttributeTriplet a;
            a.subject = subject;
            a.attribute = it.key();
            a.value = AttributeValue::from_json(it.value(), "knowledge/" + it.key());
            props.emplace_back(std::move(a));
        }
    }
    if (record.contains("relations")) {
        for (const auto& rj : record["relations"]) {
            RelationTriplet r;
            r.subject = subject;
            r.relation = rj.value("relation", "");
            r.object = rj.value("object_id", "");
            props.emplace_back(std::move(r));
        }
    }
    return props;
}

std::vector<Question> questions_in_category(std::span<const Question> questions, Category c) {
    std::vector<Question> out;
    for (const auto& q : questions) {
        if (q.category == c) out.push_back(q);
    }
    return out;
}

}  // namespace

double parent_similarity(const Question& question, const KnowledgeBase& kb) {
    auto own = knowledge_properties(question.knowledge);
    std::string pid = question.knowledge.value("parent_id", "");
    const Entity& parent = kb.entity(pid);
    auto theirs = parent.properties();
    return property_similarity(own, theirs);
}

std::vector<std::vector<std::size_t>> bin_by_similarity(std::span<const Question> questions,
                                                        const KnowledgeBase& kb,
                                                        std::span<const double> edges) {
    if (edges.size() < 2) throw ConfigError("similarity bins need at least two edges");
    std::vector<std::vector<std::size_t>> bins(edges.size() - 1);
    for (std::size_t i = 0; i < questions.size(); ++i) {
        double sim = parent_similarity(questions[i], kb);
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            bool last = b + 2 == edges.size();
            if (sim >= edges[b] && (sim < edges[b + 1] || (last && sim <= edges[b + 1]))) {
                bins[b].push_back(i);
                break;
            }
        }
    }
    return bins;
}

std::string make_variant_name(const std::string& parent_name, NameVariant mode, Rng& rng) {
    if (parent_name.empty()) throw ConfigError("cannot derive a variant of an empty name");
    static const char* kLetters = "abcdefghijklmnopqrstuvwxyz";
    std::string out = parent_name;
    if (mode == NameVariant::original) return out;
    if (mode == NameVariant::similar) {
        // substitute exactly one character, preserving its case
        std::vector<std::size_t> positions;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (std::isalpha(static_cast<unsigned char>(out[i]))) positions.push_back(i);
        }
        if (positions.empty()) positions.push_back(0);
        std::size_t pos = positions[rng.uniform_index(positions.size())];
        char original = out[pos];
        char replacement = original;
        while (std::tolower(static_cast<unsigned char>(replacement)) ==
               std::tolower(static_cast<unsigned char>(original))) {
            replacement = kLetters[rng.uniform_index(26)];
        }
        if (std::isupper(static_cast<unsigned char>(original)))
            replacement = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement)));
        out[pos] = replacement;
        return out;
    }
    // random: fresh letters, same length, spaces kept so the shape survives
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (std::isspace(static_cast<unsigned char>(out[i]))) continue;
        char c = kLetters[rng.uniform_index(26)];
        if (i == 0) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        out[i] = c;
    }
    return out;
}

Question rename_question_entity(const Question& question, const std::string& new_name) {
    Question out = question;
    const std::string& old_name = question.entity_name;
    replace_all(out.text, old_name, new_name);
    out.entity_name = new_name;
    if (out.knowledge.contains("name")) out.knowledge["name"] = new_name;
    for (auto& entry : out.evidence) {
        if (entry.value("subject", "") == old_name) entry["subject"] = new_name;
    }
    return out;
}

std::vector<LabeledReport> run_experiment(std::span<const Question> questions, const KnowledgeBase& kb,
                                          const ExperimentConfig& config, ModelEndpoint& endpoint,
                                          const PromptBuilder& prompts) {
    std::vector<LabeledReport> reports;
    auto eval_with = [&](std::span<const Question> qs, const PromptSpec& spec, const std::string& label) {
        if (qs.empty()) return;
        reports.push_back({label, evaluate(qs, spec, endpoint, prompts, config.eval)});
    };

    switch (config.variant) {
        case ExperimentVariant::similarity_bins: {
            auto kd = questions_in_category(questions, Category::KD);
            auto bins = bin_by_similarity(kd, kb, config.bin_edges);
            for (std::size_t b = 0; b < bins.size(); ++b) {
                std::vector<Question> subset;
                for (std::size_t i : bins[b]) subset.push_back(kd[i]);
                char label[64];
                std::snprintf(label, sizeof(label), "similarity [%.2f, %.2f%c", config.bin_edges[b],
                              config.bin_edges[b + 1], b + 1 == bins.size() ? ']' : ')');
                eval_with(subset, config.base_spec, label);
            }
            break;
        }
        case ExperimentVariant::name_variant: {
            auto kd = questions_in_category(questions, Category::KD);
            std::map<std::string, std::string> renamed;  // entity name -> variant
            std::vector<Question> rewritten;
            for (const auto& q : kd) {
                auto it = renamed.find(q.entity_name);
                if (it == renamed.end()) {
                    std::string pid = q.knowledge.value("parent_id", "");
                    std::string parent_name = kb.entity(pid).name;
                    Rng rng(derive_seed(config.seed,
                                        "name:" + name_variant_name(config.name_mode) + ":" + pid));
                    std::string variant = make_variant_name(parent_name, config.name_mode, rng);
                    it = renamed.emplace(q.entity_name, variant).first;
                }
                rewritten.push_back(rename_question_entity(q, it->second));
            }
            PromptSpec spec = config.base_spec;
            spec.name_variant = config.name_mode;
            eval_with(rewritten, spec, "name_variant " + name_variant_name(config.name_mode));
            break;
        }
        case ExperimentVariant::context_parent: {
            auto kd = questions_in_category(questions, Category::KD);
            PromptSpec spec = config.base_spec;
            spec.context_injection = ContextInjection::parent_entity;
            eval_with(kd, spec, "KD w/ parent");
            break;
        }
        case ExperimentVariant::context_irrelevant: {
            PromptSpec spec = config.base_spec;
            spec.context_injection = ContextInjection::irrelevant_entity;
            eval_with(questions_in_category(questions, Category::KD), spec, "KD w/ irrelevant");
            eval_with(questions_in_category(questions, Category::KA), spec, "KA w/ irrelevant");
            break;
        }
        case ExperimentVariant::context_chain: {
            auto ka = questions_in_category(questions, Category::KA);
            PromptSpec spec = config.base_spec;
            spec.context_injection = ContextInjection::chain_entities;
            eval_with(ka, spec, "KA w/ chain");
            break;
        }
        case ExperimentVariant::format_nl_vs_json: {
            PromptSpec spec = config.base_spec;
            spec.knowledge_format = KnowledgeFormat::structured;
            eval_with(questions, spec, "JSON");
            spec.knowledge_format = KnowledgeFormat::natural_language;
            eval_with(questions, spec, "NL");
            break;
        }
    }
    return reports;
}

}  // namespace knowbench
