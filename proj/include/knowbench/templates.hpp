#pragma once

#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "knowbench/util.hpp"

namespace knowbench {

class ModelEndpoint;

enum class Form { multiple_choice, boolean_q, fill_in_blank };
std::string form_name(Form f);
Form form_from_name(const std::string& s);

enum class SignatureKind { attribute, relation, chain };

struct QuestionTemplate {
    std::string signature;
    Form form = Form::fill_in_blank;
    std::string text;         // exactly one "[T]"; value-bearing forms also one "[V]"
    std::string answer_role;
};

// Question/statement templates keyed by property signature. A signature is an
// attribute name, a relation name, or a "|"-joined relation-name tuple for
// multi-hop chains. Multiple-choice questions reuse the fill-in-the-blank
// texts with choices appended, so the store keeps three slots per signature:
// fill_in_blank, boolean, statement.
//
// Lookup order in acquire(): stored texts, then an optional generation
// client (validated and cached), then a generic built-in pattern.
class TemplateStore {
public:
    TemplateStore() = default;
    TemplateStore(TemplateStore&& other) noexcept : entries_(std::move(other.entries_)) {}
    TemplateStore& operator=(TemplateStore&&) = delete;

    static std::string chain_signature(std::span<const std::string> relations);
    // One "[T]" exactly; needs_value_slot additionally requires one "[V]".
    static bool validate_text(const std::string& text, bool needs_value_slot);

    void load_file(const std::filesystem::path& path);
    void save_file(const std::filesystem::path& path) const;
    void put(const std::string& signature, const std::string& slot, const std::string& text);
    std::size_t size() const;

    std::vector<QuestionTemplate> acquire(const std::string& signature, SignatureKind kind, Form form,
                                          std::size_t count = 5, ModelEndpoint* client = nullptr) const;
    // Declarative sentence used for natural-language knowledge rendering.
    std::string acquire_statement(const std::string& signature, SignatureKind kind,
                                  ModelEndpoint* client = nullptr) const;

    static std::string fallback_text(const std::string& signature, SignatureKind kind,
                                     const std::string& slot);
    static std::string generation_prompt(const std::string& signature, SignatureKind kind,
                                         const std::string& slot, std::size_t count);

private:
    std::vector<std::string> stored(const std::string& signature, const std::string& slot) const;
    std::vector<std::string> generate(const std::string& signature, SignatureKind kind,
                                      const std::string& slot, std::size_t count,
                                      ModelEndpoint& client) const;

    void cache_put(const std::string& signature, const std::string& slot,
                   const std::string& text) const;

    mutable std::mutex mutex_;
    // signature -> slot -> texts; mutable so acquisition can cache generated
    // templates behind the const read interface
    mutable std::map<std::string, std::map<std::string, std::vector<std::string>>> entries_;
};

}  // namespace knowbench
