#include "knowbench/templates.hpp"

#include <algorithm>

#include "knowbench/endpoint.hpp"

namespace knowbench {

std::string form_name(Form f) {
    switch (f) {
        case Form::multiple_choice: return "multiple_choice";
        case Form::boolean_q: return "boolean";
        case Form::fill_in_blank: return "fill_in_blank";
    }
    throw ConfigError("invalid form");
}

Form form_from_name(const std::string& s) {
    if (s == "multiple_choice") return Form::multiple_choice;
    if (s == "boolean") return Form::boolean_q;
    if (s == "fill_in_blank") return Form::fill_in_blank;
    throw ParseError("unknown question form: " + s);
}

namespace {

constexpr const char* kSlotFill = "fill_in_blank";
constexpr const char* kSlotBoolean = "boolean";
constexpr const char* kSlotStatement = "statement";

std::string slot_for_form(Form form) {
    // Multiple choice reuses fill-in-the-blank texts; the choices are
    // appended when the prompt is rendered.
    return form == Form::boolean_q ? kSlotBoolean : kSlotFill;
}

std::size_t count_occurrences(const std::string& text, std::string_view token) {
    std::size_t n = 0, pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        ++n;
        pos += token.size();
    }
    return n;
}

bool slot_needs_value(const std::string& slot) { return slot != kSlotFill; }

std::string chain_phrase(const std::string& signature) {
    auto rels = split(signature, '|');
    std::string phrase;
    for (std::size_t i = 0; i < rels.size(); ++i) {
        if (i == 0) {
            phrase += "'" + rels[i] + "'";
        } else {
            phrase += ", then '" + rels[i] + "'";
        }
    }
    return phrase;
}

}  // namespace

std::string TemplateStore::chain_signature(std::span<const std::string> relations) {
    std::string out;
    for (std::size_t i = 0; i < relations.size(); ++i) {
        if (i) out += '|';
        out += relations[i];
    }
    return out;
}

bool TemplateStore::validate_text(const std::string& text, bool needs_value_slot) {
    if (count_occurrences(text, "[T]") != 1) return false;
    std::size_t v = count_occurrences(text, "[V]");
    return needs_value_slot ? v == 1 : v == 0;
}

void TemplateStore::load_file(const std::filesystem::path& path) {
    ordered_json doc = load_json_file(path);
    if (!doc.is_object()) throw ParseError(path.string() + ": template store root must be an object");
    std::lock_guard lock(mutex_);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& sig = it.key();
        if (it.value().is_array()) {
            for (const auto& t : it.value()) entries_[sig][kSlotFill].push_back(t.get<std::string>());
        } else if (it.value().is_object()) {
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
                for (const auto& t : jt.value()) entries_[sig][jt.key()].push_back(t.get<std::string>());
            }
        } else {
            throw ParseError(path.string() + ": entry for \"" + sig + "\" must be an array or object");
        }
    }
}

void TemplateStore::save_file(const std::filesystem::path& path) const {
    std::lock_guard lock(mutex_);
    ordered_json doc = ordered_json::object();
    for (const auto& [sig, slots] : entries_) {
        ordered_json entry = ordered_json::object();
        for (const auto& [slot, texts] : slots) entry[slot] = texts;
        doc[sig] = entry;
    }
    save_json_file(path, doc);
}

void TemplateStore::put(const std::string& signature, const std::string& slot, const std::string& text) {
    cache_put(signature, slot, text);
}

void TemplateStore::cache_put(const std::string& signature, const std::string& slot,
                              const std::string& text) const {
    std::lock_guard lock(mutex_);
    auto& texts = entries_[signature][slot];
    if (std::find(texts.begin(), texts.end(), text) == texts.end()) texts.push_back(text);
}

std::size_t TemplateStore::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::vector<std::string> TemplateStore::stored(const std::string& signature, const std::string& slot) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(signature);
    if (it == entries_.end()) return {};
    auto jt = it->second.find(slot);
    if (jt == it->second.end()) return {};
    return jt->second;
}

std::string TemplateStore::fallback_text(const std::string& signature, SignatureKind kind,
                                         const std::string& slot) {
    if (slot == kSlotFill) {
        switch (kind) {
            case SignatureKind::attribute: return "What is the " + signature + " of [T]?";
            case SignatureKind::relation:
                return "Which organism is related to [T] through '" + signature + "'?";
            case SignatureKind::chain:
                return "Which organism do you reach from [T] by following " + chain_phrase(signature) + "?";
        }
    }
    if (slot == kSlotBoolean) {
        if (kind == SignatureKind::attribute) return "Is the " + signature + " of [T] [V]?";
        return "Is [T] related to [V] through '" + signature + "'?";
    }
    if (kind == SignatureKind::attribute) return "The " + signature + " of [T] is [V].";
    return "[T] is related to [V] through '" + signature + "'.";
}

std::string TemplateStore::generation_prompt(const std::string& signature, SignatureKind kind,
                                             const std::string& slot, std::size_t count) {
    std::string n = std::to_string(count);
    std::string out;
    if (kind == SignatureKind::chain) {
        out = "Consider a chain of relations between biological taxa: " + chain_phrase(signature) + ".\n";
        out += "Write " + n +
               " different question templates that ask which organism is reached at the end of the chain "
               "when starting from a taxon called [T].\n";
    } else {
        std::string noun = kind == SignatureKind::attribute ? "property" : "relation";
        out = "Consider the " + noun + " \"" + signature + "\" of a biological taxon.\n";
        if (slot == kSlotFill) {
            out += "Write " + n + " different fill-in-the-blank style question templates asking about the "
                   "value of this " + noun + ".\n";
        } else if (slot == kSlotBoolean) {
            out += "Write " + n + " different yes/no question templates asking whether this " + noun +
                   " has a given value. Use the placeholder [V] where the value should appear.\n";
        } else {
            out += "Write " + n + " different declarative sentence templates stating that this " + noun +
                   " has a given value. Use the placeholder [V] where the value should appear.\n";
        }
    }
    out += "Use the placeholder [T] where the taxon name should appear.\n";
    out += "Do not mention any real taxon name.\n";
    out += "Return one template per line with no numbering.";
    return out;
}

std::vector<std::string> TemplateStore::generate(const std::string& signature, SignatureKind kind,
                                                 const std::string& slot, std::size_t count,
                                                 ModelEndpoint& client) const {
    std::string raw;
    try {
        raw = client.send(generation_prompt(signature, kind, slot, count));
    } catch (const EndpointError&) {
        return {};
    }
    std::vector<std::string> out;
    for (auto& line : split(raw, '\n')) {
        std::string t = trim(line);
        // tolerate "1. ", "2) " or "- " prefixes
        std::size_t i = 0;
        while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
        if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) t = trim(t.substr(i + 1));
        if (t.rfind("- ", 0) == 0) t = trim(t.substr(2));
        if (t.empty()) continue;
        if (!validate_text(t, slot_needs_value(slot))) continue;
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
        if (out.size() >= count) break;
    }
    return out;
}

std::vector<QuestionTemplate> TemplateStore::acquire(const std::string& signature, SignatureKind kind,
                                                     Form form, std::size_t count,
                                                     ModelEndpoint* client) const {
    const std::string slot = slot_for_form(form);
    const bool needs_value = slot_needs_value(slot);
    std::vector<std::string> texts;
    for (const auto& t : stored(signature, slot)) {
        if (validate_text(t, needs_value)) texts.push_back(t);
        if (texts.size() >= count) break;
    }
    if (texts.empty() && client) {
        texts = generate(signature, kind, slot, count, *client);
        for (const auto& t : texts) cache_put(signature, slot, t);
    }
    if (texts.empty()) texts.push_back(fallback_text(signature, kind, slot));
    std::vector<QuestionTemplate> out;
    for (const auto& t : texts) {
        QuestionTemplate q;
        q.signature = signature;
        q.form = form;
        q.text = t;
        q.answer_role = kind == SignatureKind::attribute ? "the value of " + signature
                        : kind == SignatureKind::relation ? "the object of " + signature
                                                          : "the entity at the end of the chain";
        out.push_back(std::move(q));
    }
    return out;
}

std::string TemplateStore::acquire_statement(const std::string& signature, SignatureKind kind,
                                             ModelEndpoint* client) const {
    for (const auto& t : stored(signature, kSlotStatement)) {
        if (validate_text(t, true)) return t;
    }
    if (client) {
        auto generated = generate(signature, kind, kSlotStatement, 1, *client);
        if (!generated.empty()) {
            cache_put(signature, kSlotStatement, generated[0]);
            return generated[0];
        }
    }
    return fallback_text(signature, kind, kSlotStatement);
}

}  // namespace knowbench
