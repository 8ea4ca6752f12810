#include "knowbench/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <thread>

namespace knowbench {

std::string shots_name(Shots s) { return s == Shots::zero ? "zero" : "few"; }
Shots shots_from_name(const std::string& s) {
    if (s == "zero") return Shots::zero;
    if (s == "few") return Shots::few;
    throw UsageError("unknown shots setting: " + s);
}
std::string reasoning_name(Reasoning r) { return r == Reasoning::vanilla ? "vanilla" : "cot"; }
Reasoning reasoning_from_name(const std::string& s) {
    if (s == "vanilla") return Reasoning::vanilla;
    if (s == "cot") return Reasoning::cot;
    throw UsageError("unknown reasoning setting: " + s);
}
std::string knowledge_format_name(KnowledgeFormat f) {
    return f == KnowledgeFormat::structured ? "structured" : "natural_language";
}
KnowledgeFormat knowledge_format_from_name(const std::string& s) {
    if (s == "structured" || s == "json") return KnowledgeFormat::structured;
    if (s == "natural_language" || s == "nl") return KnowledgeFormat::natural_language;
    throw UsageError("unknown knowledge format: " + s);
}
std::string context_injection_name(ContextInjection c) {
    switch (c) {
        case ContextInjection::none: return "none";
        case ContextInjection::parent_entity: return "parent_entity";
        case ContextInjection::irrelevant_entity: return "irrelevant_entity";
        case ContextInjection::chain_entities: return "chain_entities";
    }
    throw ConfigError("invalid context injection");
}
ContextInjection context_injection_from_name(const std::string& s) {
    if (s == "none") return ContextInjection::none;
    if (s == "parent_entity") return ContextInjection::parent_entity;
    if (s == "irrelevant_entity") return ContextInjection::irrelevant_entity;
    if (s == "chain_entities") return ContextInjection::chain_entities;
    throw UsageError("unknown context injection: " + s);
}
std::string name_variant_name(NameVariant v) {
    switch (v) {
        case NameVariant::original: return "original";
        case NameVariant::similar: return "similar";
        case NameVariant::random: return "random";
    }
    throw ConfigError("invalid name variant");
}
NameVariant name_variant_from_name(const std::string& s) {
    if (s == "original") return NameVariant::original;
    if (s == "similar") return NameVariant::similar;
    if (s == "random") return NameVariant::random;
    throw UsageError("unknown name variant: " + s);
}

void PromptSpec::validate() const {
    if (shots == Shots::few && (few_shot_count < 3 || few_shot_count > 5))
        throw ConfigError("few_shot_count must be in [3, 5]");
}

ordered_json PromptSpec::to_json() const {
    ordered_json j;
    j["shots"] = shots_name(shots);
    j["few_shot_count"] = few_shot_count;
    j["reasoning"] = reasoning_name(reasoning);
    j["knowledge_format"] = knowledge_format_name(knowledge_format);
    j["context_injection"] = context_injection_name(context_injection);
    j["name_variant"] = name_variant_name(name_variant);
    return j;
}

PromptSpec PromptSpec::from_json(const json& j) {
    PromptSpec s;
    if (j.contains("shots")) s.shots = shots_from_name(j["shots"].get<std::string>());
    s.few_shot_count = j.value("few_shot_count", s.few_shot_count);
    if (j.contains("reasoning")) s.reasoning = reasoning_from_name(j["reasoning"].get<std::string>());
    if (j.contains("knowledge_format"))
        s.knowledge_format = knowledge_format_from_name(j["knowledge_format"].get<std::string>());
    if (j.contains("context_injection"))
        s.context_injection = context_injection_from_name(j["context_injection"].get<std::string>());
    if (j.contains("name_variant"))
        s.name_variant = name_variant_from_name(j["name_variant"].get<std::string>());
    s.validate();
    return s;
}

ExemplarStore ExemplarStore::builtin() {
    ExemplarStore store;
    store.exemplars_[form_name(Form::fill_in_blank)] = {
        {"What is the habitat of the Snow Leopard?", "alpine",
         "the Snow Leopard lives high in the mountains of Central Asia, so its habitat is alpine"},
        {"What is the diet of the Giant Panda?", "bamboo",
         "Giant Pandas feed almost exclusively on bamboo shoots and leaves"},
        {"What is the average body mass of the Blue Whale?", "140000.0 kg",
         "adult Blue Whales weigh roughly 140 tonnes, which is 140000 kilograms"},
        {"What is the conservation status of the Dodo?", "extinct",
         "the Dodo was driven to extinction in the 17th century"},
        {"What is the leaf sheddability of the Coast Redwood?", "evergreen",
         "Coast Redwoods keep their needles year round, so they are evergreen"},
    };
    store.exemplars_[form_name(Form::boolean_q)] = {
        {"Is the Emperor Penguin a type of bird?", "Yes",
         "Emperor Penguins are flightless seabirds, and penguins are birds"},
        {"Is the habitat of the Fennec Fox aquatic?", "No",
         "Fennec Foxes live in the Sahara desert, which is terrestrial rather than aquatic"},
        {"Does the Koala produce venom?", "No",
         "Koalas are herbivorous marsupials without venom glands"},
        {"Is the cellularity of the Common Oak multicellular?", "Yes",
         "oaks are large plants composed of many cells"},
        {"Is the Atlantic Salmon a type of mammal?", "No",
         "the Atlantic Salmon is a fish, not a mammal"},
    };
    store.exemplars_[form_name(Form::multiple_choice)] = {
        {"What is the conservation status of the Mountain Gorilla?\n"
         "Choices: least concern; endangered; extinct; domesticated",
         "endangered", "Mountain Gorilla populations are small and threatened, so they are endangered"},
        {"What do African Elephants primarily eat?\nChoices: grasses; fish; insects; carrion",
         "grasses", "African Elephants are herbivores that graze mostly on grasses"},
        {"What organism preys on the Arctic Hare?\n"
         "Choices: Arctic Fox; Atlantic Cod; Honey Bee; Green Sea Turtle",
         "Arctic Fox", "Arctic Foxes commonly hunt Arctic Hares across the tundra"},
        {"What is the habitat of the Common Octopus?\nChoices: marine; desert; alpine; freshwater",
         "marine", "the Common Octopus lives in the ocean, so its habitat is marine"},
        {"What is the plant growth form of the Giant Sequoia?\n"
         "Choices: tree; vine; herb; shrub",
         "tree", "Giant Sequoias are massive woody trees"},
    };
    return store;
}

std::vector<Exemplar> ExemplarStore::for_form(Form form, int count) const {
    auto it = exemplars_.find(form_name(form));
    if (it == exemplars_.end() || it->second.size() < static_cast<std::size_t>(count))
        throw ConfigError("exemplar store lacks " + std::to_string(count) + " exemplars for form " +
                          form_name(form));
    return {it->second.begin(), it->second.begin() + count};
}

ordered_json entity_record(const KnowledgeBase& kb, const std::string& entity_id) {
    ordered_json record;
    if (const Entity* e = kb.find_entity(entity_id)) {
        record["name"] = e->name;
        record["rank"] = e->rank;
        ordered_json prop = ordered_json::object();
        for (const auto& a : e->attributes) prop[a.attribute] = a.value.to_json();
        record["property"] = prop;
        ordered_json rels = ordered_json::array();
        for (const auto& r : e->relations) {
            ordered_json rj;
            rj["relation"] = r.relation;
            rj["object_id"] = r.object;
            rels.push_back(rj);
        }
        record["relations"] = rels;
    } else {
        record["name"] = entity_id;  // dangling: a bare name is all we know
        record["rank"] = "";
        record["property"] = ordered_json::object();
        record["relations"] = ordered_json::array();
    }
    return record;
}

namespace {

// Property map with relations folded in as object-name lists, keys sorted.
std::map<std::string, std::vector<std::string>> merged_property_map(const ordered_json& record,
                                                                    const KnowledgeBase* kb) {
    std::map<std::string, std::vector<std::string>> props;
    if (record.contains("property")) {
        for (auto it = record["property"].begin(); it != record["property"].end(); ++it) {
            auto value = AttributeValue::from_json(it.value(), "knowledge/" + it.key());
            props[it.key()] = value.answer_strings();
        }
    }
    if (record.contains("relations")) {
        for (const auto& rj : record["relations"]) {
            std::string rel = rj.value("relation", "");
            std::string obj = rj.value("object_id", "");
            std::string name = kb ? kb->entity_name(obj) : obj;
            auto& list = props[rel];
            if (std::find(list.begin(), list.end(), name) == list.end()) list.push_back(name);
        }
    }
    for (auto& [k, v] : props) std::sort(v.begin(), v.end());
    return props;
}

}  // namespace

std::string render_knowledge(const ordered_json& record, KnowledgeFormat format,
                             const TemplateStore* store, const KnowledgeBase* kb) {
    auto props = merged_property_map(record, kb);
    std::string name = record.value("name", "");
    std::string rank = record.value("rank", "");
    if (format == KnowledgeFormat::structured) {
        ordered_json block;
        block["name"] = name;
        ordered_json prop = ordered_json::object();
        for (const auto& [k, v] : props) prop[k] = v;
        block["property"] = prop;
        block["rank"] = rank;
        return block.dump(1, '\t');
    }
    std::vector<std::string> lines;
    if (!rank.empty()) lines.push_back(name + " is a " + rank + ".");
    std::set<std::string> relation_names;
    if (record.contains("relations")) {
        for (const auto& rj : record["relations"]) relation_names.insert(rj.value("relation", ""));
    }
    for (const auto& [key, values] : props) {
        SignatureKind kind = relation_names.count(key) ? SignatureKind::relation : SignatureKind::attribute;
        std::string tmpl = store ? store->acquire_statement(key, kind)
                                 : TemplateStore::fallback_text(key, kind, "statement");
        lines.push_back(instantiate_template(tmpl, name, join(values, ", ")));
    }
    return join(lines, "\n");
}

PromptBuilder::PromptBuilder(const KnowledgeBase& kb, const TemplateStore& store, ExemplarStore exemplars,
                             std::uint64_t seed)
    : kb_(&kb), store_(&store), exemplars_(std::move(exemplars)), seed_(seed) {}

std::vector<ordered_json> PromptBuilder::context_blocks(const Question& question,
                                                        const PromptSpec& spec) const {
    std::vector<ordered_json> blocks;
    switch (spec.context_injection) {
        case ContextInjection::none:
            break;
        case ContextInjection::parent_entity: {
            std::string pid = question.knowledge.value("parent_id", "");
            if (!pid.empty()) blocks.push_back(entity_record(*kb_, pid));
            break;
        }
        case ContextInjection::chain_entities: {
            std::set<std::string> seen;
            for (const auto& entry : question.evidence) {
                if (entry.value("kind", "") != "relation") continue;
                std::string obj = entry.value("object_id", "");
                if (obj.empty() || !seen.insert(obj).second) continue;
                blocks.push_back(entity_record(*kb_, obj));
            }
            break;
        }
        case ContextInjection::irrelevant_entity: {
            std::size_t want = 1;
            if (question.category == Category::KA) {
                std::set<std::string> objs;
                for (const auto& entry : question.evidence) {
                    if (entry.value("kind", "") == "relation") objs.insert(entry.value("object_id", ""));
                }
                want = std::max<std::size_t>(1, objs.size());
            }
            std::string own_class = question.knowledge.value("class_id", "");
            std::vector<std::string> pool;
            for (const auto& [id, e] : kb_->entities()) {
                if (e.class_id != own_class) pool.push_back(id);
            }
            Rng rng(derive_seed(seed_, "irrelevant:" + question.id));
            for (std::size_t i : rng.sample_indices(pool.size(), std::min(want, pool.size())))
                blocks.push_back(entity_record(*kb_, pool[i]));
            break;
        }
    }
    blocks.push_back(question.knowledge);
    return blocks;
}

namespace {

std::string question_line(const Question& q) {
    switch (q.form) {
        case Form::fill_in_blank:
            return "Answer the following question a few words: " + q.text;
        case Form::boolean_q:
            return "Answer the following question with Yes or No: " + q.text;
        case Form::multiple_choice:
            return "Answer the following question by choosing exactly one of the choices: " + q.text +
                   "\nChoices: " + join(q.choices, "; ");
    }
    throw ConfigError("invalid question form");
}

}  // namespace

std::string PromptBuilder::build(const Question& question, const PromptSpec& spec) const {
    spec.validate();
    std::string out;
    out += "You are a powerful question-answering system with knowledge in the field of biology.\n";
    out += "Users will provide some biological information along with a question.\n";
    out += "Your task is to combine the information provided by the user with your biological knowledge "
           "to answer the question.\n";
    out += "If you are unable to answer the question, simply respond with \"I don't know.\"\n";
    out += "Here is the basic information about a taxon you can refer:\n";
    for (const auto& block : context_blocks(question, spec)) {
        out += "###\n";
        out += render_knowledge(block, spec.knowledge_format, store_, kb_);
        out += "\n###\n";
    }
    if (spec.shots == Shots::few) {
        out += "Here are some examples:\n";
        for (const auto& ex : exemplars_.for_form(question.form, spec.few_shot_count)) {
            out += "Question: " + ex.question + "\n";
            if (spec.reasoning == Reasoning::cot) {
                out += "Answer: Thought process: " + ex.thought + ", Final answer: [" + ex.answer + "].\n";
            } else {
                out += "Answer: " + ex.answer + "\n";
            }
        }
    }
    out += question_line(question);
    if (spec.reasoning == Reasoning::cot) {
        out += "\nDesired format: Thought process: <Thought process>, Final answer: [Final answer].";
        if (spec.shots == Shots::zero) out += "\nLet's think step by step.";
    }
    return out;
}

std::string PromptBuilder::build_recall_probe(const std::string& question_text, int few_shot_count) const {
    std::string out;
    out += "You are a powerful question-answering system with knowledge in the field of biology.\n";
    out += "Your task is to answer the question using your biological knowledge.\n";
    out += "If you are unable to answer the question, simply respond with \"I don't know.\"\n";
    out += "Here are some examples:\n";
    for (const auto& ex : exemplars_.for_form(Form::fill_in_blank, few_shot_count)) {
        out += "Question: " + ex.question + "\n";
        out += "Answer: " + ex.answer + "\n";
    }
    out += "Answer the following question a few words: " + question_text;
    return out;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::correct: return "correct";
        case Verdict::wrong: return "wrong";
        case Verdict::refuse: return "refuse";
        case Verdict::multi: return "multi";
    }
    throw ConfigError("invalid verdict");
}

namespace {

// Lowercased tokens; apostrophes dropped, digit/alpha boundaries split, other
// punctuation acts as a separator. Numeric tokens are canonicalized so
// "500.0" and "500" compare equal.
std::vector<std::string> answer_tokens(const std::string& text) {
    auto canonical = [](std::string token) {
        double value = 0;
        const char* begin = token.data();
        const char* end = begin + token.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec == std::errc() && ptr == end) {
            char buf[64];
            auto [out, ec2] = std::to_chars(buf, buf + sizeof(buf), value);
            if (ec2 == std::errc()) return std::string(buf, out);
        }
        return token;
    };
    std::vector<std::string> tokens;
    std::string cur;
    int cur_kind = 0;  // 0 none, 1 alpha, 2 numeric
    auto flush = [&] {
        if (!cur.empty()) tokens.push_back(canonical(cur));
        cur.clear();
        cur_kind = 0;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c == '\'') continue;
        int kind = 0;
        if (std::isalpha(c)) kind = 1;
        if (std::isdigit(c)) kind = 2;
        if (c == '.' && cur_kind == 2 && i + 1 < text.size() &&
            std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            kind = 2;
        }
        if (kind == 0) {
            flush();
            continue;
        }
        if (cur_kind != 0 && kind != cur_kind) flush();
        cur.push_back(static_cast<char>(std::tolower(c)));
        cur_kind = kind;
    }
    flush();
    return tokens;
}

bool contains_sequence(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool hit = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (haystack[i + j] != needle[j]) {
                hit = false;
                break;
            }
        }
        if (hit) return true;
    }
    return false;
}

std::string extract_answer_span(const std::string& raw) {
    std::string lower = to_lower(raw);
    static const std::string kMarker = "answer:";
    auto pos = lower.rfind(kMarker);
    if (pos == std::string::npos) return raw;
    auto start = pos + kMarker.size();
    auto end = raw.find('\n', start);
    return raw.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

}  // namespace

Verdict match_answer(const std::string& raw_output, std::span<const std::string> gold_answers,
                     Form form, std::span<const std::string> choices, const MatchOptions& options,
                     std::string* matched) {
    auto span_tokens = answer_tokens(extract_answer_span(raw_output));
    auto full_tokens = answer_tokens(raw_output);
    auto is_refusal = [&] {
        for (const auto& phrase : options.refusal_phrases) {
            if (contains_sequence(full_tokens, answer_tokens(phrase))) return true;
        }
        return false;
    };
    auto gold_hit = [&](const std::vector<std::string>& candidate_tokens) -> const std::string* {
        for (const auto& g : gold_answers) {
            if (contains_sequence(candidate_tokens, answer_tokens(g)) ||
                answer_tokens(g) == candidate_tokens)
                return &g;
        }
        return nullptr;
    };

    if (form == Form::multiple_choice) {
        std::vector<const std::string*> named;
        for (const auto& c : choices) {
            if (contains_sequence(span_tokens, answer_tokens(c))) named.push_back(&c);
        }
        if (named.size() >= 2) return Verdict::multi;
        if (named.size() == 1) {
            for (const auto& g : gold_answers) {
                if (answer_tokens(g) == answer_tokens(*named.front())) {
                    if (matched) *matched = g;
                    return Verdict::correct;
                }
            }
            return is_refusal() ? Verdict::refuse : Verdict::wrong;
        }
        if (const std::string* g = gold_hit(span_tokens)) {
            if (matched) *matched = *g;
            return Verdict::correct;
        }
        return is_refusal() ? Verdict::refuse : Verdict::wrong;
    }

    if (const std::string* g = gold_hit(span_tokens)) {
        if (matched) *matched = *g;
        return Verdict::correct;
    }
    if (is_refusal()) return Verdict::refuse;
    return Verdict::wrong;
}

ordered_json EvalReport::to_json() const {
    ordered_json j;
    ordered_json cats = ordered_json::object();
    for (const char* name : {"KU", "KD", "KA"}) {
        auto it = per_category.find(name);
        if (it == per_category.end()) continue;
        ordered_json c;
        c["total"] = it->second.total;
        c["correct"] = it->second.correct;
        c["percent"] = it->second.percent();
        cats[name] = c;
    }
    j["per_category"] = cats;
    j["total"] = total;
    j["correct"] = correct;
    j["average"] = average;
    ordered_json verdicts = ordered_json::object();
    for (const auto& [k, v] : verdict_counts) verdicts[k] = v;
    j["verdict_counts"] = verdicts;
    ordered_json shares = ordered_json::object();
    for (const auto& [k, v] : verdict_percentages) shares[k] = v;
    j["verdict_percentages"] = shares;
    ordered_json errors = ordered_json::object();
    for (const auto& [k, v] : error_breakdown) errors[k] = v;
    j["error_breakdown"] = errors;
    j["config"] = config_echo;
    ordered_json js = ordered_json::array();
    for (const auto& jd : judgments) {
        ordered_json e;
        e["id"] = jd.question_id;
        e["verdict"] = verdict_name(jd.verdict);
        e["output"] = jd.raw_output;
        if (!jd.matched_answer.empty()) e["matched"] = jd.matched_answer;
        js.push_back(e);
    }
    j["judgments"] = js;
    return j;
}

std::string EvalReport::text_table(const std::string& label) const {
    char buf[64];
    std::string out;
    out += "        " + (label.empty() ? std::string("score") : label) + "\n";
    for (const char* name : {"KU", "KD", "KA"}) {
        auto it = per_category.find(name);
        out += name;
        if (it == per_category.end() || it->second.total == 0) {
            out += "      n/a\n";
        } else {
            std::snprintf(buf, sizeof(buf), "%9.2f\n", it->second.percent());
            out += buf;
        }
    }
    std::snprintf(buf, sizeof(buf), "Avg.%7.2f\n", average);
    out += buf;
    return out;
}

EvalReport score(std::span<const Judgment> judgments, const std::map<std::string, Category>& category_of) {
    if (judgments.empty()) throw ValidationError("cannot score an empty judgment set");
    EvalReport report;
    for (const auto& j : judgments) {
        auto it = category_of.find(j.question_id);
        if (it == category_of.end())
            throw ValidationError("judgment references unknown question id " + j.question_id);
        auto& cat = report.per_category[category_name(it->second)];
        cat.total += 1;
        report.total += 1;
        if (j.verdict == Verdict::correct) {
            cat.correct += 1;
            report.correct += 1;
        }
        report.verdict_counts[verdict_name(j.verdict)] += 1;
        report.judgments.push_back(j);
    }
    report.average = 100.0 * static_cast<double>(report.correct) / static_cast<double>(report.total);
    std::size_t incorrect = report.total - report.correct;
    for (const char* v : {"correct", "wrong", "refuse", "multi"}) {
        std::size_t n = report.verdict_counts.count(v) ? report.verdict_counts.at(v) : 0;
        report.verdict_percentages[v] =
            100.0 * static_cast<double>(n) / static_cast<double>(report.total);
    }
    for (const char* v : {"wrong", "refuse", "multi"}) {
        std::size_t n = report.verdict_counts.count(v) ? report.verdict_counts.at(v) : 0;
        report.error_breakdown[v] =
            incorrect == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(incorrect);
    }
    return report;
}

namespace {

std::string send_with_retry(ModelEndpoint& endpoint, const std::string& id, const std::string& prompt,
                            const EvalOptions& options) {
    for (int attempt = 0;; ++attempt) {
        try {
            return endpoint.send_for(id, prompt);
        } catch (const EndpointError&) {
            if (attempt >= options.max_retries) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(options.backoff_ms << attempt));
        }
    }
}

}  // namespace

EvalReport evaluate(std::span<const Question> questions, const PromptSpec& spec, ModelEndpoint& endpoint,
                    const PromptBuilder& prompts, const EvalOptions& options) {
    spec.validate();
    if (questions.empty()) throw ValidationError("cannot evaluate an empty benchmark");

    int concurrency = options.max_concurrency > 0 ? options.max_concurrency : endpoint.max_concurrency();
    concurrency = std::max(1, std::min<int>(concurrency, static_cast<int>(questions.size())));

    std::vector<Judgment> judgments(questions.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= questions.size()) return;
            {
                std::lock_guard lock(error_mutex);
                if (error) return;
            }
            const Question& q = questions[i];
            try {
                std::string prompt = prompts.build(q, spec);
                Judgment j;
                j.question_id = q.id;
                j.raw_output = send_with_retry(endpoint, q.id, prompt, options);
                j.verdict = match_answer(j.raw_output, q.gold_answers, q.form, q.choices, {},
                                         &j.matched_answer);
                judgments[i] = std::move(j);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    if (concurrency == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < concurrency; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (error) std::rethrow_exception(error);

    std::map<std::string, Category> category_of;
    for (const auto& q : questions) category_of[q.id] = q.category;
    EvalReport report = score(judgments, category_of);
    report.config_echo["prompt_spec"] = spec.to_json();
    report.config_echo["endpoint"] = endpoint.label();
    report.config_echo["questions"] = questions.size();
    return report;
}

QuestionFilter::QuestionFilter(const KnowledgeBase& kb, const TemplateStore& store,
                               const PromptBuilder& prompts)
    : kb_(&kb), store_(&store), prompts_(&prompts) {}

namespace {

std::string link_key(const std::string& subject, const std::string& relation, const std::string& object) {
    return subject + "|" + relation + "|" + object;
}

}  // namespace

std::vector<QuestionFilter::Probe> QuestionFilter::probes_for(std::span<const Question> questions) const {
    std::vector<Probe> probes;
    std::set<std::string> seen_parents, seen_links;
    auto fill_text = [&](const std::string& signature, SignatureKind kind, const std::string& name) {
        auto templates = store_->acquire(signature, kind, Form::fill_in_blank, 1);
        return instantiate_template(templates.front().text, name);
    };
    for (const auto& q : questions) {
        std::string pid = q.knowledge.value("parent_id", "");
        if (!pid.empty() && !seen_parents.count(pid)) {
            seen_parents.insert(pid);
            if (const Entity* parent = kb_->find_entity(pid)) {
                for (const auto& a : parent->attributes) {
                    Probe p;
                    p.id = "probe:parent:" + pid + ":attribute:" + a.attribute;
                    p.question = fill_text(a.attribute, SignatureKind::attribute, parent->name);
                    p.golds = a.value.answer_strings();
                    probes.push_back(std::move(p));
                }
                for (const auto& r : parent->relations) {
                    Probe p;
                    p.id = "probe:parent:" + pid + ":relation:" + r.relation + ":" + r.object;
                    p.question = fill_text(r.relation, SignatureKind::relation, parent->name);
                    p.golds = {kb_->entity_name(r.object)};
                    probes.push_back(std::move(p));
                }
            }
        }
        if (q.category != Category::KA) continue;
        for (const auto& entry : q.evidence) {
            if (entry.value("kind", "") != "relation") continue;
            std::string subject = entry.value("subject", "");
            const Entity* se = kb_->find_entity(subject);
            if (!se) continue;  // the root link starts at the artificial entity
            std::string relation = entry.value("relation", "");
            std::string object = entry.value("object_id", "");
            std::string key = link_key(subject, relation, object);
            if (!seen_links.insert(key).second) continue;
            Probe p;
            p.id = "probe:link:" + key;
            p.question = fill_text(relation, SignatureKind::relation, se->name);
            p.golds = {kb_->entity_name(object)};
            probes.push_back(std::move(p));
        }
    }
    return probes;
}

ordered_json QuestionFilter::probe_manifest(std::span<const Question> questions) const {
    ordered_json out = ordered_json::object();
    for (const auto& p : probes_for(questions)) out[p.id] = p.golds;
    return out;
}

QuestionFilter::Outcome QuestionFilter::run(std::span<const Question> questions, ModelEndpoint& endpoint,
                                            const std::optional<std::filesystem::path>& checkpoint) const {
    auto probes = probes_for(questions);

    std::map<std::string, std::string> answered;
    if (checkpoint && std::filesystem::exists(*checkpoint)) {
        for (const auto& line : read_jsonl(*checkpoint)) {
            answered[line.at("id").get<std::string>()] = line.at("output").get<std::string>();
        }
    }
    std::ofstream ck_stream;
    if (checkpoint) {
        ck_stream.open(*checkpoint, std::ios::app);
        if (!ck_stream) throw ParseError("cannot open checkpoint file: " + checkpoint->string());
    }

    std::map<std::string, bool> probe_ok;
    for (const auto& probe : probes) {
        std::string raw;
        if (auto it = answered.find(probe.id); it != answered.end()) {
            raw = it->second;
        } else {
            raw = endpoint.send_for(probe.id, prompts_->build_recall_probe(probe.question));
            if (ck_stream.is_open()) {
                ordered_json line;
                line["id"] = probe.id;
                line["output"] = raw;
                ck_stream << line.dump() << '\n';
                ck_stream.flush();
            }
        }
        probe_ok[probe.id] = match_answer(raw, probe.golds, Form::fill_in_blank) == Verdict::correct;
    }

    // Aggregate probes per parent and per link.
    std::map<std::string, bool> parent_ok;
    std::map<std::string, std::vector<std::string>> parent_failures;
    std::map<std::string, bool> link_ok;
    for (const auto& [id, ok] : probe_ok) {
        if (id.rfind("probe:parent:", 0) == 0) {
            std::string rest = id.substr(13);
            std::string pid = rest.substr(0, rest.find(':'));
            auto [it, inserted] = parent_ok.try_emplace(pid, true);
            it->second = it->second && ok;
            if (!ok) parent_failures[pid].push_back(id);
        } else if (id.rfind("probe:link:", 0) == 0) {
            link_ok[id.substr(11)] = ok;
        }
    }

    Outcome outcome;
    ordered_json dropped = ordered_json::array();
    ordered_json retained_ids = ordered_json::array();
    for (const auto& q : questions) {
        std::string reason;
        std::string pid = q.knowledge.value("parent_id", "");
        if (auto it = parent_ok.find(pid); it != parent_ok.end() && !it->second)
            reason = "parent " + pid + " not perfectly recalled";
        if (reason.empty() && q.category == Category::KA) {
            for (const auto& entry : q.evidence) {
                if (entry.value("kind", "") != "relation") continue;
                std::string subject = entry.value("subject", "");
                if (!kb_->find_entity(subject)) continue;
                std::string key =
                    link_key(subject, entry.value("relation", ""), entry.value("object_id", ""));
                if (auto it = link_ok.find(key); it != link_ok.end() && !it->second) {
                    reason = "chain link not recalled: " + key;
                    break;
                }
            }
        }
        if (reason.empty()) {
            retained_ids.push_back(q.id);
            outcome.retained.push_back(q);
        } else {
            ordered_json d;
            d["id"] = q.id;
            d["reason"] = reason;
            dropped.push_back(d);
        }
    }

    ordered_json parents = ordered_json::object();
    for (const auto& [pid, ok] : parent_ok) {
        ordered_json pj;
        pj["ok"] = ok;
        if (auto it = parent_failures.find(pid); it != parent_failures.end()) pj["failed_probes"] = it->second;
        parents[pid] = pj;
    }
    ordered_json links = ordered_json::object();
    for (const auto& [key, ok] : link_ok) links[key] = ok;
    outcome.manifest["endpoint"] = endpoint.label();
    outcome.manifest["parents"] = parents;
    outcome.manifest["links"] = links;
    outcome.manifest["retained"] = retained_ids;
    outcome.manifest["dropped"] = dropped;
    return outcome;
}

}  // namespace knowbench
