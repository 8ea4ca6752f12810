#include "knowbench/qgen.hpp"

#include <algorithm>
#include <deque>

namespace knowbench {

std::string category_name(Category c) {
    switch (c) {
        case Category::KU: return "KU";
        case Category::KD: return "KD";
        case Category::KA: return "KA";
    }
    throw ConfigError("invalid category");
}

Category category_from_name(const std::string& s) {
    if (s == "KU") return Category::KU;
    if (s == "KD") return Category::KD;
    if (s == "KA") return Category::KA;
    throw ParseError("unknown question category: " + s);
}

std::vector<std::string> RelationChain::relation_names() const {
    std::vector<std::string> out;
    out.reserve(links.size());
    for (const auto& l : links) out.push_back(l.relation);
    return out;
}

ordered_json Question::to_json() const {
    ordered_json j;
    j["id"] = id;
    j["category"] = category_name(category);
    j["form"] = form_name(form);
    j["question"] = text;
    if (form == Form::multiple_choice) j["choices"] = choices;
    j["answers"] = gold_answers;
    j["evidence"] = evidence;
    j["knowledge"] = knowledge;
    j["entity_name"] = entity_name;
    return j;
}

Question Question::from_json(const ordered_json& j) {
    Question q;
    q.id = j.at("id").get<std::string>();
    q.category = category_from_name(j.at("category").get<std::string>());
    q.form = form_from_name(j.at("form").get<std::string>());
    q.text = j.at("question").get<std::string>();
    if (j.contains("choices")) q.choices = j["choices"].get<std::vector<std::string>>();
    q.gold_answers = j.at("answers").get<std::vector<std::string>>();
    if (q.gold_answers.empty()) throw ValidationError("question " + q.id + " has no gold answers");
    q.evidence = j.value("evidence", ordered_json::array());
    q.knowledge = j.value("knowledge", ordered_json::object());
    q.entity_name = j.value("entity_name", "");
    if (q.form == Form::multiple_choice && q.choices.size() != 4)
        throw ValidationError("question " + q.id + " must carry exactly 4 choices");
    return q;
}

RelationGraph RelationGraph::build(const KnowledgeBase& kb, const ArtificialEntity& entity) {
    RelationGraph g;
    for (const auto& [id, e] : kb.entities()) {
        auto& edges = g.adjacency_[id];  // node exists even without out-edges
        for (const auto& r : e.relations) {
            edges.push_back({r.relation, r.object});
            ++g.edge_count_;
        }
    }
    auto& own = g.adjacency_[entity.name];
    for (const auto& r : entity.relations()) {
        own.push_back({r.relation, r.object});
        ++g.edge_count_;
    }
    for (auto& [node, edges] : g.adjacency_) {
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.relation, a.object) < std::tie(b.relation, b.object);
        });
    }
    return g;
}

const std::vector<RelationGraph::Edge>& RelationGraph::edges_from(const std::string& node) const {
    static const std::vector<Edge> kEmpty;
    auto it = adjacency_.find(node);
    return it == adjacency_.end() ? kEmpty : it->second;
}

std::vector<std::string> RelationGraph::reachable_within(const std::string& root, int max_hops) const {
    std::set<std::string> seen{root};
    std::deque<std::pair<std::string, int>> queue{{root, 0}};
    while (!queue.empty()) {
        auto [node, depth] = queue.front();
        queue.pop_front();
        if (depth >= max_hops) continue;
        for (const auto& e : edges_from(node)) {
            if (seen.insert(e.object).second) queue.emplace_back(e.object, depth + 1);
        }
    }
    seen.erase(root);
    return {seen.begin(), seen.end()};
}

std::vector<RelationChain> sample_chains(const RelationGraph& graph, const std::string& root,
                                         int min_hops, int max_hops, std::size_t limit, Rng& rng) {
    if (min_hops < 1) throw ConfigError("min_hops must be >= 1");
    if (max_hops < min_hops) throw ConfigError("max_hops must be >= min_hops");

    struct PathState {
        std::vector<RelationTriplet> links;
        std::set<std::string> visited;
    };
    std::vector<RelationChain> found;
    std::deque<PathState> queue;
    queue.push_back({{}, {root}});
    while (!queue.empty()) {
        PathState state = std::move(queue.front());
        queue.pop_front();
        const std::string& head = state.links.empty() ? root : state.links.back().object;
        if (static_cast<int>(state.links.size()) >= max_hops) continue;
        for (const auto& e : graph.edges_from(head)) {
            if (state.visited.count(e.object)) continue;  // simple paths only
            PathState next = state;
            next.links.push_back({head, e.relation, e.object});
            next.visited.insert(e.object);
            if (static_cast<int>(next.links.size()) >= min_hops) found.push_back({next.links});
            queue.push_back(std::move(next));
        }
    }
    if (limit > 0 && found.size() > limit) {
        std::vector<RelationChain> sampled;
        for (std::size_t i : rng.sample_indices(found.size(), limit)) sampled.push_back(found[i]);
        return sampled;
    }
    return found;
}

std::string instantiate_template(const std::string& text, const std::string& entity_name,
                                 const std::string& value) {
    std::string out = text;
    if (!replace_all(out, "[T]", entity_name))
        throw UsageError("template has no [T] placeholder: " + text);
    if (!value.empty() && !replace_all(out, "[V]", value))
        throw UsageError("template has no [V] placeholder: " + text);
    return out;
}

Question make_onehop_question(const Property& triplet, const QuestionTemplate& tmpl,
                              const std::string& entity_name, const KnowledgeBase& kb) {
    if (tmpl.signature != property_name(triplet))
        throw UsageError("template signature \"" + tmpl.signature + "\" does not match triplet \"" +
                         property_name(triplet) + "\"");
    Question q;
    q.form = tmpl.form;
    q.text = instantiate_template(tmpl.text, entity_name);
    if (const auto* a = std::get_if<AttributeTriplet>(&triplet)) {
        q.gold_answers = a->value.answer_strings();
    } else {
        q.gold_answers = {kb.entity_name(std::get<RelationTriplet>(triplet).object)};
    }
    q.evidence.push_back(property_to_json(triplet));
    q.entity_name = entity_name;
    return q;
}

Question make_multihop_question(const RelationChain& chain, const QuestionTemplate& tmpl,
                                const std::string& entity_name, const KnowledgeBase& kb) {
    if (chain.links.empty()) throw UsageError("empty relation chain");
    auto names = chain.relation_names();
    if (tmpl.signature != TemplateStore::chain_signature(names))
        throw UsageError("template signature \"" + tmpl.signature + "\" does not match chain");
    Question q;
    q.category = Category::KA;
    q.form = Form::multiple_choice;
    q.text = instantiate_template(tmpl.text, entity_name);
    q.gold_answers = {kb.entity_name(chain.tail())};
    for (const auto& l : chain.links) q.evidence.push_back(property_to_json(l));
    q.entity_name = entity_name;
    return q;
}

namespace {

std::string normalize_choice(const std::string& s) { return to_lower(trim(s)); }

void append_unique(std::vector<std::string>& pool, const std::string& candidate,
                   const std::set<std::string>& blocked) {
    std::string norm = normalize_choice(candidate);
    if (norm.empty() || blocked.count(norm)) return;
    for (const auto& existing : pool) {
        if (normalize_choice(existing) == norm) return;
    }
    pool.push_back(candidate);
}

// Values of `attribute` on the given entities, in entity order.
std::vector<std::string> attribute_values(const std::vector<const Entity*>& entities,
                                          const std::string& attribute,
                                          const std::set<std::string>& blocked) {
    std::vector<std::string> out;
    for (const Entity* e : entities) {
        for (const auto& a : e->attributes) {
            if (a.attribute != attribute) continue;
            for (const auto& v : a.value.answer_strings()) append_unique(out, v, blocked);
        }
    }
    return out;
}

std::vector<std::string> relation_objects(const std::vector<const Entity*>& entities,
                                          const std::string& relation, const KnowledgeBase& kb,
                                          const std::set<std::string>& blocked) {
    std::vector<std::string> out;
    for (const Entity* e : entities) {
        for (const auto& r : e->relations) {
            if (r.relation != relation) continue;
            append_unique(out, kb.entity_name(r.object), blocked);
        }
    }
    return out;
}

std::vector<const Entity*> class_members(const KnowledgeBase& kb, const std::string& class_id) {
    std::vector<const Entity*> out;
    if (class_id.empty() || !kb.classes().count(class_id)) return out;
    for (const auto& mid : kb.class_node(class_id).member_ids) out.push_back(&kb.entity(mid));
    return out;
}

std::vector<const Entity*> all_entities(const KnowledgeBase& kb) {
    std::vector<const Entity*> out;
    for (const auto& [id, e] : kb.entities()) out.push_back(&e);
    return out;
}

void take_from_pool(std::vector<std::string> pool, std::vector<std::string>& distractors, Rng& rng,
                    std::size_t want) {
    rng.shuffle(pool);
    for (const auto& v : pool) {
        if (distractors.size() >= want) return;
        bool dup = std::any_of(distractors.begin(), distractors.end(), [&](const std::string& d) {
            return normalize_choice(d) == normalize_choice(v);
        });
        if (!dup) distractors.push_back(v);
    }
}

// Distractor pools in preference order for an attribute or relation question.
std::vector<std::vector<std::string>> distractor_pools(const Question& q, const KnowledgeBase& kb,
                                                       const ChoiceContext& ctx) {
    std::set<std::string> blocked;
    for (const auto& g : q.gold_answers) blocked.insert(normalize_choice(g));
    blocked.insert(normalize_choice(ctx.artificial_name));

    std::vector<std::vector<std::string>> pools;
    if (q.evidence.empty()) return pools;
    const auto& first = q.evidence.front();
    auto members = class_members(kb, ctx.class_id);
    auto everyone = all_entities(kb);
    if (q.category == Category::KA) {
        const auto& last = q.evidence.back();
        std::string relation = last.value("relation", "");
        pools.push_back(relation_objects(members, relation, kb, blocked));
        pools.push_back(relation_objects(everyone, relation, kb, blocked));
        if (ctx.graph) {
            std::vector<std::string> reachable;
            for (const auto& id : ctx.graph->reachable_within(ctx.artificial_name, ctx.max_hops))
                append_unique(reachable, kb.entity_name(id), blocked);
            pools.push_back(std::move(reachable));
        }
    } else if (first.value("kind", "") == "attribute") {
        std::string attribute = first.value("attribute", "");
        pools.push_back(attribute_values(members, attribute, blocked));
        pools.push_back(attribute_values(everyone, attribute, blocked));
    } else {
        std::string relation = first.value("relation", "");
        pools.push_back(relation_objects(members, relation, kb, blocked));
        pools.push_back(relation_objects(everyone, relation, kb, blocked));
    }
    return pools;
}

}  // namespace

bool make_choices(Question& question, const KnowledgeBase& kb, Rng& rng, const ChoiceContext& ctx) {
    if (question.gold_answers.empty()) throw UsageError("question has no gold answer");
    std::vector<std::string> distractors;
    for (auto& pool : distractor_pools(question, kb, ctx)) {
        if (distractors.size() >= 3) break;
        take_from_pool(std::move(pool), distractors, rng, 3);
    }
    if (distractors.size() < 3) return false;
    std::vector<std::string> choices{question.gold_answers.front()};
    choices.insert(choices.end(), distractors.begin(), distractors.end());
    rng.shuffle(choices);
    question.choices = std::move(choices);
    question.form = Form::multiple_choice;
    return true;
}

std::optional<Question> make_boolean(const AttributeTriplet& triplet, const QuestionTemplate& tmpl,
                                     Rng& rng, bool positive, const KnowledgeBase& kb,
                                     const ChoiceContext& ctx, const std::string& entity_name) {
    if (tmpl.signature != triplet.attribute)
        throw UsageError("template signature \"" + tmpl.signature + "\" does not match attribute \"" +
                         triplet.attribute + "\"");
    Question q;
    q.form = Form::boolean_q;
    q.entity_name = entity_name;
    q.evidence.push_back(property_to_json(Property{triplet}));
    if (positive) {
        const auto values = triplet.value.answer_strings();
        const std::string& v = values[rng.uniform_index(values.size())];
        q.text = instantiate_template(tmpl.text, entity_name, v);
        q.gold_answers = {"Yes"};
        return q;
    }
    std::set<std::string> blocked;
    for (const auto& v : triplet.value.answer_strings()) blocked.insert(normalize_choice(v));
    auto members = class_members(kb, ctx.class_id);
    auto pool = attribute_values(members, triplet.attribute, blocked);
    if (pool.empty()) pool = attribute_values(all_entities(kb), triplet.attribute, blocked);
    if (pool.empty()) return std::nullopt;
    const std::string& v = pool[rng.uniform_index(pool.size())];
    q.text = instantiate_template(tmpl.text, entity_name, v);
    q.gold_answers = {"No"};
    return q;
}

CategoryPools assign_categories(const ArtificialEntity& entity, std::vector<RelationChain> chains,
                                double kd_sample_rate, Rng& rng) {
    CategoryPools pools;
    std::vector<KdItem> kd_candidates;
    for (const auto& tp : entity.properties) {
        if (tp.tag.origin == Origin::variation && is_attribute(tp.prop)) {
            kd_candidates.push_back({tp.prop, false, tp.tag.original});
        }
    }
    for (const auto& d : entity.dropped) {
        if (is_attribute(d)) kd_candidates.push_back({d, true, std::nullopt});
    }
    for (auto& item : kd_candidates) {
        if (kd_sample_rate >= 1.0 || rng.bernoulli(kd_sample_rate)) pools.kd.push_back(std::move(item));
    }
    for (const auto& tp : entity.properties) {
        if (tp.tag.origin == Origin::variation) continue;
        pools.ku.push_back(tp);
    }
    pools.ka = std::move(chains);
    return pools;
}

ordered_json QuestionGenConfig::to_json() const {
    ordered_json j;
    j["min_hops"] = min_hops;
    j["max_hops"] = max_hops;
    j["max_chains"] = max_chains;
    j["kd_sample_rate"] = kd_sample_rate;
    j["emit_fill"] = emit_fill;
    j["emit_multiple_choice"] = emit_multiple_choice;
    j["emit_boolean"] = emit_boolean;
    j["seed"] = seed;
    return j;
}

QuestionGenConfig QuestionGenConfig::from_json(const json& j) {
    QuestionGenConfig c;
    c.min_hops = j.value("min_hops", c.min_hops);
    c.max_hops = j.value("max_hops", c.max_hops);
    c.max_chains = j.value("max_chains", c.max_chains);
    c.kd_sample_rate = j.value("kd_sample_rate", c.kd_sample_rate);
    c.emit_fill = j.value("emit_fill", c.emit_fill);
    c.emit_multiple_choice = j.value("emit_multiple_choice", c.emit_multiple_choice);
    c.emit_boolean = j.value("emit_boolean", c.emit_boolean);
    c.seed = j.value("seed", c.seed);
    if (c.min_hops < 2) throw ConfigError("min_hops must be >= 2 for multi-hop questions");
    if (c.max_hops < c.min_hops) throw ConfigError("max_hops must be >= min_hops");
    if (c.kd_sample_rate < 0 || c.kd_sample_rate > 1) throw ConfigError("kd_sample_rate must be in [0,1]");
    return c;
}

namespace {

// Provenance label for an evidence triplet owned by the artificial entity.
std::string origin_of(const ArtificialEntity& entity, const Property& prop) {
    for (const auto& tp : entity.properties) {
        if (property_equal(tp.prop, prop)) return origin_name(tp.tag.origin);
    }
    return "existing";
}

void tag_evidence(Question& q, const std::string& origin) {
    for (auto& entry : q.evidence) {
        if (!entry.contains("origin")) entry["origin"] = origin;
    }
}

const QuestionTemplate& pick_template(const std::vector<QuestionTemplate>& templates, Rng& rng) {
    return templates[rng.uniform_index(templates.size())];
}

}  // namespace

BenchmarkResult generate_questions(const KnowledgeBase& kb, std::span<const ArtificialEntity> entities,
                                   const TemplateStore& store, const QuestionGenConfig& config,
                                   ModelEndpoint* template_client) {
    BenchmarkResult result;
    for (std::size_t idx = 0; idx < entities.size(); ++idx) {
        const ArtificialEntity& entity = entities[idx];
        Rng rng(derive_seed(config.seed, "questions:" + std::to_string(idx) + ":" + entity.name));
        RelationGraph graph = RelationGraph::build(kb, entity);
        auto chains = sample_chains(graph, entity.name, config.min_hops, config.max_hops,
                                    config.max_chains, rng);
        CategoryPools pools = assign_categories(entity, std::move(chains), config.kd_sample_rate, rng);
        ordered_json knowledge = entity.knowledge_record();
        ChoiceContext ctx{entity.class_id, entity.name, &graph, config.max_hops};

        int counter = 0;
        auto next_id = [&](Category c) {
            return "e" + std::to_string(idx) + ":" + category_name(c) + ":" + std::to_string(counter++);
        };
        auto finalize = [&](Question q, Category c, const std::string& origin) {
            q.category = c;
            q.id = next_id(c);
            q.knowledge = knowledge;
            tag_evidence(q, origin);
            result.questions.push_back(std::move(q));
        };

        auto emit_onehop_forms = [&](const Property& prop, Category cat, const std::string& origin) {
            const std::string& sig = property_name(prop);
            SignatureKind kind = is_attribute(prop) ? SignatureKind::attribute : SignatureKind::relation;
            if (config.emit_fill) {
                auto templates = store.acquire(sig, kind, Form::fill_in_blank, 5, template_client);
                finalize(make_onehop_question(prop, pick_template(templates, rng), entity.name, kb), cat,
                         origin);
            }
            if (config.emit_multiple_choice) {
                auto templates = store.acquire(sig, kind, Form::multiple_choice, 5, template_client);
                Question q = make_onehop_question(prop, pick_template(templates, rng), entity.name, kb);
                if (make_choices(q, kb, rng, ctx)) {
                    finalize(std::move(q), cat, origin);
                } else {
                    result.dropped.push_back(entity.name + "/" + sig + ": fewer than 3 distractors");
                }
            }
            if (config.emit_boolean && is_attribute(prop)) {
                const auto& attr = std::get<AttributeTriplet>(prop);
                auto templates = store.acquire(sig, SignatureKind::attribute, Form::boolean_q, 5,
                                               template_client);
                const auto& tmpl = pick_template(templates, rng);
                if (auto pos = make_boolean(attr, tmpl, rng, true, kb, ctx, entity.name))
                    finalize(std::move(*pos), cat, origin);
                if (auto neg = make_boolean(attr, tmpl, rng, false, kb, ctx, entity.name)) {
                    finalize(std::move(*neg), cat, origin);
                } else {
                    result.dropped.push_back(entity.name + "/" + sig +
                                             ": no distractor for negative boolean");
                }
            }
        };

        for (const auto& tp : pools.ku) {
            emit_onehop_forms(tp.prop, Category::KU, origin_name(tp.tag.origin));
        }
        for (const auto& item : pools.kd) {
            if (!item.from_dropout) {
                emit_onehop_forms(item.triplet, Category::KD, "variation");
                continue;
            }
            // A dropped property has no stated value on the artificial
            // entity: only the Boolean form asserting the parent's value
            // (gold "No") is answerable.
            if (!config.emit_boolean) continue;
            const auto& attr = std::get<AttributeTriplet>(item.triplet);
            auto templates = store.acquire(attr.attribute, SignatureKind::attribute, Form::boolean_q, 5,
                                           template_client);
            const auto& tmpl = pick_template(templates, rng);
            const auto values = attr.value.answer_strings();
            Question q;
            q.form = Form::boolean_q;
            q.entity_name = entity.name;
            q.text = instantiate_template(tmpl.text, entity.name,
                                          values[rng.uniform_index(values.size())]);
            q.gold_answers = {"No"};
            q.evidence.push_back(property_to_json(item.triplet));
            finalize(std::move(q), Category::KD, "dropout");
        }
        for (const auto& chain : pools.ka) {
            auto names = chain.relation_names();
            std::string sig = TemplateStore::chain_signature(names);
            auto templates = store.acquire(sig, SignatureKind::chain, Form::multiple_choice, 5,
                                           template_client);
            Question q = make_multihop_question(chain, pick_template(templates, rng), entity.name, kb);
            if (!make_choices(q, kb, rng, ctx)) {
                result.dropped.push_back(entity.name + "/" + sig + ": fewer than 3 distractors");
                continue;
            }
            // The root link is the artificial entity's own relation; the rest
            // of the chain lives in the KB.
            q.category = Category::KA;
            q.id = next_id(Category::KA);
            q.knowledge = knowledge;
            for (auto& entry : q.evidence) {
                std::string subject = entry.value("subject", "");
                if (subject == entity.name) {
                    entry["origin"] = origin_of(entity, property_from_json(entry, "evidence"));
                } else {
                    entry["origin"] = "existing";
                }
            }
            result.questions.push_back(std::move(q));
        }
    }
    return result;
}

void write_benchmark(const std::filesystem::path& path, std::span<const Question> questions) {
    std::vector<ordered_json> lines;
    lines.reserve(questions.size());
    for (const auto& q : questions) lines.push_back(q.to_json());
    write_jsonl(path, lines);
}

std::vector<Question> read_benchmark(const std::filesystem::path& path) {
    std::vector<Question> out;
    for (const auto& j : read_jsonl(path)) out.push_back(Question::from_json(j));
    return out;
}

}  // namespace knowbench
