#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "knowbench/eval.hpp"
#include "knowbench/experiments.hpp"
#include "knowbench/kb.hpp"
#include "knowbench/qgen.hpp"
#include "knowbench/synth.hpp"
#include "knowbench/util.hpp"

namespace fs = std::filesystem;
using namespace knowbench;

namespace {

// Exit codes: 0 success, 2 usage, 3 validation/parse, 4 endpoint failure.
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitEndpoint = 4;

struct CommonState {
    std::string config_path;
    ordered_json config = ordered_json::object();

    void load() {
        if (!config_path.empty()) config = load_json_file(config_path);
    }
    ordered_json section(const std::string& key) const {
        if (config.contains(key) && config[key].is_object()) return config[key];
        return ordered_json::object();
    }
    std::string path_of(const std::string& key, const std::string& flag) const {
        if (!flag.empty()) return flag;
        if (config.contains("paths") && config["paths"].contains(key))
            return config["paths"][key].get<std::string>();
        return "";
    }
};

void require_file(const std::string& path, const std::string& what, const std::string& prior_command) {
    if (path.empty())
        throw UsageError("missing " + what + " path (flag or config)");
    if (!fs::exists(path)) {
        std::string hint = prior_command.empty() ? "" : "; run `knowbench " + prior_command + "` first";
        throw ValidationError(what + " not found: " + path + hint);
    }
}

std::uint64_t resolve_seed(const CommonState& state, std::optional<std::uint64_t> flag, bool required) {
    if (flag) return *flag;
    if (state.config.contains("seed")) return state.config["seed"].get<std::uint64_t>();
    if (required) throw UsageError("a --seed is required for reproducible output");
    return 0;
}

struct EndpointFlags {
    std::string script;
    std::string url;
    std::string model;
    std::string auth_env;
    int max_concurrency = 0;
    int timeout_ms = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--endpoint-script", script, "mock endpoint script file");
        cmd->add_option("--endpoint-url", url, "HTTP endpoint base URL");
        cmd->add_option("--model", model, "model label");
        cmd->add_option("--auth-env", auth_env, "environment variable holding the bearer token");
        cmd->add_option("--max-concurrency", max_concurrency, "max in-flight requests");
        cmd->add_option("--timeout-ms", timeout_ms, "endpoint timeout in milliseconds");
    }

    EndpointConfig resolve(const CommonState& state) const {
        EndpointConfig cfg = EndpointConfig::from_json(state.section("endpoint"));
        if (!script.empty()) {
            cfg.type = "mock";
            cfg.script = script;
        }
        if (!url.empty()) {
            cfg.type = "http";
            cfg.base_url = url;
        }
        if (!model.empty()) cfg.model = model;
        if (!auth_env.empty()) cfg.auth_env = auth_env;
        if (max_concurrency > 0) cfg.max_concurrency = max_concurrency;
        if (timeout_ms > 0) cfg.timeout_ms = timeout_ms;
        if (cfg.type == "mock" && cfg.script.empty())
            throw UsageError("no endpoint configured: pass --endpoint-script or --endpoint-url");
        return cfg;
    }
};

struct PromptFlags {
    std::string shots;
    std::string reasoning;
    std::string format;
    std::string context;
    int few_shot_count = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--shots", shots, "zero | few");
        cmd->add_option("--reasoning", reasoning, "vanilla | cot");
        cmd->add_option("--format", format, "structured | natural_language");
        cmd->add_option("--context", context, "none | parent_entity | irrelevant_entity | chain_entities");
        cmd->add_option("--few-shot-count", few_shot_count, "exemplars per form (3-5)");
    }

    PromptSpec resolve(const CommonState& state) const {
        PromptSpec spec = PromptSpec::from_json(state.section("prompt"));
        if (!shots.empty()) spec.shots = shots_from_name(shots);
        if (!reasoning.empty()) spec.reasoning = reasoning_from_name(reasoning);
        if (!format.empty()) spec.knowledge_format = knowledge_format_from_name(format);
        if (!context.empty()) spec.context_injection = context_injection_from_name(context);
        if (few_shot_count > 0) spec.few_shot_count = few_shot_count;
        spec.validate();
        return spec;
    }
};

TemplateStore load_templates(const CommonState& state, const std::string& flag) {
    TemplateStore store;
    std::string path = state.path_of("templates", flag);
    if (!path.empty()) {
        require_file(path, "template store", "");
        store.load_file(path);
    }
    return store;
}

void print_labeled_reports(const std::vector<LabeledReport>& reports) {
    for (const auto& lr : reports) {
        std::cout << lr.report.text_table(lr.label) << '\n';
    }
}

int run_app(int argc, char** argv) {
    CLI::App app{"knowbench: synthesize artificial-entity knowledge, build question sets, "
                 "and evaluate language models against them"};
    app.require_subcommand(1);
    CommonState state;
    app.add_option("--config", state.config_path, "pipeline configuration file (JSON)");

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "validate a knowledge base and emit its canonical form");
    struct {
        std::string kb, out;
    } ing;
    ingest->add_option("--kb", ing.kb, "knowledge base JSON file");
    ingest->add_option("--out", ing.out, "write the canonical KB here");
    ingest->callback([&] {
        state.load();
        std::string kb_path = state.path_of("kb", ing.kb);
        require_file(kb_path, "knowledge base", "");
        KnowledgeBase kb = KnowledgeBase::ingest_file(kb_path);
        std::cout << "classes: " << kb.classes().size() << "\nentities: " << kb.entities().size()
                  << "\ndangling relation objects: " << kb.dangling_count() << '\n';
        if (!ing.out.empty()) {
            save_json_file(ing.out, kb.to_json());
            std::cout << "canonical form written to " << ing.out << '\n';
        }
    });

    // ---- generate ----
    auto* generate = app.add_subcommand("generate", "synthesize artificial entities from a knowledge base");
    struct {
        std::string kb, out;
        std::optional<std::uint64_t> seed;
        double heredity = -1, variation = -1, dropout = -1;
        double extension_count = -1;
        double noise_scale = -1;
        int min_props = -1, per_class = -1;
        bool fixed_split = false;
    } gen;
    generate->add_option("--kb", gen.kb, "knowledge base JSON file");
    generate->add_option("--out", gen.out, "output entity JSONL file");
    generate->add_option("--seed", gen.seed, "generation seed");
    generate->add_option("--heredity-weight", gen.heredity, "");
    generate->add_option("--variation-weight", gen.variation, "");
    generate->add_option("--dropout-weight", gen.dropout, "");
    generate->add_option("--extension-count", gen.extension_count,
                         ">=1 absolute count, (0,1) fraction of the sibling pool");
    generate->add_option("--noise-scale", gen.noise_scale, "gaussian std factor for numeric variation");
    generate->add_option("--min-parent-properties", gen.min_props, "");
    generate->add_option("--entities-per-class", gen.per_class, "");
    generate->add_flag("--fixed-size-split", gen.fixed_split, "use fixed-size split slices");
    generate->callback([&] {
        state.load();
        std::string kb_path = state.path_of("kb", gen.kb);
        std::string out_path = state.path_of("entities", gen.out);
        require_file(kb_path, "knowledge base", "");
        if (out_path.empty()) throw UsageError("missing --out path for entities");
        SynthesisConfig cfg = SynthesisConfig::from_json(state.section("synthesis"));
        cfg.rng_seed = resolve_seed(state, gen.seed, true);
        if (gen.heredity >= 0) cfg.heredity_weight = gen.heredity;
        if (gen.variation >= 0) cfg.variation_weight = gen.variation;
        if (gen.dropout >= 0) cfg.dropout_weight = gen.dropout;
        if (gen.extension_count >= 0) cfg.extension_count = gen.extension_count;
        if (gen.noise_scale >= 0) cfg.noise_scale = gen.noise_scale;
        if (gen.min_props >= 0) cfg.min_parent_properties = gen.min_props;
        if (gen.per_class >= 0) cfg.entities_per_class = gen.per_class;
        if (gen.fixed_split) cfg.fixed_size_split = true;
        cfg.validate();

        KnowledgeBase kb = KnowledgeBase::ingest_file(kb_path);
        BatchResult batch = generate_batch(kb, cfg);
        write_entities(out_path, batch.entities);

        ordered_json meta;
        meta["config"] = cfg.to_json();
        meta["entity_count"] = batch.entities.size();
        ordered_json skips = ordered_json::array();
        for (const auto& [cls, reason] : batch.skips) {
            ordered_json s;
            s["class_id"] = cls;
            s["reason"] = reason;
            skips.push_back(s);
        }
        meta["skips"] = skips;
        save_json_file(out_path + ".meta.json", meta);

        std::cout << "screened classes: " << kb.screen_classes(cfg.min_parent_properties).size()
                  << "\nentities generated: " << batch.entities.size() << '\n';
        std::map<std::string, std::size_t> per_class;
        for (const auto& e : batch.entities) per_class[e.class_id]++;
        for (const auto& [cls, n] : per_class)
            std::cout << "  class " << cls << ": " << n << (n == 1 ? " entity" : " entities") << '\n';
        for (const auto& [cls, reason] : batch.skips)
            std::cerr << "skipped class " << cls << ": " << reason << '\n';
    });

    // ---- questions ----
    auto* questions = app.add_subcommand("questions", "build the KU/KD/KA benchmark from entities");
    struct {
        std::string kb, entities, out, templates, templates_out;
        std::string template_script, template_url, template_model;
        std::optional<std::uint64_t> seed;
        int min_hops = -1, max_hops = -1;
        long long max_chains = -1;
        double kd_rate = -1;
    } qs;
    questions->add_option("--kb", qs.kb, "knowledge base JSON file");
    questions->add_option("--entities", qs.entities, "entity JSONL file");
    questions->add_option("--out", qs.out, "output benchmark JSONL file");
    questions->add_option("--templates", qs.templates, "template store file");
    questions->add_option("--templates-out", qs.templates_out,
                          "persist the template store (including generated templates) here");
    questions->add_option("--template-endpoint-script", qs.template_script,
                          "mock endpoint for template generation");
    questions->add_option("--template-endpoint-url", qs.template_url,
                          "HTTP endpoint for template generation");
    questions->add_option("--template-model", qs.template_model, "template generation model label");
    questions->add_option("--seed", qs.seed, "question generation seed");
    questions->add_option("--min-hops", qs.min_hops, "");
    questions->add_option("--max-hops", qs.max_hops, "");
    questions->add_option("--max-chains", qs.max_chains, "chain cap per entity");
    questions->add_option("--kd-rate", qs.kd_rate, "KD sampling rate in [0,1]");
    questions->callback([&] {
        state.load();
        std::string kb_path = state.path_of("kb", qs.kb);
        std::string entities_path = state.path_of("entities", qs.entities);
        std::string out_path = state.path_of("benchmark", qs.out);
        require_file(kb_path, "knowledge base", "");
        require_file(entities_path, "entity file", "generate");
        if (out_path.empty()) throw UsageError("missing --out path for the benchmark");
        QuestionGenConfig cfg = QuestionGenConfig::from_json(state.section("questions"));
        cfg.seed = resolve_seed(state, qs.seed, true);
        if (qs.min_hops > 0) cfg.min_hops = qs.min_hops;
        if (qs.max_hops > 0) cfg.max_hops = qs.max_hops;
        if (qs.max_chains >= 0) cfg.max_chains = static_cast<std::size_t>(qs.max_chains);
        if (qs.kd_rate >= 0) cfg.kd_sample_rate = qs.kd_rate;

        KnowledgeBase kb = KnowledgeBase::ingest_file(kb_path);
        auto entities = read_entities(entities_path);
        TemplateStore store = load_templates(state, qs.templates);
        std::unique_ptr<ModelEndpoint> template_client;
        if (!qs.template_script.empty() || !qs.template_url.empty()) {
            EndpointConfig ecfg;
            ecfg.type = qs.template_script.empty() ? "http" : "mock";
            ecfg.script = qs.template_script;
            ecfg.base_url = qs.template_url;
            if (!qs.template_model.empty()) ecfg.model = qs.template_model;
            template_client = make_endpoint(ecfg);
        }
        BenchmarkResult result = generate_questions(kb, entities, store, cfg, template_client.get());
        write_benchmark(out_path, result.questions);
        if (!qs.templates_out.empty()) store.save_file(qs.templates_out);

        std::map<std::string, std::size_t> per_cat;
        for (const auto& q : result.questions) per_cat[category_name(q.category)]++;
        std::cout << "questions: " << result.questions.size();
        for (const auto& [c, n] : per_cat) std::cout << "  " << c << "=" << n;
        std::cout << '\n';
        for (const auto& line : result.dropped) std::cerr << "dropped: " << line << '\n';
    });

    // ---- filter ----
    auto* filter = app.add_subcommand("filter", "drop questions whose prerequisite knowledge the model lacks");
    struct {
        std::string kb, benchmark, out, manifest, templates, checkpoint, emit_probes;
        std::optional<std::uint64_t> seed;
        EndpointFlags endpoint;
    } fl;
    filter->add_option("--kb", fl.kb, "knowledge base JSON file");
    filter->add_option("--benchmark", fl.benchmark, "benchmark JSONL file");
    filter->add_option("--out", fl.out, "filtered benchmark JSONL file");
    filter->add_option("--manifest", fl.manifest, "retained/dropped manifest file");
    filter->add_option("--templates", fl.templates, "template store file");
    filter->add_option("--checkpoint", fl.checkpoint, "resumable probe checkpoint file");
    filter->add_option("--emit-probes", fl.emit_probes,
                       "write the probe manifest (id -> gold answers) and exit");
    filter->add_option("--seed", fl.seed, "prompt seed");
    fl.endpoint.attach(filter);
    filter->callback([&] {
        state.load();
        std::string kb_path = state.path_of("kb", fl.kb);
        std::string bench_path = state.path_of("benchmark", fl.benchmark);
        require_file(kb_path, "knowledge base", "");
        require_file(bench_path, "benchmark", "questions");
        KnowledgeBase kb = KnowledgeBase::ingest_file(kb_path);
        auto bench = read_benchmark(bench_path);
        TemplateStore store = load_templates(state, fl.templates);
        PromptBuilder prompts(kb, store, ExemplarStore::builtin(), resolve_seed(state, fl.seed, false));
        QuestionFilter qfilter(kb, store, prompts);
        if (!fl.emit_probes.empty()) {
            save_json_file(fl.emit_probes, qfilter.probe_manifest(bench));
            std::cout << "probe manifest written to " << fl.emit_probes << '\n';
            return;
        }
        std::string out_path = state.path_of("filtered", fl.out);
        if (out_path.empty()) throw UsageError("missing --out path for the filtered benchmark");
        auto endpoint = make_endpoint(fl.endpoint.resolve(state));
        std::optional<fs::path> checkpoint;
        if (!fl.checkpoint.empty()) checkpoint = fl.checkpoint;
        auto outcome = qfilter.run(bench, *endpoint, checkpoint);
        write_benchmark(out_path, outcome.retained);
        if (!fl.manifest.empty()) save_json_file(fl.manifest, outcome.manifest);
        std::cout << "retained " << outcome.retained.size() << " of " << bench.size() << " questions\n";
    });

    // ---- evaluate ----
    auto* evaluate_cmd = app.add_subcommand("evaluate", "run a model over the benchmark and score it");
    struct {
        std::string kb, benchmark, report, templates;
        std::optional<std::uint64_t> seed;
        EndpointFlags endpoint;
        PromptFlags prompt;
    } ev;
    evaluate_cmd->add_option("--kb", ev.kb, "knowledge base JSON file");
    evaluate_cmd->add_option("--benchmark", ev.benchmark, "benchmark JSONL file");
    evaluate_cmd->add_option("--report", ev.report, "output report JSON file");
    evaluate_cmd->add_option("--templates", ev.templates, "template store file");
    evaluate_cmd->add_option("--seed", ev.seed, "prompt seed");
    ev.endpoint.attach(evaluate_cmd);
    ev.prompt.attach(evaluate_cmd);
    evaluate_cmd->callback([&] {
        state.load();
        std::string kb_path = state.path_of("kb", ev.kb);
        std::string bench_path = state.path_of("benchmark", ev.benchmark);
        require_file(kb_path, "knowledge base", "");
        require_file(bench_path, "benchmark", "questions");
        KnowledgeBase kb = KnowledgeBase::ingest_file(kb_path);
        auto bench = read_benchmark(bench_path);
        TemplateStore store = load_templates(state, ev.templates);
        PromptBuilder prompts(kb, store, ExemplarStore::builtin(), resolve_seed(state, ev.seed, false));
        auto endpoint = make_endpoint(ev.endpoint.resolve(state));
        PromptSpec spec = ev.prompt.resolve(state);
        EvalReport report = evaluate(bench, spec, *endpoint, prompts);
        std::cout << report.text_table(endpoint->label());
        std::string report_path = state.path_of("report", ev.report);
        if (!report_path.empty()) save_json_file(report_path, report.to_json());
    });

    // ---- experiment ----
    auto* experiment = app.add_subcommand("experiment", "run one of the analysis experiments");
    struct {
        std::string variant, kb, benchmark, report, templates, name_mode, bins;
        std::optional<std::uint64_t> seed;
        EndpointFlags endpoint;
        PromptFlags prompt;
    } ex;
    experiment->add_option("--variant", ex.variant,
                           "similarity_bins | name_variant | context_parent | context_irrelevant | "
                           "context_chain | format_nl_vs_json")
        ->required();
    experiment->add_option("--kb", ex.kb, "knowledge base JSON file");
    experiment->add_option("--benchmark", ex.benchmark, "benchmark JSONL file");
    experiment->add_option("--report", ex.report, "output report JSON file");
    experiment->add_option("--templates", ex.templates, "template store file");
    experiment->add_option("--name-mode", ex.name_mode, "similar | random");
    experiment->add_option("--bins", ex.bins, "comma-separated similarity bin edges");
    experiment->add_option("--seed", ex.seed, "experiment seed");
    ex.endpoint.attach(experiment);
    ex.prompt.attach(experiment);
    experiment->callback([&] {
        state.load();
        std::string kb_path = state.path_of("kb", ex.kb);
        std::string bench_path = state.path_of("benchmark", ex.benchmark);
        require_file(kb_path, "knowledge base", "");
        require_file(bench_path, "benchmark", "questions");
        KnowledgeBase kb = KnowledgeBase::ingest_file(kb_path);
        auto bench = read_benchmark(bench_path);
        TemplateStore store = load_templates(state, ex.templates);
        std::uint64_t seed = resolve_seed(state, ex.seed, false);
        PromptBuilder prompts(kb, store, ExemplarStore::builtin(), seed);
        auto endpoint = make_endpoint(ex.endpoint.resolve(state));

        ExperimentConfig cfg;
        cfg.variant = experiment_variant_from_name(ex.variant);
        cfg.base_spec = ex.prompt.resolve(state);
        cfg.seed = seed;
        if (!ex.name_mode.empty()) cfg.name_mode = name_variant_from_name(ex.name_mode);
        if (!ex.bins.empty()) {
            cfg.bin_edges.clear();
            for (const auto& part : split(ex.bins, ',')) cfg.bin_edges.push_back(std::stod(part));
        }
        auto reports = run_experiment(bench, kb, cfg, *endpoint, prompts);
        print_labeled_reports(reports);
        std::string report_path = state.path_of("report", ex.report);
        if (!report_path.empty()) {
            ordered_json out;
            out["variant"] = ex.variant;
            ordered_json arr = ordered_json::array();
            for (const auto& lr : reports) {
                ordered_json r;
                r["label"] = lr.label;
                r["report"] = lr.report.to_json();
                arr.push_back(r);
            }
            out["reports"] = arr;
            save_json_file(report_path, out);
        }
    });

    // ---- stats ----
    auto* stats = app.add_subcommand("stats", "summary statistics of an entity file or benchmark");
    struct {
        std::string kb, entities, benchmark, json_out;
    } st;
    stats->add_option("--kb", st.kb, "knowledge base (enables sibling statistics)");
    stats->add_option("--entities", st.entities, "entity JSONL file");
    stats->add_option("--benchmark", st.benchmark, "benchmark JSONL file");
    stats->add_option("--json", st.json_out, "write machine-readable stats here");
    stats->callback([&] {
        state.load();
        ordered_json out;
        if (st.entities.empty() && st.benchmark.empty())
            throw UsageError("pass --entities and/or --benchmark");
        std::optional<KnowledgeBase> kb;
        std::string kb_path = state.path_of("kb", st.kb);
        if (!kb_path.empty()) {
            require_file(kb_path, "knowledge base", "");
            kb = KnowledgeBase::ingest_file(kb_path);
        }
        if (!st.entities.empty()) {
            require_file(st.entities, "entity file", "generate");
            auto entities = read_entities(st.entities);
            std::size_t total_props = 0;
            std::map<std::size_t, std::size_t> attr_hist, rel_hist;
            double sibling_sum = 0;
            std::size_t sibling_known = 0;
            for (const auto& e : entities) {
                std::size_t na = e.attributes().size(), nr = e.relations().size();
                total_props += na + nr;
                attr_hist[na]++;
                rel_hist[nr]++;
                if (kb && kb->classes().count(e.class_id)) {
                    sibling_sum +=
                        static_cast<double>(kb->class_node(e.class_id).member_ids.size()) - 1.0;
                    sibling_known++;
                }
            }
            ordered_json ej;
            ej["count"] = entities.size();
            ej["mean_properties"] =
                entities.empty() ? 0.0 : static_cast<double>(total_props) / static_cast<double>(entities.size());
            if (sibling_known > 0) ej["mean_siblings"] = sibling_sum / static_cast<double>(sibling_known);
            ordered_json ah = ordered_json::object(), rh = ordered_json::object();
            for (const auto& [k, v] : attr_hist) ah[std::to_string(k)] = v;
            for (const auto& [k, v] : rel_hist) rh[std::to_string(k)] = v;
            ej["attribute_count_histogram"] = ah;
            ej["relation_count_histogram"] = rh;
            out["entities"] = ej;
            std::cout << "entities: " << entities.size() << "\nmean properties per entity: "
                      << (entities.empty()
                              ? 0.0
                              : static_cast<double>(total_props) / static_cast<double>(entities.size()))
                      << '\n';
            if (sibling_known > 0)
                std::cout << "mean siblings: " << sibling_sum / static_cast<double>(sibling_known) << '\n';
        }
        if (!st.benchmark.empty()) {
            require_file(st.benchmark, "benchmark", "questions");
            auto bench = read_benchmark(st.benchmark);
            std::map<std::string, std::size_t> per_cat, per_form;
            std::map<std::string, std::map<std::string, std::size_t>> matrix;
            for (const auto& q : bench) {
                per_cat[category_name(q.category)]++;
                per_form[form_name(q.form)]++;
                matrix[category_name(q.category)][form_name(q.form)]++;
            }
            ordered_json bj;
            bj["count"] = bench.size();
            ordered_json cj = ordered_json::object(), fj = ordered_json::object(),
                         mj = ordered_json::object();
            for (const auto& [k, v] : per_cat) cj[k] = v;
            for (const auto& [k, v] : per_form) fj[k] = v;
            for (const auto& [c, forms] : matrix) {
                ordered_json row = ordered_json::object();
                for (const auto& [f, v] : forms) row[f] = v;
                mj[c] = row;
            }
            bj["per_category"] = cj;
            bj["per_form"] = fj;
            bj["per_category_form"] = mj;
            out["benchmark"] = bj;
            std::cout << "questions: " << bench.size() << '\n';
            for (const auto& [k, v] : per_cat) std::cout << "  " << k << ": " << v << '\n';
            for (const auto& [k, v] : per_form) std::cout << "  " << k << ": " << v << '\n';
        }
        if (!st.json_out.empty()) save_json_file(st.json_out, out);
    });

    // let --config (a parent option) appear after the subcommand name
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const EndpointError& e) {
        std::cerr << "endpoint error: " << e.what() << '\n';
        return kExitEndpoint;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
