#include "taggraph/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <set>

#include <nlohmann/json.hpp>

#include "taggraph/parallel.hpp"
#include "taggraph/util.hpp"

namespace taggraph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::int64_t build_timestamp(const RunConfig& cfg) {
    if (const char* v = std::getenv("SOURCE_DATE_EPOCH")) return std::atoll(v);
    // Mock runs are the deterministic offline mode: identical inputs must
    // produce byte-identical artifacts, so no wall clock there.
    if (cfg.backend == "mock") return 0;
    return static_cast<std::int64_t>(std::time(nullptr));
}

DomainTag make_root(const RunConfig& cfg) {
    DomainTag root;
    root.name = canonicalize_name(cfg.root_domain, cfg.language);
    if (!cfg.root_description.empty()) root.descriptions.push_back(cfg.root_description);
    return root;
}

std::string load_examples(const std::string& override_path, const std::string& fallback) {
    if (override_path.empty()) return fallback;
    return read_text_file(override_path);
}

struct Extracted {
    std::vector<ObjectTag> objects;      // merged by name, name-ascending
    std::vector<ObjectRelation> relations;  // merged by (source, target)
    int malformed_records = 0;
};

// Extraction over chunks in a bounded worker pool, merged in chunk order by
// a single committer so results are independent of scheduling.
Extracted extract_chunks(const std::vector<Chunk>& chunks, Gateway& gateway,
                         const RunConfig& cfg, const PromptLibrary& prompts,
                         const DelimiterSet& delims, const std::string& examples) {
    std::vector<ExtractionResult> per_chunk(chunks.size());
    LlmCallOptions opts = cfg.llm_options("extraction");

    parallel_for_index(chunks.size(), cfg.max_workers, [&](std::size_t i) {
        std::string prompt =
            build_extraction_prompt(chunks[i], delims, cfg.language, examples, prompts);
        CompletionRequest req;
        req.prompt = std::move(prompt);
        req.max_output_tokens = opts.max_output_tokens;
        req.temperature = opts.temperature;
        per_chunk[i] = parse_extraction_output(gateway.complete(req), delims, cfg.language);
    });

    std::map<std::string, ObjectTag> objects;
    std::map<std::pair<std::string, std::string>, ObjectRelation> relations;
    Extracted out;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        out.malformed_records += per_chunk[i].malformed_records;
        for (auto& tag : per_chunk[i].tags) {
            tag.source_chunks = {chunks[i].id};
            auto [it, inserted] = objects.try_emplace(tag.name, tag);
            if (!inserted) {
                for (const auto& d : tag.descriptions) {
                    auto& ds = it->second.descriptions;
                    if (std::find(ds.begin(), ds.end(), d) == ds.end()) ds.push_back(d);
                }
                auto& sc = it->second.source_chunks;
                if (std::find(sc.begin(), sc.end(), chunks[i].id) == sc.end()) {
                    sc.push_back(chunks[i].id);
                }
            }
        }
        for (auto& rel : per_chunk[i].relations) {
            auto [it, inserted] = relations.try_emplace({rel.source, rel.target}, rel);
            if (!inserted) {
                for (const auto& d : rel.descriptions) {
                    auto& ds = it->second.descriptions;
                    if (std::find(ds.begin(), ds.end(), d) == ds.end()) ds.push_back(d);
                }
            }
        }
    }
    for (auto& [_, tag] : objects) out.objects.push_back(std::move(tag));
    for (auto& [_, rel] : relations) out.relations.push_back(std::move(rel));
    return out;
}

struct ChainStage {
    std::vector<TagChain> chains;
    std::vector<std::string> unchained;
};

// One chain prompt per object tag needing a chain; unparseable output is
// retried once, then the tag is recorded as unchained.
ChainStage generate_chains(const std::vector<const ObjectTag*>& objects, const DomainTag& root,
                           Gateway& gateway, const RunConfig& cfg, const PromptLibrary& prompts,
                           const DelimiterSet& delims, const std::string& examples) {
    ChainStage stage;
    std::vector<std::optional<TagChain>> results(objects.size());
    LlmCallOptions opts = cfg.llm_options("chain");

    parallel_for_index(objects.size(), cfg.max_workers, [&](std::size_t i) {
        const ObjectTag& obj = *objects[i];
        std::string prompt =
            build_chain_prompt(root, obj, delims, cfg.language, examples, prompts);
        CompletionRequest req;
        req.prompt = prompt;
        req.max_output_tokens = opts.max_output_tokens;
        req.temperature = opts.temperature;
        for (int attempt = 0; attempt < 2; ++attempt) {
            try {
                results[i] = parse_chain_output(gateway.complete(req), delims, root, obj.name,
                                                cfg.language);
                return;
            } catch (const ChainParseError& e) {
                debug_log("chain parse failed for " + obj.name + ": " + e.what());
            }
        }
    });

    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (results[i]) {
            stage.chains.push_back(std::move(*results[i]));
        } else {
            stage.unchained.push_back(objects[i]->name);
        }
    }
    return stage;
}

std::size_t count_unchained(const TagGraph& g) {
    std::set<std::string> linked;
    for (const auto& [key, _] : g.od_links) linked.insert(key.first);
    std::size_t n = 0;
    for (const auto& [name, _] : g.object_nodes) {
        if (!linked.count(name)) ++n;
    }
    return n;
}

json stats_json(const BuildReport& r, const TagGraph& g) {
    return json{
        {"documents", r.documents},
        {"chunks", r.chunks},
        {"new_chunks", r.new_chunks},
        {"object_tags", r.graph.object_tags},
        {"object_relations", r.graph.object_relations},
        {"domain_tags", r.graph.domain_tags},
        {"domain_edges", r.graph.domain_edges},
        {"od_links", r.graph.od_links},
        {"max_dag_depth", r.graph.max_depth},
        {"unchained_tags", r.graph.unchained_tags},
        {"fused_entries", r.fused_entries},
        {"malformed_records", r.malformed_records},
        {"changed_domains", r.changed_domains},
        {"unfused_tags", r.unfused_tags},
        {"corpus_warnings", r.corpus_warnings},
        {"graph_counters",
         {{"rejected_chains", g.counters.rejected_chains},
          {"cycle_rejections", g.counters.cycle_rejections},
          {"dangling_relations", g.counters.dangling_relations},
          {"type_conflicts", g.counters.type_conflicts}}},
        {"gateway",
         {{"completions", r.gateway_completions},
          {"embeddings", r.gateway_embeddings},
          {"retries", r.gateway_retries}}},
    };
}

void write_manifest(const RunConfig& cfg, bool dirty, std::size_t chunk_count) {
    json m{
        {"config_hash", to_hex(run_config_hash(cfg))},
        {"seed", cfg.seed},
        {"backend", cfg.backend},
        {"created_at_unix", build_timestamp(cfg)},
        {"dirty", dirty},
        {"chunk_count", chunk_count},
        {"tokenizer", cfg.tokenizer},
        {"embedding_dim", cfg.embedding_dim},
        {"artifacts", {"chunks.jsonl", "graph.json", "index.json", "stats.json",
                       "run_config.conf"}},
    };
    atomic_write_file(artifact_path(cfg, "manifest.json"), m.dump(2) + "\n");
}

json load_manifest(const RunConfig& cfg) {
    fs::path p = artifact_path(cfg, "manifest.json");
    if (!fs::exists(p)) {
        throw std::runtime_error("no build artifacts in " + cfg.output_dir +
                                 " (run build first)");
    }
    return json::parse(read_text_file(p));
}

void require_clean(const json& manifest) {
    if (manifest.value("dirty", false)) {
        throw std::runtime_error("artifacts are marked dirty (a build failed mid-write); "
                                 "rerun build before using them");
    }
}

struct FinishedBuild {
    TagGraph graph;
    VectorIndex index;
    std::vector<Chunk> all_chunks;
};

// Single writer for every artifact; the manifest flips dirty only around the
// write window so a crash mid-write is detectable.
void commit_artifacts(const RunConfig& cfg, const FinishedBuild& fin, const BuildReport& report) {
    fs::create_directories(cfg.output_dir);
    write_manifest(cfg, /*dirty=*/true, fin.all_chunks.size());
    atomic_write_file(artifact_path(cfg, "chunks.jsonl"), chunks_to_jsonl(fin.all_chunks));
    atomic_write_file(artifact_path(cfg, "graph.json"), graph_to_json(fin.graph));
    fin.index.save(artifact_path(cfg, "index.json"));
    atomic_write_file(artifact_path(cfg, "stats.json"),
                      stats_json(report, fin.graph).dump(2) + "\n");
    save_run_config(artifact_path(cfg, "run_config.conf"), cfg);
    write_manifest(cfg, /*dirty=*/false, fin.all_chunks.size());
}

// Shared core of build and upsert. `existing` is empty for a fresh build.
BuildReport run_pipeline(const RunConfig& cfg, const std::string& corpus_dir,
                         TagGraph existing, VectorIndex idx,
                         std::vector<Chunk> known_chunks, bool fresh_build) {
    auto t0 = Clock::now();
    cfg.validate();
    DelimiterSet delims = cfg.delimiter_set();
    DomainTag root = make_root(cfg);
    PromptLibrary prompts(cfg.prompt_dir);
    auto tokenizer = make_tokenizer(cfg.tokenizer);
    auto gateway = make_gateway(cfg.gateway_config(), delims);

    BuildReport report;

    Corpus corpus = load_corpus(corpus_dir);
    report.documents = corpus.documents.size();
    for (const auto& w : corpus.warnings) {
        report.corpus_warnings.push_back(w.path + ": " + w.reason);
    }

    std::set<std::string> known_ids;
    for (const auto& c : known_chunks) known_ids.insert(c.id);

    std::vector<Chunk> new_chunks;
    for (const auto& doc : corpus.documents) {
        for (auto& chunk : chunk_document(doc, cfg.chunking_config(), *tokenizer)) {
            if (known_ids.insert(chunk.id).second) new_chunks.push_back(std::move(chunk));
        }
    }
    report.new_chunks = new_chunks.size();
    report.chunks = known_chunks.size() + new_chunks.size();

    TagGraph graph = existing.root.empty() ? make_graph(root) : std::move(existing);

    std::vector<std::string> changed;
    std::vector<std::string> unchained_now;
    std::size_t fused = 0;
    std::vector<std::string> unfused;

    if (!new_chunks.empty()) {
        std::string extraction_examples =
            load_examples(cfg.extraction_examples_file, default_extraction_examples(delims));
        Extracted extracted = extract_chunks(new_chunks, *gateway, cfg, prompts, delims,
                                             extraction_examples);
        report.malformed_records = extracted.malformed_records;

        // Chains are generated only for object tags not yet linked into the
        // graph; incremental description growth never re-chains a tag.
        std::set<std::string> already_linked;
        for (const auto& [key, _] : graph.od_links) already_linked.insert(key.first);
        std::vector<const ObjectTag*> needing_chain;
        for (const auto& obj : extracted.objects) {
            if (!already_linked.count(obj.name)) needing_chain.push_back(&obj);
        }
        std::string chain_examples =
            load_examples(cfg.chain_examples_file, default_chain_examples(delims));
        ChainStage chain_stage = generate_chains(needing_chain, root, *gateway, cfg, prompts,
                                                 delims, chain_examples);
        unchained_now = chain_stage.unchained;

        UpsertResult upserted = upsert_tags(extracted.objects, extracted.relations,
                                            chain_stage.chains, graph);
        graph = std::move(upserted.graph);
        changed = std::move(upserted.changed_domains);
    }

    // Fresh builds fuse the whole domain layer; upserts only what changed.
    std::vector<std::string> worklist;
    if (fresh_build) {
        for (const auto& [name, _] : graph.domain_nodes) worklist.push_back(name);
    } else {
        worklist = changed;
    }
    if (idx.meta().dim == 0) {
        IndexMeta meta;
        meta.dim = cfg.embedding_dim;
        meta.tokenizer = cfg.tokenizer;
        meta.delimiters = delims;
        meta.created_at_unix = build_timestamp(cfg);
        idx.meta() = meta;
    }
    FusionOutcome fusion = fuse_domain_knowledge(graph, worklist, *gateway, idx, prompts,
                                                 cfg.llm_options("fusion"), cfg.max_paths);
    fused = fusion.entries.size();
    unfused = fusion.unfused;

    report.graph = compute_stats(graph, count_unchained(graph));
    report.fused_entries = fused;
    report.changed_domains = changed;
    report.unfused_tags = unfused;
    report.gateway_completions = gateway->counters().completions.load();
    report.gateway_embeddings = gateway->counters().embeddings.load();
    report.gateway_retries = gateway->counters().retries.load();

    FinishedBuild fin;
    fin.graph = std::move(graph);
    fin.index = std::move(idx);
    fin.all_chunks = std::move(known_chunks);
    fin.all_chunks.insert(fin.all_chunks.end(), new_chunks.begin(), new_chunks.end());
    commit_artifacts(cfg, fin, report);

    report.elapsed_ms = ms_since(t0);
    return report;
}

}  // namespace

std::string artifact_path(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.output_dir) / name).string();
}

BuildReport run_build(const RunConfig& cfg) {
    return run_pipeline(cfg, cfg.corpus, TagGraph{}, VectorIndex{}, {}, /*fresh_build=*/true);
}

BuildReport run_upsert(const RunConfig& cfg, const std::string& new_corpus) {
    json manifest = load_manifest(cfg);
    require_clean(manifest);
    TagGraph graph = graph_from_json(read_text_file(artifact_path(cfg, "graph.json")));
    VectorIndex idx = VectorIndex::load(artifact_path(cfg, "index.json"));
    std::vector<Chunk> known =
        chunks_from_jsonl(read_text_file(artifact_path(cfg, "chunks.jsonl")));
    return run_pipeline(cfg, new_corpus, std::move(graph), std::move(idx), std::move(known),
                        /*fresh_build=*/false);
}

QueryResult run_query(const RunConfig& cfg, const std::string& question) {
    cfg.validate();
    json manifest = load_manifest(cfg);
    require_clean(manifest);
    TagGraph graph = graph_from_json(read_text_file(artifact_path(cfg, "graph.json")));
    VectorIndex idx = VectorIndex::load(artifact_path(cfg, "index.json"));
    if (idx.empty()) throw std::runtime_error("index is empty (run build first)");

    DelimiterSet delims = cfg.delimiter_set();
    PromptLibrary prompts(cfg.prompt_dir);
    auto tokenizer = make_tokenizer(cfg.tokenizer);
    auto gateway = make_gateway(cfg.gateway_config(), delims);

    QueryResult result;
    result.question = question;

    auto t_embed = Clock::now();
    EmbeddingVector qv = gateway->embed({question}).at(0);
    result.timings.embed_ms = ms_since(t_embed);

    auto t_retrieve = Clock::now();
    auto hits = idx.top_k(qv, cfg.top_k);
    QueryContext ctx;
    ctx.question = question;
    ctx.token_budget = cfg.token_budget;
    for (const auto& [id, _] : hits) {
        ctx.retrieved_tags.push_back(id);
        ctx.retrieved_summaries.push_back(idx.get(id)->summary);
    }
    RetChainResult chain = ret_chain(ctx.retrieved_tags, graph, idx, cfg.max_paths);
    ctx.chain_tags = chain.tags;
    ctx.chain_summaries = chain.summaries;
    ctx.chain_tags_without_entry = chain.skipped_without_entry;

    std::vector<std::string> sections_t, sections_c;
    for (std::size_t i = 0; i < ctx.retrieved_tags.size(); ++i) {
        sections_t.push_back(
            render_context_section(ctx.retrieved_tags[i], ctx.retrieved_summaries[i]));
    }
    for (std::size_t i = 0; i < ctx.chain_tags.size(); ++i) {
        sections_c.push_back(render_context_section(ctx.chain_tags[i], ctx.chain_summaries[i]));
    }
    PackResult packed = pack_context(sections_t, sections_c, ctx.token_budget, *tokenizer);
    ctx.packed_context = packed.text;
    ctx.packed_token_count = packed.token_count;
    for (std::size_t i = 0; i < packed.included_primary; ++i) {
        ctx.context_tag_names.push_back(ctx.retrieved_tags[i]);
    }
    for (std::size_t i = 0; i < packed.included_secondary; ++i) {
        ctx.context_tag_names.push_back(ctx.chain_tags[i]);
    }
    result.timings.retrieve_ms = ms_since(t_retrieve);

    auto t_generate = Clock::now();
    result.answer = answer(question, ctx, *gateway, prompts, cfg.response_type,
                           cfg.llm_options("generation"), *tokenizer);
    result.timings.generate_ms = ms_since(t_generate);

    result.retrieved_tags = ctx.retrieved_tags;
    result.chain_tags = ctx.chain_tags;
    result.packed_token_count = ctx.packed_token_count;

    atomic_write_file(artifact_path(cfg, "query_result.json"), result.to_json());
    return result;
}

std::string QueryResult::to_json() const {
    json j{
        {"question", question},
        {"answer", answer.text},
        {"retrieved_tags", retrieved_tags},
        {"chain_tags", chain_tags},
        {"packed_token_count", packed_token_count},
        {"low_context", answer.low_context},
        {"context_tag_names", answer.context_tag_names},
        {"timings",
         {{"embed_ms", timings.embed_ms},
          {"retrieve_ms", timings.retrieve_ms},
          {"generate_ms", timings.generate_ms}}},
    };
    return j.dump(2) + "\n";
}

std::vector<GeneratedQuestion> run_genq(const RunConfig& cfg, const std::string& description) {
    cfg.validate();
    DelimiterSet delims = cfg.delimiter_set();
    PromptLibrary prompts(cfg.prompt_dir);
    auto gateway = make_gateway(cfg.gateway_config(), delims);

    LlmCallOptions opts = cfg.llm_options("genq");
    CompletionRequest req;
    req.prompt = build_genq_prompt(description, prompts);
    req.max_output_tokens = opts.max_output_tokens;
    req.temperature = opts.temperature;
    auto questions = parse_question_outline(gateway->complete(req));

    json out = json::array();
    for (const auto& q : questions) {
        out.push_back({{"user", q.user},
                       {"user_desc", q.user_desc},
                       {"task", q.task},
                       {"task_desc", q.task_desc},
                       {"number", q.number},
                       {"question", q.question}});
    }
    fs::create_directories(cfg.output_dir);
    atomic_write_file(artifact_path(cfg, "questions.json"), out.dump(2) + "\n");
    return questions;
}

EvalTable run_eval_command(const RunConfig& cfg, const std::string& answers_a_path,
                           const std::string& answers_b_path, int judges) {
    cfg.validate();
    if (judges < 1) throw std::runtime_error("need at least 1 judge");
    auto answers_a = parse_answers_json(read_text_file(answers_a_path));
    auto answers_b = parse_answers_json(read_text_file(answers_b_path));

    DelimiterSet delims = cfg.delimiter_set();
    PromptLibrary prompts(cfg.prompt_dir);
    std::vector<std::string> judge_models = parse_judge_models(cfg);

    std::vector<std::unique_ptr<Gateway>> owned;
    std::vector<Gateway*> panel;
    for (int j = 0; j < judges; ++j) {
        GatewayConfig gc = cfg.gateway_config();
        if (gc.backend == "mock") {
            gc.seed = cfg.seed + static_cast<std::uint64_t>(j);
        } else if (!judge_models.empty()) {
            gc.model = judge_models[static_cast<std::size_t>(j) % judge_models.size()];
        }
        owned.push_back(make_gateway(gc, delims));
        panel.push_back(owned.back().get());
    }

    EvalTable table = run_eval(answers_a, answers_b, panel, prompts,
                               cfg.llm_options("judge"), cfg.max_workers);
    fs::create_directories(cfg.output_dir);
    atomic_write_file(artifact_path(cfg, "eval.json"), table.to_json());
    return table;
}

std::string run_export(const RunConfig& cfg, const std::string& format) {
    json manifest = load_manifest(cfg);
    require_clean(manifest);
    TagGraph graph = graph_from_json(read_text_file(artifact_path(cfg, "graph.json")));

    ExportFormat fmt;
    std::string out_name;
    if (format == "dot") {
        fmt = ExportFormat::dot;
        out_name = "graph.dot";
    } else if (format == "graphml") {
        fmt = ExportFormat::graphml;
        out_name = "graph.graphml";
    } else {
        throw std::runtime_error("unknown export format: " + format + " (want dot|graphml)");
    }
    std::string path = artifact_path(cfg, out_name);
    atomic_write_file(path, export_graph(graph, fmt));
    return path;
}

std::string read_stats(const RunConfig& cfg) {
    return read_text_file(artifact_path(cfg, "stats.json"));
}

}  // namespace taggraph
