#pragma once

#include <string>
#include <vector>

#include "taggraph/config.hpp"
#include "taggraph/eval.hpp"
#include "taggraph/graph.hpp"
#include "taggraph/index.hpp"
#include "taggraph/rag.hpp"

namespace taggraph {

struct BuildReport {
    std::size_t documents = 0;
    std::size_t chunks = 0;
    std::size_t new_chunks = 0;  // after dedupe (upsert)
    GraphStats graph;
    std::size_t fused_entries = 0;
    int malformed_records = 0;
    std::vector<std::string> changed_domains;
    std::vector<std::string> unfused_tags;
    std::vector<std::string> corpus_warnings;
    std::uint64_t gateway_completions = 0;
    std::uint64_t gateway_embeddings = 0;
    std::uint64_t gateway_retries = 0;
    double elapsed_ms = 0.0;
};

struct QueryTimings {
    double embed_ms = 0.0;
    double retrieve_ms = 0.0;
    double generate_ms = 0.0;
};

struct QueryResult {
    std::string question;
    Answer answer;
    std::vector<std::string> retrieved_tags;
    std::vector<std::string> chain_tags;
    std::size_t packed_token_count = 0;
    QueryTimings timings;

    std::string to_json() const;
};

// Full pipeline: ingest -> extract -> organize -> link -> fuse -> index.
// Writes chunks.jsonl, graph.json, index.json, stats.json, run_config.conf
// and manifest.json under cfg.output_dir. Nothing is written until every
// stage has succeeded.
BuildReport run_build(const RunConfig& cfg);

// Incremental insertion from a new corpus directory over existing artifacts:
// chunk-id dedupe, chain generation for unlinked object tags only, and
// re-fusion restricted to the changed domains.
BuildReport run_upsert(const RunConfig& cfg, const std::string& new_corpus);

// ret_tag -> ret_chain -> pack -> generate over the stored artifacts; writes
// query_result.json.
QueryResult run_query(const RunConfig& cfg, const std::string& question);

std::vector<GeneratedQuestion> run_genq(const RunConfig& cfg, const std::string& description);

EvalTable run_eval_command(const RunConfig& cfg, const std::string& answers_a_path,
                           const std::string& answers_b_path, int judges);

// Writes graph.dot or graph.graphml; refuses dirty artifacts.
std::string run_export(const RunConfig& cfg, const std::string& format);

std::string read_stats(const RunConfig& cfg);

std::string artifact_path(const RunConfig& cfg, const std::string& name);

}  // namespace taggraph
