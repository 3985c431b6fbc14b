#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taggraph/gateway.hpp"
#include "taggraph/ingest.hpp"
#include "taggraph/prompts.hpp"
#include "taggraph/rag.hpp"

namespace taggraph {

// Everything a run needs, serializable to one commented key=value file and
// persisted alongside build artifacts.
struct RunConfig {
    std::string corpus;
    std::string output_dir = "out";
    std::string root_domain;
    std::string root_description;
    std::string language = "English";
    std::string tokenizer = "simple";

    std::size_t chunk_size = 1200;
    std::size_t chunk_overlap = 100;

    std::string backend = "mock";
    std::string base_url = "http://localhost:8080/v1";
    std::string model = "qwen3-4b";
    std::string embedding_model = "bge-large-en-v1.5";
    int embedding_dim = 1024;
    int timeout_ms = 30000;
    int max_retries = 3;
    int backoff_ms = 250;
    int max_concurrent = 4;
    std::string api_key_env = "TAGGRAPH_API_KEY";

    int max_output_tokens = 1024;
    // Per-template overrides; 0 means "use max_output_tokens".
    int max_output_tokens_extraction = 0;
    int max_output_tokens_chain = 0;
    int max_output_tokens_fusion = 0;
    int max_output_tokens_merge = 0;
    int max_output_tokens_generation = 0;
    int max_output_tokens_judge = 0;
    int max_output_tokens_genq = 0;
    double temperature = 0.0;

    std::size_t top_k = 3;
    std::size_t token_budget = 8000;
    std::size_t max_paths = 8;
    std::uint64_t seed = 42;
    std::string response_type = "Multiple Paragraphs";
    std::size_t max_workers = 4;

    std::string delim_tuple = "<|>";
    std::string delim_record = "##";
    std::string delim_completion = "<|COMPLETE|>";
    std::string delim_explanation = "::";
    std::string delim_inference = "->";

    std::string prompt_dir;
    std::string extraction_examples_file;
    std::string chain_examples_file;
    std::string judge_models;  // comma-separated, http backend only

    GatewayConfig gateway_config() const;
    ChunkingConfig chunking_config() const;
    DelimiterSet delimiter_set() const;
    LlmCallOptions llm_options(const std::string& template_name) const;

    void validate() const;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

// Canonical serialization (no comments) and its hash; used by the manifest.
std::string run_config_canonical(const RunConfig& cfg);
std::uint64_t run_config_hash(const RunConfig& cfg);

std::vector<std::string> parse_judge_models(const RunConfig& cfg);

}  // namespace taggraph
