#pragma once

#include <string>
#include <utility>
#include <vector>

#include "taggraph/gateway.hpp"
#include "taggraph/graph.hpp"
#include "taggraph/index.hpp"
#include "taggraph/tokenizer.hpp"

namespace taggraph {

struct QueryContext {
    std::string question;
    std::vector<std::string> retrieved_tags;
    std::vector<std::string> retrieved_summaries;
    std::vector<std::string> chain_tags;
    std::vector<std::string> chain_summaries;
    std::string packed_context;
    std::size_t token_budget = 8000;
    std::size_t packed_token_count = 0;
    std::vector<std::string> context_tag_names;  // tags whose sections were packed
    int chain_tags_without_entry = 0;
};

struct Answer {
    std::string text;
    std::vector<std::string> context_tag_names;
    bool low_context = false;
    std::size_t prompt_tokens = 0;
    std::size_t answer_tokens = 0;
};

struct FusionOutcome {
    std::vector<KnowledgeEntry> entries;
    std::vector<std::string> unfused;  // gateway failures, others proceed
};

// Build-time knowledge fusion: for each worklist tag, assemble its ancestor
// chain context and object-tag neighborhood, complete the fusion prompt,
// embed, and upsert into idx. Tags with an existing entry are re-fused: the
// fresh summary is merged with the stored one via resummarize_entry.
// Worklist is processed leaves-first (descending DAG depth).
FusionOutcome fuse_domain_knowledge(const TagGraph& g, const std::vector<std::string>& worklist,
                                    Gateway& gateway, VectorIndex& idx,
                                    const PromptLibrary& prompts, const LlmCallOptions& opts,
                                    std::size_t max_paths = 8);

// Unconditional merge of old and new summaries through the merge prompt.
// On gateway failure the old summary is kept and the incident recorded.
std::string resummarize_entry(const std::string& tag, const std::string& old_summary,
                              const std::string& new_summary, Gateway& gateway,
                              const PromptLibrary& prompts, const LlmCallOptions& opts,
                              bool* failed = nullptr);

// Embed the question and take the exact top-k entries.
std::pair<std::vector<std::string>, std::vector<std::string>> ret_tag(const std::string& q,
                                                                      const VectorIndex& idx,
                                                                      Gateway& gateway,
                                                                      std::size_t k);

struct RetChainResult {
    std::vector<std::string> tags;
    std::vector<std::string> summaries;
    int skipped_without_entry = 0;
};

// Union of the retrieved tags' ancestor paths minus the retrieved tags
// themselves; root first, then ascending distance to the nearest retrieved
// tag, ties by name. Summaries come from idx; tags without an entry are
// skipped and counted.
RetChainResult ret_chain(const std::vector<std::string>& tags, const TagGraph& g,
                         const VectorIndex& idx, std::size_t max_paths);

struct PackResult {
    std::string text;
    std::size_t included_primary = 0;   // sections taken from s_t
    std::size_t included_secondary = 0; // sections taken from s_c
    std::size_t token_count = 0;
};

// Greedy packing: s_t sections in order, then s_c, stopping before the first
// section that would push the token count past the budget. Sections are
// never split.
PackResult pack_context(const std::vector<std::string>& s_t, const std::vector<std::string>& s_c,
                        std::size_t budget, const Tokenizer& tok);

std::string render_context_section(const std::string& tag, const std::string& summary);

// Generation over the packed context. Empty context still generates, with
// the answer flagged low_context.
Answer answer(const std::string& q, const QueryContext& ctx, Gateway& gateway,
              const PromptLibrary& prompts, const std::string& response_type,
              const LlmCallOptions& opts, const Tokenizer& tok);

}  // namespace taggraph
