#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "taggraph/ingest.hpp"
#include "taggraph/prompts.hpp"

namespace taggraph {

struct ObjectTag {
    std::string name;  // canonicalized
    std::string tag_type;
    std::vector<std::string> descriptions;
    std::vector<std::string> source_chunks;
};

struct ObjectRelation {
    std::string source;
    std::string target;
    std::vector<std::string> descriptions;
};

struct DomainTag {
    std::string name;  // canonicalized
    std::vector<std::string> descriptions;
};

// Ordered root-to-subdomain path of domain tags produced for one object tag.
// tags[0] is always the root domain.
struct TagChain {
    std::vector<DomainTag> tags;
    std::string link_description;  // terminal subdomain -> object tag
    std::string object_tag;
};

struct ExtractionResult {
    std::vector<ObjectTag> tags;
    std::vector<ObjectRelation> relations;
    int malformed_records = 0;
};

struct ChainParseError : std::runtime_error {
    explicit ChainParseError(const std::string& what, std::string raw)
        : std::runtime_error(what), raw_output(std::move(raw)) {}
    std::string raw_output;
};

// Trim, collapse internal whitespace, uppercase ASCII when language is
// English. Idempotent. Empty after trim -> error.
std::string canonicalize_name(const std::string& raw, const std::string& language);

std::string build_extraction_prompt(const Chunk& chunk, const DelimiterSet& delims,
                                    const std::string& language, const std::string& examples,
                                    const PromptLibrary& prompts);

std::string build_chain_prompt(const DomainTag& root, const ObjectTag& obj,
                               const DelimiterSet& delims, const std::string& language,
                               const std::string& examples, const PromptLibrary& prompts);

// Splits on the record delimiter up to the completion delimiter. Records with
// head "keyword" become tags, head "relationship" become relations; anything
// else is counted as malformed and skipped. Never throws on bad input.
ExtractionResult parse_extraction_output(const std::string& text, const DelimiterSet& delims,
                                         const std::string& language = "English");

// Chain segment split on the inference delimiter, each element split on the
// explanation delimiter into (name, description); the trailing tuple field is
// the link description. A chain not starting at root gets root prepended.
// Throws ChainParseError (carrying the raw text) when no valid chain remains.
TagChain parse_chain_output(const std::string& text, const DelimiterSet& delims,
                            const DomainTag& root, const std::string& obj_name,
                            const std::string& language = "English");

// Inverse of parse_extraction_output for well-formed inputs; also the grammar
// the mock backend emits.
std::string serialize_extraction_records(const std::vector<ObjectTag>& tags,
                                         const std::vector<ObjectRelation>& relations,
                                         const DelimiterSet& delims);

std::string serialize_chain_output(const TagChain& chain, const DelimiterSet& delims);

}  // namespace taggraph
