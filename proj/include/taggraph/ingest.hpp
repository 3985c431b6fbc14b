#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "taggraph/tokenizer.hpp"

namespace taggraph {

struct Document {
    std::string id;    // derived from the path relative to the corpus root
    std::string path;  // absolute path on disk
    std::string text;
};

struct Chunk {
    std::string id;  // hash(doc_id, seq, text)
    std::string doc_id;
    int seq = 0;
    std::string text;
    std::size_t token_count = 0;
};

struct ChunkingConfig {
    std::size_t chunk_size = 1200;
    std::size_t overlap = 100;

    bool valid() const { return overlap < chunk_size && chunk_size > 0; }
};

struct CorpusWarning {
    std::string path;
    std::string reason;
};

struct Corpus {
    std::vector<Document> documents;
    std::vector<CorpusWarning> warnings;
};

// One Document per .txt/.md/.markdown file under dir, ordered by relative
// path. Non-UTF-8 or unreadable files are skipped with a warning record.
Corpus load_corpus(const std::filesystem::path& dir);

// Token-stride slicing: chunk i starts at token offset i*(chunk_size-overlap)
// and spans chunk_size tokens; the final chunk absorbs the remainder.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkingConfig& cfg,
                                  const Tokenizer& tok);

std::string chunk_id(const std::string& doc_id, int seq, const std::string& text);

// JSON lines, one object {id, doc_id, seq, text, token_count} per chunk.
std::string chunks_to_jsonl(const std::vector<Chunk>& chunks);
std::vector<Chunk> chunks_from_jsonl(const std::string& jsonl);

}  // namespace taggraph
