#include "taggraph/ingest.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "taggraph/util.hpp"

namespace taggraph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool supported_extension(const fs::path& p) {
    std::string ext = to_lower_ascii(p.extension().string());
    return ext == ".txt" || ext == ".md" || ext == ".markdown";
}

}  // namespace

Corpus load_corpus(const fs::path& dir) {
    if (!fs::exists(dir) || !fs::is_directory(dir)) {
        throw std::runtime_error("corpus directory not readable: " + dir.string());
    }

    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && supported_extension(entry.path())) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(), [&](const fs::path& a, const fs::path& b) {
        return a.lexically_relative(dir).generic_string() <
               b.lexically_relative(dir).generic_string();
    });

    Corpus corpus;
    for (const auto& p : files) {
        std::string rel = p.lexically_relative(dir).generic_string();
        std::string text;
        try {
            text = read_text_file(p);
        } catch (const std::exception& e) {
            corpus.warnings.push_back({rel, e.what()});
            continue;
        }
        if (!is_valid_utf8(text)) {
            corpus.warnings.push_back({rel, "not valid UTF-8, skipped"});
            continue;
        }
        if (trim(text).empty()) {
            corpus.warnings.push_back({rel, "empty after whitespace trim, skipped"});
            continue;
        }
        corpus.documents.push_back({rel, fs::absolute(p).string(), std::move(text)});
    }
    return corpus;
}

std::string chunk_id(const std::string& doc_id, int seq, const std::string& text) {
    std::uint64_t h = fnv1a64(doc_id);
    h = fnv1a64(std::to_string(seq), h);
    h = fnv1a64(text, h);
    return to_hex(h);
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkingConfig& cfg,
                                  const Tokenizer& tok) {
    if (!cfg.valid()) throw std::runtime_error("invalid chunking config");

    std::vector<Chunk> chunks;
    const auto spans = tok.tokenize(doc.text);
    const std::size_t n = spans.size();
    if (n == 0) return chunks;

    const std::size_t stride = cfg.chunk_size - cfg.overlap;
    std::size_t offset = 0;
    int seq = 0;
    while (true) {
        const bool last = offset + cfg.chunk_size >= n;
        const std::size_t end = last ? n : offset + cfg.chunk_size;
        const std::size_t byte_begin = spans[offset].begin;
        const std::size_t byte_end = spans[end - 1].end;

        Chunk c;
        c.doc_id = doc.id;
        c.seq = seq++;
        c.text = doc.text.substr(byte_begin, byte_end - byte_begin);
        c.token_count = end - offset;
        c.id = chunk_id(c.doc_id, c.seq, c.text);
        chunks.push_back(std::move(c));

        if (last) break;
        offset += stride;
    }
    return chunks;
}

std::string chunks_to_jsonl(const std::vector<Chunk>& chunks) {
    std::string out;
    for (const auto& c : chunks) {
        json j{{"id", c.id},
               {"doc_id", c.doc_id},
               {"seq", c.seq},
               {"text", c.text},
               {"token_count", c.token_count}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<Chunk> chunks_from_jsonl(const std::string& jsonl) {
    std::vector<Chunk> out;
    for (const auto& line : split_on(jsonl, "\n")) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        Chunk c;
        c.id = j.at("id").get<std::string>();
        c.doc_id = j.at("doc_id").get<std::string>();
        c.seq = j.at("seq").get<int>();
        c.text = j.at("text").get<std::string>();
        c.token_count = j.at("token_count").get<std::size_t>();
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace taggraph
