#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taggraph/embedding.hpp"
#include "taggraph/prompts.hpp"

namespace taggraph {

struct KnowledgeEntry {
    std::string id;  // domain tag name
    std::string summary;
    EmbeddingVector vector;  // stored unit-normalized
};

struct IndexMeta {
    int dim = 0;
    std::string tokenizer = "simple";
    DelimiterSet delimiters;
    std::int64_t created_at_unix = 0;
};

// dot(a,b)/(|a||b|). Zero vector or dimension mismatch -> error.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Exact-scan vector store over domain knowledge summaries. Vectors are
// normalized on insert, so cosine reduces to a dot product at query time.
class VectorIndex {
public:
    VectorIndex() = default;
    explicit VectorIndex(IndexMeta meta) : meta_(std::move(meta)) {}

    const IndexMeta& meta() const { return meta_; }
    IndexMeta& meta() { return meta_; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    // Insert or replace by id. Dimension mismatch -> error, index unchanged.
    void upsert(const KnowledgeEntry& entry);

    std::optional<KnowledgeEntry> get(const std::string& id) const;
    std::vector<std::string> ids() const { return ids_; }

    // Exact top-k by cosine descending, ties broken by ascending id. Returns
    // fewer than k only when the index is smaller than k.
    std::vector<std::pair<std::string, double>> top_k(const EmbeddingVector& query,
                                                      std::size_t k) const;

    std::string to_json() const;
    static VectorIndex from_json(const std::string& text);

    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

private:
    IndexMeta meta_;
    std::vector<std::string> ids_;       // ascending
    std::vector<std::string> summaries_; // parallel to ids_
    Eigen::MatrixXd vectors_;            // one row per entry, parallel to ids_
    std::map<std::string, std::size_t> row_of_;
};

}  // namespace taggraph
