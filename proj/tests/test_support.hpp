#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "taggraph/config.hpp"
#include "taggraph/graph.hpp"
#include "taggraph/util.hpp"

namespace test_support {

inline std::string fixtures_dir() {
    return TAGGRAPH_TEST_FIXTURES;
}

// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("taggraph_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string sub(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

// Mock-backed config over the two-document fixture corpus. Small chunks and
// dimensions keep runs fast; seed 42 everywhere.
inline taggraph::RunConfig fixture_config(const std::string& output_dir) {
    taggraph::RunConfig cfg;
    cfg.corpus = fixtures_dir() + "/corpus";
    cfg.output_dir = output_dir;
    cfg.root_domain = "AGRICULTURE";
    cfg.root_description =
        "Agriculture is the cultivation of crops and rearing of animals for food and fiber.";
    cfg.backend = "mock";
    cfg.embedding_dim = 32;
    cfg.chunk_size = 120;
    cfg.chunk_overlap = 20;
    cfg.seed = 42;
    cfg.max_workers = 4;
    return cfg;
}

// Structural equality with descriptions compared as multisets.
inline taggraph::TagGraph normalized_graph(taggraph::TagGraph g) {
    for (auto& [_, node] : g.domain_nodes) std::sort(node.descriptions.begin(), node.descriptions.end());
    for (auto& [_, node] : g.object_nodes) {
        std::sort(node.descriptions.begin(), node.descriptions.end());
        std::sort(node.source_chunks.begin(), node.source_chunks.end());
    }
    for (auto& [_, descs] : g.object_edges) std::sort(descs.begin(), descs.end());
    g.counters = taggraph::GraphCounters{};
    return g;
}

inline bool same_graph(const taggraph::TagGraph& a, const taggraph::TagGraph& b) {
    return taggraph::graph_to_json(normalized_graph(a)) ==
           taggraph::graph_to_json(normalized_graph(b));
}

}  // namespace test_support
