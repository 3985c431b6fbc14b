#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "taggraph/index.hpp"
#include "test_support.hpp"

using namespace taggraph;
using test_support::TempDir;

namespace {

EmbeddingVector vec(std::initializer_list<double> values) {
    EmbeddingVector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

KnowledgeEntry entry(const std::string& id, EmbeddingVector v,
                     const std::string& summary = "") {
    KnowledgeEntry e;
    e.id = id;
    e.summary = summary.empty() ? "summary of " + id : summary;
    e.vector = std::move(v);
    return e;
}

EmbeddingVector random_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    EmbeddingVector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    return normalized(v);
}

// Brute-force oracle: plain-loop cosine scores, full stable sort.
std::vector<std::pair<std::string, double>> brute_force_top_k(const VectorIndex& idx,
                                                              const EmbeddingVector& q,
                                                              std::size_t k) {
    double qs = 0.0;
    for (Eigen::Index d = 0; d < q.size(); ++d) qs += q[d] * q[d];
    double qn = std::sqrt(qs);

    std::vector<std::pair<std::string, double>> scored;
    for (const auto& id : idx.ids()) {
        EmbeddingVector v = idx.get(id)->vector;
        double dot = 0.0;
        for (Eigen::Index d = 0; d < v.size(); ++d) dot += v[d] * (q[d] / qn);
        scored.emplace_back(id, dot);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

}  // namespace

TEST_CASE("cosine closed forms") {
    auto v = vec({3.0, 4.0});
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cosine(vec({1, 0}), vec({0, 1})) == doctest::Approx(0.0));
    CHECK(cosine(vec({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}), vec({1, 0})) ==
          doctest::Approx(0.7071).epsilon(1e-4));
    CHECK_THROWS(cosine(vec({0, 0}), vec({1, 0})));
    CHECK_THROWS(cosine(vec({1, 0}), vec({1, 0, 0})));
}

TEST_CASE("upsert stores, replaces, and rejects bad dimensions") {
    VectorIndex idx;
    idx.upsert(entry("a", vec({1, 0}), "first text"));
    CHECK(idx.size() == 1);
    CHECK(idx.get("a")->summary == "first text");

    idx.upsert(entry("a", vec({0, 1}), "second text"));
    CHECK(idx.size() == 1);  // replace, not insert
    CHECK(idx.get("a")->summary == "second text");

    CHECK_THROWS(idx.upsert(entry("b", vec({1, 0, 0}))));
    CHECK(idx.size() == 1);  // unchanged after the failed insert
    CHECK_THROWS(idx.upsert(entry("z", vec({0, 0}))));  // zero vector
}

TEST_CASE("top_k on an orthogonal basis") {
    VectorIndex idx;
    idx.upsert(entry("e1", vec({1, 0})));
    idx.upsert(entry("e2", vec({0, 1})));

    auto hits = idx.top_k(vec({1, 0}), 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].first == "e1");
    CHECK(hits[0].second == doctest::Approx(1.0).epsilon(1e-9));

    auto all = idx.top_k(vec({1, 0}), 5);
    CHECK(all.size() == 2);  // truncation to index size

    CHECK(VectorIndex{}.top_k(vec({1, 0}), 3).empty());
    CHECK_THROWS(idx.top_k(vec({1, 0}), 0));
}

TEST_CASE("top_k tie order is ascending id") {
    VectorIndex idx;
    idx.upsert(entry("bravo", vec({1, 0})));
    idx.upsert(entry("alpha", vec({1, 0})));
    idx.upsert(entry("zulu", vec({0, 1})));
    auto hits = idx.top_k(vec({1, 0}), 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].first == "alpha");
    CHECK(hits[1].first == "bravo");
    CHECK(hits[2].first == "zulu");
}

TEST_CASE("top_k matches the brute-force oracle on random data") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        int dim = 2 + static_cast<int>(rng() % 63);
        std::size_t n = 1 + rng() % 200;
        std::size_t k = 1 + rng() % 10;

        VectorIndex idx;
        for (std::size_t i = 0; i < n; ++i) {
            idx.upsert(entry("id" + std::to_string(i), random_unit(rng, dim)));
        }
        if (rng() % 4 == 0 && n >= 2) {  // force exact ties
            idx.upsert(entry("id0", idx.get("id1")->vector));
        }
        EmbeddingVector q = random_unit(rng, dim);

        auto expect = brute_force_top_k(idx, q, k);
        auto got = idx.top_k(q, k);
        REQUIRE(got.size() == expect.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].first == expect[i].first);
            CHECK(got[i].second == expect[i].second);  // bit-exact
        }
    }
}

TEST_CASE("save/load round trip") {
    TempDir dir("index");

    SUBCASE("empty index") {
        VectorIndex idx;
        idx.meta().dim = 4;
        idx.save(dir.sub("empty.json"));
        auto back = VectorIndex::load(dir.sub("empty.json"));
        CHECK(back.size() == 0);
        CHECK(back.meta().dim == 4);
    }

    SUBCASE("10 entries preserve top_k exactly") {
        std::mt19937_64 rng(9);
        VectorIndex idx;
        for (int i = 0; i < 10; ++i) {
            idx.upsert(entry("e" + std::to_string(i), random_unit(rng, 16)));
        }
        idx.save(dir.sub("idx.json"));
        auto back = VectorIndex::load(dir.sub("idx.json"));
        REQUIRE(back.size() == 10);

        for (int q = 0; q < 5; ++q) {
            EmbeddingVector query = random_unit(rng, 16);
            auto a = idx.top_k(query, 5);
            auto b = back.top_k(query, 5);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a[i].first == b[i].first);
                CHECK(a[i].second == b[i].second);  // to the last serialized digit
            }
        }
        // byte-stable re-save
        CHECK(back.to_json() == idx.to_json());
    }
}

TEST_CASE("load rejects corrupted files") {
    TempDir dir("index_bad");
    VectorIndex idx;
    idx.upsert(entry("a", vec({1, 0})));
    idx.save(dir.sub("idx.json"));

    std::string text = read_text_file(dir.sub("idx.json"));

    SUBCASE("wrong dimension meta") {
        std::string bad = text;
        auto pos = bad.find("\"dim\": 2");
        REQUIRE(pos != std::string::npos);
        bad.replace(pos, 8, "\"dim\": 3");
        atomic_write_file(dir.sub("bad.json"), bad);
        CHECK_THROWS(VectorIndex::load(dir.sub("bad.json")));
    }
    SUBCASE("not json") {
        atomic_write_file(dir.sub("bad.json"), "not json at all");
        CHECK_THROWS(VectorIndex::load(dir.sub("bad.json")));
    }
}
