#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "taggraph/pipeline.hpp"
#include "test_support.hpp"

using namespace taggraph;
using test_support::TempDir;
using test_support::fixture_config;
using test_support::fixtures_dir;
using test_support::same_graph;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    return read_text_file(path);
}

void copy_corpus_into(const std::string& src, const fs::path& dst) {
    fs::create_directories(dst);
    for (const auto& entry : fs::directory_iterator(src)) {
        fs::copy_file(entry.path(), dst / entry.path().filename(),
                      fs::copy_options::overwrite_existing);
    }
}

}  // namespace

TEST_CASE("build produces all artifacts with non-trivial stats") {
    TempDir out("build");
    auto cfg = fixture_config(out.str());
    auto report = run_build(cfg);

    for (const char* name : {"chunks.jsonl", "graph.json", "index.json", "stats.json",
                             "manifest.json", "run_config.conf"}) {
        CHECK(fs::exists(artifact_path(cfg, name)));
    }
    CHECK(report.documents == 2);
    CHECK(report.chunks > 0);
    CHECK(report.graph.object_tags > 0);
    CHECK(report.graph.domain_tags > 1);
    CHECK(report.graph.od_links > 0);
    CHECK(report.fused_entries == report.graph.domain_tags);  // full build fuses everything
    CHECK(report.gateway_completions > 0);

    json stats = json::parse(slurp(artifact_path(cfg, "stats.json")));
    CHECK(stats.at("object_tags").get<int>() > 0);
    CHECK(stats.at("domain_tags").get<int>() > 0);

    json manifest = json::parse(slurp(artifact_path(cfg, "manifest.json")));
    CHECK(manifest.at("dirty").get<bool>() == false);
    CHECK(manifest.at("created_at_unix").get<int>() == 0);  // mock = deterministic mode

    // the graph on disk satisfies its invariants
    TagGraph g = graph_from_json(slurp(artifact_path(cfg, "graph.json")));
    CHECK(is_acyclic(g));
}

TEST_CASE("identical rebuild is byte-identical") {
    TempDir out1("det1"), out2("det2");
    auto cfg1 = fixture_config(out1.str());
    auto cfg2 = fixture_config(out2.str());
    run_build(cfg1);
    run_build(cfg2);

    for (const char* name : {"chunks.jsonl", "graph.json", "index.json"}) {
        CHECK(slurp(artifact_path(cfg1, name)) == slurp(artifact_path(cfg2, name)));
    }
}

TEST_CASE("unreachable http gateway fails without leaving artifacts") {
    TempDir out("fail");
    auto cfg = fixture_config(out.str());
    cfg.backend = "http";
    cfg.base_url = "http://127.0.0.1:9/v1";  // nothing listens here
    cfg.max_retries = 0;
    cfg.timeout_ms = 200;

    CHECK_THROWS(run_build(cfg));
    CHECK(!fs::exists(artifact_path(cfg, "manifest.json")));
    CHECK(!fs::exists(artifact_path(cfg, "graph.json")));
}

TEST_CASE("upsert of an already-ingested corpus is a no-op") {
    TempDir out("noop");
    auto cfg = fixture_config(out.str());
    run_build(cfg);

    auto report = run_upsert(cfg, cfg.corpus);
    CHECK(report.new_chunks == 0);
    CHECK(report.changed_domains.empty());
    CHECK(report.gateway_completions == 0);  // no extraction, no chains, no fusion
    CHECK(report.gateway_embeddings == 0);
}

TEST_CASE("build(A then upsert B) equals build(A union B) on the graph") {
    TempDir out_ab("union"), out_inc("incr"), combined("combined_corpus");
    copy_corpus_into(fixtures_dir() + "/corpus", combined.path());
    copy_corpus_into(fixtures_dir() + "/corpus_b", combined.path());

    auto cfg_union = fixture_config(out_ab.str());
    cfg_union.corpus = combined.str();
    run_build(cfg_union);

    auto cfg_inc = fixture_config(out_inc.str());
    run_build(cfg_inc);
    auto report = run_upsert(cfg_inc, fixtures_dir() + "/corpus_b");
    CHECK(report.new_chunks > 0);
    CHECK(!report.changed_domains.empty());

    TagGraph g_union = graph_from_json(slurp(artifact_path(cfg_union, "graph.json")));
    TagGraph g_inc = graph_from_json(slurp(artifact_path(cfg_inc, "graph.json")));
    CHECK(same_graph(g_union, g_inc));
}

TEST_CASE("cross-domain upsert links new content under the existing root") {
    TempDir out("cross");
    auto cfg = fixture_config(out.str());
    auto before = run_build(cfg);

    auto report = run_upsert(cfg, fixtures_dir() + "/corpus_cross");
    CHECK(report.new_chunks > 0);
    CHECK(!report.changed_domains.empty());
    CHECK(report.graph.object_tags > before.graph.object_tags);

    TagGraph g = graph_from_json(slurp(artifact_path(cfg, "graph.json")));
    CHECK(is_acyclic(g));
    CHECK(g.root == "AGRICULTURE");
    for (const auto& [name, _] : g.domain_nodes) {
        CHECK(!ancestor_chains(name, g, 1).empty());  // still rooted
    }
    // only the changed domains were re-fused
    CHECK(report.fused_entries == report.changed_domains.size() - report.unfused_tags.size());
}

TEST_CASE("upsert without prior artifacts fails") {
    TempDir out("nothing");
    auto cfg = fixture_config(out.str());
    CHECK_THROWS(run_upsert(cfg, cfg.corpus));
}

TEST_CASE("query returns the result contract") {
    TempDir out("query");
    auto cfg = fixture_config(out.str());
    run_build(cfg);

    auto result = run_query(cfg, "How does irrigation interact with soil salinity?");
    CHECK(!result.answer.text.empty());
    CHECK(result.retrieved_tags.size() <= 3);  // default k
    CHECK(result.retrieved_tags.size() >= 1);
    CHECK(result.timings.embed_ms >= 0.0);
    CHECK(result.timings.retrieve_ms >= 0.0);
    CHECK(result.timings.generate_ms >= 0.0);

    // chain tags are disjoint from retrieved tags
    for (const auto& c : result.chain_tags) {
        CHECK(std::find(result.retrieved_tags.begin(), result.retrieved_tags.end(), c) ==
              result.retrieved_tags.end());
    }

    json rj = json::parse(slurp(artifact_path(cfg, "query_result.json")));
    for (const char* key : {"question", "answer", "retrieved_tags", "chain_tags",
                            "packed_token_count", "timings"}) {
        CHECK(rj.contains(key));
    }
    CHECK(rj.at("timings").contains("embed_ms"));

    // determinism of the answer bytes
    auto again = run_query(cfg, "How does irrigation interact with soil salinity?");
    CHECK(again.answer.text == result.answer.text);
}

TEST_CASE("query before build fails with guidance") {
    TempDir out("query_nothing");
    auto cfg = fixture_config(out.str());
    CHECK_THROWS_WITH_AS(run_query(cfg, "anything"), doctest::Contains("run build first"),
                         std::runtime_error);
}

TEST_CASE("export writes dot and graphml, refuses dirty artifacts") {
    TempDir out("export");
    auto cfg = fixture_config(out.str());
    run_build(cfg);

    std::string dot_path = run_export(cfg, "dot");
    CHECK(fs::exists(dot_path));
    CHECK(slurp(dot_path).rfind("digraph", 0) == 0);

    std::string gml_path = run_export(cfg, "graphml");
    CHECK(fs::exists(gml_path));

    json stats = json::parse(slurp(artifact_path(cfg, "stats.json")));
    std::size_t expected_nodes = stats.at("object_tags").get<std::size_t>() +
                                 stats.at("domain_tags").get<std::size_t>();
    std::string xml = slurp(gml_path);
    std::size_t nodes = 0;
    for (std::size_t p = xml.find("<node "); p != std::string::npos;
         p = xml.find("<node ", p + 1)) {
        ++nodes;
    }
    CHECK(nodes == expected_nodes);

    CHECK_THROWS(run_export(cfg, "svg"));

    // dirty manifest gate
    json manifest = json::parse(slurp(artifact_path(cfg, "manifest.json")));
    manifest["dirty"] = true;
    atomic_write_file(artifact_path(cfg, "manifest.json"), manifest.dump(2) + "\n");
    CHECK_THROWS_WITH_AS(run_export(cfg, "dot"), doctest::Contains("dirty"),
                         std::runtime_error);
}

TEST_CASE("genq command writes 125 questions") {
    TempDir out("genq");
    auto cfg = fixture_config(out.str());
    auto questions = run_genq(cfg, "A corpus about field agronomy.");
    CHECK(questions.size() == 125);
    json qj = json::parse(slurp(artifact_path(cfg, "questions.json")));
    CHECK(qj.size() == 125);
    CHECK(qj[0].contains("user"));
    CHECK(qj[0].contains("task"));
    CHECK(qj[0].contains("question"));
}

TEST_CASE("eval command produces a table and eval.json") {
    TempDir out("evalcmd");
    auto cfg = fixture_config(out.str());

    std::vector<QaPair> a = {{"q1", "first answer"}, {"q2", "second answer"}};
    std::vector<QaPair> b = {{"q1", "rival answer"}, {"q2", "rival two"}};
    std::string pa = out.sub("a.json"), pb = out.sub("b.json");
    atomic_write_file(pa, answers_to_json(a));
    atomic_write_file(pb, answers_to_json(b));

    auto table = run_eval_command(cfg, pa, pb, 3);
    CHECK(table.total_comparisons == 12);  // 2 questions x 3 judges x 2 orders
    CHECK(fs::exists(artifact_path(cfg, "eval.json")));

    CHECK_THROWS(run_eval_command(cfg, pa, pb, 0));
}

TEST_CASE("run config round trips through its file format") {
    TempDir out("config");
    auto cfg = fixture_config(out.str());
    cfg.judge_models = "alpha , beta";
    std::string path = out.sub("roundtrip.conf");
    save_run_config(path, cfg);
    RunConfig back = load_run_config(path);
    CHECK(run_config_canonical(back) == run_config_canonical(cfg));
    CHECK(run_config_hash(back) == run_config_hash(cfg));
    CHECK(parse_judge_models(back) == std::vector<std::string>{"alpha", "beta"});

    std::ofstream(path, std::ios::app) << "\nbogus_key = 1\n";
    CHECK_THROWS(load_run_config(path));
}

TEST_CASE("config validation catches bad values") {
    auto cfg = fixture_config("/tmp/unused");
    cfg.root_domain = "";
    CHECK_THROWS(cfg.validate());

    cfg = fixture_config("/tmp/unused");
    cfg.chunk_overlap = cfg.chunk_size;
    CHECK_THROWS(cfg.validate());

    cfg = fixture_config("/tmp/unused");
    cfg.delim_tuple = cfg.delim_record;
    CHECK_THROWS(cfg.validate());

    cfg = fixture_config("/tmp/unused");
    cfg.backend = "carrier-pigeon";
    CHECK_THROWS(cfg.validate());
}
