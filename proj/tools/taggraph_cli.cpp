#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "taggraph/pipeline.hpp"

namespace {

using taggraph::BuildReport;

void print_report(const BuildReport& r, bool incremental) {
    std::cout << (incremental ? "upsert" : "build") << " finished in "
              << static_cast<long>(r.elapsed_ms) << " ms\n"
              << "  documents:        " << r.documents << "\n"
              << "  chunks (new):     " << r.chunks << " (" << r.new_chunks << ")\n"
              << "  object tags:      " << r.graph.object_tags << "\n"
              << "  object relations: " << r.graph.object_relations << "\n"
              << "  domain tags:      " << r.graph.domain_tags << "\n"
              << "  domain edges:     " << r.graph.domain_edges << "\n"
              << "  od links:         " << r.graph.od_links << "\n"
              << "  max DAG depth:    " << r.graph.max_depth << "\n"
              << "  unchained tags:   " << r.graph.unchained_tags << "\n"
              << "  fused entries:    " << r.fused_entries << "\n"
              << "  malformed records:" << r.malformed_records << "\n"
              << "  gateway calls:    " << r.gateway_completions << " completions, "
              << r.gateway_embeddings << " embeddings, " << r.gateway_retries << " retries\n";
    if (incremental) {
        std::cout << "  changed domains:  " << r.changed_domains.size() << "\n";
        for (const auto& d : r.changed_domains) std::cout << "    " << d << "\n";
    }
    for (const auto& w : r.corpus_warnings) std::cout << "  warning: " << w << "\n";
    for (const auto& u : r.unfused_tags) std::cout << "  unfused: " << u << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"taggraph: hierarchical tag knowledge graph construction and "
                 "tag-guided retrieval-augmented generation"};
    app.require_subcommand(1);

    std::string config_path = "taggraph.conf";
    app.add_option("-c,--config", config_path, "run configuration file")
        ->capture_default_str();

    std::string corpus_override;
    auto* cmd_build = app.add_subcommand("build", "index a corpus from scratch");
    cmd_build->add_option("--corpus", corpus_override, "corpus directory (overrides config)");

    std::string upsert_corpus;
    auto* cmd_upsert =
        app.add_subcommand("upsert", "incrementally insert a corpus into existing artifacts");
    cmd_upsert->add_option("--corpus", upsert_corpus, "corpus directory with new documents")
        ->required();

    std::string question;
    auto* cmd_query = app.add_subcommand("query", "answer a question over the built index");
    cmd_query->add_option("question", question, "the question to answer")->required();

    std::string description;
    auto* cmd_genq = app.add_subcommand("genq", "generate global questions for a dataset");
    cmd_genq->add_option("--description", description, "dataset description")->required();

    std::string answers_a, answers_b;
    int judges = 1;
    auto* cmd_eval = app.add_subcommand("eval", "pairwise judge two answer files");
    cmd_eval->add_option("--a", answers_a, "answers file A (JSON)")->required();
    cmd_eval->add_option("--b", answers_b, "answers file B (JSON)")->required();
    cmd_eval->add_option("--judges", judges, "number of judges")->capture_default_str();

    std::string format;
    auto* cmd_export = app.add_subcommand("export", "export the graph for visualization");
    cmd_export->add_option("--format", format, "dot | graphml")->required();

    auto* cmd_stats = app.add_subcommand("stats", "print build statistics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        taggraph::RunConfig cfg = taggraph::load_run_config(config_path);
        if (cmd_build->parsed()) {
            if (!corpus_override.empty()) cfg.corpus = corpus_override;
            print_report(taggraph::run_build(cfg), false);
        } else if (cmd_upsert->parsed()) {
            print_report(taggraph::run_upsert(cfg, upsert_corpus), true);
        } else if (cmd_query->parsed()) {
            auto result = taggraph::run_query(cfg, question);
            std::cout << result.answer.text << "\n";
            std::cerr << "result written to "
                      << taggraph::artifact_path(cfg, "query_result.json") << "\n";
        } else if (cmd_genq->parsed()) {
            auto questions = taggraph::run_genq(cfg, description);
            std::cout << questions.size() << " questions written to "
                      << taggraph::artifact_path(cfg, "questions.json") << "\n";
        } else if (cmd_eval->parsed()) {
            auto table = taggraph::run_eval_command(cfg, answers_a, answers_b, judges);
            std::cout << table.to_text();
        } else if (cmd_export->parsed()) {
            std::cout << taggraph::run_export(cfg, format) << "\n";
        } else if (cmd_stats->parsed()) {
            std::cout << taggraph::read_stats(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
