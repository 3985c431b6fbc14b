#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "taggraph/extract.hpp"
#include "test_support.hpp"

using namespace taggraph;

namespace {

const DelimiterSet kDelims{};

Chunk make_chunk(const std::string& text) {
    Chunk c;
    c.id = "chunk-1";
    c.doc_id = "doc";
    c.seq = 0;
    c.text = text;
    c.token_count = 2;
    return c;
}

std::string random_name(std::mt19937_64& rng) {
    static const char* words[] = {"WHEAT", "RUST", "SOIL", "CANOPY", "ROTATION",
                                  "NITROGEN", "HARVEST", "PEST", "YIELD", "BIOMASS"};
    std::string n = words[rng() % 10];
    n += " ";
    n += words[rng() % 10];
    n += std::to_string(rng() % 100);
    return n;
}

std::string random_text(std::mt19937_64& rng) {
    std::string s = "free text";
    for (int i = 0; i < static_cast<int>(rng() % 6); ++i) {
        s += " token" + std::to_string(rng() % 1000);
    }
    return s;
}

}  // namespace

TEST_CASE("delimiter validation") {
    CHECK_NOTHROW(kDelims.validate());

    DelimiterSet bad = kDelims;
    bad.record = "";
    CHECK_THROWS(bad.validate());

    bad = kDelims;
    bad.explanation = "<|";  // substring of "<|>"
    CHECK_THROWS(bad.validate());
}

TEST_CASE("canonicalize_name") {
    CHECK(canonicalize_name("  wheat  rust ", "English") == "WHEAT RUST");
    CHECK(canonicalize_name("WHEAT RUST", "English") == "WHEAT RUST");  // idempotent
    CHECK(canonicalize_name("café", "French") == "café");
    CHECK(canonicalize_name("a\tb\nc", "English") == "A B C");
    CHECK_THROWS(canonicalize_name("   ", "English"));
}

TEST_CASE("build_extraction_prompt substitutes everything") {
    PromptLibrary prompts;
    std::string p = build_extraction_prompt(make_chunk("soil pH"), kDelims, "English",
                                            default_extraction_examples(kDelims), prompts);
    CHECK(p.find("soil pH") != std::string::npos);
    CHECK(p.find("<|>") != std::string::npos);
    CHECK(p.find("{tuple_delimiter}") == std::string::npos);
    CHECK(p.find("{input_text}") == std::string::npos);
    CHECK(p.find("{language}") == std::string::npos);
    CHECK(p.find("{examples}") == std::string::npos);

    // two chunks differ only in the input_text region
    std::string q = build_extraction_prompt(make_chunk("other words"), kDelims, "English",
                                            default_extraction_examples(kDelims), prompts);
    auto mismatch = std::mismatch(p.begin(), p.end(), q.begin(), q.end());
    std::size_t prefix = static_cast<std::size_t>(mismatch.first - p.begin());
    CHECK(prefix >= p.find("Text: "));

    CHECK_THROWS(build_extraction_prompt(make_chunk("   "), kDelims, "English", "", prompts));
}

TEST_CASE("custom tuple delimiter lands in the format line") {
    PromptLibrary prompts;
    DelimiterSet d = kDelims;
    d.tuple = "<#>";
    std::string p = build_extraction_prompt(make_chunk("text"), d, "English", "", prompts);
    CHECK(p.find("<#>") != std::string::npos);
}

TEST_CASE("parse_extraction_output on the documented record shape") {
    auto res = parse_extraction_output(
        "(\"keyword\"<|>PHOTOSYNTHESIS<|>PROCESS<|>converts light to energy)##<|COMPLETE|>",
        kDelims);
    REQUIRE(res.tags.size() == 1);
    CHECK(res.tags[0].name == "PHOTOSYNTHESIS");
    CHECK(res.tags[0].tag_type == "PROCESS");
    REQUIRE(res.tags[0].descriptions.size() == 1);
    CHECK(res.tags[0].descriptions[0] == "converts light to energy");
    CHECK(res.relations.empty());
    CHECK(res.malformed_records == 0);
}

TEST_CASE("parse_extraction_output empty and malformed") {
    auto empty = parse_extraction_output("<|COMPLETE|>", kDelims);
    CHECK(empty.tags.empty());
    CHECK(empty.relations.empty());

    auto malformed = parse_extraction_output(
        "(\"keyword\"<|>ONLY TWO FIELDS)##(\"mystery\"<|>A<|>B<|>C)##"
        "(\"keyword\"<|>GOOD<|>TYPE<|>desc)##<|COMPLETE|>",
        kDelims);
    CHECK(malformed.tags.size() == 1);
    CHECK(malformed.malformed_records == 2);

    // self-relation violates source != target
    auto selfrel = parse_extraction_output(
        "(\"relationship\"<|>A<|>A<|>self)##<|COMPLETE|>", kDelims);
    CHECK(selfrel.relations.empty());
    CHECK(selfrel.malformed_records == 1);
}

TEST_CASE("relationship to undeclared keyword survives parse, dies at commit") {
    auto res = parse_extraction_output(
        "(\"keyword\"<|>ALPHA<|>TYPE<|>a)##"
        "(\"relationship\"<|>ALPHA<|>GHOST<|>points nowhere)##<|COMPLETE|>",
        kDelims);
    REQUIRE(res.relations.size() == 1);  // retained at parse stage

    DomainTag root{"ROOT", {"root"}};
    TagGraph g = make_graph(root);
    for (const auto& t : res.tags) merge_object_node(t, g);
    merge_object_relations(res.relations, g);
    CHECK(g.object_edges.empty());  // dropped at graph commit
    CHECK(g.counters.dangling_relations == 1);
}

TEST_CASE("build_chain_prompt") {
    PromptLibrary prompts;
    DomainTag root{"AGRICULTURE", {"Cultivation of crops."}};
    ObjectTag obj;
    obj.name = "WHEAT RUST";
    obj.descriptions = {"A fungal disease.", "Travels on wind."};

    std::string p = build_chain_prompt(root, obj, kDelims, "English",
                                       default_chain_examples(kDelims), prompts);
    CHECK(p.find("AGRICULTURE") != std::string::npos);
    CHECK(p.find("WHEAT RUST") != std::string::npos);
    CHECK(p.find("A fungal disease. Travels on wind.") != std::string::npos);

    // empty examples still renders
    std::string q = build_chain_prompt(root, obj, kDelims, "English", "", prompts);
    CHECK(q.find("{examples}") == std::string::npos);

    ObjectTag bare;
    bare.name = "X";
    CHECK_THROWS(build_chain_prompt(root, bare, kDelims, "English", "", prompts));
}

TEST_CASE("parse_chain_output on the documented shape") {
    DomainTag root{"AGRICULTURE", {"root desc"}};
    auto chain = parse_chain_output(
        "AGRICULTURE::desc->CROP SCIENCE::desc2<|>relates via pathology<|COMPLETE|>", kDelims,
        root, "WHEAT RUST");
    REQUIRE(chain.tags.size() == 2);
    CHECK(chain.tags[0].name == "AGRICULTURE");
    CHECK(chain.tags[1].name == "CROP SCIENCE");
    CHECK(chain.tags[1].descriptions == std::vector<std::string>{"desc2"});
    CHECK(chain.link_description == "relates via pathology");
    CHECK(chain.object_tag == "WHEAT RUST");
}

TEST_CASE("parse_chain_output prepends missing root") {
    DomainTag root{"AGRICULTURE", {"root desc"}};
    auto chain = parse_chain_output("CROP SCIENCE::desc<|>link<|COMPLETE|>", kDelims, root, "X");
    REQUIRE(chain.tags.size() == 2);
    CHECK(chain.tags[0].name == "AGRICULTURE");
    CHECK(chain.tags[0].descriptions == root.descriptions);
    CHECK(chain.tags[1].name == "CROP SCIENCE");
}

TEST_CASE("parse_chain_output error paths") {
    DomainTag root{"R", {}};
    CHECK_THROWS_AS(parse_chain_output("<|COMPLETE|>", kDelims, root, "X"), ChainParseError);
    // repeated tag name
    CHECK_THROWS_AS(parse_chain_output("R::a->A::b->A::c<|>link<|COMPLETE|>", kDelims, root, "X"),
                    ChainParseError);
    // nothing below the root
    CHECK_THROWS_AS(parse_chain_output("R::only<|>link<|COMPLETE|>", kDelims, root, "X"),
                    ChainParseError);
    try {
        parse_chain_output("R::a->A::b->A::c<|>link<|COMPLETE|>", kDelims, root, "X");
    } catch (const ChainParseError& e) {
        CHECK(e.raw_output.find("R::a->A::b") != std::string::npos);  // raw text attached
    }
}

TEST_CASE("record grammar round trip") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<ObjectTag> tags;
        std::vector<ObjectRelation> rels;
        std::size_t nt = 1 + rng() % 4;
        for (std::size_t i = 0; i < nt; ++i) {
            ObjectTag t;
            t.name = random_name(rng);
            t.tag_type = "TYPE" + std::to_string(rng() % 5);
            t.descriptions = {random_text(rng)};
            tags.push_back(std::move(t));
        }
        if (nt >= 2 && rng() % 2) {
            ObjectRelation r;
            r.source = tags[0].name;
            r.target = tags[1].name;
            if (r.source != r.target) {
                r.descriptions = {random_text(rng)};
                rels.push_back(std::move(r));
            }
        }

        auto parsed = parse_extraction_output(serialize_extraction_records(tags, rels, kDelims),
                                              kDelims);
        CHECK(parsed.malformed_records == 0);
        REQUIRE(parsed.tags.size() == tags.size());
        for (std::size_t i = 0; i < tags.size(); ++i) {
            CHECK(parsed.tags[i].name == tags[i].name);
            CHECK(parsed.tags[i].tag_type == tags[i].tag_type);
            CHECK(parsed.tags[i].descriptions == tags[i].descriptions);
        }
        REQUIRE(parsed.relations.size() == rels.size());
        for (std::size_t i = 0; i < rels.size(); ++i) {
            CHECK(parsed.relations[i].source == rels[i].source);
            CHECK(parsed.relations[i].target == rels[i].target);
            CHECK(parsed.relations[i].descriptions == rels[i].descriptions);
        }
    }
}

TEST_CASE("parser survives arbitrary bytes") {
    std::mt19937_64 rng(99);
    DomainTag root{"R", {}};
    for (int trial = 0; trial < 2000; ++trial) {
        std::size_t len = rng() % 200;
        std::string bytes;
        for (std::size_t i = 0; i < len; ++i) bytes.push_back(static_cast<char>(rng() & 0xff));
        CHECK_NOTHROW(parse_extraction_output(bytes, kDelims));
        try {
            parse_chain_output(bytes, kDelims, root, "X");  // may throw ChainParseError only
        } catch (const ChainParseError&) {
        }
    }
}
