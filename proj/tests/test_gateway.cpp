#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include "taggraph/extract.hpp"
#include "taggraph/gateway.hpp"
#include "test_support.hpp"

// after the project headers: httplib's <resolv.h> macros clash with Eigen
#include <httplib.h>
#include <nlohmann/json.hpp>

using namespace taggraph;
using nlohmann::json;

namespace {

const DelimiterSet kDelims{};

std::string extraction_prompt(const std::string& chunk_text) {
    PromptLibrary prompts;
    Chunk c;
    c.text = chunk_text;
    return build_extraction_prompt(c, kDelims, "English",
                                   default_extraction_examples(kDelims), prompts);
}

std::string chain_prompt(const std::string& obj_name) {
    PromptLibrary prompts;
    DomainTag root{"AGRICULTURE", {"Cultivation of crops."}};
    ObjectTag obj;
    obj.name = obj_name;
    obj.descriptions = {"some description"};
    return build_chain_prompt(root, obj, kDelims, "English", "", prompts);
}

// Local OpenAI-shaped stub with scriptable failures and concurrency probes.
class StubServer {
public:
    StubServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            int now = ++in_flight_;
            int prev = max_in_flight_.load();
            while (now > prev && !max_in_flight_.compare_exchange_weak(prev, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            ++hits_;
            int fail = fail_first_.load();
            if (fail > 0 && hits_.load() <= fail) {
                res.status = 500;
                res.set_content("boom", "text/plain");
            } else if (always_status_ != 0) {
                res.status = always_status_;
                res.set_content("scripted", "text/plain");
            } else {
                json body = json::parse(req.body);
                json reply{{"choices",
                            json::array({{{"message", {{"role", "assistant"},
                                                       {"content", reply_text_}}}}})}};
                res.set_content(reply.dump(), "application/json");
            }
            --in_flight_;
        });
        server_.Post("/v1/embeddings", [this](const httplib::Request& req,
                                              httplib::Response& res) {
            json body = json::parse(req.body);
            json data = json::array();
            int dim = embed_dim_.load();
            std::size_t i = 0;
            for (const auto& _ : body.at("input")) {
                std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
                v[i % v.size()] = 1.0;
                data.push_back({{"embedding", v}, {"index", i}});
                ++i;
            }
            res.set_content(json{{"data", data}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

    std::atomic<int> hits_{0};
    std::atomic<int> fail_first_{0};   // respond 500 to the first N requests
    std::atomic<int> always_status_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
    std::atomic<int> embed_dim_{8};
    std::string reply_text_ = "stub reply";

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

GatewayConfig stub_config(const StubServer& stub) {
    GatewayConfig cfg;
    cfg.backend = "http";
    cfg.base_url = stub.base_url();
    cfg.embedding_dim = 8;
    cfg.max_retries = 3;
    cfg.backoff_ms = 5;
    cfg.timeout_ms = 3000;
    cfg.max_concurrent = 3;
    return cfg;
}

}  // namespace

TEST_CASE("mock completion is a pure function of prompt and seed") {
    MockGateway a(42, kDelims, 16);
    MockGateway b(42, kDelims, 16);
    CompletionRequest req;
    req.prompt = extraction_prompt("Crop rotation builds resilient harvest systems.");
    CHECK(a.complete(req) == b.complete(req));

    MockGateway c(43, kDelims, 16);
    CHECK(a.complete(req) != c.complete(req));
}

TEST_CASE("mock extraction output parses in the record grammar") {
    MockGateway gw(42, kDelims, 16);
    CompletionRequest req;
    req.prompt = extraction_prompt(
        "Nitrogen fixation by legume rotation improves subsequent cereal yields.");
    auto res = parse_extraction_output(gw.complete(req), kDelims);
    CHECK(res.malformed_records == 0);
    CHECK(res.tags.size() >= 1);  // at least one well-formed keyword record
    for (const auto& r : res.relations) CHECK(r.source != r.target);
}

TEST_CASE("mock chain output parses back rooted and bounded") {
    MockGateway gw(42, kDelims, 16);
    DomainTag root{"AGRICULTURE", {"Cultivation of crops."}};
    for (const char* name : {"WHEAT RUST", "DRIP TAPE", "NITRATE", "CANOPY"}) {
        CompletionRequest req;
        req.prompt = chain_prompt(name);
        auto chain = parse_chain_output(gw.complete(req), kDelims, root, name);
        CHECK(chain.tags.front().name == "AGRICULTURE");
        CHECK(chain.tags.size() >= 2);
        CHECK(chain.tags.size() <= 4);
        CHECK(!chain.link_description.empty());
    }
}

TEST_CASE("mock judge output carries the four criteria") {
    MockGateway gw(42, kDelims, 16);
    PromptLibrary prompts;
    CompletionRequest req;
    req.prompt = render_template(prompts.get("judge"), {{"query", "q?"},
                                                        {"answer1", "first"},
                                                        {"answer2", "second"}});
    std::string out = gw.complete(req);
    auto j = json::parse(out.substr(out.find('{'), out.rfind('}') - out.find('{') + 1));
    CHECK(j.contains("Comprehensiveness"));
    CHECK(j.contains("Diversity"));
    CHECK(j.contains("Empowerment"));
    CHECK(j.contains("Overall Winner"));
}

TEST_CASE("unrecognized prompt yields the completion delimiter only") {
    MockGateway gw(42, kDelims, 16);
    CompletionRequest req;
    req.prompt = "tell me a story";
    CHECK(gw.complete(req) == kDelims.completion);
}

TEST_CASE("mock embeddings: deterministic unit vectors, order preserved") {
    MockGateway gw(42, kDelims, 64);
    auto one = gw.embed({"some text"});
    auto two = gw.embed({"some text"});
    REQUIRE(one.size() == 1);
    CHECK(one[0] == two[0]);
    CHECK(one[0].norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(cosine(one[0], one[0]) == doctest::Approx(1.0).epsilon(1e-6));

    auto batch = gw.embed({"a", "b", "c"});
    REQUIRE(batch.size() == 3);
    CHECK(batch[0] == gw.embed({"a"})[0]);
    CHECK(batch[1] == gw.embed({"b"})[0]);
    CHECK(batch[2] == gw.embed({"c"})[0]);
    CHECK(batch[0] != batch[1]);
}

TEST_CASE("http gateway returns stub text") {
    StubServer stub;
    HttpGateway gw(stub_config(stub));
    CompletionRequest req;
    req.prompt = "hello";
    CHECK(gw.complete(req) == "stub reply");
    CHECK(gw.counters().completions.load() == 1);
}

TEST_CASE("http gateway retries 500s then succeeds") {
    StubServer stub;
    stub.fail_first_ = 2;
    HttpGateway gw(stub_config(stub));
    CompletionRequest req;
    req.prompt = "retry me";
    CHECK(gw.complete(req) == "stub reply");
    CHECK(stub.hits_.load() == 3);  // 2 failures + 1 success
    CHECK(gw.counters().retries.load() == 2);
}

TEST_CASE("http gateway exhausts retries into TransportError") {
    StubServer stub;
    stub.fail_first_ = 1000;
    GatewayConfig cfg = stub_config(stub);
    cfg.max_retries = 2;
    HttpGateway gw(cfg);
    CompletionRequest req;
    req.prompt = "doomed";
    CHECK_THROWS_AS(gw.complete(req), TransportError);
    CHECK(stub.hits_.load() == 3);  // initial try + 2 retries
}

TEST_CASE("http 4xx is a configuration error without retry") {
    StubServer stub;
    stub.always_status_ = 404;
    HttpGateway gw(stub_config(stub));
    CompletionRequest req;
    req.prompt = "bad route";
    CHECK_THROWS_AS(gw.complete(req), ConfigurationError);
    CHECK(stub.hits_.load() == 1);
}

TEST_CASE("http embeddings: order, normalization, dimension check") {
    StubServer stub;
    HttpGateway gw(stub_config(stub));
    auto vecs = gw.embed({"x", "y"});
    REQUIRE(vecs.size() == 2);
    CHECK(vecs[0].norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(vecs[0][0] == doctest::Approx(1.0));  // stub puts the 1 at position index
    CHECK(vecs[1][1] == doctest::Approx(1.0));

    stub.embed_dim_ = 5;  // backend suddenly disagrees with config
    CHECK_THROWS_AS(gw.embed({"z"}), ConfigurationError);
}

TEST_CASE("in-flight requests never exceed max_concurrent") {
    StubServer stub;
    GatewayConfig cfg = stub_config(stub);
    cfg.max_concurrent = 3;
    HttpGateway gw(cfg);

    std::vector<std::thread> threads;
    for (int i = 0; i < 12; ++i) {
        threads.emplace_back([&gw] {
            CompletionRequest req;
            req.prompt = "load";
            gw.complete(req);
        });
    }
    for (auto& t : threads) t.join();
    CHECK(stub.max_in_flight_.load() <= 3);
    CHECK(stub.hits_.load() == 12);
}
