#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taggraph/embedding.hpp"
#include "taggraph/prompts.hpp"

namespace taggraph {

struct CompletionRequest {
    std::string prompt;
    int max_output_tokens = 1024;
    double temperature = 0.0;
    // Backend-specific knobs forwarded verbatim into the request body.
    std::map<std::string, nlohmann::json> extra_params;
};

struct GatewayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Network failure / retries exhausted. Retried before surfacing.
struct TransportError : GatewayError {
    using GatewayError::GatewayError;
};
// Misconfiguration (HTTP 4xx, dimension mismatch). Never retried.
struct ConfigurationError : GatewayError {
    using GatewayError::GatewayError;
};

// Shared knobs for one templated LLM call.
struct LlmCallOptions {
    std::string language = "English";
    int max_output_tokens = 1024;
    double temperature = 0.0;
};

struct GatewayConfig {
    std::string backend = "mock";  // mock | http
    std::string base_url = "http://localhost:8080/v1";
    std::string model = "qwen3-4b";
    std::string embedding_model = "bge-large-en-v1.5";
    int embedding_dim = 1024;
    int timeout_ms = 30000;
    int max_retries = 3;
    int backoff_ms = 250;
    int max_concurrent = 4;
    std::string api_key_env = "TAGGRAPH_API_KEY";
    std::uint64_t seed = 42;  // mock backend only
};

struct GatewayCounters {
    std::atomic<std::uint64_t> completions{0};
    std::atomic<std::uint64_t> embeddings{0};
    std::atomic<std::uint64_t> retries{0};
};

class Gateway {
public:
    virtual ~Gateway() = default;

    // Returns model text. Transient failures retried with exponential
    // backoff; HTTP 4xx surfaces as ConfigurationError without retry.
    virtual std::string complete(const CompletionRequest& req) = 0;

    // One unit-normalized vector per input, order preserved.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;

    virtual int embedding_dim() const = 0;

    const GatewayCounters& counters() const { return counters_; }

protected:
    GatewayCounters counters_;
};

// Deterministic offline stand-in: recognizes which pipeline template a prompt
// was built from and emits a grammar-valid response derived from
// hash(prompt, seed). Unrecognized prompts get the completion delimiter only.
std::string mock_complete(const std::string& prompt, std::uint64_t seed,
                          const DelimiterSet& delims);

class MockGateway final : public Gateway {
public:
    MockGateway(std::uint64_t seed, DelimiterSet delims, int dim = 32)
        : seed_(seed), delims_(std::move(delims)), dim_(dim) {}

    std::string complete(const CompletionRequest& req) override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    int embedding_dim() const override { return dim_; }

private:
    std::uint64_t seed_;
    DelimiterSet delims_;
    int dim_;
};

class HttpGateway final : public Gateway {
public:
    explicit HttpGateway(GatewayConfig cfg);
    ~HttpGateway() override;

    std::string complete(const CompletionRequest& req) override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    int embedding_dim() const override { return cfg_.embedding_dim; }

private:
    struct Impl;
    GatewayConfig cfg_;
    std::unique_ptr<Impl> impl_;
};

std::unique_ptr<Gateway> make_gateway(const GatewayConfig& cfg, const DelimiterSet& delims);

}  // namespace taggraph
