#include "taggraph/gateway.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

// httplib drags in <resolv.h>, whose _res macro mangles any header parsed
// after it (Eigen in particular), so it must come last.
#include <httplib.h>

#include "taggraph/util.hpp"

namespace taggraph {

namespace {

// Runtime-counted semaphore guarding the in-flight request cap.
class RequestSlots {
public:
    explicit RequestSlots(int count) : available_(count) {}

    void acquire() {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }
    void release() {
        {
            std::lock_guard lock(m_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    int available_;
};

struct SlotGuard {
    RequestSlots& slots;
    explicit SlotGuard(RequestSlots& s) : slots(s) { slots.acquire(); }
    ~SlotGuard() { slots.release(); }
};

struct ParsedUrl {
    std::string origin;       // scheme://host:port
    std::string path_prefix;  // e.g. /v1
};

ParsedUrl parse_base_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigurationError("base_url must include a scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

std::string redact(std::string body, const std::string& secret) {
    if (secret.empty()) return body;
    for (std::size_t p = body.find(secret); p != std::string::npos; p = body.find(secret, p)) {
        body.replace(p, secret.size(), "***");
    }
    return body;
}

}  // namespace

struct HttpGateway::Impl {
    ParsedUrl url;
    std::string api_key;
    RequestSlots slots;
    httplib::Client client;

    Impl(const GatewayConfig& cfg, const ParsedUrl& u)
        : url(u), slots(cfg.max_concurrent), client(u.origin) {
        if (const char* key = std::getenv(cfg.api_key_env.c_str())) api_key = key;
        client.set_connection_timeout(std::chrono::milliseconds(cfg.timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(cfg.timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(cfg.timeout_ms));
        client.set_keep_alive(true);
    }

    nlohmann::json post_json(const GatewayConfig& cfg, GatewayCounters& counters,
                             const std::string& endpoint, const nlohmann::json& body) {
        SlotGuard guard(slots);
        const std::string path = url.path_prefix + endpoint;
        const std::string payload = body.dump();

        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

        for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
            if (attempt > 0) {
                counters.retries.fetch_add(1, std::memory_order_relaxed);
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(cfg.backoff_ms << (attempt - 1)));
            }
            debug_log("POST " + path + " body=" + redact(payload, api_key));
            auto res = client.Post(path, headers, payload, "application/json");
            if (!res) continue;  // transport failure, retry
            debug_log("status " + std::to_string(res->status) + " body=" +
                      redact(res->body, api_key));
            if (res->status >= 500) continue;  // server-side transient, retry
            if (res->status >= 400) {
                throw ConfigurationError("HTTP " + std::to_string(res->status) + " from " +
                                         path + ": " + res->body);
            }
            try {
                return nlohmann::json::parse(res->body);
            } catch (const std::exception& e) {
                throw TransportError(std::string("unparseable response body: ") + e.what());
            }
        }
        throw TransportError("retries exhausted for " + path);
    }
};

HttpGateway::HttpGateway(GatewayConfig cfg) : cfg_(std::move(cfg)) {
    if (const char* base = std::getenv("TAGGRAPH_BASE_URL")) cfg_.base_url = base;
    impl_ = std::make_unique<Impl>(cfg_, parse_base_url(cfg_.base_url));
}

HttpGateway::~HttpGateway() = default;

std::string HttpGateway::complete(const CompletionRequest& req) {
    if (req.prompt.empty()) throw ConfigurationError("empty prompt");
    counters_.completions.fetch_add(1, std::memory_order_relaxed);

    nlohmann::json body{
        {"model", cfg_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}})},
        {"max_tokens", req.max_output_tokens},
        {"temperature", req.temperature},
    };
    for (const auto& [k, v] : req.extra_params) body[k] = v;

    nlohmann::json res = impl_->post_json(cfg_, counters_, "/chat/completions", body);
    try {
        return res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
        throw TransportError(std::string("malformed completion response: ") + e.what());
    }
}

std::vector<EmbeddingVector> HttpGateway::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    counters_.embeddings.fetch_add(texts.size(), std::memory_order_relaxed);

    nlohmann::json body{{"model", cfg_.embedding_model}, {"input", texts}};
    nlohmann::json res = impl_->post_json(cfg_, counters_, "/embeddings", body);

    std::vector<EmbeddingVector> out(texts.size());
    std::vector<bool> filled(texts.size(), false);
    try {
        const auto& data = res.at("data");
        if (data.size() != texts.size()) {
            throw ConfigurationError("embedding count mismatch: got " +
                                     std::to_string(data.size()));
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& item = data[i];
            std::size_t idx = item.contains("index") ? item.at("index").get<std::size_t>() : i;
            if (idx >= out.size() || filled[idx]) {
                throw ConfigurationError("bad embedding index in response");
            }
            const auto& values = item.at("embedding");
            if (static_cast<int>(values.size()) != cfg_.embedding_dim) {
                throw ConfigurationError(
                    "embedding dimension mismatch: expected " +
                    std::to_string(cfg_.embedding_dim) + ", got " +
                    std::to_string(values.size()));
            }
            EmbeddingVector v(cfg_.embedding_dim);
            for (int k = 0; k < cfg_.embedding_dim; ++k) v[k] = values[k].get<double>();
            out[idx] = normalized(v);
            filled[idx] = true;
        }
    } catch (const ConfigurationError&) {
        throw;
    } catch (const std::exception& e) {
        throw TransportError(std::string("malformed embedding response: ") + e.what());
    }
    return out;
}

}  // namespace taggraph
