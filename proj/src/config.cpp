#include "taggraph/config.hpp"

#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "taggraph/util.hpp"

namespace taggraph {

namespace {

struct Field {
    const char* key;
    const char* comment;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

std::string fmt_double(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

template <typename T>
T parse_num(const std::string& key, const std::string& value) {
    std::istringstream ss(value);
    T out{};
    ss >> out;
    if (ss.fail()) throw std::runtime_error("config: bad numeric value for " + key);
    return out;
}

#define STR_FIELD(name, comment)                                              \
    Field{#name, comment, [](const RunConfig& c) { return c.name; },          \
          [](RunConfig& c, const std::string& v) { c.name = v; }}
#define NUM_FIELD(name, comment)                                              \
    Field{#name, comment,                                                     \
          [](const RunConfig& c) { return std::to_string(c.name); },          \
          [](RunConfig& c, const std::string& v) {                            \
              c.name = parse_num<decltype(c.name)>(#name, v);                 \
          }}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        STR_FIELD(corpus, "directory of .txt/.md documents to index"),
        STR_FIELD(output_dir, "where build artifacts are written"),
        STR_FIELD(root_domain, "name of the root domain tag anchoring the taxonomy"),
        STR_FIELD(root_description, "one-sentence description of the root domain"),
        STR_FIELD(language, "output language for all prompts"),
        STR_FIELD(tokenizer, "token segmenter used for chunking and budgets"),
        NUM_FIELD(chunk_size, "chunk size in tokens"),
        NUM_FIELD(chunk_overlap, "tokens shared by consecutive chunks"),
        STR_FIELD(backend, "mock | http"),
        STR_FIELD(base_url, "OpenAI-compatible endpoint root (http backend)"),
        STR_FIELD(model, "completion model name"),
        STR_FIELD(embedding_model, "embedding model name"),
        NUM_FIELD(embedding_dim, "embedding dimension; persisted with the index"),
        NUM_FIELD(timeout_ms, "per-request timeout"),
        NUM_FIELD(max_retries, "retries for transient gateway failures"),
        NUM_FIELD(backoff_ms, "base backoff, doubled per retry"),
        NUM_FIELD(max_concurrent, "cap on in-flight gateway requests"),
        STR_FIELD(api_key_env, "environment variable holding the API key"),
        NUM_FIELD(max_output_tokens, "default completion length cap"),
        NUM_FIELD(max_output_tokens_extraction, "per-template override, 0 = default"),
        NUM_FIELD(max_output_tokens_chain, "per-template override, 0 = default"),
        NUM_FIELD(max_output_tokens_fusion, "per-template override, 0 = default"),
        NUM_FIELD(max_output_tokens_merge, "per-template override, 0 = default"),
        NUM_FIELD(max_output_tokens_generation, "per-template override, 0 = default"),
        NUM_FIELD(max_output_tokens_judge, "per-template override, 0 = default"),
        NUM_FIELD(max_output_tokens_genq, "per-template override, 0 = default"),
        Field{"temperature", "sampling temperature for completions",
              [](const RunConfig& c) { return fmt_double(c.temperature); },
              [](RunConfig& c, const std::string& v) {
                  c.temperature = parse_num<double>("temperature", v);
              }},
        NUM_FIELD(top_k, "entries retrieved per query"),
        NUM_FIELD(token_budget, "context token budget for generation"),
        NUM_FIELD(max_paths, "ancestor paths enumerated per domain tag"),
        NUM_FIELD(seed, "seed for the mock backend and derived determinism"),
        STR_FIELD(response_type, "target response length/format for generation"),
        NUM_FIELD(max_workers, "worker pool size for extraction/eval"),
        STR_FIELD(delim_tuple, "field delimiter inside one record"),
        STR_FIELD(delim_record, "delimiter between records"),
        STR_FIELD(delim_completion, "end-of-output marker"),
        STR_FIELD(delim_explanation, "name/description separator in chains"),
        STR_FIELD(delim_inference, "link between chain elements"),
        STR_FIELD(prompt_dir, "directory of <name>.txt prompt template overrides"),
        STR_FIELD(extraction_examples_file, "optional examples block for extraction"),
        STR_FIELD(chain_examples_file, "optional examples block for chain prompts"),
        STR_FIELD(judge_models, "comma-separated judge model names (http eval)"),
    };
    return f;
}

#undef STR_FIELD
#undef NUM_FIELD

}  // namespace

GatewayConfig RunConfig::gateway_config() const {
    GatewayConfig g;
    g.backend = backend;
    g.base_url = base_url;
    g.model = model;
    g.embedding_model = embedding_model;
    g.embedding_dim = embedding_dim;
    g.timeout_ms = timeout_ms;
    g.max_retries = max_retries;
    g.backoff_ms = backoff_ms;
    g.max_concurrent = max_concurrent;
    g.api_key_env = api_key_env;
    g.seed = seed;
    return g;
}

ChunkingConfig RunConfig::chunking_config() const {
    return ChunkingConfig{chunk_size, chunk_overlap};
}

DelimiterSet RunConfig::delimiter_set() const {
    DelimiterSet d;
    d.tuple = delim_tuple;
    d.record = delim_record;
    d.completion = delim_completion;
    d.explanation = delim_explanation;
    d.inference = delim_inference;
    return d;
}

LlmCallOptions RunConfig::llm_options(const std::string& template_name) const {
    LlmCallOptions o;
    o.language = language;
    o.temperature = temperature;
    o.max_output_tokens = max_output_tokens;
    const std::map<std::string, int> overrides = {
        {"extraction", max_output_tokens_extraction}, {"chain", max_output_tokens_chain},
        {"fusion", max_output_tokens_fusion},         {"merge", max_output_tokens_merge},
        {"generation", max_output_tokens_generation}, {"judge", max_output_tokens_judge},
        {"genq", max_output_tokens_genq},
    };
    auto it = overrides.find(template_name);
    if (it != overrides.end() && it->second > 0) o.max_output_tokens = it->second;
    return o;
}

void RunConfig::validate() const {
    if (root_domain.empty()) throw std::runtime_error("config: root_domain is required");
    if (!chunking_config().valid()) {
        throw std::runtime_error("config: need 0 <= chunk_overlap < chunk_size");
    }
    delimiter_set().validate();
    if (embedding_dim < 1) throw std::runtime_error("config: embedding_dim must be >= 1");
    if (top_k < 1) throw std::runtime_error("config: top_k must be >= 1");
    if (max_concurrent < 1) throw std::runtime_error("config: max_concurrent must be >= 1");
    if (max_retries < 0) throw std::runtime_error("config: max_retries must be >= 0");
    if (backend != "mock" && backend != "http") {
        throw std::runtime_error("config: backend must be mock or http");
    }
}

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    std::map<std::string, const Field*> by_key;
    for (const auto& f : fields()) by_key[f.key] = &f;

    int lineno = 0;
    for (const auto& raw : split_on(read_text_file(path), "\n")) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown config key '" + key + "'");
        }
        it->second->set(cfg, value);
    }
    return cfg;
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
    std::string out = "# taggraph run configuration\n";
    for (const auto& f : fields()) {
        out += "\n# ";
        out += f.comment;
        out += "\n";
        out += f.key;
        out += " = ";
        out += f.get(cfg);
        out += "\n";
    }
    atomic_write_file(path, out);
}

std::string run_config_canonical(const RunConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) {
        out += f.key;
        out += "=";
        out += f.get(cfg);
        out += "\n";
    }
    return out;
}

std::uint64_t run_config_hash(const RunConfig& cfg) {
    return fnv1a64(run_config_canonical(cfg));
}

std::vector<std::string> parse_judge_models(const RunConfig& cfg) {
    std::vector<std::string> out;
    for (const auto& part : split_on(cfg.judge_models, ",")) {
        std::string name = trim(part);
        if (!name.empty()) out.push_back(name);
    }
    return out;
}

}  // namespace taggraph
