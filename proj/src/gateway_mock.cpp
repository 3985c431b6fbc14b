#include <algorithm>
#include <cmath>
#include <numbers>

#include "taggraph/extract.hpp"
#include "taggraph/gateway.hpp"
#include "taggraph/util.hpp"

namespace taggraph {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
    // 53-bit mantissa, strictly inside (0, 1)
    double u = static_cast<double>(splitmix64(state) >> 11) * (1.0 / 9007199254740992.0);
    return std::max(u, 1e-12);
}

// Text of the last occurrence of `marker` up to the next `stop` (or end).
std::string field_after(const std::string& text, const std::string& marker,
                        const std::string& stop) {
    auto pos = text.rfind(marker);
    if (pos == std::string::npos) return {};
    pos += marker.size();
    auto end = stop.empty() ? std::string::npos : text.find(stop, pos);
    return trim(text.substr(pos, end == std::string::npos ? end : end - pos));
}

std::vector<std::string> candidate_keywords(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 5 && std::isalpha(static_cast<unsigned char>(cur[0]))) {
            std::string up = to_upper_ascii(cur);
            if (std::find(words.begin(), words.end(), up) == words.end()) {
                words.push_back(up);
            }
        }
        cur.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(c));
        } else {
            flush();
        }
    }
    flush();
    return words;
}

std::string mock_extraction(const std::string& prompt, std::uint64_t seed,
                            const DelimiterSet& delims) {
    std::string input = field_after(prompt, "Text: ", "\nOutput:");
    auto words = candidate_keywords(input);
    std::uint64_t h = fnv1a64(prompt) ^ seed;
    if (words.empty()) return delims.completion;

    std::size_t want = std::min<std::size_t>(words.size(), 2 + h % 4);
    std::size_t step = 1 + (h >> 16) % 7;
    std::vector<std::string> picked;
    std::size_t idx = h % words.size();
    while (picked.size() < want) {
        const std::string& w = words[idx % words.size()];
        if (std::find(picked.begin(), picked.end(), w) == picked.end()) picked.push_back(w);
        idx += step;
    }

    const char* kinds[] = {"CONCEPT", "PROCESS", "ENTITY", "METHOD"};
    std::string segment = to_hex(fnv1a64(input));

    std::vector<ObjectTag> tags;
    for (const auto& w : picked) {
        ObjectTag t;
        t.name = w;
        t.tag_type = kinds[fnv1a64(w) % 4];
        t.descriptions.push_back("Key term " + w + " as discussed in segment " + segment + ".");
        tags.push_back(std::move(t));
    }
    std::vector<ObjectRelation> rels;
    for (std::size_t i = 0; i + 1 < picked.size(); ++i) {
        ObjectRelation r;
        r.source = picked[i];
        r.target = picked[i + 1];
        r.descriptions.push_back("Terms co-occur in segment " + segment + ".");
        rels.push_back(std::move(r));
    }
    return serialize_extraction_records(tags, rels, delims);
}

// Chain derivation uses only (root name, object name, seed) so that an object
// tag always lands on the same chain no matter how its descriptions have
// accumulated by the time it is prompted.
std::string mock_chain(const std::string& prompt, std::uint64_t seed,
                       const DelimiterSet& delims) {
    std::string root_name = field_after(prompt, "Domain tag name: ", "\n");
    std::string root_desc = field_after(prompt, "Domain tag description: ", "\n");
    std::string obj_name = field_after(prompt, "Object tag name: ", "\n");
    if (root_name.empty() || obj_name.empty()) return delims.completion;

    std::uint64_t h = fnv1a64(obj_name) ^ seed;
    static const char* level1[] = {"FOUNDATIONAL STUDIES", "APPLIED SYSTEMS", "FIELD METHODS",
                                   "OPERATIONAL PRACTICE", "EMERGING TOPICS"};
    static const char* level2_suffix[] = {"ANALYSIS", "DESIGN", "EVALUATION"};

    std::vector<std::string> names;
    names.push_back(root_name);
    std::string d1 = level1[static_cast<unsigned char>(obj_name[0]) % 5];
    std::string d2 = d1 + " " + level2_suffix[(h >> 8) % 3];
    std::string first_word = obj_name.substr(0, obj_name.find(' '));
    std::string d3 = first_word + " STUDIES";
    std::size_t intermediates = 1 + h % 3;
    const std::string* cand[] = {&d1, &d2, &d3};
    for (std::size_t i = 0; i < intermediates; ++i) {
        std::string n = *cand[i];
        while (std::find(names.begin(), names.end(), n) != names.end()) n += " BRANCH";
        names.push_back(std::move(n));
    }

    TagChain chain;
    chain.object_tag = obj_name;
    for (std::size_t i = 0; i < names.size(); ++i) {
        DomainTag t;
        t.name = names[i];
        if (i == 0) {
            if (!root_desc.empty()) t.descriptions.push_back(root_desc);
        } else {
            t.descriptions.push_back("Curated scope note for " + t.name + " [" +
                                     to_hex(fnv1a64(t.name) ^ seed) + "].");
        }
        chain.tags.push_back(std::move(t));
    }
    chain.link_description = "Anchored under " + names.back() + " for " + obj_name + " [" +
                             to_hex(fnv1a64(obj_name + names.back()) ^ seed) + "].";
    return serialize_chain_output(chain, delims);
}

std::string mock_fusion(const std::string& prompt, std::uint64_t seed) {
    std::string tag = field_after(prompt, "Tag: ", "\n");
    if (tag.empty()) tag = "UNKNOWN DOMAIN";
    std::size_t objects = 0;
    std::size_t begin = prompt.find("---Object tags---");
    std::size_t stop = prompt.find("---relationships---");
    if (begin != std::string::npos) {
        for (std::size_t p = prompt.find("\n- ", begin);
             p != std::string::npos && (stop == std::string::npos || p < stop);
             p = prompt.find("\n- ", p + 1)) {
            ++objects;
        }
    }
    return "Fused summary for " + tag + " consolidating its chain context and " +
           std::to_string(objects) + " linked object tags [sig " +
           to_hex(fnv1a64(prompt) ^ seed) + "].";
}

std::string mock_merge(const std::string& prompt, std::uint64_t seed) {
    std::string old_head = field_after(prompt, "---Existing summary---\n", "\n---");
    std::string new_head = field_after(prompt, "---New summary---\n", "\nOutput:");
    auto head = [](const std::string& s) { return s.substr(0, std::min<std::size_t>(s.size(), 60)); };
    return "Updated summary [sig " + to_hex(fnv1a64(prompt) ^ seed) + "]: " + head(old_head) +
           " // " + head(new_head);
}

std::string mock_generation(const std::string& prompt, std::uint64_t seed) {
    std::size_t sections = 0;
    for (std::size_t p = prompt.find("[TAG "); p != std::string::npos;
         p = prompt.find("[TAG ", p + 1)) {
        ++sections;
    }
    std::string q = field_after(prompt, "---Question---\n", "\n");
    return "## Synthesized Answer\n\nDrawing on " + std::to_string(sections) +
           " domain summaries, the question \"" + q +
           "\" is addressed by consolidating the retrieved tag knowledge [sig " +
           to_hex(fnv1a64(prompt) ^ seed) + "].";
}

std::string mock_judge(const std::string& prompt, std::uint64_t seed) {
    std::uint64_t h = fnv1a64(prompt) ^ seed;
    const char* criteria[] = {"Comprehensiveness", "Diversity", "Empowerment", "Overall Winner"};
    nlohmann::json verdict;
    for (int i = 0; i < 4; ++i) {
        bool first = ((h >> i) & 1) == 0;
        verdict[criteria[i]] = {
            {"Winner", first ? "Answer 1" : "Answer 2"},
            {"Explanation", std::string("Deterministic verdict bit ") + std::to_string(i) +
                                " of sig " + to_hex(h) + "."}};
    }
    // Prose around the JSON exercises the tolerant verdict extractor.
    return "Here is my evaluation of the two answers.\n" + verdict.dump(2) +
           "\nEnd of evaluation.";
}

std::string mock_genq(const std::string& prompt, std::uint64_t seed) {
    std::uint64_t h = fnv1a64(prompt) ^ seed;
    std::string out;
    for (int u = 1; u <= 5; ++u) {
        out += "- User " + std::to_string(u) + ": Persona " + std::to_string(u) +
               " engaging with the dataset [sig " + to_hex(h ^ u) + "]\n";
        for (int t = 1; t <= 5; ++t) {
            out += "    - Task " + std::to_string(t) + ": Task " + std::to_string(t) +
                   " for persona " + std::to_string(u) + "\n";
            for (int q = 1; q <= 5; ++q) {
                out += "        - Question " + std::to_string(q) +
                       ": What high-level insight " + std::to_string(u) + "." +
                       std::to_string(t) + "." + std::to_string(q) +
                       " emerges across the entire dataset?\n";
            }
        }
    }
    return out;
}

}  // namespace

std::string mock_complete(const std::string& prompt, std::uint64_t seed,
                          const DelimiterSet& delims) {
    auto has = [&](const char* marker) { return prompt.find(marker) != std::string::npos; };
    if (has("Output your evaluation in the following JSON format")) {
        return mock_judge(prompt, seed);
    }
    if (has("identify 5 potential users")) return mock_genq(prompt, seed);
    if (has("generate the relationship chain between them")) {
        return mock_chain(prompt, seed, delims);
    }
    if (has("summarize the domain by injecting these object tags")) {
        return mock_fusion(prompt, seed);
    }
    if (has("Merge the existing summary and the new summary")) return mock_merge(prompt, seed);
    if (has("responding to questions about data in the tables")) {
        return mock_generation(prompt, seed);
    }
    if (has("summarize keywords from the text and generate their relationships")) {
        return mock_extraction(prompt, seed, delims);
    }
    return delims.completion;
}

std::string MockGateway::complete(const CompletionRequest& req) {
    counters_.completions.fetch_add(1, std::memory_order_relaxed);
    return mock_complete(req.prompt, seed_, delims_);
}

std::vector<EmbeddingVector> MockGateway::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        counters_.embeddings.fetch_add(1, std::memory_order_relaxed);
        std::uint64_t state = fnv1a64(text) ^ seed_;
        EmbeddingVector v(dim_);
        for (int i = 0; i < dim_; i += 2) {
            double u1 = uniform01(state);
            double u2 = uniform01(state);
            double r = std::sqrt(-2.0 * std::log(u1));
            v[i] = r * std::cos(2.0 * std::numbers::pi * u2);
            if (i + 1 < dim_) v[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
        }
        out.push_back(normalized(v));
    }
    return out;
}

std::unique_ptr<Gateway> make_gateway(const GatewayConfig& cfg, const DelimiterSet& delims) {
    if (cfg.backend == "mock") {
        return std::make_unique<MockGateway>(cfg.seed, delims, cfg.embedding_dim);
    }
    if (cfg.backend == "http") return std::make_unique<HttpGateway>(cfg);
    throw ConfigurationError("unknown gateway backend: " + cfg.backend);
}

}  // namespace taggraph
