#include "taggraph/rag.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "taggraph/util.hpp"

namespace taggraph {

namespace {

// Fusion prompt inputs for one domain tag: the paths rendered root-to-tag,
// plus a glossary of every tag on them.
struct ChainContext {
    std::string rendered;
    std::vector<std::string> tag_order;  // first-appearance order across paths
};

ChainContext render_chain_context(const std::string& tag, const TagGraph& g,
                                  std::size_t max_paths) {
    ChainContext ctx;
    auto paths = ancestor_chains(tag, g, max_paths);

    std::string out = "Tag: " + tag + "\nPaths:\n";
    std::set<std::string> seen;
    for (const auto& path : paths) {
        out += join(path, " -> ") + "\n";
        for (const auto& t : path) {
            if (seen.insert(t).second) ctx.tag_order.push_back(t);
        }
    }
    out += "Notes:\n";
    for (const auto& t : ctx.tag_order) {
        auto it = g.domain_nodes.find(t);
        std::string note = it == g.domain_nodes.end() ? std::string()
                                                      : join(it->second.descriptions, " ");
        out += t + ": " + note + "\n";
    }
    ctx.rendered = out;
    return ctx;
}

std::string render_object_tags(const std::vector<ObjectTag>& neighbors, const TagGraph& g,
                               const std::string& tag) {
    if (neighbors.empty()) return "(none)";
    std::string out;
    for (const auto& obj : neighbors) {
        out += "- " + obj.name + " (" + obj.tag_type + "): " + join(obj.descriptions, " ");
        auto it = g.od_links.find({obj.name, tag});
        if (it != g.od_links.end() && !it->second.empty()) {
            out += " [link: " + it->second + "]";
        }
        out += "\n";
    }
    return out;
}

std::string render_neighbor_relations(const std::vector<ObjectTag>& neighbors,
                                      const TagGraph& g) {
    std::set<std::string> names;
    for (const auto& obj : neighbors) names.insert(obj.name);
    std::string out;
    for (const auto& [key, descs] : g.object_edges) {
        if (!names.count(key.first) || !names.count(key.second)) continue;
        out += "- " + key.first + " -> " + key.second + ": " + join(descs, " ") + "\n";
    }
    return out.empty() ? "(none)" : out;
}

std::string bootstrap_chain_summary(const ChainContext& chain, const TagGraph& g) {
    std::vector<std::string> parts;
    for (const auto& t : chain.tag_order) {
        auto it = g.domain_nodes.find(t);
        if (it == g.domain_nodes.end()) continue;
        std::string joined = join(it->second.descriptions, " ");
        if (!joined.empty()) parts.push_back(joined);
    }
    return parts.empty() ? "(none)" : join(parts, " ");
}

}  // namespace

std::string resummarize_entry(const std::string& tag, const std::string& old_summary,
                              const std::string& new_summary, Gateway& gateway,
                              const PromptLibrary& prompts, const LlmCallOptions& opts,
                              bool* failed) {
    if (old_summary.empty() || new_summary.empty()) {
        throw std::runtime_error("resummarize needs two non-empty summaries for " + tag);
    }
    if (failed) *failed = false;
    std::string prompt = render_template(prompts.get("merge"), {{"language", opts.language},
                                                                {"old_summary", old_summary},
                                                                {"new_summary", new_summary}});
    try {
        CompletionRequest req;
        req.prompt = std::move(prompt);
        req.max_output_tokens = opts.max_output_tokens;
        req.temperature = opts.temperature;
        std::string merged = gateway.complete(req);
        return merged.empty() ? old_summary : merged;
    } catch (const GatewayError& e) {
        debug_log("resummarize failed for " + tag + ": " + e.what());
        if (failed) *failed = true;
        return old_summary;
    }
}

FusionOutcome fuse_domain_knowledge(const TagGraph& g, const std::vector<std::string>& worklist,
                                    Gateway& gateway, VectorIndex& idx,
                                    const PromptLibrary& prompts, const LlmCallOptions& opts,
                                    std::size_t max_paths) {
    for (const auto& tag : worklist) {
        if (!g.has_domain(tag)) throw std::runtime_error("fusion worklist tag not in graph: " + tag);
    }

    // Leaves first: descending longest-path depth, name ascending within a level.
    auto depths = dag_depths(g);
    std::vector<std::string> ordered(worklist.begin(), worklist.end());
    std::sort(ordered.begin(), ordered.end(), [&](const std::string& a, const std::string& b) {
        std::size_t da = depths.count(a) ? depths.at(a) : 0;
        std::size_t db = depths.count(b) ? depths.at(b) : 0;
        if (da != db) return da > db;
        return a < b;
    });
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    FusionOutcome outcome;
    for (const auto& tag : ordered) {
        ChainContext chain = render_chain_context(tag, g, max_paths);
        auto neighbors = object_neighbors(tag, g);
        auto previous = idx.get(tag);

        std::string chain_summary =
            previous ? previous->summary : bootstrap_chain_summary(chain, g);

        std::string prompt =
            render_template(prompts.get("fusion"),
                            {{"language", opts.language},
                             {"domain_tag_chain", chain.rendered},
                             {"chain_summary", chain_summary},
                             {"object_tags", render_object_tags(neighbors, g, tag)},
                             {"relationships", render_neighbor_relations(neighbors, g)}});
        try {
            CompletionRequest req;
            req.prompt = std::move(prompt);
            req.max_output_tokens = opts.max_output_tokens;
            req.temperature = opts.temperature;
            std::string summary = gateway.complete(req);
            if (summary.empty()) throw TransportError("empty fusion summary for " + tag);

            if (previous) {
                summary = resummarize_entry(tag, previous->summary, summary, gateway, prompts,
                                            opts);
            }
            KnowledgeEntry entry;
            entry.id = tag;
            entry.summary = summary;
            entry.vector = gateway.embed({summary}).at(0);
            idx.upsert(entry);
            outcome.entries.push_back(std::move(entry));
        } catch (const GatewayError& e) {
            debug_log("fusion failed for " + tag + ": " + e.what());
            outcome.unfused.push_back(tag);
        }
    }
    return outcome;
}

std::pair<std::vector<std::string>, std::vector<std::string>> ret_tag(const std::string& q,
                                                                      const VectorIndex& idx,
                                                                      Gateway& gateway,
                                                                      std::size_t k) {
    if (idx.empty()) throw std::runtime_error("index not built");
    if (k < 1) throw std::runtime_error("ret_tag: k must be >= 1");

    EmbeddingVector qv = gateway.embed({q}).at(0);
    auto hits = idx.top_k(qv, k);

    std::vector<std::string> tags, summaries;
    for (const auto& [id, _] : hits) {
        tags.push_back(id);
        summaries.push_back(idx.get(id)->summary);
    }
    return {std::move(tags), std::move(summaries)};
}

RetChainResult ret_chain(const std::vector<std::string>& tags, const TagGraph& g,
                         const VectorIndex& idx, std::size_t max_paths) {
    std::set<std::string> retrieved(tags.begin(), tags.end());
    std::map<std::string, std::size_t> distance;  // chain tag -> min hops to a retrieved tag

    for (const auto& tag : tags) {
        for (const auto& path : ancestor_chains(tag, g, max_paths)) {
            for (std::size_t i = 0; i < path.size(); ++i) {
                const std::string& c = path[i];
                if (retrieved.count(c)) continue;
                std::size_t hops = path.size() - 1 - i;
                auto [it, inserted] = distance.try_emplace(c, hops);
                if (!inserted) it->second = std::min(it->second, hops);
            }
        }
    }

    std::vector<std::string> ordered;
    ordered.reserve(distance.size());
    for (const auto& [name, _] : distance) ordered.push_back(name);
    std::sort(ordered.begin(), ordered.end(), [&](const std::string& a, const std::string& b) {
        bool ra = a == g.root, rb = b == g.root;
        if (ra != rb) return ra;  // root first
        if (distance.at(a) != distance.at(b)) return distance.at(a) < distance.at(b);
        return a < b;
    });

    RetChainResult result;
    for (const auto& name : ordered) {
        auto entry = idx.get(name);
        if (!entry) {
            ++result.skipped_without_entry;
            continue;
        }
        result.tags.push_back(name);
        result.summaries.push_back(entry->summary);
    }
    return result;
}

std::string render_context_section(const std::string& tag, const std::string& summary) {
    return "[TAG " + tag + "]\n" + summary;
}

PackResult pack_context(const std::vector<std::string>& s_t, const std::vector<std::string>& s_c,
                        std::size_t budget, const Tokenizer& tok) {
    PackResult result;
    const std::vector<std::string>* lists[] = {&s_t, &s_c};
    for (int phase = 0; phase < 2; ++phase) {
        for (const auto& item : *lists[phase]) {
            std::string candidate =
                result.text.empty() ? item : result.text + "\n\n" + item;
            if (tok.count_tokens(candidate) > budget) {
                result.token_count = tok.count_tokens(result.text);
                return result;
            }
            result.text = std::move(candidate);
            (phase == 0 ? result.included_primary : result.included_secondary) += 1;
        }
    }
    result.token_count = tok.count_tokens(result.text);
    return result;
}

Answer answer(const std::string& q, const QueryContext& ctx, Gateway& gateway,
              const PromptLibrary& prompts, const std::string& response_type,
              const LlmCallOptions& opts, const Tokenizer& tok) {
    std::string prompt = render_template(prompts.get("generation"),
                                         {{"response_type", response_type},
                                          {"context_data", ctx.packed_context},
                                          {"query", q}});
    CompletionRequest req;
    req.prompt = prompt;
    req.max_output_tokens = opts.max_output_tokens;
    req.temperature = opts.temperature;
    std::string text = gateway.complete(req);

    Answer a;
    a.text = std::move(text);
    a.context_tag_names = ctx.context_tag_names;
    a.low_context = ctx.packed_token_count == 0;
    a.prompt_tokens = tok.count_tokens(prompt);
    a.answer_tokens = tok.count_tokens(a.text);
    return a;
}

}  // namespace taggraph
