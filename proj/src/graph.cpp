#include "taggraph/graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "taggraph/util.hpp"

namespace taggraph {

using nlohmann::json;

namespace {

bool append_unique(std::vector<std::string>& list, const std::string& value) {
    if (value.empty()) return false;
    if (std::find(list.begin(), list.end(), value) != list.end()) return false;
    list.push_back(value);
    return true;
}

bool append_unique_all(std::vector<std::string>& list, const std::vector<std::string>& values) {
    bool changed = false;
    for (const auto& v : values) changed |= append_unique(list, v);
    return changed;
}

// True when `target` is reachable from `start` along domain edges.
bool reachable(const TagGraph& g, const std::string& start, const std::string& target) {
    if (start == target) return true;
    std::deque<std::string> q{start};
    std::set<std::string> seen{start};
    while (!q.empty()) {
        std::string u = q.front();
        q.pop_front();
        auto it = g.children.find(u);
        if (it == g.children.end()) continue;
        for (const auto& c : it->second) {
            if (c == target) return true;
            if (seen.insert(c).second) q.push_back(c);
        }
    }
    return false;
}

void mark(ChangedDomains* changed, const std::string& name) {
    if (changed) changed->insert(name);
}

// Adds (parent, child) unless present or cycle-creating. Returns true when
// the edge was inserted.
bool add_domain_edge(TagGraph& g, const std::string& parent, const std::string& child,
                     ChangedDomains* changed) {
    auto& kids = g.children[parent];
    if (kids.count(child)) return false;
    if (parent == child || reachable(g, child, parent)) {
        ++g.counters.cycle_rejections;
        return false;
    }
    kids.insert(child);
    g.parents[child].insert(parent);
    mark(changed, parent);
    return true;
}

void merge_domain_node(TagGraph& g, const std::string& name,
                       const std::vector<std::string>& descriptions, ChangedDomains* changed) {
    auto [it, inserted] = g.domain_nodes.try_emplace(name);
    bool desc_changed = append_unique_all(it->second.descriptions, descriptions);
    if (inserted || desc_changed) mark(changed, name);
}

// Fresh DAG edges merged in breadth-first order from the root so that a new
// node's incoming edge lands before any of its outgoing edges; that keeps a
// rejected cycle edge from ever orphaning a node.
void merge_dag_into(const TagGraph& fresh, TagGraph& g, ChangedDomains* changed) {
    for (const auto& [name, node] : fresh.domain_nodes) {
        merge_domain_node(g, name, node.descriptions, changed);
    }
    std::deque<std::string> q{fresh.root};
    std::set<std::string> seen{fresh.root};
    while (!q.empty()) {
        std::string u = q.front();
        q.pop_front();
        auto it = fresh.children.find(u);
        if (it == fresh.children.end()) continue;
        for (const auto& c : it->second) {
            add_domain_edge(g, u, c, changed);
            if (seen.insert(c).second) q.push_back(c);
        }
    }
}

}  // namespace

std::size_t TagGraph::domain_edge_count() const {
    std::size_t n = 0;
    for (const auto& [_, kids] : children) n += kids.size();
    return n;
}

TagGraph make_graph(const DomainTag& root) {
    TagGraph g;
    g.root = root.name;
    g.domain_nodes[root.name].descriptions = root.descriptions;
    return g;
}

TagGraph organize_chains(const std::vector<TagChain>& chains, const DomainTag& root,
                         const TagGraph& existing, ChangedDomains* changed) {
    TagGraph g = existing;
    if (g.root.empty()) g.root = root.name;
    if (g.root != root.name) throw std::runtime_error("root mismatch: " + root.name);
    merge_domain_node(g, root.name, root.descriptions, changed);

    TagGraph dag = make_graph(root);
    for (const auto& chain : chains) {
        if (chain.tags.empty() || chain.tags.front().name != root.name) {
            ++g.counters.rejected_chains;
            continue;
        }
        merge_domain_node(dag, root.name, chain.tags.front().descriptions, nullptr);
        for (std::size_t j = 1; j < chain.tags.size(); ++j) {
            const DomainTag& tag = chain.tags[j];
            const std::string& parent = chain.tags[j - 1].name;
            if (!dag.has_domain(parent)) continue;  // unreachable with validated chains
            merge_domain_node(dag, tag.name, tag.descriptions, nullptr);
            add_domain_edge(dag, parent, tag.name, nullptr);
        }
    }
    g.counters.cycle_rejections += dag.counters.cycle_rejections;

    merge_dag_into(dag, g, changed);
    return g;
}

void merge_object_node(const ObjectTag& obj, TagGraph& g, ChangedDomains* changed) {
    auto [it, inserted] = g.object_nodes.try_emplace(obj.name);
    ObjectNode& node = it->second;
    bool node_changed = inserted;
    if (inserted) {
        node.tag_type = obj.tag_type;
    } else if (!obj.tag_type.empty() && node.tag_type != obj.tag_type) {
        ++g.counters.type_conflicts;  // first-seen type wins
    }
    node_changed |= append_unique_all(node.descriptions, obj.descriptions);
    for (const auto& c : obj.source_chunks) node_changed |= append_unique(node.source_chunks, c);

    if (node_changed && changed) {
        for (const auto& [key, _] : g.od_links) {
            if (key.first == obj.name) changed->insert(key.second);
        }
    }
}

void merge_object_relations(const std::vector<ObjectRelation>& relations, TagGraph& g,
                            ChangedDomains* changed) {
    for (const auto& rel : relations) {
        if (rel.source == rel.target) continue;
        if (!g.object_nodes.count(rel.source) || !g.object_nodes.count(rel.target)) {
            ++g.counters.dangling_relations;
            continue;
        }
        const auto key = std::make_pair(rel.source, rel.target);
        bool existed = g.object_edges.count(key) > 0;
        bool rel_changed = append_unique_all(g.object_edges[key], rel.descriptions) || !existed;
        if (rel_changed && changed) {
            for (const auto& [key, _] : g.od_links) {
                if (key.first == rel.source || key.first == rel.target) {
                    changed->insert(key.second);
                }
            }
        }
    }
}

void link_object_tag(const ObjectTag& obj, const TagChain& chain, TagGraph& g,
                     ChangedDomains* changed) {
    if (chain.tags.empty()) throw std::runtime_error("cannot link empty chain");
    const std::string& terminal = chain.tags.back().name;
    if (!g.has_domain(terminal)) {
        throw std::runtime_error("terminal domain tag not in graph: " + terminal +
                                 " (organize the chain first)");
    }
    merge_object_node(obj, g, changed);

    auto [it, inserted] = g.od_links.try_emplace({obj.name, terminal});
    if (inserted) {
        it->second = chain.link_description;
        mark(changed, terminal);
    } else if (!chain.link_description.empty() &&
               it->second.find(chain.link_description) == std::string::npos) {
        it->second += it->second.empty() ? "" : " | ";
        it->second += chain.link_description;
        mark(changed, terminal);
    }
}

UpsertResult upsert_tags(const std::vector<ObjectTag>& new_objects,
                         const std::vector<ObjectRelation>& new_relations,
                         const std::vector<TagChain>& new_chains, const TagGraph& g) {
    if (g.root.empty()) throw std::runtime_error("graph has no root");
    ChangedDomains changed;

    DomainTag root;
    root.name = g.root;
    if (auto it = g.domain_nodes.find(g.root); it != g.domain_nodes.end()) {
        root.descriptions = it->second.descriptions;
    }

    TagGraph out = organize_chains(new_chains, root, g, &changed);

    std::map<std::string, const TagChain*> chain_by_object;
    for (const auto& c : new_chains) chain_by_object[c.object_tag] = &c;

    for (const auto& obj : new_objects) {
        auto cit = chain_by_object.find(obj.name);
        if (cit != chain_by_object.end()) {
            link_object_tag(obj, *cit->second, out, &changed);
        } else {
            merge_object_node(obj, out, &changed);
        }
    }
    merge_object_relations(new_relations, out, &changed);

    UpsertResult result;
    result.graph = std::move(out);
    result.changed_domains.assign(changed.begin(), changed.end());
    return result;
}

std::vector<std::vector<std::string>> ancestor_chains(const std::string& tag, const TagGraph& g,
                                                      std::size_t max_paths) {
    if (!g.has_domain(tag)) throw std::runtime_error("unknown domain tag: " + tag);

    std::vector<std::vector<std::string>> out;
    std::deque<std::vector<std::string>> queue;
    queue.push_back({tag});
    while (!queue.empty() && out.size() < max_paths) {
        std::vector<std::string> path = std::move(queue.front());
        queue.pop_front();
        const std::string& head = path.back();
        if (head == g.root) {
            out.emplace_back(path.rbegin(), path.rend());
            continue;
        }
        auto pit = g.parents.find(head);
        if (pit == g.parents.end()) continue;
        for (const auto& parent : pit->second) {
            auto next = path;
            next.push_back(parent);
            queue.push_back(std::move(next));
        }
    }
    return out;
}

std::vector<ObjectTag> object_neighbors(const std::string& tag, const TagGraph& g) {
    if (!g.has_domain(tag)) throw std::runtime_error("unknown domain tag: " + tag);
    std::vector<ObjectTag> out;
    for (const auto& [key, _] : g.od_links) {
        if (key.second != tag) continue;
        auto nit = g.object_nodes.find(key.first);
        if (nit == g.object_nodes.end()) continue;
        ObjectTag t;
        t.name = key.first;
        t.tag_type = nit->second.tag_type;
        t.descriptions = nit->second.descriptions;
        t.source_chunks = nit->second.source_chunks;
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end(),
              [](const ObjectTag& a, const ObjectTag& b) { return a.name < b.name; });
    return out;
}

std::map<std::string, std::size_t> dag_depths(const TagGraph& g) {
    std::map<std::string, std::size_t> depth;
    std::map<std::string, std::size_t> indegree;
    for (const auto& [name, _] : g.domain_nodes) indegree[name] = 0;
    for (const auto& [_, kids] : g.children) {
        for (const auto& c : kids) ++indegree[c];
    }
    std::deque<std::string> q;
    for (const auto& [name, deg] : indegree) {
        if (deg == 0) q.push_back(name);
    }
    while (!q.empty()) {
        std::string u = q.front();
        q.pop_front();
        auto it = g.children.find(u);
        if (it == g.children.end()) continue;
        for (const auto& c : it->second) {
            depth[c] = std::max(depth[c], depth[u] + 1);
            if (--indegree[c] == 0) q.push_back(c);
        }
    }
    depth[g.root] = 0;
    return depth;
}

bool is_acyclic(const TagGraph& g) {
    std::map<std::string, std::size_t> indegree;
    for (const auto& [name, _] : g.domain_nodes) indegree[name] = 0;
    for (const auto& [_, kids] : g.children) {
        for (const auto& c : kids) ++indegree[c];
    }
    std::deque<std::string> q;
    for (const auto& [name, deg] : indegree) {
        if (deg == 0) q.push_back(name);
    }
    std::size_t visited = 0;
    while (!q.empty()) {
        std::string u = q.front();
        q.pop_front();
        ++visited;
        auto it = g.children.find(u);
        if (it == g.children.end()) continue;
        for (const auto& c : it->second) {
            if (--indegree[c] == 0) q.push_back(c);
        }
    }
    return visited == g.domain_nodes.size();
}

GraphStats compute_stats(const TagGraph& g, std::size_t unchained) {
    GraphStats s;
    s.object_tags = g.object_nodes.size();
    s.object_relations = g.object_edges.size();
    s.domain_tags = g.domain_nodes.size();
    s.domain_edges = g.domain_edge_count();
    s.od_links = g.od_links.size();
    s.unchained_tags = unchained;
    for (const auto& [_, d] : dag_depths(g)) s.max_depth = std::max(s.max_depth, d);
    return s;
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string export_dot(const TagGraph& g) {
    std::string out = "digraph tag_knowledge_graph {\n";
    for (const auto& [name, _] : g.domain_nodes) {
        bool root = name == g.root;
        out += "  \"d:" + dot_escape(name) + "\" [label=\"" + dot_escape(name) + "\" kind=\"" +
               (root ? "root" : "domain") + "\" shape=\"" + (root ? "doubleoctagon" : "ellipse") +
               "\"];\n";
    }
    for (const auto& [name, _] : g.object_nodes) {
        out += "  \"o:" + dot_escape(name) + "\" [label=\"" + dot_escape(name) +
               "\" kind=\"object\" shape=\"box\"];\n";
    }
    for (const auto& [parent, kids] : g.children) {
        for (const auto& c : kids) {
            out += "  \"d:" + dot_escape(parent) + "\" -> \"d:" + dot_escape(c) +
                   "\" [kind=\"has_subdomain\"];\n";
        }
    }
    for (const auto& [key, _] : g.od_links) {
        out += "  \"d:" + dot_escape(key.second) + "\" -> \"o:" + dot_escape(key.first) +
               "\" [kind=\"od_link\"];\n";
    }
    for (const auto& [key, _] : g.object_edges) {
        out += "  \"o:" + dot_escape(key.first) + "\" -> \"o:" + dot_escape(key.second) +
               "\" [kind=\"relation\"];\n";
    }
    out += "}\n";
    return out;
}

std::string export_graphml(const TagGraph& g) {
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\"\n"
        "         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\"\n"
        "         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
        "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
        "  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n"
        "  <key id=\"ekind\" for=\"edge\" attr.name=\"kind\" attr.type=\"string\"/>\n"
        "  <graph id=\"G\" edgedefault=\"directed\">\n";
    auto node = [&](const std::string& id, const std::string& kind) {
        out += "    <node id=\"" + xml_escape(id) + "\"><data key=\"kind\">" + kind +
               "</data></node>\n";
    };
    auto edge = [&](const std::string& s, const std::string& t, const std::string& kind) {
        out += "    <edge source=\"" + xml_escape(s) + "\" target=\"" + xml_escape(t) +
               "\"><data key=\"ekind\">" + kind + "</data></edge>\n";
    };
    for (const auto& [name, _] : g.domain_nodes) {
        node("d:" + name, name == g.root ? "root" : "domain");
    }
    for (const auto& [name, _] : g.object_nodes) node("o:" + name, "object");
    for (const auto& [parent, kids] : g.children) {
        for (const auto& c : kids) edge("d:" + parent, "d:" + c, "has_subdomain");
    }
    for (const auto& [key, _] : g.od_links) edge("d:" + key.second, "o:" + key.first, "od_link");
    for (const auto& [key, _] : g.object_edges) {
        edge("o:" + key.first, "o:" + key.second, "relation");
    }
    out += "  </graph>\n</graphml>\n";
    return out;
}

}  // namespace

std::string export_graph(const TagGraph& g, ExportFormat format) {
    return format == ExportFormat::dot ? export_dot(g) : export_graphml(g);
}

std::string graph_to_json(const TagGraph& g) {
    json j;
    j["root"] = g.root;
    j["domain_nodes"] = json::object();
    for (const auto& [name, node] : g.domain_nodes) {
        j["domain_nodes"][name] = {{"descriptions", node.descriptions}};
    }
    j["domain_edges"] = json::array();
    for (const auto& [parent, kids] : g.children) {
        for (const auto& c : kids) j["domain_edges"].push_back({parent, c});
    }
    j["object_nodes"] = json::object();
    for (const auto& [name, node] : g.object_nodes) {
        j["object_nodes"][name] = {{"tag_type", node.tag_type},
                                   {"descriptions", node.descriptions},
                                   {"source_chunks", node.source_chunks}};
    }
    j["object_edges"] = json::array();
    for (const auto& [key, descs] : g.object_edges) {
        j["object_edges"].push_back(
            {{"source", key.first}, {"target", key.second}, {"descriptions", descs}});
    }
    j["od_links"] = json::array();
    for (const auto& [key, desc] : g.od_links) {
        j["od_links"].push_back(
            {{"object", key.first}, {"domain", key.second}, {"description", desc}});
    }
    j["counters"] = {{"rejected_chains", g.counters.rejected_chains},
                     {"cycle_rejections", g.counters.cycle_rejections},
                     {"dangling_relations", g.counters.dangling_relations},
                     {"type_conflicts", g.counters.type_conflicts}};
    return j.dump(2) + "\n";
}

TagGraph graph_from_json(const std::string& text) {
    json j = json::parse(text);
    TagGraph g;
    g.root = j.at("root").get<std::string>();
    for (const auto& [name, node] : j.at("domain_nodes").items()) {
        g.domain_nodes[name].descriptions =
            node.at("descriptions").get<std::vector<std::string>>();
    }
    for (const auto& e : j.at("domain_edges")) {
        std::string parent = e.at(0).get<std::string>();
        std::string child = e.at(1).get<std::string>();
        g.children[parent].insert(child);
        g.parents[child].insert(parent);
    }
    for (const auto& [name, node] : j.at("object_nodes").items()) {
        ObjectNode& n = g.object_nodes[name];
        n.tag_type = node.at("tag_type").get<std::string>();
        n.descriptions = node.at("descriptions").get<std::vector<std::string>>();
        n.source_chunks = node.at("source_chunks").get<std::vector<std::string>>();
    }
    for (const auto& e : j.at("object_edges")) {
        g.object_edges[{e.at("source").get<std::string>(), e.at("target").get<std::string>()}] =
            e.at("descriptions").get<std::vector<std::string>>();
    }
    for (const auto& e : j.at("od_links")) {
        g.od_links[{e.at("object").get<std::string>(), e.at("domain").get<std::string>()}] =
            e.at("description").get<std::string>();
    }
    const auto& c = j.at("counters");
    g.counters.rejected_chains = c.at("rejected_chains").get<int>();
    g.counters.cycle_rejections = c.at("cycle_rejections").get<int>();
    g.counters.dangling_relations = c.at("dangling_relations").get<int>();
    g.counters.type_conflicts = c.at("type_conflicts").get<int>();
    return g;
}

}  // namespace taggraph
