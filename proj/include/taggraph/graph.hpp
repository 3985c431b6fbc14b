#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "taggraph/extract.hpp"

namespace taggraph {

struct DomainNode {
    std::vector<std::string> descriptions;
};

struct ObjectNode {
    std::string tag_type;
    std::vector<std::string> descriptions;
    std::vector<std::string> source_chunks;
};

struct GraphCounters {
    int rejected_chains = 0;    // chain not rooted at the configured root
    int cycle_rejections = 0;   // edges refused by the acyclicity guard
    int dangling_relations = 0; // object relations with a missing endpoint
    int type_conflicts = 0;     // same-name object tags with differing types
};

// The composite tag knowledge graph: a rooted DAG of domain tags, the object
// tag layer, object-object relations, and the object->domain attachment
// links. All maps are ordered so serialization is byte-stable.
struct TagGraph {
    std::string root;
    std::map<std::string, DomainNode> domain_nodes;
    std::map<std::string, std::set<std::string>> children;  // parent -> children
    std::map<std::string, std::set<std::string>> parents;   // child -> parents
    std::map<std::string, ObjectNode> object_nodes;
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> object_edges;
    std::map<std::pair<std::string, std::string>, std::string> od_links;
    GraphCounters counters;

    bool has_domain(const std::string& name) const { return domain_nodes.count(name) > 0; }
    std::size_t domain_edge_count() const;
};

struct GraphStats {
    std::size_t object_tags = 0;
    std::size_t object_relations = 0;
    std::size_t domain_tags = 0;
    std::size_t domain_edges = 0;
    std::size_t od_links = 0;
    std::size_t max_depth = 0;
    std::size_t unchained_tags = 0;
};

// Names of domain tags whose description set, child set, or object
// neighborhood changed during an update — the re-summarization worklist.
using ChangedDomains = std::set<std::string>;

TagGraph make_graph(const DomainTag& root);

// Chain organization: a fresh DAG seeded with the root is grown one chain at
// a time (each non-root tag attaches under its predecessor, duplicate edges
// skipped, cycle-creating edges rejected and counted), then merged into
// `existing` by node-description append and edge union.
TagGraph organize_chains(const std::vector<TagChain>& chains, const DomainTag& root,
                         const TagGraph& existing, ChangedDomains* changed = nullptr);

// Attaches obj to the terminal domain tag of its chain via an od link and
// merges the object node in. The chain must already be organized into g.
void link_object_tag(const ObjectTag& obj, const TagChain& chain, TagGraph& g,
                     ChangedDomains* changed = nullptr);

// Merges an object node without touching od links (description append,
// source-chunk union, first-seen type wins).
void merge_object_node(const ObjectTag& obj, TagGraph& g, ChangedDomains* changed = nullptr);

// Commits relations whose endpoints both exist; dangling ones are dropped
// and counted.
void merge_object_relations(const std::vector<ObjectRelation>& relations, TagGraph& g,
                            ChangedDomains* changed = nullptr);

struct UpsertResult {
    TagGraph graph;
    std::vector<std::string> changed_domains;  // sorted
};

// Incremental insertion: organize_chains + object merge + relation merge +
// od linking over an existing graph. Chains must cover every object in
// new_objects that is not already linked in g.
UpsertResult upsert_tags(const std::vector<ObjectTag>& new_objects,
                         const std::vector<ObjectRelation>& new_relations,
                         const std::vector<TagChain>& new_chains, const TagGraph& g);

// All root-to-tag paths, breadth-first (shortest first, ties by parent name),
// capped at max_paths. tag == root yields the single zero-length path.
std::vector<std::vector<std::string>> ancestor_chains(const std::string& tag, const TagGraph& g,
                                                      std::size_t max_paths);

// Object tags od-linked to the domain tag, in ascending name order.
std::vector<ObjectTag> object_neighbors(const std::string& tag, const TagGraph& g);

// Longest-path depth from the root for every domain tag.
std::map<std::string, std::size_t> dag_depths(const TagGraph& g);

bool is_acyclic(const TagGraph& g);

GraphStats compute_stats(const TagGraph& g, std::size_t unchained);

enum class ExportFormat { dot, graphml };
std::string export_graph(const TagGraph& g, ExportFormat format);

std::string graph_to_json(const TagGraph& g);
TagGraph graph_from_json(const std::string& text);

}  // namespace taggraph
