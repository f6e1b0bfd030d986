#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace causalfs {

/// Role of a node in the decision problem: decision variables are the
/// controllable inputs, targets are the outcomes entering the objective,
/// external variables is everything else (observed or not).
enum class NodeClass { Decision, Target, External };

const char* node_class_name(NodeClass cls);
NodeClass parse_node_class(const std::string& name);

struct Node {
    NodeClass cls = NodeClass::External;
    std::string label;
};

/// Sorted, duplicate-free vector of node indices.
using NodeSet = std::vector<int>;

NodeSet make_node_set(std::initializer_list<int> items);
NodeSet make_node_set(std::vector<int> items);
bool set_contains(const NodeSet& s, int v);
NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_difference(const NodeSet& a, const NodeSet& b);
bool sets_disjoint(const NodeSet& a, const NodeSet& b);

/// Directed acyclic graph over classed, labeled nodes. Edges are (parent,
/// child) index pairs. Construction validates indices, rejects duplicate
/// edges, duplicate labels and cycles.
class CausalDag {
public:
    CausalDag(std::vector<Node> nodes, std::vector<std::pair<int, int>> edges);

    int node_count() const { return static_cast<int>(nodes_.size()); }
    const Node& node(int v) const;
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& parents(int v) const;
    const std::vector<int>& children(int v) const;
    bool has_edge(int parent, int child) const;

    /// Topological order; parents precede children.
    const std::vector<int>& topological_order() const { return topo_; }

    NodeSet nodes_of(NodeClass cls) const;
    int find_label(const std::string& label) const;  // -1 when absent

private:
    std::vector<Node> nodes_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
    std::vector<int> topo_;
};

/// A d-separation query: are all paths between sources and sinks blocked
/// given the conditioning set? The three sets must be pairwise disjoint.
struct PathQuery {
    NodeSet sources;
    NodeSet sinks;
    NodeSet conditioning;
};

/// Strict descendants of the given set (directed paths of length >= 1).
NodeSet descendants(const CausalDag& dag, const NodeSet& from);

/// Strict ancestors of the given set.
NodeSet ancestors(const CausalDag& dag, const NodeSet& from);

/// d-separation via reachability in the moralized ancestral graph. A path is
/// blocked when it contains a conditioned non-collider, or a collider that is
/// neither conditioned on nor an ancestor of a conditioned node.
bool is_d_separated(const CausalDag& dag, const PathQuery& q);

/// Back-door criterion for p(y | do(x), s): no node of s is a descendant of
/// x, and every path into a source is d-separated by s. Sets must be
/// pairwise disjoint.
bool satisfies_backdoor(const CausalDag& dag, const NodeSet& x, const NodeSet& y,
                        const NodeSet& s);

/// Temporal ordering assumption: no decision or external node is a
/// descendant of a target node.
bool check_temporal_assumption(const CausalDag& dag);

/// Premise of the reduced-adjustment result: with X the decision set and Z
/// the external set, X is d-separated from Z \ kappa given kappa. kappa must
/// consist of external nodes.
bool check_thm10_premise(const CausalDag& dag, const NodeSet& kappa);

/// Plain-text serialization: one "class label" line per node, then one
/// "parent -> child" line per edge.
CausalDag parse_dag(std::istream& in);
void write_dag(std::ostream& out, const CausalDag& dag);
CausalDag load_dag_file(const std::string& path);
void save_dag_file(const std::string& path, const CausalDag& dag);

}  // namespace causalfs
