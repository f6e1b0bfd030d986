#include "causalfs/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace causalfs {

const char* node_class_name(NodeClass cls) {
    switch (cls) {
        case NodeClass::Decision: return "decision";
        case NodeClass::Target: return "target";
        case NodeClass::External: return "external";
    }
    throw std::invalid_argument("node_class_name: bad enum value");
}

NodeClass parse_node_class(const std::string& name) {
    if (name == "decision") return NodeClass::Decision;
    if (name == "target") return NodeClass::Target;
    if (name == "external") return NodeClass::External;
    throw std::invalid_argument("unknown node class '" + name + "'");
}

NodeSet make_node_set(std::vector<int> items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return items;
}

NodeSet make_node_set(std::initializer_list<int> items) {
    return make_node_set(std::vector<int>(items));
}

bool set_contains(const NodeSet& s, int v) {
    return std::binary_search(s.begin(), s.end(), v);
}

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool sets_disjoint(const NodeSet& a, const NodeSet& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia == *ib) return false;
        if (*ia < *ib) ++ia; else ++ib;
    }
    return true;
}

CausalDag::CausalDag(std::vector<Node> nodes, std::vector<std::pair<int, int>> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    const int n = node_count();
    parents_.assign(n, {});
    children_.assign(n, {});

    std::unordered_map<std::string, int> seen_labels;
    for (int v = 0; v < n; ++v) {
        if (nodes_[v].label.empty())
            throw std::invalid_argument("CausalDag: empty node label");
        if (!seen_labels.emplace(nodes_[v].label, v).second)
            throw std::invalid_argument("CausalDag: duplicate label '" + nodes_[v].label + "'");
    }

    for (const auto& [p, c] : edges_) {
        if (p < 0 || p >= n || c < 0 || c >= n)
            throw std::invalid_argument("CausalDag: edge endpoint out of range");
        if (p == c)
            throw std::invalid_argument("CausalDag: self loop on node " + nodes_[p].label);
        if (has_edge(p, c))
            throw std::invalid_argument("CausalDag: duplicate edge");
        parents_[c].push_back(p);
        children_[p].push_back(c);
    }
    for (auto& vec : parents_) std::sort(vec.begin(), vec.end());
    for (auto& vec : children_) std::sort(vec.begin(), vec.end());

    // Kahn's algorithm; leftover nodes mean a cycle.
    std::vector<int> indegree(n);
    for (int v = 0; v < n; ++v) indegree[v] = static_cast<int>(parents_[v].size());
    std::deque<int> ready;
    for (int v = 0; v < n; ++v)
        if (indegree[v] == 0) ready.push_back(v);
    topo_.reserve(n);
    while (!ready.empty()) {
        const int v = ready.front();
        ready.pop_front();
        topo_.push_back(v);
        for (int c : children_[v])
            if (--indegree[c] == 0) ready.push_back(c);
    }
    if (static_cast<int>(topo_.size()) != n)
        throw std::invalid_argument("CausalDag: edge list contains a cycle");
}

const Node& CausalDag::node(int v) const {
    if (v < 0 || v >= node_count())
        throw std::invalid_argument("CausalDag::node: index out of range");
    return nodes_[v];
}

const std::vector<int>& CausalDag::parents(int v) const {
    if (v < 0 || v >= node_count())
        throw std::invalid_argument("CausalDag::parents: index out of range");
    return parents_[v];
}

const std::vector<int>& CausalDag::children(int v) const {
    if (v < 0 || v >= node_count())
        throw std::invalid_argument("CausalDag::children: index out of range");
    return children_[v];
}

bool CausalDag::has_edge(int parent, int child) const {
    if (parent < 0 || parent >= node_count() || child < 0 || child >= node_count())
        throw std::invalid_argument("CausalDag::has_edge: index out of range");
    return std::binary_search(children_[parent].begin(), children_[parent].end(), child);
}

NodeSet CausalDag::nodes_of(NodeClass cls) const {
    NodeSet out;
    for (int v = 0; v < node_count(); ++v)
        if (nodes_[v].cls == cls) out.push_back(v);
    return out;
}

int CausalDag::find_label(const std::string& label) const {
    for (int v = 0; v < node_count(); ++v)
        if (nodes_[v].label == label) return v;
    return -1;
}

namespace {

void check_set_in_range(const CausalDag& dag, const NodeSet& s, const char* what) {
    for (int v : s)
        if (v < 0 || v >= dag.node_count())
            throw std::invalid_argument(std::string(what) + ": node index out of range");
}

// Nodes reachable from `from` via at least one edge of `next`.
NodeSet closure(const std::vector<std::vector<int>>& next, int n, const NodeSet& from) {
    std::vector<char> seen(n, 0);
    std::deque<int> queue(from.begin(), from.end());
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int w : next[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                queue.push_back(w);
            }
        }
    }
    NodeSet out;
    for (int v = 0; v < n; ++v)
        if (seen[v]) out.push_back(v);
    return out;
}

// d-separation on explicit adjacency lists so callers can query surgically
// modified graphs without rebuilding a CausalDag.
bool d_separated_adjacency(int n, const std::vector<std::vector<int>>& parents,
                           const std::vector<std::vector<int>>& children,
                           const NodeSet& sources, const NodeSet& sinks,
                           const NodeSet& conditioning) {
    // Ancestral set of sources, sinks and conditioning nodes.
    std::vector<char> in_anc(n, 0);
    std::deque<int> queue;
    auto push_all = [&](const NodeSet& s) {
        for (int v : s) {
            if (!in_anc[v]) {
                in_anc[v] = 1;
                queue.push_back(v);
            }
        }
    };
    push_all(sources);
    push_all(sinks);
    push_all(conditioning);
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int p : parents[v]) {
            if (!in_anc[p]) {
                in_anc[p] = 1;
                queue.push_back(p);
            }
        }
    }

    // Moralize the induced subgraph: keep edges between ancestral nodes and
    // marry co-parents of every ancestral node.
    std::vector<std::vector<int>> moral(n);
    auto connect = [&](int a, int b) {
        moral[a].push_back(b);
        moral[b].push_back(a);
    };
    for (int v = 0; v < n; ++v) {
        if (!in_anc[v]) continue;
        for (int p : parents[v])
            if (in_anc[p]) connect(p, v);
        const auto& par = parents[v];
        for (std::size_t i = 0; i < par.size(); ++i)
            for (std::size_t j = i + 1; j < par.size(); ++j)
                if (in_anc[par[i]] && in_anc[par[j]]) connect(par[i], par[j]);
    }

    // Drop conditioned nodes, then test undirected reachability.
    std::vector<char> blocked(n, 0);
    for (int v : conditioning) blocked[v] = 1;
    std::vector<char> reached(n, 0);
    std::deque<int> bfs;
    for (int v : sources) {
        if (!blocked[v]) {
            reached[v] = 1;
            bfs.push_back(v);
        }
    }
    while (!bfs.empty()) {
        const int v = bfs.front();
        bfs.pop_front();
        for (int w : moral[v]) {
            if (!reached[w] && !blocked[w]) {
                reached[w] = 1;
                bfs.push_back(w);
            }
        }
    }
    for (int v : sinks)
        if (reached[v]) return false;
    return true;
}

std::vector<std::vector<int>> parents_table(const CausalDag& dag) {
    std::vector<std::vector<int>> out(dag.node_count());
    for (int v = 0; v < dag.node_count(); ++v) out[v] = dag.parents(v);
    return out;
}

std::vector<std::vector<int>> children_table(const CausalDag& dag) {
    std::vector<std::vector<int>> out(dag.node_count());
    for (int v = 0; v < dag.node_count(); ++v) out[v] = dag.children(v);
    return out;
}

}  // namespace

NodeSet descendants(const CausalDag& dag, const NodeSet& from) {
    check_set_in_range(dag, from, "descendants");
    return closure(children_table(dag), dag.node_count(), from);
}

NodeSet ancestors(const CausalDag& dag, const NodeSet& from) {
    check_set_in_range(dag, from, "ancestors");
    return closure(parents_table(dag), dag.node_count(), from);
}

bool is_d_separated(const CausalDag& dag, const PathQuery& q) {
    check_set_in_range(dag, q.sources, "is_d_separated");
    check_set_in_range(dag, q.sinks, "is_d_separated");
    check_set_in_range(dag, q.conditioning, "is_d_separated");
    if (!sets_disjoint(q.sources, q.sinks) || !sets_disjoint(q.sources, q.conditioning) ||
        !sets_disjoint(q.sinks, q.conditioning))
        throw std::invalid_argument("is_d_separated: query sets must be pairwise disjoint");
    return d_separated_adjacency(dag.node_count(), parents_table(dag), children_table(dag),
                                 q.sources, q.sinks, q.conditioning);
}

bool satisfies_backdoor(const CausalDag& dag, const NodeSet& x, const NodeSet& y,
                        const NodeSet& s) {
    check_set_in_range(dag, x, "satisfies_backdoor");
    check_set_in_range(dag, y, "satisfies_backdoor");
    check_set_in_range(dag, s, "satisfies_backdoor");
    if (!sets_disjoint(x, y) || !sets_disjoint(x, s) || !sets_disjoint(y, s))
        throw std::invalid_argument("satisfies_backdoor: sets must be pairwise disjoint");

    const NodeSet desc = descendants(dag, x);
    for (int v : s)
        if (set_contains(desc, v)) return false;

    // Paths into a source are exactly the paths that survive removing that
    // source's outgoing edges, so test each source in the pruned graph.
    const auto parents = parents_table(dag);
    const auto children = children_table(dag);
    for (int xi : x) {
        auto par = parents;
        auto chi = children;
        for (int c : chi[xi]) {
            auto& cp = par[c];
            cp.erase(std::remove(cp.begin(), cp.end(), xi), cp.end());
        }
        chi[xi].clear();
        if (!d_separated_adjacency(dag.node_count(), par, chi, NodeSet{xi}, y, s))
            return false;
    }
    return true;
}

bool check_temporal_assumption(const CausalDag& dag) {
    const NodeSet desc = descendants(dag, dag.nodes_of(NodeClass::Target));
    for (int v : desc)
        if (dag.node(v).cls != NodeClass::Target) return false;
    return true;
}

bool check_thm10_premise(const CausalDag& dag, const NodeSet& kappa) {
    check_set_in_range(dag, kappa, "check_thm10_premise");
    const NodeSet externals = dag.nodes_of(NodeClass::External);
    for (int v : kappa)
        if (!set_contains(externals, v))
            throw std::invalid_argument("check_thm10_premise: kappa must contain external nodes");
    const NodeSet rest = set_difference(externals, kappa);
    if (rest.empty()) return true;
    PathQuery q;
    q.sources = dag.nodes_of(NodeClass::Decision);
    q.sinks = rest;
    q.conditioning = kappa;
    return is_d_separated(dag, q);
}

CausalDag parse_dag(std::istream& in) {
    std::vector<Node> nodes;
    std::vector<std::pair<int, int>> edges;
    std::unordered_map<std::string, int> index;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;

        std::string second, third;
        if (ls >> second && second == "->") {
            if (!(ls >> third))
                throw std::invalid_argument("dag line " + std::to_string(lineno) +
                                            ": missing edge child");
            const auto pi = index.find(first);
            const auto ci = index.find(third);
            if (pi == index.end() || ci == index.end())
                throw std::invalid_argument("dag line " + std::to_string(lineno) +
                                            ": edge references undeclared node");
            edges.emplace_back(pi->second, ci->second);
        } else {
            if (second.empty())
                throw std::invalid_argument("dag line " + std::to_string(lineno) +
                                            ": expected 'class label' or 'a -> b'");
            Node n;
            n.cls = parse_node_class(first);
            n.label = second;
            index.emplace(n.label, static_cast<int>(nodes.size()));
            nodes.push_back(std::move(n));
        }
        std::string trailing;
        if (ls >> trailing)
            throw std::invalid_argument("dag line " + std::to_string(lineno) +
                                        ": unexpected trailing token '" + trailing + "'");
    }
    return CausalDag(std::move(nodes), std::move(edges));
}

void write_dag(std::ostream& out, const CausalDag& dag) {
    for (const Node& n : dag.nodes())
        out << node_class_name(n.cls) << ' ' << n.label << '\n';
    for (const auto& [p, c] : dag.edges())
        out << dag.node(p).label << " -> " << dag.node(c).label << '\n';
}

CausalDag load_dag_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open dag file '" + path + "'");
    return parse_dag(in);
}

void save_dag_file(const std::string& path, const CausalDag& dag) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write dag file '" + path + "'");
    write_dag(out, dag);
}

}  // namespace causalfs
