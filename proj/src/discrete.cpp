#include "causalfs/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "causalfs/random.hpp"

namespace causalfs {

namespace {

constexpr long long kMaxEnumeration = 1LL << 26;

void check_evidence(const DiscreteBayesNet& net, const Evidence& ev, const char* what) {
    std::vector<char> seen(net.node_count(), 0);
    for (const auto& [v, state] : ev) {
        if (v < 0 || v >= net.node_count())
            throw std::invalid_argument(std::string(what) + ": node index out of range");
        if (state < 0 || state >= net.cardinality(v))
            throw std::invalid_argument(std::string(what) + ": state out of range");
        if (seen[v])
            throw std::invalid_argument(std::string(what) + ": node assigned twice");
        seen[v] = 1;
    }
}

NodeSet evidence_nodes(const Evidence& ev) {
    NodeSet out;
    out.reserve(ev.size());
    for (const auto& [v, state] : ev) out.push_back(v);
    return make_node_set(std::move(out));
}

bool matches(const Assignment& a, const Evidence& ev) {
    for (const auto& [v, state] : ev)
        if (a[v] != state) return false;
    return true;
}

// Flat index of the target sub-assignment, last target fastest.
int target_index(const DiscreteBayesNet& net, const NodeSet& targets, const Assignment& a) {
    int idx = 0;
    for (int t : targets) idx = idx * net.cardinality(t) + a[t];
    return idx;
}

int target_space(const DiscreteBayesNet& net, const NodeSet& targets) {
    long long n = 1;
    for (int t : targets) n *= net.cardinality(t);
    if (n > kMaxEnumeration)
        throw std::invalid_argument("target state space too large");
    return static_cast<int>(n);
}

void check_enumeration_size(const DiscreteBayesNet& net) {
    if (net.state_count() > kMaxEnumeration)
        throw std::invalid_argument("network too large for exact enumeration");
}

// Visit every full assignment, mixed radix over all nodes, last node fastest.
template <typename Fn>
void for_each_full(const DiscreteBayesNet& net, Fn&& fn) {
    Assignment a(net.node_count(), 0);
    while (true) {
        fn(a);
        int i = net.node_count() - 1;
        while (i >= 0) {
            if (++a[i] < net.cardinality(i)) break;
            a[i] = 0;
            --i;
        }
        if (i < 0) return;
    }
}

std::vector<std::vector<double>> random_cpts(const CausalDag& dag,
                                             const std::vector<int>& card, Rng& rng) {
    std::vector<std::vector<double>> cpts(dag.node_count());
    for (int v = 0; v < dag.node_count(); ++v) {
        long long rows = 1;
        for (int p : dag.parents(v)) rows *= card[p];
        std::vector<double> table(static_cast<std::size_t>(rows) * card[v]);
        for (long long r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (int s = 0; s < card[v]; ++s) {
                const double u = rng.uniform(0.05, 1.0);
                table[r * card[v] + s] = u;
                sum += u;
            }
            for (int s = 0; s < card[v]; ++s) table[r * card[v] + s] /= sum;
        }
        cpts[v] = std::move(table);
    }
    return cpts;
}

}  // namespace

DiscreteBayesNet::DiscreteBayesNet(CausalDag dag, std::vector<int> cardinalities,
                                   std::vector<std::vector<double>> cpts)
    : dag_(std::move(dag)), card_(std::move(cardinalities)), cpts_(std::move(cpts)) {
    const int n = dag_.node_count();
    if (static_cast<int>(card_.size()) != n)
        throw std::invalid_argument("DiscreteBayesNet: cardinality count mismatch");
    if (static_cast<int>(cpts_.size()) != n)
        throw std::invalid_argument("DiscreteBayesNet: CPT count mismatch");
    for (int v = 0; v < n; ++v) {
        if (card_[v] < 2)
            throw std::invalid_argument("DiscreteBayesNet: cardinality must be at least 2");
        long long rows = 1;
        for (int p : dag_.parents(v)) rows *= card_[p];
        if (static_cast<long long>(cpts_[v].size()) != rows * card_[v])
            throw std::invalid_argument("DiscreteBayesNet: CPT size mismatch for node " +
                                        dag_.node(v).label);
        for (long long r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (int s = 0; s < card_[v]; ++s) {
                const double p = cpts_[v][r * card_[v] + s];
                if (!(p >= -1e-12 && p <= 1.0 + 1e-12))
                    throw std::invalid_argument("DiscreteBayesNet: CPT entry outside [0, 1]");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("DiscreteBayesNet: CPT row does not sum to 1");
        }
    }
}

int DiscreteBayesNet::cardinality(int v) const {
    if (v < 0 || v >= node_count())
        throw std::invalid_argument("DiscreteBayesNet::cardinality: index out of range");
    return card_[v];
}

const std::vector<double>& DiscreteBayesNet::cpt(int v) const {
    if (v < 0 || v >= node_count())
        throw std::invalid_argument("DiscreteBayesNet::cpt: index out of range");
    return cpts_[v];
}

double DiscreteBayesNet::prob_given(int v, int state, const Assignment& full) const {
    if (v < 0 || v >= node_count())
        throw std::invalid_argument("DiscreteBayesNet::prob_given: index out of range");
    if (static_cast<int>(full.size()) != node_count())
        throw std::invalid_argument("DiscreteBayesNet::prob_given: assignment size mismatch");
    if (state < 0 || state >= card_[v])
        throw std::invalid_argument("DiscreteBayesNet::prob_given: state out of range");
    long long row = 0;
    for (int p : dag_.parents(v)) {
        if (full[p] < 0 || full[p] >= card_[p])
            throw std::invalid_argument("DiscreteBayesNet::prob_given: parent state out of range");
        row = row * card_[p] + full[p];
    }
    return cpts_[v][row * card_[v] + state];
}

double DiscreteBayesNet::joint_prob(const Assignment& a) const {
    if (static_cast<int>(a.size()) != node_count())
        throw std::invalid_argument("DiscreteBayesNet::joint_prob: assignment size mismatch");
    double p = 1.0;
    for (int v = 0; v < node_count(); ++v) p *= prob_given(v, a[v], a);
    return p;
}

long long DiscreteBayesNet::state_count() const {
    long long n = 1;
    for (int c : card_) {
        n *= c;
        if (n > kMaxEnumeration) return n;
    }
    return n;
}

double event_prob(const DiscreteBayesNet& net, const Evidence& evidence) {
    check_evidence(net, evidence, "event_prob");
    check_enumeration_size(net);
    double total = 0.0;
    for_each_full(net, [&](const Assignment& a) {
        if (matches(a, evidence)) total += net.joint_prob(a);
    });
    return total;
}

std::vector<double> conditional(const DiscreteBayesNet& net, const NodeSet& targets,
                                const Evidence& evidence) {
    if (targets.empty())
        throw std::invalid_argument("conditional: empty target set");
    check_evidence(net, evidence, "conditional");
    if (!sets_disjoint(targets, evidence_nodes(evidence)))
        throw std::invalid_argument("conditional: targets overlap evidence");
    check_enumeration_size(net);

    std::vector<double> num(target_space(net, targets), 0.0);
    double den = 0.0;
    for_each_full(net, [&](const Assignment& a) {
        if (!matches(a, evidence)) return;
        const double p = net.joint_prob(a);
        num[target_index(net, targets, a)] += p;
        den += p;
    });
    if (den <= 0.0)
        throw std::runtime_error("conditional: conditioning event has zero probability");
    for (double& p : num) p /= den;
    return num;
}

std::vector<double> do_conditional(const DiscreteBayesNet& net, const NodeSet& targets,
                                   const Evidence& interventions, const Evidence& evidence) {
    if (targets.empty())
        throw std::invalid_argument("do_conditional: empty target set");
    check_evidence(net, interventions, "do_conditional");
    check_evidence(net, evidence, "do_conditional");
    const NodeSet inodes = evidence_nodes(interventions);
    if (!sets_disjoint(targets, inodes))
        throw std::invalid_argument("do_conditional: targets overlap interventions");
    if (!sets_disjoint(evidence_nodes(evidence), inodes))
        throw std::invalid_argument("do_conditional: evidence overlaps interventions");
    if (!sets_disjoint(targets, evidence_nodes(evidence)))
        throw std::invalid_argument("do_conditional: targets overlap evidence");
    check_enumeration_size(net);

    // Truncated factorization: drop the factors of intervened nodes and clamp
    // their states.
    std::vector<char> intervened(net.node_count(), 0);
    for (const auto& [v, state] : interventions) intervened[v] = 1;

    std::vector<double> num(target_space(net, targets), 0.0);
    double den = 0.0;
    for_each_full(net, [&](const Assignment& a) {
        if (!matches(a, interventions) || !matches(a, evidence)) return;
        double p = 1.0;
        for (int v = 0; v < net.node_count(); ++v)
            if (!intervened[v]) p *= net.prob_given(v, a[v], a);
        num[target_index(net, targets, a)] += p;
        den += p;
    });
    if (den <= 0.0)
        throw std::runtime_error(
            "do_conditional: unconditionable, evidence has zero probability under intervention");
    for (double& p : num) p /= den;
    return num;
}

bool verify_adjustment(const DiscreteBayesNet& net, const NodeSet& s, double tol) {
    const NodeSet x = net.dag().nodes_of(NodeClass::Decision);
    const NodeSet y = net.dag().nodes_of(NodeClass::Target);
    if (x.empty() || y.empty())
        throw std::invalid_argument("verify_adjustment: need decision and target nodes");
    if (!sets_disjoint(s, x) || !sets_disjoint(s, y))
        throw std::invalid_argument("verify_adjustment: s overlaps decision or target nodes");
    if (tol < 0.0)
        throw std::invalid_argument("verify_adjustment: negative tolerance");
    check_enumeration_size(net);

    bool ok = true;
    for_each_assignment(net, x, [&](const std::vector<int>& xs) {
        if (!ok) return;
        for_each_assignment(net, s, [&](const std::vector<int>& ss) {
            if (!ok) return;
            Evidence xev, sev;
            for (std::size_t i = 0; i < x.size(); ++i) xev.emplace_back(x[i], xs[i]);
            for (std::size_t i = 0; i < s.size(); ++i) sev.emplace_back(s[i], ss[i]);
            Evidence both = xev;
            both.insert(both.end(), sev.begin(), sev.end());
            if (event_prob(net, both) <= 0.0) return;
            const std::vector<double> cond = conditional(net, y, both);
            const std::vector<double> docond = do_conditional(net, y, xev, sev);
            for (std::size_t i = 0; i < cond.size(); ++i) {
                if (std::abs(cond[i] - docond[i]) > tol) {
                    ok = false;
                    return;
                }
            }
        });
    });
    return ok;
}

bool is_cond_independent(const DiscreteBayesNet& net, const NodeSet& a, const NodeSet& b,
                         const NodeSet& s, double tol) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("is_cond_independent: empty variable set");
    if (!sets_disjoint(a, b) || !sets_disjoint(a, s) || !sets_disjoint(b, s))
        throw std::invalid_argument("is_cond_independent: sets must be pairwise disjoint");
    check_enumeration_size(net);

    const int na = target_space(net, a);
    const int nb = target_space(net, b);
    bool ok = true;
    for_each_assignment(net, s, [&](const std::vector<int>& ss) {
        if (!ok) return;
        Evidence sev;
        for (std::size_t i = 0; i < s.size(); ++i) sev.emplace_back(s[i], ss[i]);

        std::vector<double> joint(static_cast<std::size_t>(na) * nb, 0.0);
        std::vector<double> pa(na, 0.0), pb(nb, 0.0);
        double den = 0.0;
        for_each_full(net, [&](const Assignment& full) {
            if (!matches(full, sev)) return;
            const double p = net.joint_prob(full);
            const int ia = target_index(net, a, full);
            const int ib = target_index(net, b, full);
            joint[static_cast<std::size_t>(ia) * nb + ib] += p;
            pa[ia] += p;
            pb[ib] += p;
            den += p;
        });
        if (den <= 0.0) return;
        for (int ia = 0; ia < na && ok; ++ia)
            for (int ib = 0; ib < nb; ++ib) {
                const double lhs = joint[static_cast<std::size_t>(ia) * nb + ib] / den;
                const double rhs = (pa[ia] / den) * (pb[ib] / den);
                if (std::abs(lhs - rhs) > tol) {
                    ok = false;
                    break;
                }
            }
    });
    return ok;
}

DiscreteBayesNet make_random_net(int n_nodes, double edge_prob, std::uint64_t seed,
                                 int max_cardinality) {
    if (n_nodes < 2)
        throw std::invalid_argument("make_random_net: need at least 2 nodes");
    if (edge_prob < 0.0 || edge_prob > 1.0)
        throw std::invalid_argument("make_random_net: edge_prob outside [0, 1]");
    if (max_cardinality < 2)
        throw std::invalid_argument("make_random_net: max_cardinality must be at least 2");
    Rng rng(seed);

    // Random topological order, forward edges with the given probability.
    std::vector<int> order(n_nodes);
    for (int i = 0; i < n_nodes; ++i) order[i] = i;
    for (int i = n_nodes - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(0, i)]);

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n_nodes; ++i)
        for (int j = i + 1; j < n_nodes; ++j)
            if (rng.bernoulli(edge_prob)) edges.emplace_back(order[i], order[j]);

    std::vector<Node> nodes(n_nodes);
    for (int v = 0; v < n_nodes; ++v) {
        const int roll = rng.uniform_int(0, 2);
        nodes[v].cls = roll == 0 ? NodeClass::Decision
                                 : (roll == 1 ? NodeClass::Target : NodeClass::External);
        nodes[v].label = "n" + std::to_string(v);
    }
    const int xi = rng.uniform_int(0, n_nodes - 1);
    int yi = rng.uniform_int(0, n_nodes - 2);
    if (yi >= xi) ++yi;
    nodes[xi].cls = NodeClass::Decision;
    nodes[yi].cls = NodeClass::Target;

    std::vector<int> card(n_nodes);
    for (int v = 0; v < n_nodes; ++v) card[v] = rng.uniform_int(2, max_cardinality);

    CausalDag dag(std::move(nodes), std::move(edges));
    auto cpts = random_cpts(dag, card, rng);
    return DiscreteBayesNet(std::move(dag), std::move(card), std::move(cpts));
}

DiscreteBayesNet make_random_admissible_net(int n_nodes, std::uint64_t seed, double edge_prob,
                                            int max_cardinality) {
    if (n_nodes < 3)
        throw std::invalid_argument("make_random_admissible_net: need at least 3 nodes");
    if (edge_prob < 0.0 || edge_prob > 1.0)
        throw std::invalid_argument("make_random_admissible_net: edge_prob outside [0, 1]");
    Rng rng(seed);

    const int nz = rng.uniform_int(1, n_nodes - 2);
    const int nx = rng.uniform_int(1, n_nodes - nz - 1);
    const int ny = n_nodes - nz - nx;

    std::vector<Node> nodes;
    nodes.reserve(n_nodes);
    for (int i = 0; i < nz; ++i)
        nodes.push_back({NodeClass::External, "z" + std::to_string(i + 1)});
    for (int i = 0; i < nx; ++i)
        nodes.push_back({NodeClass::Decision, "x" + std::to_string(i + 1)});
    for (int i = 0; i < ny; ++i)
        nodes.push_back({NodeClass::Target, "y" + std::to_string(i + 1)});

    // Externals may feed anything downstream of them; decisions feed targets;
    // targets are sinks apart from target-to-target links. Decision parents
    // all lie in the external block, so the full external set blocks every
    // back-door path.
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < nz; ++i) {
        for (int j = i + 1; j < nz; ++j)
            if (rng.bernoulli(edge_prob)) edges.emplace_back(i, j);
        for (int j = 0; j < nx; ++j)
            if (rng.bernoulli(edge_prob)) edges.emplace_back(i, nz + j);
        for (int j = 0; j < ny; ++j)
            if (rng.bernoulli(edge_prob)) edges.emplace_back(i, nz + nx + j);
    }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            if (rng.bernoulli(edge_prob)) edges.emplace_back(nz + i, nz + nx + j);
    for (int i = 0; i < ny; ++i)
        for (int j = i + 1; j < ny; ++j)
            if (rng.bernoulli(edge_prob)) edges.emplace_back(nz + nx + i, nz + nx + j);

    std::vector<int> card(n_nodes);
    for (int v = 0; v < n_nodes; ++v) card[v] = rng.uniform_int(2, max_cardinality);

    CausalDag dag(std::move(nodes), std::move(edges));
    auto cpts = random_cpts(dag, card, rng);
    return DiscreteBayesNet(std::move(dag), std::move(card), std::move(cpts));
}

}  // namespace causalfs
