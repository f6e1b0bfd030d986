#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "causalfs/graph.hpp"

namespace causalfs {

/// Assignment of a state to every node, indexed by node.
using Assignment = std::vector<int>;

/// Partial assignment as (node, state) pairs; nodes must be distinct.
using Evidence = std::vector<std::pair<int, int>>;

/// Discrete Bayesian network over a CausalDag. Each node stores a CPT with
/// one row per parent configuration and one column per state. Parent
/// configurations are indexed in mixed radix with the last parent (by node
/// index) varying fastest.
class DiscreteBayesNet {
public:
    DiscreteBayesNet(CausalDag dag, std::vector<int> cardinalities,
                     std::vector<std::vector<double>> cpts);

    const CausalDag& dag() const { return dag_; }
    int node_count() const { return dag_.node_count(); }
    int cardinality(int v) const;
    const std::vector<double>& cpt(int v) const;

    /// p(node = state | parents as given in the full assignment).
    double prob_given(int v, int state, const Assignment& full) const;

    /// Joint probability of a full assignment.
    double joint_prob(const Assignment& a) const;

    /// Number of joint states (product of cardinalities).
    long long state_count() const;

private:
    CausalDag dag_;
    std::vector<int> card_;
    std::vector<std::vector<double>> cpts_;
};

/// Iterate all assignments of `nodes` (mixed radix, last node fastest),
/// invoking fn(states) for each.
template <typename Fn>
void for_each_assignment(const DiscreteBayesNet& net, const NodeSet& nodes, Fn&& fn) {
    std::vector<int> states(nodes.size(), 0);
    if (nodes.empty()) {
        fn(states);
        return;
    }
    while (true) {
        fn(states);
        int i = static_cast<int>(nodes.size()) - 1;
        while (i >= 0) {
            if (++states[i] < net.cardinality(nodes[i])) break;
            states[i] = 0;
            --i;
        }
        if (i < 0) return;
    }
}

/// Probability of a partial assignment (marginalizing everything else).
double event_prob(const DiscreteBayesNet& net, const Evidence& evidence);

/// Conditional distribution p(targets | evidence) as a flat vector over
/// target states (mixed radix, last target fastest). Throws when the
/// evidence event has zero probability.
std::vector<double> conditional(const DiscreteBayesNet& net, const NodeSet& targets,
                                const Evidence& evidence);

/// Interventional conditional p(targets | do(interventions), evidence) via
/// the truncated factorization. Throws when the conditioning event has zero
/// probability under the intervened distribution.
std::vector<double> do_conditional(const DiscreteBayesNet& net, const NodeSet& targets,
                                   const Evidence& interventions, const Evidence& evidence);

/// Brute-force adjustment check: with X the decision nodes and Y the target
/// nodes, tests p(y | do(x), s) == p(y | x, s) for every (x, s) event of
/// positive probability, to within tol.
bool verify_adjustment(const DiscreteBayesNet& net, const NodeSet& s, double tol = 1e-9);

/// Tests a ⊥ b | s by enumeration: p(a, b | s) == p(a | s) p(b | s) within
/// tol for every s with positive probability.
bool is_cond_independent(const DiscreteBayesNet& net, const NodeSet& a, const NodeSet& b,
                         const NodeSet& s, double tol = 1e-9);

/// Random binary-to-small-arity network for property checks: random DAG with
/// the given edge probability, random node classes (at least one decision
/// and one target), CPT rows drawn uniform then normalized.
DiscreteBayesNet make_random_net(int n_nodes, double edge_prob, std::uint64_t seed,
                                 int max_cardinality = 2);

/// Random network whose structure guarantees the temporal assumption and
/// makes the full external set a valid adjustment set: edges allowed from
/// external to external, decision and target nodes, and from decision to
/// target nodes only.
DiscreteBayesNet make_random_admissible_net(int n_nodes, std::uint64_t seed,
                                            double edge_prob = 0.5, int max_cardinality = 2);

}  // namespace causalfs
