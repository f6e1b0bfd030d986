#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "causalfs/dataset.hpp"
#include "causalfs/graph.hpp"

namespace causalfs {

/// Generation settings for the synthetic pricing environment: M products
/// with decision x (price multiplier), outcome y (sales) and K binary
/// external features z.
struct SemConfig {
    int products = 10;
    int features = 10;
    double edge_prob_zx = 0.1;
    double edge_prob_zy = 0.5;
    double alpha = 0.1;          // probability of an extra random discount
    double discount_step = 0.1;  // price reduction per active discount cause
    double noise_var = 100.0;    // variance of the additive outcome noise

    // Parameter ranges. Diagonal entries of the price-response matrix are set
    // to -(sum of |off-diagonal| in row and column)/2 minus a margin drawn
    // from [a_diag_margin_min, a_diag_margin_max], which makes the symmetric
    // part negative definite. The defaults put baseline demand and price
    // response two orders of magnitude above the outcome noise, so revenue
    // differences between strategies are driven by estimation quality rather
    // than being drowned by the additive noise floor.
    double a_offdiag_min = -100.0;
    double a_offdiag_max = 100.0;
    double a_diag_margin_min = 100.0;
    double a_diag_margin_max = 300.0;
    double b_min = 500.0;
    double b_max = 1500.0;
    double c_min = -100.0;
    double c_max = 100.0;

    std::uint64_t seed = 0;

    void validate() const;
};

/// Linear structural equation model on the generated network:
///   z_k ~ Bernoulli(p_k)
///   x_m = 1 - discount_step * (sum of active z-parents) - discount_step * e_m,
///         e_m ~ Bernoulli(alpha)
///   y = A x + b + C z + noise,  noise ~ N(0, noise_var I)
/// Node order in the dag: x_1..x_M, y_1..y_M, z_1..z_K.
struct LinearSem {
    CausalDag dag;
    Eigen::VectorXd p;   // K feature frequencies
    Eigen::MatrixXd a;   // M x M price response
    Eigen::VectorXd b;   // M baseline demand
    Eigen::MatrixXd c;   // M x K feature effects, zero without a (z_k, y_n) edge
    double alpha = 0.1;
    double discount_step = 0.1;
    double noise_var = 100.0;

    int products() const { return static_cast<int>(b.size()); }
    int features() const { return static_cast<int>(p.size()); }
    int x_node(int m) const { return m; }
    int y_node(int n) const { return products() + n; }
    int z_node(int k) const { return 2 * products() + k; }

    void validate() const;
};

/// Random pricing network: every (x_m, y_n) edge present, z -> x edges with
/// probability edge_prob_zx, z -> y edges with probability edge_prob_zy, no
/// block-internal edges.
CausalDag generate_network(const SemConfig& cfg);

/// Draws SEM parameters for a generated network. The dag must have the block
/// structure produced by generate_network with matching dimensions.
LinearSem generate_sem(const CausalDag& dag, const SemConfig& cfg);

/// Samples observational records.
Dataset sample(const LinearSem& sem, int count, std::uint64_t seed);

/// E[y | do(x), z] = A x + b + C z.
Eigen::VectorXd expected_y_do(const LinearSem& sem, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& z);

/// E[y | x, z_kappa] by exact enumeration of the unobserved features; kappa
/// lists the observed z indices (sorted) and z_kappa their values. Supports
/// at most 20 features; throws when p(x, z_kappa) = 0 on the discount grid.
Eigen::VectorXd expected_y_cond(const LinearSem& sem, const Eigen::VectorXd& x,
                                const std::vector<int>& kappa,
                                const Eigen::VectorXd& z_kappa);

/// Draws outcome vectors under do(x) at fixed z; returns count x M.
Eigen::MatrixXd sample_intervention(const LinearSem& sem, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& z, int count, std::uint64_t seed);

/// JSON serialization with exact round-trip of all parameters.
std::string sem_to_json(const LinearSem& sem);
LinearSem sem_from_json(const std::string& text);
LinearSem load_sem_file(const std::string& path);
void save_sem_file(const std::string& path, const LinearSem& sem);

}  // namespace causalfs
