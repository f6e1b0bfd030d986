#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "causalfs/dataset.hpp"

namespace causalfs {

/// Multi-task group lasso
///   min_W 0.5 ||targets - W candidates||_F^2 + mu * sum_v ||W.col(v)||_2
/// with one row per variable and one column per record in both matrices.
struct GroupLassoProblem {
    Eigen::MatrixXd targets;     // |U| x D
    Eigen::MatrixXd candidates;  // |V| x D
    double mu = 0.0;
    double tol = 1e-8;
    int max_iter = 100000;
};

struct GroupLassoResult {
    Eigen::MatrixXd weights;  // |U| x |V|
    std::vector<double> objective_trace;  // objective after each sweep
    double kkt_residual = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

/// Cyclic block coordinate descent with exact group updates. For mu > 0,
/// convergence means the group-wise optimality conditions hold: inactive
/// groups have correlation norm at most mu (1 + tol), active groups have
/// stationarity residual at most tol * mu. For mu = 0 the stopping rule is
/// relative objective change below tol.
GroupLassoResult solve_group_lasso(const GroupLassoProblem& prob);

struct SelectionOptions {
    double mu = 0.0;
    double threshold = 1e-6;  // keep groups with norm > threshold * max norm
    bool standardize = true;  // zero mean, unit variance rows; keeps mu scale-free
    double tol = 1e-8;
    int max_iter = 100000;
};

/// Result of a Markov blanket query. Dataset columns are indexed globally:
/// x columns first, then y, then z.
struct Selection {
    std::string method;  // "mb", "fs" or "cf"
    double mu = 0.0;
    std::vector<int> kappa;       // selected external features, 0-based
    std::vector<int> blanket;     // selected dataset columns
    std::vector<int> candidates;  // candidate columns, aligned with weights
    Eigen::MatrixXd weights;      // |targets| x |candidates|
    std::vector<double> objective_trace;
    double kkt_residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

/// Group-lasso Markov blanket of the given target columns against all other
/// non-constant columns. Constant columns can never enter the blanket.
Selection markov_blanket(const Dataset& data, const std::vector<int>& targets,
                         const SelectionOptions& opt);

/// Feature selection baseline: blanket of the outcome block y.
Selection select_fs(const Dataset& data, const SelectionOptions& opt);

/// Causal feature selection: blanket of the joint decision-outcome block
/// (x, y), so only external features are candidates.
Selection select_cf(const Dataset& data, const SelectionOptions& opt);

std::string selection_to_json(const Selection& sel);
Selection selection_from_json(const std::string& text);

}  // namespace causalfs
