#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "causalfs/sem.hpp"

namespace causalfs {

/// Squared gap between the conditional regression target E[y | x, z_kappa]
/// and the interventional quantity E[y | do(x), z] a pricing decision needs.
/// z is the full feature vector; only the kappa entries are conditioned on.
double confounding_bias(const LinearSem& sem, const std::vector<int>& kappa,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& z);

/// Error decomposition of the fitted predictor at a query point (x, z).
/// Per replication a fresh training set of data_size records is drawn, the
/// model is fitted on the kappa features and evaluated at the query, and one
/// outcome is drawn from the deployment distribution p(y | do(x), z).
///
///   total_mse ~ noise + confounding + prediction_bias + interaction + variance
///
/// total_bias equals the middle three terms exactly; identity_gap measures
/// the Monte Carlo residual of the full identity and comes with its own
/// standard error. The variance is centered at the Monte Carlo mean
/// predictor, so prediction_bias and variance are exact with respect to that
/// empirical mean rather than the unknown expectation.
struct DecompositionReport {
    int data_size = 0;
    int replications = 0;
    double noise = 0.0;            // outcomes * noise_var, exact
    double confounding = 0.0;      // |E[y|x,z_k] - E[y|do(x),z]|^2, exact
    double prediction_bias = 0.0;  // |mean predictor - E[y|x,z_k]|^2
    double interaction = 0.0;      // cross term, can be negative
    double variance = 0.0;         // mean |predictor - mean predictor|^2
    double total_bias = 0.0;       // |mean predictor - E[y|do(x),z]|^2
    double total_mse = 0.0;        // mean |y - predictor|^2 under do(x)
    double total_mse_se = 0.0;
    double identity_gap = 0.0;     // total_mse - noise - total_bias - variance
    double identity_se = 0.0;
    double bootstrap_variance = 0.0;  // resampling estimate, first replication
};

DecompositionReport decompose(const LinearSem& sem, const std::vector<int>& kappa,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                              int data_size, int replications, std::uint64_t seed,
                              int bootstrap_rounds = 200);

}  // namespace causalfs
