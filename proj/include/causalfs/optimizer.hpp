#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "causalfs/dataset.hpp"
#include "causalfs/regression.hpp"
#include "causalfs/sem.hpp"

namespace causalfs {

/// Covariance of the outcome noise: sample covariance (denominator D - 1,
/// projected onto the PSD cone) of the outcome residuals after regressing y
/// on all observed regressors (x, z, 1). This estimates the variance of the
/// outcome around its conditional mean, the component the robust penalty is
/// meant to guard against, rather than the spread of y induced by the
/// historical pricing policy itself. Needs at least two records.
Eigen::MatrixXd estimate_sigma(const Dataset& data);

/// Regularized inverse Gram matrix of the regressor rows v_d = (x_d,
/// z_kappa_d, 1): (sum v v^T + eps I)^-1 with eps = 1e-9 tr/dim. Directions
/// poorly covered by the data get large norms under this matrix.
Eigen::MatrixXd estimate_sigma_prime(const Dataset& data, const std::vector<int>& kappa);

/// Penalty g(x) = (|sigma x|^2 + e^2)^(1/4) (|sigma' v|^2 + e^2)^(1/4) with
/// v = (x, z_kappa, 1) and a small smoothing constant e. Grows with price
/// vectors that are large under the data covariance or point into poorly
/// estimated regressor directions.
double regularizer_g(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& sigma_prime,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& z_kappa);

/// Robust pricing problem: maximize x^T (A x + b + C z_kappa) - lambda g(x)
/// over the price box.
struct RobustProblem {
    LinearModel model;
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd sigma_prime;
    double lambda = 0.0;
    Eigen::VectorXd box_lo;
    Eigen::VectorXd box_hi;

    void validate() const;
};

struct Strategy {
    Eigen::VectorXd x;
    double predicted_revenue = 0.0;
    double regularizer_value = 0.0;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Projected gradient ascent with Armijo backtracking from 16 deterministic
/// starts (box center, corners, uniform draws); returns the best strategy.
/// converged reports whether the projected gradient norm at the returned
/// point is at most 1e-6 (1 + |objective|).
Strategy optimize(const RobustProblem& problem, const Eigen::VectorXd& z_kappa,
                  std::uint64_t seed, int max_iter = 2000, double tol = 1e-9);

/// Certified maximizer of the true revenue x^T (A x + b + C z) over the box.
/// The objective is strictly concave, so fixed-step projected gradient
/// converges to the unique optimum; certificate is the final projected
/// gradient norm.
struct TrueOptimum {
    Eigen::VectorXd x;
    double value = 0.0;
    double certificate = 0.0;
    bool certified = false;
};

TrueOptimum true_optimum(const LinearSem& sem, const Eigen::VectorXd& z,
                         const Eigen::VectorXd& box_lo, const Eigen::VectorXd& box_hi);

/// Expected revenue of a price vector under the true model at fixed z.
double evaluate_true(const LinearSem& sem, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& z);

}  // namespace causalfs
