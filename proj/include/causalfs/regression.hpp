#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "causalfs/dataset.hpp"

namespace causalfs {

/// Least squares demand model y ~ A x + b + C z_kappa fitted jointly for all
/// outcomes. kappa records which external features the model conditions on.
struct LinearModel {
    Eigen::MatrixXd a_hat;   // N x M
    Eigen::VectorXd b_hat;   // N
    Eigen::MatrixXd c_hat;   // N x |kappa|
    std::vector<int> kappa;  // sorted feature indices
    bool rank_deficient = false;

    int products() const { return static_cast<int>(a_hat.cols()); }
    int outcomes() const { return static_cast<int>(a_hat.rows()); }
};

/// Ordinary least squares on the design [x, z_kappa, 1]. Rank-deficient
/// designs (including D < M + |kappa| + 1) get the minimum-norm solution and
/// are flagged. Exactly duplicated design columns are collapsed first: the
/// first occurrence carries the coefficient, later copies get exact zero, so
/// predictions are reproducible down to the bit.
LinearModel fit_linear_model(const Dataset& data, const std::vector<int>& kappa);

/// a_hat x + b_hat + c_hat z_kappa, accumulated in a fixed order (x terms,
/// then the intercept, then feature terms).
Eigen::VectorXd predict(const LinearModel& model, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& z_kappa);

std::string model_to_json(const LinearModel& model);
LinearModel model_from_json(const std::string& text);
LinearModel load_model_file(const std::string& path);
void save_model_file(const std::string& path, const LinearModel& model);

}  // namespace causalfs
