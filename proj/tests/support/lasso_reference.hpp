#pragma once

// Proximal-gradient reference solver and exhaustive-subset search for the
// multi-task group lasso; used only to cross-check the library solver.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

namespace testsupport {

inline double group_lasso_objective(const Eigen::MatrixXd& targets,
                                    const Eigen::MatrixXd& cands, double mu,
                                    const Eigen::MatrixXd& w) {
    double penalty = 0.0;
    for (int v = 0; v < w.cols(); ++v) penalty += w.col(v).norm();
    return 0.5 * (targets - w * cands).squaredNorm() + mu * penalty;
}

// ISTA with a fixed 1/L step; deliberately a different algorithm family from
// the library's coordinate descent.
inline Eigen::MatrixXd ista_group_lasso(const Eigen::MatrixXd& targets,
                                        const Eigen::MatrixXd& cands, double mu,
                                        int max_iter = 200000) {
    const int nu = static_cast<int>(targets.rows());
    const int nv = static_cast<int>(cands.rows());
    if (nv == 0) return Eigen::MatrixXd::Zero(nu, 0);

    const Eigen::MatrixXd gram = cands * cands.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const double lips = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
    const double step = 1.0 / lips;

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(nu, nv);
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::MatrixXd grad = (w * cands - targets) * cands.transpose();
        Eigen::MatrixXd next = w - step * grad;
        for (int v = 0; v < nv; ++v) {
            const double n = next.col(v).norm();
            if (n <= step * mu)
                next.col(v).setZero();
            else
                next.col(v) *= 1.0 - step * mu / n;
        }
        const double delta = (next - w).norm();
        w = next;
        if (delta <= 1e-13 * (1.0 + w.norm())) break;
    }
    return w;
}

inline std::vector<int> support_of(const Eigen::MatrixXd& w, double rel_threshold = 1e-6) {
    double max_norm = 0.0;
    for (int v = 0; v < w.cols(); ++v) max_norm = std::max(max_norm, w.col(v).norm());
    std::vector<int> out;
    for (int v = 0; v < w.cols(); ++v)
        if (max_norm > 0.0 && w.col(v).norm() > rel_threshold * max_norm) out.push_back(v);
    return out;
}

// Solves the restricted problem on every candidate subset and returns the
// nonzero support of the best restricted solution (ties resolved toward the
// smaller objective; zero groups are dropped from the winner).
inline std::vector<int> brute_force_support(const Eigen::MatrixXd& targets,
                                            const Eigen::MatrixXd& cands, double mu,
                                            double* best_objective = nullptr) {
    const int nv = static_cast<int>(cands.rows());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_support;
    for (unsigned mask = 0; mask < (1u << nv); ++mask) {
        std::vector<int> rows;
        for (int v = 0; v < nv; ++v)
            if (mask & (1u << v)) rows.push_back(v);
        Eigen::MatrixXd sub(rows.size(), cands.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) sub.row(i) = cands.row(rows[i]);

        const Eigen::MatrixXd w = ista_group_lasso(targets, sub, mu);
        const double obj = group_lasso_objective(targets, sub, mu, w);
        if (obj < best - 1e-10) {
            best = obj;
            best_support.clear();
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (w.col(static_cast<int>(i)).norm() > 1e-7) best_support.push_back(rows[i]);
        }
    }
    if (best_objective) *best_objective = best;
    return best_support;
}

}  // namespace testsupport
