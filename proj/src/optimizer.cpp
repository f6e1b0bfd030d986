#include "causalfs/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "causalfs/random.hpp"

namespace causalfs {

namespace {

constexpr double kGramEpsScale = 1e-9;
constexpr double kSmoothing = 1e-12;
constexpr double kArmijoC1 = 1e-4;
constexpr double kMinStep = 1e-14;
constexpr int kStarts = 16;

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

void check_symmetric_psd(const Eigen::MatrixXd& mat, const char* name) {
    if (mat.rows() != mat.cols()) {
        throw std::invalid_argument(std::string(name) + " is not square");
    }
    double scale = 1.0 + mat.cwiseAbs().maxCoeff();
    if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        throw std::invalid_argument(std::string(name) + " is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mat, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
        throw std::invalid_argument(std::string(name) + " is not positive semidefinite");
    }
}

Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

struct PenaltyParts {
    Eigen::VectorXd sx;   // sigma x
    Eigen::VectorXd spv;  // sigma' v
    double u4 = 0.0;      // (|sigma x|^2 + e^2)^(1/4)
    double w4 = 0.0;      // (|sigma' v|^2 + e^2)^(1/4)
};

PenaltyParts penalty_parts(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& sigma_prime,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& z_kappa) {
    const int m = static_cast<int>(x.size());
    Eigen::VectorXd v(sigma_prime.rows());
    v.head(m) = x;
    v.segment(m, z_kappa.size()) = z_kappa;
    v(v.size() - 1) = 1.0;

    PenaltyParts parts;
    parts.sx = sigma * x;
    parts.spv = sigma_prime * v;
    parts.u4 = std::pow(parts.sx.squaredNorm() + kSmoothing * kSmoothing, 0.25);
    parts.w4 = std::pow(parts.spv.squaredNorm() + kSmoothing * kSmoothing, 0.25);
    return parts;
}

double penalty_value(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& sigma_prime,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& z_kappa) {
    PenaltyParts parts = penalty_parts(sigma, sigma_prime, x, z_kappa);
    return parts.u4 * parts.w4;
}

Eigen::VectorXd penalty_grad(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& sigma_prime,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& z_kappa) {
    PenaltyParts parts = penalty_parts(sigma, sigma_prime, x, z_kappa);
    const int m = static_cast<int>(x.size());
    double u34 = parts.u4 * parts.u4 * parts.u4;
    double w34 = parts.w4 * parts.w4 * parts.w4;
    return (0.5 * parts.w4 / u34) * (sigma * parts.sx) +
           (0.5 * parts.u4 / w34) * (sigma_prime * parts.spv).head(m);
}

struct Objective {
    double value = 0.0;
    double revenue = 0.0;
    double penalty = 0.0;
};

Objective objective_at(const RobustProblem& pb, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& z_kappa, const Eigen::VectorXd& cz) {
    Objective out;
    out.revenue = x.dot(pb.model.a_hat * x + pb.model.b_hat + cz);
    out.penalty = penalty_value(pb.sigma, pb.sigma_prime, x, z_kappa);
    out.value = out.revenue - pb.lambda * out.penalty;
    return out;
}

}  // namespace

Eigen::MatrixXd estimate_sigma(const Dataset& data) {
    data.validate();
    const Eigen::Index rows = data.y.rows();
    require(rows >= 2, "estimate_sigma: need at least two records");
    Eigen::MatrixXd phi(rows, data.x.cols() + data.z.cols() + 1);
    phi << data.x, data.z, Eigen::MatrixXd::Ones(rows, 1);
    Eigen::MatrixXd beta = phi.completeOrthogonalDecomposition().solve(data.y);
    Eigen::MatrixXd resid = data.y - phi * beta;
    Eigen::MatrixXd centered = resid.rowwise() - resid.colwise().mean();
    Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(rows - 1);
    cov = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd psd =
        eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (psd + psd.transpose());
}

Eigen::MatrixXd estimate_sigma_prime(const Dataset& data, const std::vector<int>& kappa) {
    data.validate();
    require(data.rows() >= 1, "estimate_sigma_prime: empty dataset");
    for (std::size_t i = 0; i < kappa.size(); ++i) {
        require(kappa[i] >= 0 && kappa[i] < data.z_cols(),
                "estimate_sigma_prime: kappa index out of range");
        require(i == 0 || kappa[i] > kappa[i - 1],
                "estimate_sigma_prime: kappa must be sorted and unique");
    }
    const int m = data.x_cols();
    const int k = static_cast<int>(kappa.size());
    const int dim = m + k + 1;
    Eigen::MatrixXd phi(data.rows(), dim);
    for (int j = 0; j < m; ++j) phi.col(j) = data.x.col(j);
    for (int j = 0; j < k; ++j) phi.col(m + j) = data.z.col(kappa[j]);
    phi.col(dim - 1).setOnes();

    Eigen::MatrixXd gram = phi.transpose() * phi;
    double eps = kGramEpsScale * gram.trace() / dim;
    if (eps <= 0.0) eps = kGramEpsScale;
    gram += eps * Eigen::MatrixXd::Identity(dim, dim);
    Eigen::MatrixXd inv = gram.ldlt().solve(Eigen::MatrixXd::Identity(dim, dim));
    return 0.5 * (inv + inv.transpose());
}

double regularizer_g(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& sigma_prime,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& z_kappa) {
    require(sigma.rows() == sigma.cols() && sigma.rows() == x.size(),
            "regularizer_g: sigma size mismatch");
    require(sigma_prime.rows() == sigma_prime.cols() &&
                sigma_prime.rows() == x.size() + z_kappa.size() + 1,
            "regularizer_g: sigma_prime size mismatch");
    return penalty_value(sigma, sigma_prime, x, z_kappa);
}

void RobustProblem::validate() const {
    const int m = model.products();
    require(m >= 1, "RobustProblem: need at least one product");
    require(model.outcomes() == m, "RobustProblem: model must be square");
    const int k = static_cast<int>(model.kappa.size());
    require(sigma.rows() == m && sigma.cols() == m, "RobustProblem: sigma size mismatch");
    require(sigma_prime.rows() == m + k + 1 && sigma_prime.cols() == m + k + 1,
            "RobustProblem: sigma_prime size mismatch");
    check_symmetric_psd(sigma, "RobustProblem: sigma");
    check_symmetric_psd(sigma_prime, "RobustProblem: sigma_prime");
    require(lambda >= 0.0 && std::isfinite(lambda), "RobustProblem: bad lambda");
    require(box_lo.size() == m && box_hi.size() == m, "RobustProblem: box size mismatch");
    for (int i = 0; i < m; ++i) {
        require(std::isfinite(box_lo(i)) && std::isfinite(box_hi(i)) &&
                    box_lo(i) <= box_hi(i),
                "RobustProblem: invalid box");
    }
}

Strategy optimize(const RobustProblem& problem, const Eigen::VectorXd& z_kappa,
                  std::uint64_t seed, int max_iter, double tol) {
    problem.validate();
    const int m = problem.model.products();
    require(z_kappa.size() == static_cast<Eigen::Index>(problem.model.kappa.size()),
            "optimize: z_kappa size mismatch");
    require(z_kappa.allFinite(), "optimize: non-finite z_kappa");
    require(max_iter >= 1 && tol > 0.0, "optimize: bad iteration settings");

    const Eigen::VectorXd cz = problem.model.c_hat * z_kappa;
    const Eigen::MatrixXd a_sym = problem.model.a_hat + problem.model.a_hat.transpose();

    auto eval = [&](const Eigen::VectorXd& x) {
        return objective_at(problem, x, z_kappa, cz);
    };
    auto gradient = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g = a_sym * x + problem.model.b_hat + cz;
        if (problem.lambda != 0.0) {
            g -= problem.lambda *
                 penalty_grad(problem.sigma, problem.sigma_prime, x, z_kappa);
        }
        return g;
    };

    Strategy best;
    bool have_best = false;
    for (int start = 0; start < kStarts; ++start) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(start)));
        Eigen::VectorXd x(m);
        if (start == 0) {
            x = 0.5 * (problem.box_lo + problem.box_hi);
        } else if (start == 1) {
            x = problem.box_lo;
        } else if (start == 2) {
            x = problem.box_hi;
        } else if (start < 8) {
            for (int i = 0; i < m; ++i) {
                x(i) = rng.bernoulli(0.5) ? problem.box_hi(i) : problem.box_lo(i);
            }
        } else {
            for (int i = 0; i < m; ++i) x(i) = rng.uniform(problem.box_lo(i), problem.box_hi(i));
        }

        Objective current = eval(x);
        bool settled = false;
        int iter = 0;
        double step = 1.0;
        for (; iter < max_iter; ++iter) {
            Eigen::VectorXd grad = gradient(x);
            // Try growing the last accepted step before backtracking.
            step = std::min(step * 2.0, 1.0);
            bool moved = false;
            while (step >= kMinStep) {
                Eigen::VectorXd cand = project_box(x + step * grad, problem.box_lo, problem.box_hi);
                Eigen::VectorXd delta = cand - x;
                double dnorm = delta.norm();
                if (dnorm == 0.0) break;
                Objective trial = eval(cand);
                if (trial.value >= current.value + kArmijoC1 * grad.dot(delta)) {
                    x = cand;
                    current = trial;
                    if (dnorm <= tol * (1.0 + x.norm())) {
                        settled = true;
                    } else {
                        moved = true;
                    }
                    break;
                }
                step *= 0.5;
            }
            if (settled || !moved) break;
        }

        if (!have_best || current.value > best.objective) {
            have_best = true;
            best.x = x;
            best.objective = current.value;
            best.predicted_revenue = current.revenue;
            best.regularizer_value = current.penalty;
            best.iterations = iter;
        }
    }

    // Certify the winner by its first-order condition rather than by the
    // stopping rule that happened to end its run.
    const Eigen::VectorXd grad = gradient(best.x);
    const double residual =
        (project_box(best.x + grad, problem.box_lo, problem.box_hi) - best.x).norm();
    best.converged = residual <= 1e-6 * (1.0 + std::abs(best.objective));
    return best;
}

TrueOptimum true_optimum(const LinearSem& sem, const Eigen::VectorXd& z,
                         const Eigen::VectorXd& box_lo, const Eigen::VectorXd& box_hi) {
    const int m = sem.products();
    require(z.size() == sem.features(), "true_optimum: z size mismatch");
    require(box_lo.size() == m && box_hi.size() == m, "true_optimum: box size mismatch");
    for (int i = 0; i < m; ++i) {
        require(std::isfinite(box_lo(i)) && std::isfinite(box_hi(i)) &&
                    box_lo(i) <= box_hi(i),
                "true_optimum: invalid box");
    }

    Eigen::MatrixXd a_sym = sem.a + sem.a.transpose();
    Eigen::VectorXd linear = sem.b + sem.c * z;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a_sym, Eigen::EigenvaluesOnly);
    double lipschitz = eig.eigenvalues().cwiseAbs().maxCoeff();
    require(lipschitz > 0.0, "true_optimum: degenerate price response");
    const double step = 1.0 / lipschitz;

    auto pg_norm = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& grad) {
        return (x - project_box(x + step * grad, box_lo, box_hi)).norm() / step;
    };

    Eigen::VectorXd x = 0.5 * (box_lo + box_hi);
    TrueOptimum out;
    const int iter_cap = 2000000;
    for (int iter = 0; iter < iter_cap; ++iter) {
        Eigen::VectorXd grad = a_sym * x + linear;
        out.certificate = pg_norm(x, grad);
        if (out.certificate <= 1e-9) break;
        x = project_box(x + step * grad, box_lo, box_hi);
    }
    out.x = x;
    out.value = x.dot(sem.a * x + linear);
    out.certified = out.certificate <= 1e-9;
    return out;
}

double evaluate_true(const LinearSem& sem, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& z) {
    return x.dot(expected_y_do(sem, x, z));
}

}  // namespace causalfs
