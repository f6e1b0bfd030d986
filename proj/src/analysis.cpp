#include "causalfs/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "causalfs/random.hpp"
#include "causalfs/regression.hpp"

namespace causalfs {

namespace {

constexpr std::uint64_t kBootstrapStream = 0xB00757;

Eigen::VectorXd gather(const Eigen::VectorXd& z, const std::vector<int>& kappa) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(kappa.size()));
    for (std::size_t i = 0; i < kappa.size(); ++i) out(static_cast<Eigen::Index>(i)) = z(kappa[i]);
    return out;
}

void check_query(const LinearSem& sem, const std::vector<int>& kappa,
                 const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
    sem.validate();
    if (x.size() != sem.products()) throw std::invalid_argument("analysis: x size mismatch");
    if (z.size() != sem.features()) throw std::invalid_argument("analysis: z size mismatch");
    for (std::size_t i = 0; i < kappa.size(); ++i) {
        if (kappa[i] < 0 || kappa[i] >= sem.features()) {
            throw std::invalid_argument("analysis: kappa index out of range");
        }
        if (i > 0 && kappa[i] <= kappa[i - 1]) {
            throw std::invalid_argument("analysis: kappa must be sorted and unique");
        }
    }
}

Dataset resample_rows(const Dataset& data, Rng& rng) {
    Dataset out;
    out.x.resize(data.rows(), data.x_cols());
    out.y.resize(data.rows(), data.y_cols());
    out.z.resize(data.rows(), data.z_cols());
    for (int r = 0; r < data.rows(); ++r) {
        int pick = rng.uniform_int(0, data.rows() - 1);
        out.x.row(r) = data.x.row(pick);
        out.y.row(r) = data.y.row(pick);
        out.z.row(r) = data.z.row(pick);
    }
    return out;
}

}  // namespace

double confounding_bias(const LinearSem& sem, const std::vector<int>& kappa,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
    check_query(sem, kappa, x, z);
    Eigen::VectorXd e_do = expected_y_do(sem, x, z);
    Eigen::VectorXd e_cond = expected_y_cond(sem, x, kappa, gather(z, kappa));
    return (e_cond - e_do).squaredNorm();
}

DecompositionReport decompose(const LinearSem& sem, const std::vector<int>& kappa,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                              int data_size, int replications, std::uint64_t seed,
                              int bootstrap_rounds) {
    check_query(sem, kappa, x, z);
    if (data_size < 2) throw std::invalid_argument("decompose: data_size must be at least 2");
    if (replications < 2) throw std::invalid_argument("decompose: need at least two replications");
    if (bootstrap_rounds < 0) throw std::invalid_argument("decompose: negative bootstrap rounds");

    const int m = sem.products();
    const Eigen::VectorXd z_kappa = gather(z, kappa);
    const Eigen::VectorXd e_do = expected_y_do(sem, x, z);
    const Eigen::VectorXd e_cond = expected_y_cond(sem, x, kappa, z_kappa);

    Eigen::MatrixXd preds(replications, m);
    Eigen::VectorXd mse(replications);
    Eigen::VectorXd gap(replications);
    Dataset first_data;
    for (int r = 0; r < replications; ++r) {
        Dataset data = sample(sem, data_size, derive_seed(seed, 2 * static_cast<std::uint64_t>(r)));
        if (r == 0) first_data = data;
        LinearModel model = fit_linear_model(data, kappa);
        Eigen::VectorXd f = predict(model, x, z_kappa);
        preds.row(r) = f.transpose();

        Eigen::MatrixXd y = sample_intervention(
            sem, x, z, 1, derive_seed(seed, 2 * static_cast<std::uint64_t>(r) + 1));
        double err = (y.row(0).transpose() - f).squaredNorm();
        mse(r) = err;
        gap(r) = err - (f - e_do).squaredNorm();
    }

    Eigen::VectorXd f_bar = preds.colwise().mean().transpose();
    DecompositionReport report;
    report.data_size = data_size;
    report.replications = replications;
    report.noise = m * sem.noise_var;
    report.confounding = (e_cond - e_do).squaredNorm();
    report.prediction_bias = (f_bar - e_cond).squaredNorm();
    report.total_bias = (f_bar - e_do).squaredNorm();
    report.interaction = 2.0 * (f_bar - e_cond).dot(e_cond - e_do);
    report.variance =
        (preds.rowwise() - f_bar.transpose()).rowwise().squaredNorm().mean();
    report.total_mse = mse.mean();

    auto standard_error = [replications](const Eigen::VectorXd& v) {
        double mean = v.mean();
        double ss = (v.array() - mean).square().sum() / (replications - 1);
        return std::sqrt(ss / replications);
    };
    report.total_mse_se = standard_error(mse);
    report.identity_gap = gap.mean() - report.noise;
    report.identity_se = standard_error(gap);

    if (bootstrap_rounds > 0) {
        Rng rng(derive_seed(seed, kBootstrapStream));
        Eigen::MatrixXd boot(bootstrap_rounds, m);
        for (int b = 0; b < bootstrap_rounds; ++b) {
            Dataset draw = resample_rows(first_data, rng);
            LinearModel model = fit_linear_model(draw, kappa);
            boot.row(b) = predict(model, x, z_kappa).transpose();
        }
        Eigen::RowVectorXd boot_mean = boot.colwise().mean();
        report.bootstrap_variance =
            (boot.rowwise() - boot_mean).rowwise().squaredNorm().mean();
    }
    return report;
}

}  // namespace causalfs
