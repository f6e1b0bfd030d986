#include "causalfs/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace causalfs {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

GroupLassoResult solve_group_lasso(const GroupLassoProblem& prob) {
    const int nu = static_cast<int>(prob.targets.rows());
    const int nv = static_cast<int>(prob.candidates.rows());
    const int d = static_cast<int>(prob.targets.cols());
    require(prob.candidates.cols() == d, "solve_group_lasso: record count mismatch");
    require(d >= 1 && nu >= 1, "solve_group_lasso: empty problem");
    require(prob.mu >= 0.0, "solve_group_lasso: negative mu");
    require(prob.tol > 0.0, "solve_group_lasso: tol must be positive");
    require(prob.max_iter >= 1, "solve_group_lasso: max_iter must be positive");
    require(prob.targets.allFinite() && prob.candidates.allFinite(),
            "solve_group_lasso: non-finite input");

    GroupLassoResult res;
    res.weights = Eigen::MatrixXd::Zero(nu, nv);
    if (nv == 0) {
        res.kkt_residual = 0.0;
        res.converged = true;
        res.objective_trace.push_back(0.5 * prob.targets.squaredNorm());
        return res;
    }

    Eigen::VectorXd gram(nv);
    for (int v = 0; v < nv; ++v) gram(v) = prob.candidates.row(v).squaredNorm();

    Eigen::MatrixXd residual = prob.targets;  // targets - W * candidates
    Eigen::VectorXd corr(nu), wnew(nu);
    const double mu = prob.mu;

    // Largest group-wise optimality violation at the current weights, from a
    // freshly computed residual.
    auto exact_kkt = [&]() {
        residual = prob.targets - res.weights * prob.candidates;
        double worst = 0.0;
        for (int v = 0; v < nv; ++v) {
            corr.noalias() = residual * prob.candidates.row(v).transpose();
            corr.noalias() += gram(v) * res.weights.col(v);
            const double wnorm = res.weights.col(v).norm();
            if (wnorm == 0.0)
                worst = std::max(worst, corr.norm() - mu);
            else
                worst = std::max(
                    worst,
                    (gram(v) * res.weights.col(v) + (mu / wnorm) * res.weights.col(v) - corr)
                        .norm());
        }
        return std::max(worst, 0.0);
    };

    double prev_objective = std::numeric_limits<double>::infinity();
    for (int sweep = 1; sweep <= prob.max_iter; ++sweep) {
        // Refresh the residual occasionally; rank-1 updates drift.
        if (sweep % 256 == 0) residual = prob.targets - res.weights * prob.candidates;

        double worst = 0.0;  // violations measured just before each update
        bool moved = false;
        for (int v = 0; v < nv; ++v) {
            if (gram(v) == 0.0) continue;  // zero row can never help
            corr.noalias() = residual * prob.candidates.row(v).transpose();
            corr.noalias() += gram(v) * res.weights.col(v);

            const double wnorm = res.weights.col(v).norm();
            if (wnorm == 0.0) {
                worst = std::max(worst, corr.norm() - mu);
            } else {
                worst = std::max(
                    worst,
                    (gram(v) * res.weights.col(v) + (mu / wnorm) * res.weights.col(v) - corr)
                        .norm());
            }

            // Exact block minimizer.
            const double cnorm = corr.norm();
            if (cnorm <= mu)
                wnew.setZero();
            else
                wnew = ((1.0 - mu / cnorm) / gram(v)) * corr;

            if (wnew != res.weights.col(v)) {
                residual.noalias() += (res.weights.col(v) - wnew) * prob.candidates.row(v);
                res.weights.col(v) = wnew;
                moved = true;
            }
        }

        double penalty = 0.0;
        for (int v = 0; v < nv; ++v) penalty += res.weights.col(v).norm();
        const double objective = 0.5 * residual.squaredNorm() + mu * penalty;
        res.objective_trace.push_back(objective);
        res.kkt_residual = std::max(worst, 0.0);
        res.iterations = sweep;

        if (mu > 0.0) {
            // The in-sweep measure is cheap but slightly stale; certify the
            // final weights with an exact pass before claiming convergence.
            if (res.kkt_residual <= prob.tol * mu) {
                res.kkt_residual = exact_kkt();
                if (res.kkt_residual <= prob.tol * mu) {
                    res.converged = true;
                    break;
                }
            } else if (!moved) {
                res.kkt_residual = exact_kkt();
                res.converged = res.kkt_residual <= prob.tol * mu;
                break;
            }
        } else {
            const double rel = std::abs(prev_objective - objective) /
                               std::max(1.0, std::abs(prev_objective));
            if (rel < prob.tol || !moved) {
                res.kkt_residual = exact_kkt();
                res.converged = true;
                break;
            }
        }
        prev_objective = objective;
    }
    return res;
}

namespace {

Eigen::VectorXd dataset_column(const Dataset& data, int col) {
    const int m = data.x_cols(), n = data.y_cols();
    if (col < m) return data.x.col(col);
    if (col < m + n) return data.y.col(col - m);
    return data.z.col(col - m - n);
}

bool is_constant_row(const Eigen::RowVectorXd& row) {
    const double mean = row.mean();
    return (row.array() - mean).abs().maxCoeff() <= 1e-12 * (1.0 + std::abs(mean));
}

void standardize_rows(Eigen::MatrixXd& rows) {
    const int d = static_cast<int>(rows.cols());
    for (int r = 0; r < rows.rows(); ++r) {
        const double mean = rows.row(r).mean();
        rows.row(r).array() -= mean;
        const double sd = std::sqrt(rows.row(r).squaredNorm() / (d - 1));
        if (sd > 0.0) rows.row(r) /= sd;
    }
}

}  // namespace

Selection markov_blanket(const Dataset& data, const std::vector<int>& targets,
                         const SelectionOptions& opt) {
    data.validate();
    const int total = data.x_cols() + data.y_cols() + data.z_cols();
    require(!targets.empty(), "markov_blanket: empty target set");
    require(data.rows() >= 2, "markov_blanket: need at least 2 records");
    require(opt.mu >= 0.0, "markov_blanket: negative mu");
    require(opt.threshold >= 0.0, "markov_blanket: negative threshold");

    std::vector<char> is_target(total, 0);
    for (int t : targets) {
        require(t >= 0 && t < total, "markov_blanket: target column out of range");
        require(!is_target[t], "markov_blanket: duplicate target column");
        is_target[t] = 1;
    }

    Selection sel;
    sel.method = "mb";
    sel.mu = opt.mu;

    // Non-target, non-constant columns are the candidate groups.
    for (int c = 0; c < total; ++c) {
        if (is_target[c]) continue;
        if (is_constant_row(dataset_column(data, c).transpose())) continue;
        sel.candidates.push_back(c);
    }

    GroupLassoProblem prob;
    prob.mu = opt.mu;
    prob.tol = opt.tol;
    prob.max_iter = opt.max_iter;
    prob.targets.resize(targets.size(), data.rows());
    for (std::size_t i = 0; i < targets.size(); ++i)
        prob.targets.row(i) = dataset_column(data, targets[i]).transpose();
    prob.candidates.resize(sel.candidates.size(), data.rows());
    for (std::size_t i = 0; i < sel.candidates.size(); ++i)
        prob.candidates.row(i) = dataset_column(data, sel.candidates[i]).transpose();

    if (opt.standardize) {
        standardize_rows(prob.targets);
        standardize_rows(prob.candidates);
    }

    GroupLassoResult lasso = solve_group_lasso(prob);
    sel.weights = std::move(lasso.weights);
    sel.objective_trace = std::move(lasso.objective_trace);
    sel.kkt_residual = lasso.kkt_residual;
    sel.converged = lasso.converged;

    double max_norm = 0.0;
    for (int v = 0; v < sel.weights.cols(); ++v)
        max_norm = std::max(max_norm, sel.weights.col(v).norm());
    const int m = data.x_cols(), n = data.y_cols();
    for (int v = 0; v < sel.weights.cols(); ++v) {
        if (max_norm == 0.0) break;
        if (sel.weights.col(v).norm() > opt.threshold * max_norm) {
            const int col = sel.candidates[v];
            sel.blanket.push_back(col);
            if (col >= m + n) sel.kappa.push_back(col - m - n);
        }
    }
    return sel;
}

Selection select_fs(const Dataset& data, const SelectionOptions& opt) {
    std::vector<int> targets;
    for (int i = 0; i < data.y_cols(); ++i) targets.push_back(data.x_cols() + i);
    Selection sel = markov_blanket(data, targets, opt);
    sel.method = "fs";
    return sel;
}

Selection select_cf(const Dataset& data, const SelectionOptions& opt) {
    std::vector<int> targets;
    for (int i = 0; i < data.x_cols() + data.y_cols(); ++i) targets.push_back(i);
    Selection sel = markov_blanket(data, targets, opt);
    sel.method = "cf";
    return sel;
}

std::string selection_to_json(const Selection& sel) {
    nlohmann::json j;
    j["method"] = sel.method;
    j["mu"] = sel.mu;
    j["kappa"] = sel.kappa;
    j["blanket"] = sel.blanket;
    j["candidates"] = sel.candidates;
    j["kkt_residual"] = sel.kkt_residual;
    j["converged"] = sel.converged;
    j["objective"] = sel.objective_trace.empty() ? 0.0 : sel.objective_trace.back();
    j["sweeps"] = sel.objective_trace.size();
    return j.dump(2);
}

Selection selection_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("selection_from_json: ") + e.what());
    }
    Selection sel;
    sel.method = j.at("method").get<std::string>();
    sel.mu = j.at("mu").get<double>();
    sel.kappa = j.at("kappa").get<std::vector<int>>();
    sel.blanket = j.at("blanket").get<std::vector<int>>();
    if (j.contains("candidates")) sel.candidates = j.at("candidates").get<std::vector<int>>();
    sel.kkt_residual = j.at("kkt_residual").get<double>();
    sel.converged = j.at("converged").get<bool>();
    return sel;
}

}  // namespace causalfs
