#include "causalfs/regression.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace causalfs {

namespace {

void check_kappa(const std::vector<int>& kappa, int z_cols) {
    for (std::size_t i = 0; i < kappa.size(); ++i) {
        if (kappa[i] < 0 || kappa[i] >= z_cols) {
            throw std::invalid_argument("fit_linear_model: kappa index out of range");
        }
        if (i > 0 && kappa[i] <= kappa[i - 1]) {
            throw std::invalid_argument("fit_linear_model: kappa must be sorted and unique");
        }
    }
}

bool columns_equal(const Eigen::MatrixXd& phi, int i, int j) {
    return (phi.col(i).array() == phi.col(j).array()).all();
}

}  // namespace

LinearModel fit_linear_model(const Dataset& data, const std::vector<int>& kappa) {
    data.validate();
    check_kappa(kappa, data.z_cols());
    const int rows = data.rows();
    const int m = data.x_cols();
    const int n = data.y_cols();
    const int k = static_cast<int>(kappa.size());
    if (rows < 1) throw std::invalid_argument("fit_linear_model: empty dataset");

    const int total = m + k + 1;
    Eigen::MatrixXd phi(rows, total);
    for (int j = 0; j < m; ++j) phi.col(j) = data.x.col(j);
    for (int j = 0; j < k; ++j) phi.col(m + j) = data.z.col(kappa[j]);
    phi.col(m + k).setOnes();

    // Collapse exact duplicates so the solver sees each distinct column once.
    std::vector<int> first_copy(total);
    std::vector<int> keep;
    keep.reserve(total);
    for (int j = 0; j < total; ++j) {
        first_copy[j] = j;
        for (int i : keep) {
            if (columns_equal(phi, i, j)) {
                first_copy[j] = i;
                break;
            }
        }
        if (first_copy[j] == j) keep.push_back(j);
    }

    Eigen::MatrixXd reduced(rows, static_cast<int>(keep.size()));
    std::vector<int> slot(total, -1);
    for (std::size_t c = 0; c < keep.size(); ++c) {
        reduced.col(static_cast<int>(c)) = phi.col(keep[c]);
        slot[keep[c]] = static_cast<int>(c);
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(reduced);
    Eigen::MatrixXd theta_reduced = cod.solve(data.y);  // keep.size() x N

    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(total, n);
    for (int j = 0; j < total; ++j) {
        if (first_copy[j] == j) theta.row(j) = theta_reduced.row(slot[j]);
    }

    LinearModel model;
    model.a_hat.resize(n, m);
    for (int j = 0; j < m; ++j) model.a_hat.col(j) = theta.row(j).transpose();
    model.c_hat.resize(n, k);
    for (int j = 0; j < k; ++j) model.c_hat.col(j) = theta.row(m + j).transpose();
    model.b_hat = theta.row(m + k).transpose();
    model.kappa = kappa;
    model.rank_deficient = cod.rank() < static_cast<Eigen::Index>(keep.size()) ||
                           rows < total || static_cast<int>(keep.size()) < total;
    return model;
}

Eigen::VectorXd predict(const LinearModel& model, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& z_kappa) {
    const int m = model.products();
    const int n = model.outcomes();
    const int k = static_cast<int>(model.kappa.size());
    if (x.size() != m) throw std::invalid_argument("predict: x has wrong size");
    if (z_kappa.size() != k) throw std::invalid_argument("predict: z_kappa has wrong size");
    if (model.b_hat.size() != n || model.c_hat.rows() != n || model.c_hat.cols() != k) {
        throw std::invalid_argument("predict: inconsistent model shapes");
    }

    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += model.a_hat(i, j) * x(j);
        acc += model.b_hat(i);
        for (int j = 0; j < k; ++j) acc += model.c_hat(i, j) * z_kappa(j);
        out(i) = acc;
    }
    return out;
}

std::string model_to_json(const LinearModel& model) {
    nlohmann::json j;
    j["products"] = model.products();
    j["outcomes"] = model.outcomes();
    j["kappa"] = model.kappa;
    j["rank_deficient"] = model.rank_deficient;
    auto matrix_rows = [](const Eigen::MatrixXd& mat) {
        std::vector<std::vector<double>> rows;
        rows.reserve(static_cast<std::size_t>(mat.rows()));
        for (Eigen::Index r = 0; r < mat.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(mat.cols()));
            for (Eigen::Index c = 0; c < mat.cols(); ++c) row[static_cast<std::size_t>(c)] = mat(r, c);
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["a_hat"] = matrix_rows(model.a_hat);
    j["c_hat"] = matrix_rows(model.c_hat);
    j["b_hat"] = std::vector<double>(model.b_hat.data(), model.b_hat.data() + model.b_hat.size());
    return j.dump(2);
}

LinearModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("model_from_json: ") + e.what());
    }
    try {
        const int m = j.at("products").get<int>();
        const int n = j.at("outcomes").get<int>();
        LinearModel model;
        model.kappa = j.at("kappa").get<std::vector<int>>();
        model.rank_deficient = j.at("rank_deficient").get<bool>();
        const int k = static_cast<int>(model.kappa.size());

        auto read_matrix = [&j](const char* key, int rows, int cols) {
            auto data = j.at(key).get<std::vector<std::vector<double>>>();
            if (static_cast<int>(data.size()) != rows) {
                throw std::invalid_argument("model_from_json: bad matrix shape");
            }
            Eigen::MatrixXd mat(rows, cols);
            for (int r = 0; r < rows; ++r) {
                if (static_cast<int>(data[static_cast<std::size_t>(r)].size()) != cols) {
                    throw std::invalid_argument("model_from_json: bad matrix shape");
                }
                for (int c = 0; c < cols; ++c) {
                    mat(r, c) = data[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
                }
            }
            return mat;
        };
        model.a_hat = read_matrix("a_hat", n, m);
        model.c_hat = read_matrix("c_hat", n, k);
        auto b = j.at("b_hat").get<std::vector<double>>();
        if (static_cast<int>(b.size()) != n) {
            throw std::invalid_argument("model_from_json: bad intercept length");
        }
        model.b_hat = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("model_from_json: ") + e.what());
    }
}

LinearModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_model_file: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

void save_model_file(const std::string& path, const LinearModel& model) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("save_model_file: cannot open " + path);
    out << model_to_json(model) << '\n';
}

}  // namespace causalfs
