#include "causalfs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "causalfs/dataset.hpp"
#include "causalfs/optimizer.hpp"
#include "causalfs/random.hpp"
#include "causalfs/regression.hpp"
#include "causalfs/selection.hpp"
#include "causalfs/sem.hpp"
#include "causalfs/svg.hpp"

namespace causalfs {

namespace {

// Streams 101 and 102 off the same seed are taken by the network generator.
constexpr std::uint64_t kZDrawStream = 1;
constexpr std::uint64_t kOptimizeStream = 7;
constexpr std::uint64_t kTrainStreamBase = 1000;
constexpr std::uint64_t kHoldoutStreamBase = 500;

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) parts.push_back(trim(item));
    return parts;
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": '" + value + "'");
    }
}

int parse_int(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": '" + value + "'");
}

Eigen::VectorXd gather(const Eigen::VectorXd& z, const std::vector<int>& kappa) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(kappa.size()));
    for (std::size_t i = 0; i < kappa.size(); ++i) out(static_cast<Eigen::Index>(i)) = z(kappa[i]);
    return out;
}

double holdout_mse(const LinearModel& model, const Dataset& holdout) {
    double total = 0.0;
    Eigen::VectorXd x(holdout.x_cols());
    Eigen::VectorXd zk(static_cast<Eigen::Index>(model.kappa.size()));
    for (int r = 0; r < holdout.rows(); ++r) {
        x = holdout.x.row(r).transpose();
        for (std::size_t i = 0; i < model.kappa.size(); ++i) {
            zk(static_cast<Eigen::Index>(i)) = holdout.z(r, model.kappa[i]);
        }
        total += (holdout.y.row(r).transpose() - predict(model, x, zk)).squaredNorm();
    }
    return total / holdout.rows();
}

std::vector<ExperimentRow> run_one_trial(const ExperimentConfig& cfg, int trial) {
    const std::uint64_t trial_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(trial));

    SemConfig scfg;
    scfg.products = cfg.products;
    scfg.features = cfg.features;
    scfg.edge_prob_zx = cfg.edge_prob_zx;
    scfg.edge_prob_zy = cfg.edge_prob_zy;
    scfg.noise_var = cfg.noise_var;
    scfg.discount_step = cfg.discount_step;
    scfg.seed = trial_seed;
    CausalDag dag = generate_network(scfg);
    LinearSem sem = generate_sem(dag, scfg);

    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(cfg.products, cfg.box_lo);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(cfg.products, cfg.box_hi);

    Rng zrng(derive_seed(trial_seed, kZDrawStream));
    std::vector<Eigen::VectorXd> z_draws(static_cast<std::size_t>(cfg.z_draws_per_trial));
    std::vector<double> optima(z_draws.size());
    for (std::size_t d = 0; d < z_draws.size(); ++d) {
        Eigen::VectorXd z(cfg.features);
        for (int k = 0; k < cfg.features; ++k) z(k) = zrng.bernoulli(sem.p(k)) ? 1.0 : 0.0;
        z_draws[d] = z;
        TrueOptimum best = true_optimum(sem, z, lo, hi);
        if (!best.certified) {
            throw std::runtime_error("run_trials: optimum certificate failed in trial " +
                                     std::to_string(trial));
        }
        optima[d] = best.value;
    }

    std::vector<ExperimentRow> rows;
    rows.reserve(cfg.alphas.size() * cfg.data_sizes.size() * cfg.mus.size() * 2 *
                 cfg.lambdas.size() * z_draws.size());
    std::uint64_t optimize_counter = 0;
    const std::uint64_t optimize_root = derive_seed(trial_seed, kOptimizeStream);

    // Alpha arms share the environment, the sampling streams and the deployment
    // draws; alpha only changes the discount flip rate, so arms are coupled
    // through common random numbers and their contrast is a paired comparison.
    for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
        LinearSem sem_a = sem;
        sem_a.alpha = cfg.alphas[ai];
        Dataset holdout =
            sample(sem_a, cfg.holdout_samples, derive_seed(trial_seed, kHoldoutStreamBase));
        for (std::size_t di = 0; di < cfg.data_sizes.size(); ++di) {
            Dataset train = sample(sem_a, cfg.data_sizes[di],
                                   derive_seed(trial_seed, kTrainStreamBase + di));
            Eigen::MatrixXd sigma = estimate_sigma(train);
            for (double mu : cfg.mus) {
                SelectionOptions sopt;
                sopt.mu = mu;
                sopt.threshold = cfg.selection_threshold;
                sopt.standardize = cfg.standardize;
                sopt.tol = cfg.lasso_tol;
                sopt.max_iter = cfg.lasso_max_iter;
                for (int method = 0; method < 2; ++method) {
                    Selection sel =
                        method == 0 ? select_fs(train, sopt) : select_cf(train, sopt);
                    LinearModel model = fit_linear_model(train, sel.kappa);
                    Eigen::MatrixXd sigma_prime = estimate_sigma_prime(train, sel.kappa);
                    double pmse = holdout_mse(model, holdout);

                    RobustProblem pb;
                    pb.model = model;
                    pb.sigma = sigma;
                    pb.sigma_prime = sigma_prime;
                    pb.box_lo = lo;
                    pb.box_hi = hi;
                    for (double lambda : cfg.lambdas) {
                        pb.lambda = lambda;
                        for (std::size_t zi = 0; zi < z_draws.size(); ++zi) {
                            Strategy strat =
                                optimize(pb, gather(z_draws[zi], sel.kappa),
                                         derive_seed(optimize_root, optimize_counter++));
                            double value = evaluate_true(sem, strat.x, z_draws[zi]);
                            ExperimentRow row;
                            row.trial = trial;
                            row.method = method == 0 ? "FS" : "CF";
                            row.alpha = cfg.alphas[ai];
                            row.data_size = cfg.data_sizes[di];
                            row.mu = mu;
                            row.lambda = lambda;
                            row.z_index = static_cast<int>(zi);
                            row.true_value = value;
                            row.normalized_value = value / optima[zi];
                            row.pred_mse = pmse;
                            row.n_selected = static_cast<int>(sel.kappa.size());
                            row.select_converged = sel.converged;
                            row.opt_converged = strat.converged;
                            row.seed = trial_seed;
                            rows.push_back(std::move(row));
                        }
                    }
                }
            }
        }
    }
    return rows;
}

struct GroupStats {
    std::vector<double> normalized;
    std::vector<double> pred;
    std::vector<double> selected;
};

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

using GroupKey = std::tuple<std::string, double, int, double, double>;

std::map<GroupKey, GroupStats> group_rows(const std::vector<ExperimentRow>& rows) {
    std::map<GroupKey, GroupStats> groups;
    for (const ExperimentRow& row : rows) {
        GroupStats& g =
            groups[{row.method, row.alpha, row.data_size, row.mu, row.lambda}];
        g.normalized.push_back(row.normalized_value);
        if (row.z_index == 0) {
            g.pred.push_back(row.pred_mse);
            g.selected.push_back(static_cast<double>(row.n_selected));
        }
    }
    return groups;
}

}  // namespace

void ExperimentConfig::validate() const {
    require(products >= 1, "config: products must be positive");
    require(features >= 1, "config: features must be positive");
    require(!alphas.empty(), "config: alphas must be non-empty");
    for (double a : alphas) require(a >= 0.0 && a <= 1.0, "config: alpha outside [0, 1]");
    require(!mus.empty(), "config: mus must be non-empty");
    for (double m : mus) require(m >= 0.0 && std::isfinite(m), "config: negative mu");
    require(!lambdas.empty(), "config: lambdas must be non-empty");
    for (double l : lambdas) require(l >= 0.0 && std::isfinite(l), "config: negative lambda");
    require(!data_sizes.empty(), "config: data_sizes must be non-empty");
    for (int d : data_sizes) require(d >= 2, "config: data sizes must be at least 2");
    require(trials >= 1, "config: trials must be positive");
    require(z_draws_per_trial >= 1, "config: z_draws_per_trial must be positive");
    require(box_lo <= box_hi && std::isfinite(box_lo) && std::isfinite(box_hi),
            "config: invalid price box");
    require(noise_var >= 0.0, "config: negative noise_var");
    require(edge_prob_zx >= 0.0 && edge_prob_zx <= 1.0, "config: edge_prob_zx outside [0, 1]");
    require(edge_prob_zy >= 0.0 && edge_prob_zy <= 1.0, "config: edge_prob_zy outside [0, 1]");
    require(discount_step >= 0.0, "config: negative discount_step");
    require(selection_threshold >= 0.0, "config: negative selection_threshold");
    require(lasso_tol > 0.0, "config: lasso_tol must be positive");
    require(lasso_max_iter >= 1, "config: lasso_max_iter must be positive");
    require(holdout_samples >= 1, "config: holdout_samples must be positive");
    require(!output_dir.empty(), "config: empty output_dir");
    require(jobs >= 1, "config: jobs must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key or value");
        }

        if (key == "products") cfg.products = parse_int(value, key);
        else if (key == "features") cfg.features = parse_int(value, key);
        else if (key == "alphas") {
            cfg.alphas.clear();
            for (const std::string& item : split_list(value))
                cfg.alphas.push_back(parse_double(item, key));
        } else if (key == "mus") {
            cfg.mus.clear();
            for (const std::string& item : split_list(value))
                cfg.mus.push_back(parse_double(item, key));
        } else if (key == "lambdas") {
            cfg.lambdas.clear();
            for (const std::string& item : split_list(value))
                cfg.lambdas.push_back(parse_double(item, key));
        } else if (key == "data_sizes") {
            cfg.data_sizes.clear();
            for (const std::string& item : split_list(value))
                cfg.data_sizes.push_back(parse_int(item, key));
        } else if (key == "trials") cfg.trials = parse_int(value, key);
        else if (key == "z_draws_per_trial") cfg.z_draws_per_trial = parse_int(value, key);
        else if (key == "box_lo") cfg.box_lo = parse_double(value, key);
        else if (key == "box_hi") cfg.box_hi = parse_double(value, key);
        else if (key == "noise_var") cfg.noise_var = parse_double(value, key);
        else if (key == "edge_prob_zx") cfg.edge_prob_zx = parse_double(value, key);
        else if (key == "edge_prob_zy") cfg.edge_prob_zy = parse_double(value, key);
        else if (key == "discount_step") cfg.discount_step = parse_double(value, key);
        else if (key == "selection_threshold") cfg.selection_threshold = parse_double(value, key);
        else if (key == "lasso_tol") cfg.lasso_tol = parse_double(value, key);
        else if (key == "lasso_max_iter") cfg.lasso_max_iter = parse_int(value, key);
        else if (key == "standardize") cfg.standardize = parse_bool(value, key);
        else if (key == "holdout_samples") cfg.holdout_samples = parse_int(value, key);
        else if (key == "master_seed") {
            try {
                cfg.master_seed = std::stoull(value);
            } catch (const std::exception&) {
                throw std::invalid_argument("config: bad integer for master_seed: '" + value + "'");
            }
        } else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "jobs") cfg.jobs = parse_int(value, key);
        else {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_config_file: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::vector<ExperimentRow> run_trials(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<ExperimentRow>> per_trial(static_cast<std::size_t>(cfg.trials));
    const int jobs = std::min(cfg.jobs, cfg.trials);
    if (jobs <= 1) {
        for (int t = 0; t < cfg.trials; ++t) per_trial[static_cast<std::size_t>(t)] = run_one_trial(cfg, t);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        auto worker = [&]() {
            while (true) {
                int t = next.fetch_add(1);
                if (t >= cfg.trials) break;
                per_trial[static_cast<std::size_t>(t)] = run_one_trial(cfg, t);
            }
        };
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    std::vector<ExperimentRow> rows;
    for (const auto& chunk : per_trial) rows.insert(rows.end(), chunk.begin(), chunk.end());
    return rows;
}

std::string results_to_csv(const std::vector<ExperimentRow>& rows) {
    std::ostringstream out;
    out << "trial,method,alpha,data_size,mu,lambda,z_index,true_value,normalized_value,"
           "pred_mse,n_selected,select_converged,opt_converged,seed\n";
    for (const ExperimentRow& r : rows) {
        out << r.trial << ',' << r.method << ',' << csv_double(r.alpha) << ',' << r.data_size
            << ',' << csv_double(r.mu) << ',' << csv_double(r.lambda) << ',' << r.z_index << ','
            << csv_double(r.true_value) << ',' << csv_double(r.normalized_value) << ','
            << csv_double(r.pred_mse) << ',' << r.n_selected << ','
            << (r.select_converged ? 1 : 0) << ',' << (r.opt_converged ? 1 : 0) << ',' << r.seed
            << '\n';
    }
    return out.str();
}

std::string summary_to_csv(const std::vector<ExperimentRow>& rows) {
    std::ostringstream out;
    out << "method,alpha,data_size,mu,lambda,rows,mean_normalized,se_normalized,"
           "mean_pred_mse,se_pred_mse,mean_n_selected\n";
    for (const auto& [key, stats] : group_rows(rows)) {
        const auto& [method, alpha, data_size, mu, lambda] = key;
        out << method << ',' << csv_double(alpha) << ',' << data_size << ',' << csv_double(mu)
            << ',' << csv_double(lambda) << ',' << stats.normalized.size() << ','
            << csv_double(mean_of(stats.normalized)) << ',' << csv_double(se_of(stats.normalized))
            << ',' << csv_double(mean_of(stats.pred)) << ',' << csv_double(se_of(stats.pred))
            << ',' << csv_double(mean_of(stats.selected)) << '\n';
    }
    return out.str();
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    std::vector<ExperimentRow> rows = run_trials(cfg);
    std::filesystem::create_directories(cfg.output_dir);

    ExperimentOutput output;
    output.row_count = rows.size();
    output.results_path = cfg.output_dir + "/results.csv";
    output.summary_path = cfg.output_dir + "/summary.csv";
    {
        std::ofstream out(output.results_path, std::ios::binary);
        if (!out) throw std::runtime_error("run_experiment: cannot write " + output.results_path);
        out << results_to_csv(rows);
    }
    {
        std::ofstream out(output.summary_path, std::ios::binary);
        if (!out) throw std::runtime_error("run_experiment: cannot write " + output.summary_path);
        out << summary_to_csv(rows);
    }

    auto groups = group_rows(rows);
    auto group_mean = [&groups](const std::string& method, double alpha, int d, double mu,
                                double lambda, bool pred) {
        const GroupStats& g = groups.at({method, alpha, d, mu, lambda});
        return pred ? mean_of(g.pred) : mean_of(g.normalized);
    };

    for (double alpha : cfg.alphas) {
        // Holdout error against data size, one line per method and mu.
        std::vector<ChartSeries> pred_series;
        for (int method = 0; method < 2; ++method) {
            for (double mu : cfg.mus) {
                ChartSeries s;
                s.label = std::string(method == 0 ? "FS" : "CF") + " mu=" + csv_double(mu);
                s.dashed = method == 0;
                s.color = "";
                for (int d : cfg.data_sizes) {
                    s.points.emplace_back(
                        d, group_mean(method == 0 ? "FS" : "CF", alpha, d, mu,
                                      cfg.lambdas.front(), true));
                }
                pred_series.push_back(std::move(s));
            }
        }
        std::string pred_path =
            cfg.output_dir + "/prediction_alpha_" + csv_double(alpha) + ".svg";
        {
            std::ofstream out(pred_path, std::ios::binary);
            if (!out) throw std::runtime_error("run_experiment: cannot write " + pred_path);
            out << render_line_chart("Holdout prediction error, alpha=" + csv_double(alpha),
                                     "training records", "mean squared error", pred_series);
        }
        output.chart_paths.push_back(pred_path);

        // Realized revenue against data size, one line per method and lambda.
        for (double mu : cfg.mus) {
            std::vector<ChartSeries> value_series;
            for (int method = 0; method < 2; ++method) {
                for (double lambda : cfg.lambdas) {
                    ChartSeries s;
                    s.label = std::string(method == 0 ? "FS" : "CF") +
                              " lambda=" + csv_double(lambda);
                    s.dashed = method == 0;
                    for (int d : cfg.data_sizes) {
                        s.points.emplace_back(
                            d, group_mean(method == 0 ? "FS" : "CF", alpha, d, mu, lambda,
                                          false));
                    }
                    value_series.push_back(std::move(s));
                }
            }
            std::string value_path = cfg.output_dir + "/optimization_alpha_" +
                                     csv_double(alpha) + "_mu_" + csv_double(mu) + ".svg";
            std::ofstream out(value_path, std::ios::binary);
            if (!out) throw std::runtime_error("run_experiment: cannot write " + value_path);
            out << render_line_chart("Realized revenue share, alpha=" + csv_double(alpha) +
                                         ", mu=" + csv_double(mu),
                                     "training records", "revenue / optimum", value_series,
                                     1.0);
            output.chart_paths.push_back(value_path);
        }
    }
    return output;
}

}  // namespace causalfs
