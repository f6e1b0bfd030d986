#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace causalfs {

/// Sweep settings for the synthetic pricing study. Each trial draws a fresh
/// environment, then for every (alpha, data size, mu) cell selects features
/// with both strategies, fits the demand model and prices a set of deployment
/// feature draws under each robustness weight lambda.
struct ExperimentConfig {
    int products = 10;
    int features = 10;
    std::vector<double> alphas = {0.1, 0.5};
    std::vector<double> mus = {100.0, 200.0, 300.0};
    std::vector<double> lambdas = {0.0, 3.0, 10.0};
    std::vector<int> data_sizes = {40, 80, 120, 160, 200};
    int trials = 50;
    int z_draws_per_trial = 10;
    double box_lo = 0.0;
    double box_hi = 1.0;
    double noise_var = 100.0;
    double edge_prob_zx = 0.1;
    double edge_prob_zy = 0.5;
    double discount_step = 0.1;
    double selection_threshold = 1e-6;
    double lasso_tol = 1e-8;
    int lasso_max_iter = 100000;
    bool standardize = true;
    int holdout_samples = 1000;
    std::uint64_t master_seed = 1;
    std::string output_dir = "results";
    int jobs = 1;

    void validate() const;
};

/// key = value lines, comma separated lists, # comments.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// One priced deployment draw. pred_mse is the holdout prediction error of
/// the underlying model and repeats across lambda and z rows of the same fit.
struct ExperimentRow {
    int trial = 0;
    std::string method;  // FS or CF
    double alpha = 0.0;
    int data_size = 0;
    double mu = 0.0;
    double lambda = 0.0;
    int z_index = 0;
    double true_value = 0.0;        // expected revenue of the chosen prices
    double normalized_value = 0.0;  // true_value / certified optimum
    double pred_mse = 0.0;          // mean squared holdout error per record
    int n_selected = 0;             // retained external features
    bool select_converged = false;
    bool opt_converged = false;
    std::uint64_t seed = 0;  // trial seed
};

/// Runs every trial and returns the rows in deterministic order; jobs > 1
/// threads over trials without changing the output.
std::vector<ExperimentRow> run_trials(const ExperimentConfig& cfg);

std::string results_to_csv(const std::vector<ExperimentRow>& rows);

/// Per (method, alpha, data_size, mu, lambda) group: mean and standard error
/// of the normalized value over trials and z draws, of the holdout error over
/// trials, and the mean selected-feature count.
std::string summary_to_csv(const std::vector<ExperimentRow>& rows);

struct ExperimentOutput {
    std::string results_path;
    std::string summary_path;
    std::vector<std::string> chart_paths;
    std::size_t row_count = 0;
};

/// Runs the sweep and writes results.csv, summary.csv and the charts into
/// cfg.output_dir. Output bytes depend only on the configuration.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

}  // namespace causalfs
