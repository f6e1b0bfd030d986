#include <CLI11.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "causalfs/analysis.hpp"
#include "causalfs/dataset.hpp"
#include "causalfs/discrete.hpp"
#include "causalfs/experiment.hpp"
#include "causalfs/graph.hpp"
#include "causalfs/optimizer.hpp"
#include "causalfs/random.hpp"
#include "causalfs/regression.hpp"
#include "causalfs/selection.hpp"
#include "causalfs/sem.hpp"
#include "json.hpp"

namespace {

using namespace causalfs;

/// CLI feature indices are 1-based; the library and the JSON files use
/// 0-based indices.
std::vector<int> to_zero_based(const std::vector<int>& one_based, int count,
                               const std::string& what) {
    std::vector<int> out;
    out.reserve(one_based.size());
    for (int v : one_based) {
        if (v < 1 || v > count) {
            throw std::invalid_argument(what + " index " + std::to_string(v) +
                                        " outside 1.." + std::to_string(count));
        }
        out.push_back(v - 1);
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
        throw std::invalid_argument("duplicate " + what + " index");
    }
    return out;
}

std::string one_based(const std::vector<int>& kappa) {
    std::string out;
    for (std::size_t i = 0; i < kappa.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(kappa[i] + 1);
    }
    return out.empty() ? "(none)" : out;
}

Eigen::VectorXd to_vector(const std::vector<double>& values) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i)) = values[i];
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

NodeSet labels_to_nodes(const CausalDag& dag, const std::vector<std::string>& labels) {
    std::vector<int> ids;
    for (const std::string& label : labels) {
        int v = dag.find_label(label);
        if (v < 0) throw std::invalid_argument("unknown node label '" + label + "'");
        ids.push_back(v);
    }
    return make_node_set(std::move(ids));
}

int run_graph_check(const std::string& path, const std::vector<std::string>& adjust_labels,
                    const std::vector<std::string>& kappa_labels, bool adjust_given,
                    bool kappa_given) {
    CausalDag dag = load_dag_file(path);
    int decisions = static_cast<int>(dag.nodes_of(NodeClass::Decision).size());
    int targets = static_cast<int>(dag.nodes_of(NodeClass::Target).size());
    int externals = static_cast<int>(dag.nodes_of(NodeClass::External).size());
    std::cout << "nodes: " << dag.node_count() << " (" << decisions << " decision, " << targets
              << " target, " << externals << " external), edges: " << dag.edges().size()
              << '\n';

    int rc = 0;
    bool temporal = check_temporal_assumption(dag);
    std::cout << "temporal assumption (no decision or external node descends from a target): "
              << (temporal ? "holds" : "violated") << '\n';
    if (!temporal) rc = 2;

    if (adjust_given) {
        NodeSet s = labels_to_nodes(dag, adjust_labels);
        bool ok = satisfies_backdoor(dag, dag.nodes_of(NodeClass::Decision),
                                     dag.nodes_of(NodeClass::Target), s);
        std::cout << "back-door adjustment for decisions -> targets: "
                  << (ok ? "valid" : "invalid") << '\n';
        if (!ok) rc = 2;
    }
    if (kappa_given) {
        NodeSet kappa = labels_to_nodes(dag, kappa_labels);
        bool ok = check_thm10_premise(dag, kappa);
        std::cout << "reduced adjustment premise for the chosen features: "
                  << (ok ? "holds" : "violated") << '\n';
        if (!ok) rc = 2;
    }
    return rc;
}

int run_verify_thm10(int nodes, int trials, std::uint64_t seed, double tol) {
    if (nodes < 3 || nodes > 14) {
        throw std::invalid_argument("verify thm10: nodes must be in 3..14");
    }
    if (trials < 1) throw std::invalid_argument("verify thm10: trials must be positive");

    long checked = 0;
    for (int t = 0; t < trials; ++t) {
        DiscreteBayesNet net = make_random_admissible_net(nodes, derive_seed(seed, t));
        NodeSet externals = net.dag().nodes_of(NodeClass::External);
        const std::size_t k = externals.size();
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
            NodeSet kappa;
            for (std::size_t i = 0; i < k; ++i) {
                if (mask & (std::uint64_t{1} << i)) kappa.push_back(externals[i]);
            }
            if (!check_thm10_premise(net.dag(), kappa)) continue;
            ++checked;
            if (!verify_adjustment(net, kappa, tol)) {
                std::cout << "violation in network " << t << " with conditioning set size "
                          << kappa.size() << '\n';
                return 2;
            }
        }
    }
    std::cout << "verified " << checked << " reduced adjustment sets across " << trials
              << " random networks (tolerance " << tol << ")\n";
    return 0;
}

nlohmann::json strategy_to_json(const Strategy& s) {
    nlohmann::json j;
    j["x"] = std::vector<double>(s.x.data(), s.x.data() + s.x.size());
    j["predicted_revenue"] = s.predicted_revenue;
    j["regularizer_value"] = s.regularizer_value;
    j["objective"] = s.objective;
    j["converged"] = s.converged;
    j["iterations"] = s.iterations;
    return j;
}

nlohmann::json report_to_json(const DecompositionReport& r) {
    nlohmann::json j;
    j["data_size"] = r.data_size;
    j["replications"] = r.replications;
    j["noise"] = r.noise;
    j["confounding"] = r.confounding;
    j["prediction_bias"] = r.prediction_bias;
    j["interaction"] = r.interaction;
    j["variance"] = r.variance;
    j["total_bias"] = r.total_bias;
    j["total_mse"] = r.total_mse;
    j["total_mse_se"] = r.total_mse_se;
    j["identity_gap"] = r.identity_gap;
    j["identity_se"] = r.identity_se;
    j["bootstrap_variance"] = r.bootstrap_variance;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causally admissible feature selection and robust price optimization"};
    app.require_subcommand(1);
    int exit_code = 0;

    // graph check
    auto* graph_cmd = app.add_subcommand("graph", "causal graph utilities");
    graph_cmd->require_subcommand(1);
    auto* graph_check = graph_cmd->add_subcommand("check", "validate a graph file");
    std::string graph_path;
    std::vector<std::string> adjust_labels, premise_labels;
    graph_check->add_option("file", graph_path, "graph text file")->required();
    auto* adjust_opt = graph_check
                           ->add_option("--adjust", adjust_labels,
                                        "node labels of a candidate adjustment set")
                           ->delimiter(',');
    auto* premise_opt = graph_check
                            ->add_option("--kappa", premise_labels,
                                         "external node labels for the reduced-set premise")
                            ->delimiter(',');
    graph_check->callback([&]() {
        exit_code = run_graph_check(graph_path, adjust_labels, premise_labels,
                                    adjust_opt->count() > 0, premise_opt->count() > 0);
    });

    // sem generate / sample
    auto* sem_cmd = app.add_subcommand("sem", "synthetic pricing environments");
    sem_cmd->require_subcommand(1);

    auto* sem_generate = sem_cmd->add_subcommand("generate", "draw a random environment");
    SemConfig sem_cfg;
    std::string sem_out, dag_out;
    sem_generate->add_option("--products", sem_cfg.products, "number of products");
    sem_generate->add_option("--features", sem_cfg.features, "number of external features");
    sem_generate->add_option("--edge-prob-zx", sem_cfg.edge_prob_zx, "feature-discount edge probability");
    sem_generate->add_option("--edge-prob-zy", sem_cfg.edge_prob_zy, "feature-demand edge probability");
    sem_generate->add_option("--alpha", sem_cfg.alpha, "extra discount probability");
    sem_generate->add_option("--discount-step", sem_cfg.discount_step, "price reduction per discount");
    sem_generate->add_option("--noise-var", sem_cfg.noise_var, "outcome noise variance");
    sem_generate->add_option("--seed", sem_cfg.seed, "generator seed");
    sem_generate->add_option("--out", sem_out, "output model json")->required();
    sem_generate->add_option("--dag-out", dag_out, "also write the graph as text");
    sem_generate->callback([&]() {
        CausalDag dag = generate_network(sem_cfg);
        LinearSem sem = generate_sem(dag, sem_cfg);
        save_sem_file(sem_out, sem);
        if (!dag_out.empty()) save_dag_file(dag_out, sem.dag);
        std::cout << "wrote " << sem_out << " (" << sem.products() << " products, "
                  << sem.features() << " features)\n";
    });

    auto* sem_sample = sem_cmd->add_subcommand("sample", "draw observational records");
    std::string sample_sem_path, sample_out;
    int sample_count = 100;
    std::uint64_t sample_seed = 0;
    sem_sample->add_option("--sem", sample_sem_path, "model json")->required();
    sem_sample->add_option("--count", sample_count, "number of records");
    sem_sample->add_option("--seed", sample_seed, "sampling seed");
    sem_sample->add_option("--out", sample_out, "output csv")->required();
    sem_sample->callback([&]() {
        LinearSem sem = load_sem_file(sample_sem_path);
        Dataset data = sample(sem, sample_count, sample_seed);
        save_csv_file(sample_out, data);
        std::cout << "wrote " << sample_out << " (" << data.rows() << " records)\n";
    });

    // select
    auto* select_cmd = app.add_subcommand("select", "group lasso feature selection");
    std::string select_data, select_method = "fs", select_out;
    SelectionOptions select_opt;
    select_cmd->add_option("--data", select_data, "training csv")->required();
    select_cmd->add_option("--method", select_method, "fs selects for the outcomes, cf for prices and outcomes")
        ->check(CLI::IsMember({"fs", "cf"}));
    select_cmd->add_option("--mu", select_opt.mu, "group lasso penalty")->required();
    select_cmd->add_option("--threshold", select_opt.threshold, "relative group norm cutoff");
    select_cmd->add_flag("--standardize,!--no-standardize", select_opt.standardize,
                         "standardize rows before selection (default on)");
    select_cmd->add_option("--tol", select_opt.tol, "KKT tolerance");
    select_cmd->add_option("--max-iter", select_opt.max_iter, "sweep limit");
    select_cmd->add_option("--out", select_out, "output selection json");
    select_cmd->callback([&]() {
        Dataset data = load_csv_file(select_data);
        Selection sel = select_method == "fs" ? select_fs(data, select_opt)
                                              : select_cf(data, select_opt);
        std::cout << "selected features (1-based): " << one_based(sel.kappa) << '\n'
                  << "blanket columns: " << sel.blanket.size() << ", converged: "
                  << (sel.converged ? "yes" : "no") << ", kkt residual: " << sel.kkt_residual
                  << '\n';
        if (!select_out.empty()) write_text_file(select_out, selection_to_json(sel) + "\n");
    });

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "least squares demand model");
    std::string fit_data, fit_selection, fit_out;
    std::vector<int> fit_kappa;
    fit_cmd->add_option("--data", fit_data, "training csv")->required();
    auto* fit_kappa_opt =
        fit_cmd->add_option("--kappa", fit_kappa, "1-based feature indices")->delimiter(',');
    auto* fit_sel_opt = fit_cmd->add_option("--selection", fit_selection,
                                            "take the feature set from a selection json");
    fit_kappa_opt->excludes(fit_sel_opt);
    fit_cmd->add_option("--out", fit_out, "output model json")->required();
    fit_cmd->callback([&]() {
        Dataset data = load_csv_file(fit_data);
        std::vector<int> kappa;
        if (fit_sel_opt->count() > 0) {
            std::ifstream in(fit_selection);
            if (!in) throw std::invalid_argument("cannot open " + fit_selection);
            std::ostringstream buffer;
            buffer << in.rdbuf();
            kappa = selection_from_json(buffer.str()).kappa;
        } else {
            kappa = to_zero_based(fit_kappa, data.z_cols(), "feature");
        }
        LinearModel model = fit_linear_model(data, kappa);
        save_model_file(fit_out, model);
        std::cout << "wrote " << fit_out << " (features: " << one_based(model.kappa)
                  << (model.rank_deficient ? ", rank deficient" : "") << ")\n";
    });

    // optimize
    auto* opt_cmd = app.add_subcommand("optimize", "robust price optimization");
    std::string opt_model, opt_data, opt_out;
    std::vector<double> opt_z;
    double opt_lambda = 0.0, opt_box_lo = 0.0, opt_box_hi = 1.0;
    std::uint64_t opt_seed = 0;
    opt_cmd->add_option("--model", opt_model, "model json")->required();
    opt_cmd->add_option("--data", opt_data, "training csv for the uncertainty matrices")->required();
    opt_cmd->add_option("--z", opt_z, "full feature vector at deployment")
        ->delimiter(',')
        ->required();
    opt_cmd->add_option("--lambda", opt_lambda, "regularization weight");
    opt_cmd->add_option("--box-lo", opt_box_lo, "price lower bound");
    opt_cmd->add_option("--box-hi", opt_box_hi, "price upper bound");
    opt_cmd->add_option("--seed", opt_seed, "multistart seed");
    opt_cmd->add_option("--out", opt_out, "output strategy json");
    opt_cmd->callback([&]() {
        LinearModel model = load_model_file(opt_model);
        Dataset data = load_csv_file(opt_data);
        if (static_cast<int>(opt_z.size()) != data.z_cols()) {
            throw std::invalid_argument("--z must list all " + std::to_string(data.z_cols()) +
                                        " feature values");
        }
        RobustProblem pb;
        pb.model = model;
        pb.sigma = estimate_sigma(data);
        pb.sigma_prime = estimate_sigma_prime(data, model.kappa);
        pb.lambda = opt_lambda;
        pb.box_lo = Eigen::VectorXd::Constant(model.products(), opt_box_lo);
        pb.box_hi = Eigen::VectorXd::Constant(model.products(), opt_box_hi);
        Eigen::VectorXd z = to_vector(opt_z);
        Eigen::VectorXd zk(static_cast<Eigen::Index>(model.kappa.size()));
        for (std::size_t i = 0; i < model.kappa.size(); ++i) {
            zk(static_cast<Eigen::Index>(i)) = z(model.kappa[i]);
        }
        Strategy s = optimize(pb, zk, opt_seed);
        std::cout << "prices:";
        for (Eigen::Index i = 0; i < s.x.size(); ++i) std::cout << ' ' << s.x(i);
        std::cout << "\npredicted revenue: " << s.predicted_revenue
                  << ", penalty: " << s.regularizer_value << ", objective: " << s.objective
                  << ", converged: " << (s.converged ? "yes" : "no") << '\n';
        if (!opt_out.empty()) write_text_file(opt_out, strategy_to_json(s).dump(2) + "\n");
    });

    // decompose
    auto* dec_cmd = app.add_subcommand("decompose", "error decomposition at a query point");
    std::string dec_sem, dec_out;
    std::vector<int> dec_kappa;
    std::vector<double> dec_x, dec_z;
    int dec_size = 100, dec_reps = 200, dec_boot = 200;
    std::uint64_t dec_seed = 0;
    dec_cmd->add_option("--sem", dec_sem, "model json")->required();
    dec_cmd->add_option("--kappa", dec_kappa, "1-based feature indices")->delimiter(',');
    dec_cmd->add_option("--x", dec_x, "price vector on the discount grid")
        ->delimiter(',')
        ->required();
    dec_cmd->add_option("--z", dec_z, "full feature vector")->delimiter(',')->required();
    dec_cmd->add_option("--data-size", dec_size, "records per replication");
    dec_cmd->add_option("--replications", dec_reps, "number of replications");
    dec_cmd->add_option("--bootstrap", dec_boot, "bootstrap rounds");
    dec_cmd->add_option("--seed", dec_seed, "seed");
    dec_cmd->add_option("--out", dec_out, "output report json");
    dec_cmd->callback([&]() {
        LinearSem sem = load_sem_file(dec_sem);
        std::vector<int> kappa = to_zero_based(dec_kappa, sem.features(), "feature");
        DecompositionReport rep = decompose(sem, kappa, to_vector(dec_x), to_vector(dec_z),
                                            dec_size, dec_reps, dec_seed, dec_boot);
        std::cout << "noise: " << rep.noise << "\nconfounding: " << rep.confounding
                  << "\nprediction bias: " << rep.prediction_bias
                  << "\ninteraction: " << rep.interaction << "\nvariance: " << rep.variance
                  << "\ntotal mse: " << rep.total_mse << " (se " << rep.total_mse_se << ")"
                  << "\nidentity gap: " << rep.identity_gap << " (se " << rep.identity_se
                  << ")\nbootstrap variance: " << rep.bootstrap_variance << '\n';
        if (!dec_out.empty()) write_text_file(dec_out, report_to_json(rep).dump(2) + "\n");
    });

    // experiment run
    auto* exp_cmd = app.add_subcommand("experiment", "synthetic pricing study");
    exp_cmd->require_subcommand(1);
    auto* exp_run = exp_cmd->add_subcommand("run", "run the sweep and write csv + charts");
    std::string exp_config, exp_outdir;
    int exp_jobs = 0;
    std::uint64_t exp_seed = 0;
    exp_run->add_option("--config", exp_config, "key = value config file");
    auto* exp_outdir_opt = exp_run->add_option("--output-dir", exp_outdir, "override output directory");
    auto* exp_jobs_opt = exp_run->add_option("--jobs", exp_jobs, "override worker threads");
    auto* exp_seed_opt = exp_run->add_option("--master-seed", exp_seed, "override master seed");
    exp_run->callback([&]() {
        ExperimentConfig cfg;
        if (!exp_config.empty()) cfg = load_config_file(exp_config);
        if (exp_outdir_opt->count() > 0) cfg.output_dir = exp_outdir;
        if (exp_jobs_opt->count() > 0) cfg.jobs = exp_jobs;
        if (exp_seed_opt->count() > 0) cfg.master_seed = exp_seed;
        cfg.validate();
        ExperimentOutput out = run_experiment(cfg);
        std::cout << "wrote " << out.results_path << " (" << out.row_count << " rows), "
                  << out.summary_path << " and " << out.chart_paths.size() << " charts\n";
    });

    // verify thm10
    auto* verify_cmd = app.add_subcommand("verify", "brute force adjustment checks");
    verify_cmd->require_subcommand(1);
    auto* thm_cmd = verify_cmd->add_subcommand(
        "thm10", "reduced feature sets that satisfy the premise stay valid adjustment sets");
    int thm_nodes = 7, thm_trials = 50;
    std::uint64_t thm_seed = 0;
    double thm_tol = 1e-9;
    thm_cmd->add_option("--nodes", thm_nodes, "nodes per random network");
    thm_cmd->add_option("--trials", thm_trials, "number of random networks");
    thm_cmd->add_option("--seed", thm_seed, "seed");
    thm_cmd->add_option("--tol", thm_tol, "numeric tolerance");
    thm_cmd->callback([&]() {
        exit_code = run_verify_thm10(thm_nodes, thm_trials, thm_seed, thm_tol);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_code;
}
