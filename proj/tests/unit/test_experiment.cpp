#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "causalfs/dataset.hpp"
#include "causalfs/experiment.hpp"
#include "causalfs/random.hpp"
#include "causalfs/svg.hpp"

using namespace causalfs;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.products = 2;
    cfg.features = 2;
    cfg.alphas = {0.3};
    cfg.mus = {1.0};
    cfg.lambdas = {0.0, 1.0};
    cfg.data_sizes = {12, 20};
    cfg.trials = 2;
    cfg.z_draws_per_trial = 2;
    cfg.noise_var = 4.0;
    cfg.edge_prob_zx = 0.5;
    cfg.edge_prob_zy = 0.7;
    cfg.holdout_samples = 40;
    cfg.master_seed = 99;
    cfg.jobs = 1;
    return cfg;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::size_t line_count(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config text parses into every field") {
    std::string text =
        "# sweep settings\n"
        "products = 3\n"
        "features = 4\n"
        "alphas = 0.1, 0.5\n"
        "mus = 10, 20\n"
        "lambdas = 0, 2.5\n"
        "data_sizes = 30, 60\n"
        "trials = 7\n"
        "z_draws_per_trial = 3\n"
        "box_lo = 0.4\n"
        "box_hi = 0.9\n"
        "noise_var = 25\n"
        "edge_prob_zx = 0.2\n"
        "edge_prob_zy = 0.6\n"
        "discount_step = 0.05\n"
        "selection_threshold = 1e-5\n"
        "lasso_tol = 1e-7\n"
        "lasso_max_iter = 5000\n"
        "standardize = true\n"
        "holdout_samples = 123\n"
        "master_seed = 42\n"
        "output_dir = out # trailing comment\n"
        "jobs = 2\n";
    ExperimentConfig cfg = parse_config(text);
    CHECK(cfg.products == 3);
    CHECK(cfg.features == 4);
    CHECK(cfg.alphas == std::vector<double>{0.1, 0.5});
    CHECK(cfg.mus == std::vector<double>{10.0, 20.0});
    CHECK(cfg.lambdas == std::vector<double>{0.0, 2.5});
    CHECK(cfg.data_sizes == std::vector<int>{30, 60});
    CHECK(cfg.trials == 7);
    CHECK(cfg.z_draws_per_trial == 3);
    CHECK(cfg.box_lo == 0.4);
    CHECK(cfg.box_hi == 0.9);
    CHECK(cfg.noise_var == 25.0);
    CHECK(cfg.edge_prob_zx == 0.2);
    CHECK(cfg.edge_prob_zy == 0.6);
    CHECK(cfg.discount_step == 0.05);
    CHECK(cfg.selection_threshold == 1e-5);
    CHECK(cfg.lasso_tol == 1e-7);
    CHECK(cfg.lasso_max_iter == 5000);
    CHECK(cfg.standardize);
    CHECK(cfg.holdout_samples == 123);
    CHECK(cfg.master_seed == 42);
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.jobs == 2);
}

TEST_CASE("config parsing rejects malformed input") {
    CHECK_THROWS_AS(parse_config("bogus_key = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("trials ten\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("trials = ten\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("standardize = maybe\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("alphas = 0.1,, 0.5\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("trials = 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("alphas = 2.0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("box_lo = 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("data_sizes = 1\n"), std::invalid_argument);
}

TEST_CASE("tiny sweep produces the full factorial of rows") {
    ExperimentConfig cfg = tiny_config();
    std::vector<ExperimentRow> rows = run_trials(cfg);
    REQUIRE(rows.size() == 32);  // 2 trials x 2 sizes x 2 methods x 2 lambdas x 2 draws

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ExperimentRow& r = rows[i];
        CHECK(r.trial == static_cast<int>(i / 16));
        CHECK(r.seed == derive_seed(99, static_cast<std::uint64_t>(r.trial)));
        CHECK(r.alpha == 0.3);
        CHECK(r.mu == 1.0);
        CHECK(r.normalized_value > 0.0);
        CHECK(r.normalized_value <= 1.0 + 1e-9);
        CHECK(r.true_value > 0.0);
        CHECK(r.pred_mse > 0.0);
        CHECK(r.n_selected >= 0);
        CHECK(r.n_selected <= 2);
    }
    // Loop order within a trial: data size, then method, then lambda, then draw.
    CHECK(rows[0].method == "FS");
    CHECK(rows[0].data_size == 12);
    CHECK(rows[0].lambda == 0.0);
    CHECK(rows[1].z_index == 1);
    CHECK(rows[2].lambda == 1.0);
    CHECK(rows[4].method == "CF");
    CHECK(rows[8].data_size == 20);
}

TEST_CASE("reruns and threading do not change the output bytes") {
    ExperimentConfig cfg = tiny_config();
    std::string first = results_to_csv(run_trials(cfg));
    std::string second = results_to_csv(run_trials(cfg));
    CHECK(first == second);

    cfg.jobs = 3;
    std::string threaded = results_to_csv(run_trials(cfg));
    CHECK(first == threaded);
}

TEST_CASE("summary aggregates the right rows") {
    ExperimentConfig cfg = tiny_config();
    std::vector<ExperimentRow> rows = run_trials(cfg);

    double sum = 0.0;
    int count = 0;
    for (const ExperimentRow& r : rows) {
        if (r.method == "FS" && r.data_size == 12 && r.lambda == 0.0) {
            sum += r.normalized_value;
            ++count;
        }
    }
    REQUIRE(count == 4);  // 2 trials x 2 draws

    std::string expected_prefix = "FS,0.3,12,1,0,4," + csv_double(sum / count) + ",";
    std::string summary = summary_to_csv(rows);
    CHECK(summary.find(expected_prefix) != std::string::npos);
    CHECK(line_count(summary) == 9);  // header + 2 methods x 2 sizes x 2 lambdas
}

TEST_CASE("experiment writes identical files on rerun") {
    namespace fs = std::filesystem;
    fs::path base = fs::temp_directory_path() / "causalfs_exp_test";
    fs::remove_all(base);

    ExperimentConfig cfg = tiny_config();
    cfg.output_dir = (base / "run1").string();
    ExperimentOutput out1 = run_experiment(cfg);
    cfg.output_dir = (base / "run2").string();
    cfg.jobs = 2;
    ExperimentOutput out2 = run_experiment(cfg);

    CHECK(out1.row_count == 32);
    std::string results1 = read_file(out1.results_path);
    CHECK(line_count(results1) == 33);
    CHECK(results1 == read_file(out2.results_path));
    CHECK(read_file(out1.summary_path) == read_file(out2.summary_path));

    REQUIRE(out1.chart_paths.size() == 2);  // one prediction, one revenue chart
    REQUIRE(out2.chart_paths.size() == 2);
    for (std::size_t i = 0; i < out1.chart_paths.size(); ++i) {
        std::string chart = read_file(out1.chart_paths[i]);
        CHECK(chart.find("<svg") != std::string::npos);
        CHECK(chart == read_file(out2.chart_paths[i]));
    }
    fs::remove_all(base);
}

}  // TEST_SUITE

TEST_SUITE("svg") {

TEST_CASE("line chart renders every series and the reference line") {
    std::vector<ChartSeries> series(2);
    series[0].label = "first";
    series[0].points = {{1.0, 2.0}, {2.0, 3.0}, {3.0, 2.5}};
    series[1].label = "second";
    series[1].dashed = true;
    series[1].points = {{1.0, 1.0}, {3.0, 4.0}};

    std::string svg = render_line_chart("demo", "xs", "ys", series, 1.0);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("demo") != std::string::npos);
    CHECK(svg.find("first") != std::string::npos);
    CHECK(svg.find("second") != std::string::npos);
    CHECK(svg.find("stroke-dasharray=\"6,4\"") != std::string::npos);
    CHECK(svg.find("stroke-dasharray=\"2,3\"") != std::string::npos);

    std::size_t polylines = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        pos += 9;
    }
    CHECK(polylines == 2);

    CHECK(render_line_chart("demo", "xs", "ys", series, 1.0) == svg);
}

TEST_CASE("labels are escaped") {
    std::vector<ChartSeries> series(1);
    series[0].label = "a<b&c";
    series[0].points = {{0.0, 0.0}, {1.0, 1.0}};
    std::string svg = render_line_chart("t", "x", "y", series);
    CHECK(svg.find("a&lt;b&amp;c") != std::string::npos);
    CHECK(svg.find("a<b") == std::string::npos);
}

TEST_CASE("bad chart input throws") {
    CHECK_THROWS_AS(render_line_chart("t", "x", "y", {}), std::invalid_argument);
    std::vector<ChartSeries> series(1);
    CHECK_THROWS_AS(render_line_chart("t", "x", "y", series), std::invalid_argument);
    series[0].points = {{0.0, std::numeric_limits<double>::infinity()}};
    CHECK_THROWS_AS(render_line_chart("t", "x", "y", series), std::invalid_argument);
}

}  // TEST_SUITE
