#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "causalfs/analysis.hpp"
#include "causalfs/graph.hpp"
#include "causalfs/sem.hpp"

using namespace causalfs;

namespace {

/// One product, one binary feature driving both the discount and the demand.
LinearSem confounded_sem(double alpha, double noise_var) {
    CausalDag dag({{NodeClass::Decision, "x1"},
                   {NodeClass::Target, "y1"},
                   {NodeClass::External, "z1"}},
                  {{0, 1}, {2, 0}, {2, 1}});
    LinearSem sem{std::move(dag),
                  Eigen::VectorXd::Constant(1, 0.5),
                  Eigen::MatrixXd::Constant(1, 1, -2.0),
                  Eigen::VectorXd::Constant(1, 10.0),
                  Eigen::MatrixXd::Constant(1, 1, 5.0),
                  alpha,
                  0.1,
                  noise_var};
    sem.validate();
    return sem;
}

/// One product plus a detached always-off feature: with alpha = 0 the price
/// is constant, so the fitted model reduces to the outcome mean.
LinearSem intercept_only_sem(double noise_var) {
    CausalDag dag({{NodeClass::Decision, "x1"},
                   {NodeClass::Target, "y1"},
                   {NodeClass::External, "z1"}},
                  {{0, 1}});
    LinearSem sem{std::move(dag),
                  Eigen::VectorXd::Zero(1),
                  Eigen::MatrixXd::Constant(1, 1, -2.0),
                  Eigen::VectorXd::Constant(1, 12.0),
                  Eigen::MatrixXd::Zero(1, 1),
                  0.0,
                  0.1,
                  noise_var};
    sem.validate();
    return sem;
}

/// Two constant-one features, both wired to the discount and the demand, so
/// either one alone carries the same information as the pair.
LinearSem twin_feature_sem() {
    CausalDag dag({{NodeClass::Decision, "x1"},
                   {NodeClass::Target, "y1"},
                   {NodeClass::External, "z1"},
                   {NodeClass::External, "z2"}},
                  {{0, 1}, {2, 0}, {2, 1}, {3, 0}, {3, 1}});
    Eigen::MatrixXd c(1, 2);
    c << 4.0, -1.5;
    LinearSem sem{std::move(dag),
                  Eigen::VectorXd::Ones(2),
                  Eigen::MatrixXd::Constant(1, 1, -3.0),
                  Eigen::VectorXd::Constant(1, 11.0),
                  c,
                  0.3,
                  0.1,
                  2.0};
    sem.validate();
    return sem;
}

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd out(1);
    out << v;
    return out;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("conditioning on every feature removes the confounding gap") {
    LinearSem sem = confounded_sem(0.1, 4.0);
    CHECK(confounding_bias(sem, {0}, vec1(0.9), vec1(1.0)) < 1e-20);
    CHECK(confounding_bias(sem, {}, vec1(0.9), vec1(1.0)) > 0.1);
}

TEST_CASE("confounding gap matches the hand computation") {
    // Without conditioning, observing x = 0.9 shifts the posterior of z:
    //   w1 = p (1 - alpha), w0 = (1 - p) alpha, E[z | x] = w1 / (w1 + w0).
    LinearSem sem = confounded_sem(0.2, 4.0);
    double w1 = 0.5 * 0.8, w0 = 0.5 * 0.2;
    double posterior = w1 / (w1 + w0);
    double gap = 5.0 * (posterior - 1.0);  // c (E[z | x] - z) with z = 1
    double expected = gap * gap;
    CHECK(confounding_bias(sem, {}, vec1(0.9), vec1(1.0)) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("decomposition identity holds within Monte Carlo error") {
    LinearSem sem = confounded_sem(0.2, 4.0);
    DecompositionReport rep = decompose(sem, {}, vec1(0.9), vec1(1.0), 30, 400, 77);

    CHECK(rep.noise == 4.0);
    CHECK(rep.confounding > 0.0);
    CHECK(rep.variance > 0.0);
    CHECK(rep.prediction_bias >= 0.0);
    CHECK(rep.total_bias ==
          doctest::Approx(rep.confounding + rep.prediction_bias + rep.interaction)
              .epsilon(1e-9));
    CHECK(rep.identity_se > 0.0);
    CHECK(std::abs(rep.identity_gap) <= 3.0 * rep.identity_se);
    CHECK(rep.total_mse ==
          doctest::Approx(rep.noise + rep.total_bias + rep.variance + rep.identity_gap)
              .epsilon(1e-9));
}

TEST_CASE("intercept-only variance shrinks like noise over data size") {
    LinearSem sem = intercept_only_sem(4.0);
    const int d = 25;
    DecompositionReport rep = decompose(sem, {}, vec1(1.0), vec1(0.0), d, 600, 5, 0);

    // The predictor is the mean of d outcomes, so its variance is noise / d.
    double expected = 4.0 / d;
    double band = 3.0 * std::sqrt(2.0 / 600.0) * expected;
    CHECK(std::abs(rep.variance - expected) < band);
    CHECK(rep.confounding < 1e-20);
    CHECK(rep.prediction_bias < 0.05);
    CHECK(rep.bootstrap_variance == 0.0);
}

TEST_CASE("bootstrap variance tracks the replication variance") {
    LinearSem sem = confounded_sem(0.2, 4.0);
    DecompositionReport rep = decompose(sem, {0}, vec1(0.9), vec1(1.0), 60, 300, 11);
    CHECK(rep.bootstrap_variance > 0.0);
    CHECK(rep.bootstrap_variance > 0.2 * rep.variance);
    CHECK(rep.bootstrap_variance < 5.0 * rep.variance);
}

TEST_CASE("redundant constant feature changes nothing in the report") {
    LinearSem sem = twin_feature_sem();
    Eigen::VectorXd z = Eigen::VectorXd::Ones(2);
    DecompositionReport lean = decompose(sem, {0}, vec1(0.8), z, 40, 50, 123);
    DecompositionReport twin = decompose(sem, {0, 1}, vec1(0.8), z, 40, 50, 123);

    CHECK(lean.confounding == twin.confounding);
    CHECK(lean.prediction_bias == twin.prediction_bias);
    CHECK(lean.interaction == twin.interaction);
    CHECK(lean.variance == twin.variance);
    CHECK(lean.total_bias == twin.total_bias);
    CHECK(lean.total_mse == twin.total_mse);
    CHECK(lean.identity_gap == twin.identity_gap);
    CHECK(lean.bootstrap_variance == twin.bootstrap_variance);
}

TEST_CASE("inputs are validated") {
    LinearSem sem = confounded_sem(0.1, 4.0);
    CHECK_THROWS_AS(confounding_bias(sem, {1}, vec1(0.9), vec1(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(confounding_bias(sem, {0, 0}, vec1(0.9), vec1(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(confounding_bias(sem, {}, vec1(0.9), Eigen::VectorXd(0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(decompose(sem, {}, vec1(0.9), vec1(1.0), 1, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(decompose(sem, {}, vec1(0.9), vec1(1.0), 10, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(decompose(sem, {}, vec1(0.9), vec1(1.0), 10, 10, 0, -1),
                    std::invalid_argument);
    // Off the discount grid the conditional target is undefined.
    CHECK_THROWS_AS(decompose(sem, {}, vec1(0.73), vec1(1.0), 10, 10, 0), std::runtime_error);
}

}  // TEST_SUITE
