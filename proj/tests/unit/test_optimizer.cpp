#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "causalfs/optimizer.hpp"
#include "causalfs/random.hpp"
#include "causalfs/regression.hpp"
#include "causalfs/sem.hpp"

using namespace causalfs;

namespace {

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd out(1);
    out << v;
    return out;
}

/// One product, no features: revenue a x^2 + b x.
RobustProblem scalar_problem(double a, double b, double lambda) {
    RobustProblem pb;
    pb.model.a_hat = Eigen::MatrixXd::Constant(1, 1, a);
    pb.model.b_hat = vec1(b);
    pb.model.c_hat.resize(1, 0);
    pb.sigma = Eigen::MatrixXd::Identity(1, 1);
    pb.sigma_prime = Eigen::MatrixXd::Identity(2, 2);
    pb.lambda = lambda;
    pb.box_lo = vec1(0.5);
    pb.box_hi = vec1(1.0);
    return pb;
}

LinearSem demo_sem(std::uint64_t seed, int m = 3, int k = 2) {
    SemConfig cfg;
    cfg.products = m;
    cfg.features = k;
    cfg.edge_prob_zx = 0.5;
    cfg.edge_prob_zy = 0.7;
    cfg.noise_var = 0.0;
    cfg.alpha = 0.3;
    cfg.seed = seed;
    CausalDag dag = generate_network(cfg);
    LinearSem sem = generate_sem(dag, cfg);
    for (int i = 0; i < k; ++i) sem.p(i) = 0.5;
    return sem;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("sigma estimate is the covariance of the outcome noise") {
    Rng rng(4);
    Dataset data;
    data.x.resize(200, 2);
    data.y.resize(200, 3);
    data.z.resize(200, 1);
    Eigen::MatrixXd noise(200, 3);
    for (int r = 0; r < 200; ++r) {
        for (int c = 0; c < 2; ++c) data.x(r, c) = rng.uniform(0.5, 1.0);
        data.z(r, 0) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        for (int c = 0; c < 3; ++c) noise(r, c) = rng.normal(0.0, 2.0);
        for (int c = 0; c < 3; ++c) {
            data.y(r, c) = 3.0 * data.x(r, 0) - 2.0 * data.x(r, 1) +
                           5.0 * data.z(r, 0) + double(c) + noise(r, c);
        }
    }
    Eigen::MatrixXd sigma = estimate_sigma(data);
    REQUIRE(sigma.rows() == 3);
    CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >= 0.0);

    // The estimate tracks the noise covariance, not the regressor-driven
    // spread of y: it agrees with the sample covariance of the injected
    // noise up to the projection error of a 4-dimensional fit on 200 rows.
    Eigen::MatrixXd ncentered = noise.rowwise() - noise.colwise().mean();
    Eigen::MatrixXd ncov = ncentered.transpose() * ncentered / 199.0;
    CHECK((sigma - ncov).cwiseAbs().maxCoeff() < 0.5);

    // Adding any linear function of the regressors to y leaves it unchanged.
    Dataset shifted = data;
    shifted.y.col(0) += 40.0 * shifted.x.col(1) - 7.0 * shifted.z.col(0);
    shifted.y.col(2) -= 25.0 * shifted.x.col(0);
    Eigen::MatrixXd sigma_shifted = estimate_sigma(shifted);
    CHECK((sigma_shifted - sigma).cwiseAbs().maxCoeff() < 1e-8);

    // Scaling the outcomes scales it quadratically.
    Dataset scaled = data;
    scaled.y *= 3.0;
    CHECK((estimate_sigma(scaled) - 9.0 * sigma).cwiseAbs().maxCoeff() < 1e-8);

    // Exactly linear outcomes carry no noise.
    Dataset exact = data;
    exact.y = data.x * Eigen::MatrixXd::Random(2, 3) + data.z * Eigen::MatrixXd::Random(1, 3);
    exact.y.rowwise() += Eigen::RowVector3d(1.0, -2.0, 0.5);
    CHECK(estimate_sigma(exact).cwiseAbs().maxCoeff() < 1e-9);

    // Constant outcomes carry no variance.
    Dataset flat = data;
    flat.y.setOnes();
    CHECK(estimate_sigma(flat).cwiseAbs().maxCoeff() < 1e-18);

    Dataset single;
    single.x.resize(1, 2);
    single.x.setOnes();
    single.y.resize(1, 3);
    single.y.setZero();
    single.z.resize(1, 1);
    single.z.setZero();
    CHECK_THROWS_AS(estimate_sigma(single), std::invalid_argument);
}

TEST_CASE("sigma prime inverts the regularized gram matrix") {
    Rng rng(9);
    Dataset data;
    data.x.resize(30, 2);
    data.y.resize(30, 1);
    data.z.resize(30, 3);
    for (int r = 0; r < 30; ++r) {
        for (int c = 0; c < 2; ++c) data.x(r, c) = rng.uniform(0.5, 1.0);
        data.y(r, 0) = rng.uniform(-1.0, 1.0);
        for (int c = 0; c < 3; ++c) data.z(r, c) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    std::vector<int> kappa{0, 2};
    Eigen::MatrixXd sp = estimate_sigma_prime(data, kappa);
    REQUIRE(sp.rows() == 5);
    CHECK((sp - sp.transpose()).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd phi(30, 5);
    phi.col(0) = data.x.col(0);
    phi.col(1) = data.x.col(1);
    phi.col(2) = data.z.col(0);
    phi.col(3) = data.z.col(2);
    phi.col(4).setOnes();
    Eigen::MatrixXd gram = phi.transpose() * phi;
    gram += (1e-9 * gram.trace() / 5.0) * Eigen::MatrixXd::Identity(5, 5);
    CHECK((gram * sp - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-6);

    CHECK_THROWS_AS(estimate_sigma_prime(data, {5}), std::invalid_argument);
    CHECK_THROWS_AS(estimate_sigma_prime(data, {2, 0}), std::invalid_argument);
}

TEST_CASE("regularizer matches the closed form under identity matrices") {
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd sp = Eigen::MatrixXd::Identity(4, 4);
    Eigen::VectorXd x(2), zk(1);
    x << 0.6, 0.8;
    zk << 1.0;
    double v_norm2 = 0.36 + 0.64 + 1.0 + 1.0;
    double expected = std::pow(1.0, 0.25) * std::pow(v_norm2, 0.25);
    CHECK(regularizer_g(sigma, sp, x, zk) == doctest::Approx(expected).epsilon(1e-9));

    // Doubling sigma doubles |sigma x| and scales the first factor by 2^(1/2).
    double doubled = regularizer_g(2.0 * sigma, sp, x, zk);
    CHECK(doubled == doctest::Approx(std::sqrt(2.0) * expected).epsilon(1e-9));

    CHECK_THROWS_AS(regularizer_g(sigma, Eigen::MatrixXd::Identity(3, 3), x, zk),
                    std::invalid_argument);
}

TEST_CASE("scalar problem without penalty finds the vertex of the parabola") {
    // Revenue -2 x^2 + 3 x peaks at x = 0.75, inside the box.
    RobustProblem pb = scalar_problem(-2.0, 3.0, 0.0);
    Strategy s = optimize(pb, Eigen::VectorXd(0), 1);
    CHECK(s.converged);
    CHECK(s.x(0) == doctest::Approx(0.75).epsilon(1e-8));
    CHECK(s.predicted_revenue == doctest::Approx(1.125).epsilon(1e-8));
    CHECK(s.objective == doctest::Approx(1.125).epsilon(1e-8));

    // Peak at x = 1.5 sits above the box, so the solution clips to 1.
    RobustProblem clipped = scalar_problem(-2.0, 6.0, 0.0);
    Strategy c = optimize(clipped, Eigen::VectorXd(0), 1);
    CHECK(c.x(0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("penalty shrinks the price toward smaller magnitudes") {
    RobustProblem pb = scalar_problem(-2.0, 3.0, 0.0);
    Strategy base = optimize(pb, Eigen::VectorXd(0), 1);
    pb.lambda = 5.0;
    Strategy shrunk = optimize(pb, Eigen::VectorXd(0), 1);
    CHECK(shrunk.x(0) < base.x(0) - 1e-4);
    CHECK(shrunk.regularizer_value < base.regularizer_value);
    CHECK(shrunk.predicted_revenue < base.predicted_revenue);
}

TEST_CASE("fitting the exact model and disabling the penalty recovers the true optimum") {
    LinearSem sem = demo_sem(17);
    Dataset data = sample(sem, 300, 5);
    LinearModel model = fit_linear_model(data, {0, 1});

    Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, 0.5);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, 1.0);
    Eigen::VectorXd z(2);
    z << 1.0, 0.0;

    TrueOptimum ref = true_optimum(sem, z, lo, hi);
    CHECK(ref.certified);
    CHECK(ref.certificate <= 1e-9);

    RobustProblem pb;
    pb.model = model;
    pb.sigma = estimate_sigma(data);
    pb.sigma_prime = estimate_sigma_prime(data, {0, 1});
    pb.lambda = 0.0;
    pb.box_lo = lo;
    pb.box_hi = hi;
    Strategy s = optimize(pb, z, 3);
    CHECK(s.converged);
    CHECK((s.x - ref.x).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(evaluate_true(sem, s.x, z) == doctest::Approx(ref.value).epsilon(1e-8));
}

TEST_CASE("interior true optimum matches the linear solve") {
    LinearSem sem = demo_sem(23, 2, 1);
    Eigen::VectorXd z(1);
    z << 1.0;
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -100.0);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 100.0);
    TrueOptimum ref = true_optimum(sem, z, lo, hi);
    CHECK(ref.certified);

    Eigen::MatrixXd a_sym = sem.a + sem.a.transpose();
    Eigen::VectorXd closed = a_sym.ldlt().solve(-(sem.b + sem.c * z));
    CHECK((ref.x - closed).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("solutions stay inside the box") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        LinearSem sem = demo_sem(100 + seed);
        Dataset data = sample(sem, 60, seed);
        LinearModel model = fit_linear_model(data, {});
        RobustProblem pb;
        pb.model = model;
        pb.sigma = estimate_sigma(data);
        pb.sigma_prime = estimate_sigma_prime(data, {});
        pb.lambda = 3.0;
        pb.box_lo = Eigen::VectorXd::Constant(3, 0.5);
        pb.box_hi = Eigen::VectorXd::Constant(3, 1.0);
        Strategy s = optimize(pb, Eigen::VectorXd(0), seed);
        for (int i = 0; i < 3; ++i) {
            CHECK(s.x(i) >= 0.5 - 1e-12);
            CHECK(s.x(i) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("optimization is deterministic in the seed") {
    LinearSem sem = demo_sem(31);
    Dataset data = sample(sem, 80, 2);
    LinearModel model = fit_linear_model(data, {0});
    RobustProblem pb;
    pb.model = model;
    pb.sigma = estimate_sigma(data);
    pb.sigma_prime = estimate_sigma_prime(data, {0});
    pb.lambda = 2.0;
    pb.box_lo = Eigen::VectorXd::Constant(3, 0.5);
    pb.box_hi = Eigen::VectorXd::Constant(3, 1.0);
    Eigen::VectorXd zk = vec1(1.0);

    Strategy s1 = optimize(pb, zk, 42);
    Strategy s2 = optimize(pb, zk, 42);
    CHECK((s1.x.array() == s2.x.array()).all());
    CHECK(s1.objective == s2.objective);
    CHECK(s1.iterations == s2.iterations);
}

TEST_CASE("problem validation rejects malformed inputs") {
    RobustProblem pb = scalar_problem(-2.0, 3.0, 0.0);
    Eigen::VectorXd zk(0);

    RobustProblem bad = pb;
    bad.sigma = Eigen::MatrixXd::Constant(1, 1, -1.0);
    CHECK_THROWS_AS(optimize(bad, zk, 1), std::invalid_argument);

    bad = pb;
    bad.sigma_prime = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(optimize(bad, zk, 1), std::invalid_argument);

    bad = pb;
    bad.sigma_prime(0, 1) = 0.5;  // asymmetric
    CHECK_THROWS_AS(optimize(bad, zk, 1), std::invalid_argument);

    bad = pb;
    bad.box_lo(0) = 2.0;
    CHECK_THROWS_AS(optimize(bad, zk, 1), std::invalid_argument);

    bad = pb;
    bad.lambda = -1.0;
    CHECK_THROWS_AS(optimize(bad, zk, 1), std::invalid_argument);

    CHECK_THROWS_AS(optimize(pb, vec1(1.0), 1), std::invalid_argument);

    LinearSem sem = demo_sem(3);
    Eigen::VectorXd z2(2);
    z2 << 1.0, 1.0;
    CHECK_THROWS_AS(true_optimum(sem, vec1(1.0), Eigen::VectorXd::Constant(3, 0.5),
                                 Eigen::VectorXd::Constant(3, 1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(true_optimum(sem, z2, Eigen::VectorXd::Constant(3, 1.5),
                                 Eigen::VectorXd::Constant(3, 1.0)),
                    std::invalid_argument);
}

}  // TEST_SUITE
