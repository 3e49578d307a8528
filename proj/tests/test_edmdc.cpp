#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dcldmd/edmdc.hpp"
#include "dcldmd/simulate.hpp"

using namespace dcldmd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

SnapshotSet linear_data(std::mt19937& rng, const MatrixXd& A0, const MatrixXd& B0, int M) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SnapshotSet s;
    const int n = static_cast<int>(A0.rows());
    const int m = static_cast<int>(B0.cols());
    s.X.resize(n, M);
    s.U.resize(m, M);
    s.Y.resize(n, M);
    for (int k = 0; k < M; ++k) {
        for (int i = 0; i < n; ++i) s.X(i, k) = u(rng);
        for (int i = 0; i < m; ++i) s.U(i, k) = u(rng);
        s.Y.col(k) = A0 * s.X.col(k) + B0 * s.U.col(k);
    }
    return s;
}

}  // namespace

TEST_CASE("identity lift when the dictionary has no radial functions") {
    const LiftingDictionary d = LiftingDictionary::state_plus_rbf(MatrixXd(2, 0));
    const VectorXd x = (VectorXd(2) << 1.5, -2.0).finished();
    CHECK(d.lifted_dim() == 2);
    CHECK(d.lift(x) == x);
}

TEST_CASE("monomial lift enumerates by total degree") {
    const LiftingDictionary d1 = LiftingDictionary::monomials(2, 1);
    CHECK(d1.lifted_dim() == 3);
    const VectorXd x = (VectorXd(2) << 3.0, 5.0).finished();
    const VectorXd z1 = d1.lift(x);
    CHECK(z1(0) == 1.0);
    CHECK(z1(1) == 3.0);
    CHECK(z1(2) == 5.0);

    const LiftingDictionary d2 = LiftingDictionary::monomials(2, 2);
    CHECK(d2.lifted_dim() == 6);
    const VectorXd z2 = d2.lift(x);
    CHECK(z2(3) == 9.0);   // x1^2
    CHECK(z2(4) == 15.0);  // x1 x2
    CHECK(z2(5) == 25.0);  // x2^2
}

TEST_CASE("thin-plate value at its own center is zero") {
    MatrixXd centers(2, 1);
    centers << 0.5, -0.5;
    const LiftingDictionary d = LiftingDictionary::state_plus_rbf(centers);
    const VectorXd z = d.lift(centers.col(0));
    CHECK(z(2) == 0.0);

    // and r^2 log r away from the center
    const VectorXd x = (VectorXd(2) << 2.5, -0.5).finished();
    const double r = 2.0;
    CHECK(d.lift(x)(2) == doctest::Approx(r * r * std::log(r)).epsilon(1e-14));
}

TEST_CASE("gaussian radial lift uses the width as exponent denominator") {
    MatrixXd centers(2, 1);
    centers.setZero();
    const LiftingDictionary d =
        LiftingDictionary::state_plus_rbf(centers, RbfKind::Gaussian, 4.0);
    const VectorXd x = (VectorXd(2) << 1.0, 1.0).finished();
    CHECK(d.lift(x)(2) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("fit recovers an exact linear system through the identity lift") {
    std::mt19937 rng(3);
    MatrixXd A0(2, 2), B0(2, 1);
    A0 << 0.6, 0.2, -0.1, 0.7;
    B0 << 0.3, 1.0;
    const SnapshotSet s = linear_data(rng, A0, B0, 60);

    const EdmdcModel model = fit_edmdc(s, LiftingDictionary::state_plus_rbf(MatrixXd(2, 0)), 0.0);
    CHECK((model.A - A0).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((model.B - B0).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(model.C == (MatrixXd(2, 2) << 1, 0, 0, 1).finished());
}

TEST_CASE("fit rejects zero-variance data without ridge") {
    SnapshotSet s;
    s.X = MatrixXd::Ones(2, 10);
    s.U = MatrixXd::Zero(1, 10);
    s.Y = MatrixXd::Ones(2, 10);
    CHECK_THROWS_WITH_AS(fit_edmdc(s, LiftingDictionary::state_plus_rbf(MatrixXd(2, 0)), 0.0),
                         doctest::Contains("ridge"), std::runtime_error);
}

TEST_CASE("fit produces a finite model on a large Duffing set") {
    SamplingConfig cfg;
    cfg.dt = 0.1;
    cfg.grid = {{-3.0, 3.0, 40}, {-3.0, 3.0, 25}};
    cfg.input_bounds = {{-2.0, 2.0}};
    cfg.seed = 1;
    const SnapshotSet s = generate_snapshots(make_duffing({1.0, -1.0, 0.0}), cfg);
    REQUIRE(s.count() == 1000);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    MatrixXd centers(2, 100);
    for (int j = 0; j < 100; ++j) {
        centers(0, j) = u(rng);
        centers(1, j) = u(rng);
    }
    const EdmdcModel model = fit_edmdc(s, LiftingDictionary::state_plus_rbf(centers), 1e-10);
    CHECK(model.A.allFinite());
    CHECK(model.A.rows() == 102);
    CHECK(model.B.cols() == 1);
}

TEST_CASE("closed-loop rollout is exact for linear systems with identity lift") {
    std::mt19937 rng(7);
    MatrixXd A0(2, 2), B0(2, 1), K(1, 2);
    A0 << 0.5, 0.3, -0.2, 0.6;
    B0 << 0.0, 1.0;
    K << -0.2, -0.3;
    const SnapshotSet s = linear_data(rng, A0, B0, 60);
    const EdmdcModel model = fit_edmdc(s, LiftingDictionary::state_plus_rbf(MatrixXd(2, 0)), 0.0);

    const VectorXd x0 = (VectorXd(2) << 1.0, -0.5).finished();
    const Prediction pred = rollout_edmdc(model, FeedbackLaw::linear(K), x0, 50);
    REQUIRE(pred.states.size() == 51);
    CHECK(pred.states[0] == x0);

    VectorXd truth = x0;
    for (int k = 1; k <= 50; ++k) {
        truth = (A0 + B0 * K) * truth;
        CHECK((pred.states[static_cast<std::size_t>(k)] - truth).norm() < 1e-8);
    }
}

TEST_CASE("rollout with zero steps returns the initial state") {
    std::mt19937 rng(9);
    MatrixXd A0 = MatrixXd::Identity(2, 2) * 0.5;
    MatrixXd B0 = MatrixXd::Ones(2, 1);
    const SnapshotSet s = linear_data(rng, A0, B0, 30);
    const EdmdcModel model = fit_edmdc(s, LiftingDictionary::state_plus_rbf(MatrixXd(2, 0)), 0.0);
    const VectorXd x0 = (VectorXd(2) << 0.25, 0.75).finished();
    const Prediction pred = rollout_edmdc(model, FeedbackLaw::zero(1), x0, 0);
    REQUIRE(pred.states.size() == 1);
    CHECK(pred.states[0] == x0);
}

TEST_CASE("fit is invariant to snapshot ordering") {
    std::mt19937 rng(11);
    MatrixXd A0(2, 2), B0(2, 1);
    A0 << 0.4, 0.25, -0.3, 0.55;
    B0 << 0.2, 0.9;
    const SnapshotSet s = linear_data(rng, A0, B0, 40);

    SnapshotSet shuffled = s;
    std::vector<int> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int k = 0; k < 40; ++k) {
        shuffled.X.col(k) = s.X.col(perm[static_cast<std::size_t>(k)]);
        shuffled.U.col(k) = s.U.col(perm[static_cast<std::size_t>(k)]);
        shuffled.Y.col(k) = s.Y.col(perm[static_cast<std::size_t>(k)]);
    }

    MatrixXd centers(2, 3);
    centers << 0.1, -0.4, 0.8, 0.3, 0.6, -0.7;
    const LiftingDictionary d = LiftingDictionary::state_plus_rbf(centers);
    const EdmdcModel a = fit_edmdc(s, d, 1e-10);
    const EdmdcModel b = fit_edmdc(shuffled, d, 1e-10);
    CHECK((a.A - b.A).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((a.B - b.B).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("monomial dictionary regresses the state read-out") {
    std::mt19937 rng(13);
    MatrixXd A0(2, 2), B0(2, 1);
    A0 << 0.6, 0.1, 0.0, 0.7;
    B0 << 0.5, 0.5;
    const SnapshotSet s = linear_data(rng, A0, B0, 80);

    const EdmdcModel model = fit_edmdc(s, LiftingDictionary::monomials(2, 2), 1e-10);
    // the regressed C must reproduce the state on the training set
    for (Eigen::Index k = 0; k < s.count(); ++k) {
        CHECK((model.C * model.dictionary.lift(s.X.col(k)) - s.X.col(k)).norm() < 1e-6);
    }
}
