#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "dcldmd/simulate.hpp"
#include "dcldmd/snapshots.hpp"

using namespace dcldmd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ControlAffineSystem scalar_system(std::function<double(double)> f) {
    ControlAffineSystem sys;
    sys.n = 1;
    sys.m = 1;
    sys.drift = [f](const VectorXd& x) -> VectorXd {
        return VectorXd::Constant(1, f(x(0)));
    };
    sys.effectiveness = [](const VectorXd&) -> MatrixXd { return MatrixXd::Zero(1, 1); };
    return sys;
}

}  // namespace

TEST_CASE("rk4 leaves the state fixed for a zero vector field") {
    ControlAffineSystem sys;
    sys.n = 2;
    sys.m = 1;
    sys.drift = [](const VectorXd& x) { return VectorXd::Zero(x.size()); };
    sys.effectiveness = [](const VectorXd&) { return MatrixXd::Zero(2, 1); };
    const VectorXd x = (VectorXd(2) << 1.5, -0.25).finished();
    CHECK(rk4_step(sys, x, VectorXd::Zero(1), 0.1) == x);
}

TEST_CASE("rk4 matches the exponential to fourth order") {
    // One step is the degree-4 Taylor polynomial, so the defect against
    // e^0.1 is h^5/120 + h^6/720 + ... ~ 8.5e-8.
    const ControlAffineSystem sys = scalar_system([](double x) { return x; });
    const VectorXd x1 = rk4_step(sys, VectorXd::Ones(1), VectorXd::Zero(1), 0.1);
    CHECK(std::abs(x1(0) - std::exp(0.1)) < 1e-7);
    CHECK(std::abs(x1(0) - std::exp(0.1)) > 1e-9);
}

TEST_CASE("rk4 agrees with a fine-step reference on the Duffing system") {
    const ControlAffineSystem sys = make_duffing({1.0, -1.0, 0.0});
    const VectorXd u = VectorXd::Zero(1);

    auto reference = [&](VectorXd x, double total, double h) {
        const int steps = static_cast<int>(std::llround(total / h));
        for (int i = 0; i < steps; ++i) x = rk4_step(sys, x, u, h);
        return x;
    };

    // (1, 0) is an equilibrium for these coefficients: both integrators fix it
    const VectorXd rest = (VectorXd(2) << 1.0, 0.0).finished();
    CHECK((rk4_step(sys, rest, u, 0.1) - reference(rest, 0.1, 1e-4)).norm() < 1e-6);

    // off equilibrium the single-step defect was measured at 4.3e-5
    const VectorXd moving = (VectorXd(2) << 2.0, -1.0).finished();
    CHECK((rk4_step(sys, moving, u, 0.1) - reference(moving, 0.1, 1e-4)).norm() < 1e-4);
}

TEST_CASE("rk4 reports blow-ups") {
    const ControlAffineSystem sys = scalar_system([](double x) { return x * x; });
    VectorXd x = VectorXd::Constant(1, 5.0);
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 100; ++i) x = rk4_step(sys, x, VectorXd::Zero(1), 1.0);
        }(),
        std::runtime_error);
}

TEST_CASE("duffing vector field hand values") {
    const DuffingParams p{1.0, -1.0, 0.0};
    CHECK(duffing_vector_field({0.0, 0.0}, 0.0, p) == Eigen::Vector2d(0.0, 0.0));
    CHECK(duffing_vector_field({1.0, 0.0}, 0.0, p) == Eigen::Vector2d(0.0, 0.0));
    CHECK(duffing_vector_field({0.0, 0.0}, 1.0, p) == Eigen::Vector2d(0.0, 2.0));

    // damping and stiffness signs
    const DuffingParams q{2.0, 0.5, 0.3};
    const Eigen::Vector2d out = duffing_vector_field({1.0, 2.0}, 0.0, q);
    CHECK(out(0) == 2.0);
    CHECK(out(1) == doctest::Approx(-0.3 * 2.0 - 0.5 * 1.0 - 2.0 * 1.0).epsilon(1e-15));
}

TEST_CASE("generate_snapshots fills the requested grid") {
    const ControlAffineSystem sys = make_duffing({1.0, -1.0, 0.0});
    SamplingConfig cfg;
    cfg.dt = 0.1;
    cfg.grid = {{-3.0, 3.0, 15}, {-3.0, 3.0, 15}};
    cfg.input_bounds = {{-2.0, 2.0}};
    cfg.seed = 1;

    const SnapshotSet s = generate_snapshots(sys, cfg);
    CHECK(s.count() == 225);
    CHECK(s.state_dim() == 2);
    CHECK(s.input_dim() == 1);
    CHECK(validate(s).ok());

    std::set<double> axis_values;
    for (int i = 0; i < 15; ++i) axis_values.insert(-3.0 + 6.0 * i / 14.0);
    for (Eigen::Index k = 0; k < s.count(); ++k) {
        CHECK(axis_values.count(s.X(0, k)) == 1);
        CHECK(axis_values.count(s.X(1, k)) == 1);
        CHECK(s.U(0, k) >= -2.0);
        CHECK(s.U(0, k) < 2.0);
    }

    // successors come from the zero-order-hold RK4 step
    const VectorXd expected = rk4_step(sys, s.X.col(7), s.U.col(7), cfg.dt);
    CHECK(s.Y.col(7) == expected);
}

TEST_CASE("generate_snapshots handles a collapsed grid") {
    const ControlAffineSystem sys = make_duffing({1.0, -1.0, 0.0});
    SamplingConfig cfg;
    cfg.dt = 0.1;
    cfg.grid = {{0.5, 0.5, 1}, {-1.0, -1.0, 1}};
    cfg.input_bounds = {{0.0, 0.0}};
    cfg.seed = 9;

    const SnapshotSet s = generate_snapshots(sys, cfg);
    CHECK(s.count() == 1);
    CHECK(s.X(0, 0) == 0.5);
    CHECK(s.X(1, 0) == -1.0);
    CHECK(s.U(0, 0) == 0.0);
    CHECK(s.Y.col(0) == rk4_step(sys, s.X.col(0), VectorXd::Zero(1), cfg.dt));
}

TEST_CASE("generate_snapshots is deterministic in the seed") {
    const ControlAffineSystem sys = make_duffing({1.0, -1.0, 0.0});
    SamplingConfig cfg;
    cfg.dt = 0.1;
    cfg.grid = {{-3.0, 3.0, 5}, {-3.0, 3.0, 5}};
    cfg.input_bounds = {{-2.0, 2.0}};
    cfg.seed = 42;

    const SnapshotSet a = generate_snapshots(sys, cfg);
    const SnapshotSet b = generate_snapshots(sys, cfg);
    CHECK(a.U == b.U);
    CHECK(a.Y == b.Y);

    cfg.seed = 43;
    const SnapshotSet c = generate_snapshots(sys, cfg);
    CHECK(a.U != c.U);
}

TEST_CASE("discrete systems use the native map") {
    ControlAffineSystem sys;
    sys.n = 2;
    sys.m = 1;
    sys.kind = ControlAffineSystem::Time::Discrete;
    MatrixXd A(2, 2), B(2, 1);
    A << 0.5, 0.1, 0.0, 0.8;
    B << 0.0, 1.0;
    sys.drift = [A](const VectorXd& x) -> VectorXd { return A * x; };
    sys.effectiveness = [B](const VectorXd&) -> MatrixXd { return B; };

    SamplingConfig cfg;
    cfg.grid = {{-1.0, 1.0, 3}, {-1.0, 1.0, 3}};
    cfg.input_bounds = {{-1.0, 1.0}};
    cfg.seed = 5;
    const SnapshotSet s = generate_snapshots(sys, cfg);
    CHECK(validate(s).ok());
    for (Eigen::Index k = 0; k < s.count(); ++k) {
        CHECK(s.Y.col(k) == A * s.X.col(k) + B * s.U.col(k));
    }
}

TEST_CASE("rollout_true basics") {
    const ControlAffineSystem sys = make_duffing({1.0, -1.0, 0.0});
    const VectorXd origin = VectorXd::Zero(2);

    const Trajectory single = rollout_true(sys, FeedbackLaw::zero(1), origin, 0, 0.1);
    REQUIRE(single.records.size() == 1);
    CHECK(single.records[0].step == 0);
    CHECK(single.records[0].time == 0.0);
    CHECK_FALSE(single.diverged);

    // the origin is an equilibrium of the undriven system
    const Trajectory fixed = rollout_true(sys, FeedbackLaw::zero(1), origin, 25, 0.1);
    REQUIRE(fixed.records.size() == 26);
    for (const auto& rec : fixed.records) {
        CHECK(rec.state == origin);
    }
    CHECK(fixed.records[10].time == doctest::Approx(1.0));
}

TEST_CASE("rollout_true truncates on blow-up") {
    const ControlAffineSystem sys = scalar_system([](double x) { return x * x; });
    const Trajectory t =
        rollout_true(sys, FeedbackLaw::zero(1), VectorXd::Constant(1, 5.0), 100, 1.0);
    CHECK(t.diverged);
    CHECK(t.records.size() < 101);
}

TEST_CASE("feedback laws evaluate by kind") {
    const VectorXd x = (VectorXd(2) << 2.0, -2.0).finished();
    CHECK(FeedbackLaw::zero(3)(x) == VectorXd::Zero(3));

    MatrixXd K(1, 2);
    K << -2.0, -2.0;
    CHECK(FeedbackLaw::linear(K)(x) == VectorXd::Zero(1));  // -2*2 - 2*(-2) = 0
    CHECK(FeedbackLaw::linear(K)((VectorXd(2) << 1.0, 0.0).finished())(0) == -2.0);

    const FeedbackLaw law = FeedbackLaw::custom(1, [](const VectorXd& v) {
        return VectorXd::Constant(1, v.squaredNorm());
    });
    CHECK(law(x)(0) == 8.0);

    CHECK_THROWS_AS(FeedbackLaw::linear(K)(VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("generate_snapshots names the sample that blew up") {
    const ControlAffineSystem sys = make_duffing({1.0, -1.0, 0.0});
    SamplingConfig cfg;
    cfg.dt = 1e100;  // one enormous step overflows the cubic term
    cfg.grid = {{3.0, 3.0, 1}, {3.0, 3.0, 1}};
    cfg.input_bounds = {{0.0, 0.0}};
    CHECK_THROWS_WITH_AS(generate_snapshots(sys, cfg), doctest::Contains("sample 0"),
                         std::runtime_error);
}

TEST_CASE("step_once rejects a mismatched input dimension") {
    const ControlAffineSystem sys = make_duffing({1.0, -1.0, 0.0});
    CHECK_THROWS_AS(step_once(sys, Eigen::Vector2d(0, 0), VectorXd::Zero(2), 0.1),
                    std::invalid_argument);
}

TEST_CASE("uniform_points is deterministic and respects bounds") {
    const std::vector<Interval> bounds = {{-3.0, 3.0}, {0.0, 1.0}};
    const MatrixXd a = uniform_points(bounds, 50, 7, 123);
    const MatrixXd b = uniform_points(bounds, 50, 7, 123);
    CHECK(a == b);
    CHECK(a.row(0).minCoeff() >= -3.0);
    CHECK(a.row(0).maxCoeff() < 3.0);
    CHECK(a.row(1).minCoeff() >= 0.0);
    CHECK(a.row(1).maxCoeff() < 1.0);

    const MatrixXd c = uniform_points(bounds, 50, 7, 124);
    CHECK(a != c);
}
