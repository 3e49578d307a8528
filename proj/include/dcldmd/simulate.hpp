#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dcldmd/snapshots.hpp"

namespace dcldmd {

/// A system x+ = F(x) + G(x) u. `Continuous` systems declare the vector
/// field xdot = F(x) + G(x) u and are stepped with RK4 under zero-order-hold
/// inputs; `Discrete` systems declare the one-step map directly.
struct ControlAffineSystem {
    enum class Time { Continuous, Discrete };

    Eigen::Index n = 0;
    Eigen::Index m = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> drift;          // F(x), n-vector
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> effectiveness;  // G(x), n x m
    Time kind = Time::Continuous;
};

/// A state-to-input map u = mu(x).
struct FeedbackLaw {
    enum class Kind { Zero, Linear, Custom };

    Kind kind = Kind::Zero;
    Eigen::Index m = 0;    // output dimension for Zero/Custom
    Eigen::MatrixXd K;     // m x n for Linear
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn;

    static FeedbackLaw zero(Eigen::Index m);
    static FeedbackLaw linear(const Eigen::MatrixXd& K);  // u = K x
    static FeedbackLaw custom(Eigen::Index m, std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn);

    Eigen::Index input_dim() const { return kind == Kind::Linear ? K.rows() : m; }
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
};

struct DuffingParams {
    double alpha = 1.0;
    double beta = -1.0;
    double delta = 0.0;
};

/// xdot = (x2, -delta*x2 - beta*x1 - alpha*x1^3 + (2 + sin x1) u).
Eigen::Vector2d duffing_vector_field(const Eigen::Vector2d& x, double u, const DuffingParams& p);

ControlAffineSystem make_duffing(const DuffingParams& p);

struct AxisGrid {
    double lo = 0.0;
    double hi = 0.0;
    int count = 1;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct SamplingConfig {
    double dt = 0.1;
    std::vector<AxisGrid> grid;             // one per state axis
    std::vector<Interval> input_bounds;     // one per input channel
    std::uint64_t seed = 0;
};

/// Classical fixed-step RK4 for xdot = F(x) + G(x) u with u held constant.
/// Throws std::runtime_error if the step produces a non-finite state.
Eigen::VectorXd rk4_step(const ControlAffineSystem& system, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt);

/// One transition of the system: RK4 over dt for continuous systems, the
/// native map for discrete ones.
Eigen::VectorXd step_once(const ControlAffineSystem& system, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, double dt);

/// Grid-sampled training set: states on the per-axis grid (endpoints
/// included), inputs uniform within the bounds. Input draws come from a
/// per-sample substream seeded by (seed, sample index), so the result is
/// independent of traversal order and bit-reproducible.
SnapshotSet generate_snapshots(const ControlAffineSystem& system, const SamplingConfig& config);

/// Closed-loop rollout x_{k+1} = step(x_k, mu(x_k)). A blow-up truncates
/// the trajectory and sets the diverged flag instead of throwing.
Trajectory rollout_true(const ControlAffineSystem& system, const FeedbackLaw& mu,
                        const Eigen::VectorXd& x0, int steps, double dt);

/// Deterministic uniform points within per-axis bounds, one column each.
/// Sample j draws from a substream derived from (seed, tag, j).
Eigen::MatrixXd uniform_points(const std::vector<Interval>& bounds, Eigen::Index count,
                               std::uint64_t seed, std::uint64_t tag = 0);

}  // namespace dcldmd
