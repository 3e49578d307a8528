#include "dcldmd/simulate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace dcldmd {

FeedbackLaw FeedbackLaw::zero(Eigen::Index m) {
    FeedbackLaw law;
    law.kind = Kind::Zero;
    law.m = m;
    return law;
}

FeedbackLaw FeedbackLaw::linear(const Eigen::MatrixXd& K) {
    FeedbackLaw law;
    law.kind = Kind::Linear;
    law.K = K;
    return law;
}

FeedbackLaw FeedbackLaw::custom(Eigen::Index m,
                                std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn) {
    FeedbackLaw law;
    law.kind = Kind::Custom;
    law.m = m;
    law.fn = std::move(fn);
    return law;
}

Eigen::VectorXd FeedbackLaw::operator()(const Eigen::VectorXd& x) const {
    switch (kind) {
        case Kind::Zero:
            return Eigen::VectorXd::Zero(m);
        case Kind::Linear:
            if (K.cols() != x.size()) {
                throw std::invalid_argument("feedback: K has " + std::to_string(K.cols()) +
                                            " columns but state has dimension " +
                                            std::to_string(x.size()));
            }
            return K * x;
        case Kind::Custom:
            return fn(x);
    }
    throw std::logic_error("feedback: unknown kind");
}

Eigen::Vector2d duffing_vector_field(const Eigen::Vector2d& x, double u, const DuffingParams& p) {
    return {x(1), -p.delta * x(1) - p.beta * x(0) - p.alpha * std::pow(x(0), 3) +
                      (2.0 + std::sin(x(0))) * u};
}

ControlAffineSystem make_duffing(const DuffingParams& p) {
    ControlAffineSystem sys;
    sys.n = 2;
    sys.m = 1;
    sys.kind = ControlAffineSystem::Time::Continuous;
    sys.drift = [p](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return duffing_vector_field(x.head<2>(), 0.0, p);
    };
    sys.effectiveness = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        Eigen::MatrixXd g(2, 1);
        g << 0.0, 2.0 + std::sin(x(0));
        return g;
    };
    return sys;
}

namespace {

Eigen::VectorXd field(const ControlAffineSystem& system, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u) {
    return system.drift(x) + system.effectiveness(x) * u;
}

// SplitMix64, used to derive independent per-sample seeds from (seed, index).
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform double in [0, 1) with 53 random bits. std::uniform_real_distribution
// is implementation-defined, so draws are made portable by hand.
double canonical(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace

Eigen::VectorXd rk4_step(const ControlAffineSystem& system, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
    const Eigen::VectorXd k1 = field(system, x, u);
    const Eigen::VectorXd k2 = field(system, x + 0.5 * dt * k1, u);
    const Eigen::VectorXd k3 = field(system, x + 0.5 * dt * k2, u);
    const Eigen::VectorXd k4 = field(system, x + dt * k3, u);
    Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) {
        throw std::runtime_error("rk4_step: integration blow-up (non-finite state)");
    }
    return next;
}

Eigen::VectorXd step_once(const ControlAffineSystem& system, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, double dt) {
    if (u.size() != system.m) {
        throw std::invalid_argument("step_once: input has dimension " + std::to_string(u.size()) +
                                    " but the system expects " + std::to_string(system.m));
    }
    if (system.kind == ControlAffineSystem::Time::Continuous) {
        return rk4_step(system, x, u, dt);
    }
    Eigen::VectorXd next = field(system, x, u);
    if (!next.allFinite()) {
        throw std::runtime_error("step_once: map produced a non-finite state");
    }
    return next;
}

SnapshotSet generate_snapshots(const ControlAffineSystem& system, const SamplingConfig& config) {
    if (static_cast<Eigen::Index>(config.grid.size()) != system.n) {
        throw std::invalid_argument("generate_snapshots: grid must declare one axis per state");
    }
    if (static_cast<Eigen::Index>(config.input_bounds.size()) != system.m) {
        throw std::invalid_argument("generate_snapshots: input bounds must cover every channel");
    }
    Eigen::Index M = 1;
    for (const auto& axis : config.grid) {
        if (axis.count < 1) throw std::invalid_argument("generate_snapshots: grid count must be >= 1");
        if (axis.hi < axis.lo) throw std::invalid_argument("generate_snapshots: grid bounds out of order");
        M *= axis.count;
    }
    for (const auto& bounds : config.input_bounds) {
        if (bounds.hi < bounds.lo) {
            throw std::invalid_argument("generate_snapshots: input bounds out of order");
        }
    }

    SnapshotSet s;
    s.X.resize(system.n, M);
    s.U.resize(system.m, M);
    s.Y.resize(system.n, M);

    for (Eigen::Index k = 0; k < M; ++k) {
        // Grid point: axis 0 varies fastest.
        Eigen::Index rem = k;
        for (Eigen::Index i = 0; i < system.n; ++i) {
            const auto& axis = config.grid[static_cast<std::size_t>(i)];
            const Eigen::Index idx = rem % axis.count;
            rem /= axis.count;
            s.X(i, k) = axis.count == 1
                            ? axis.lo
                            : axis.lo + (axis.hi - axis.lo) * static_cast<double>(idx) /
                                            static_cast<double>(axis.count - 1);
        }

        std::mt19937_64 eng(mix64(config.seed ^ mix64(static_cast<std::uint64_t>(k))));
        for (Eigen::Index i = 0; i < system.m; ++i) {
            const auto& bounds = config.input_bounds[static_cast<std::size_t>(i)];
            s.U(i, k) = bounds.lo + (bounds.hi - bounds.lo) * canonical(eng);
        }

        try {
            s.Y.col(k) = step_once(system, s.X.col(k), s.U.col(k), config.dt);
        } catch (const std::exception& e) {
            throw std::runtime_error("generate_snapshots: sample " + std::to_string(k) + ": " +
                                     e.what());
        }
    }
    return s;
}

Eigen::MatrixXd uniform_points(const std::vector<Interval>& bounds, Eigen::Index count,
                               std::uint64_t seed, std::uint64_t tag) {
    Eigen::MatrixXd points(static_cast<Eigen::Index>(bounds.size()), count);
    for (Eigen::Index j = 0; j < count; ++j) {
        std::mt19937_64 eng(mix64(mix64(seed ^ mix64(tag)) ^ mix64(static_cast<std::uint64_t>(j))));
        for (std::size_t i = 0; i < bounds.size(); ++i) {
            if (bounds[i].hi < bounds[i].lo) {
                throw std::invalid_argument("uniform_points: bounds out of order");
            }
            points(static_cast<Eigen::Index>(i), j) =
                bounds[i].lo + (bounds[i].hi - bounds[i].lo) * canonical(eng);
        }
    }
    return points;
}

Trajectory rollout_true(const ControlAffineSystem& system, const FeedbackLaw& mu,
                        const Eigen::VectorXd& x0, int steps, double dt) {
    if (steps < 0) throw std::invalid_argument("rollout_true: steps must be >= 0");
    Trajectory traj;
    traj.records.reserve(static_cast<std::size_t>(steps) + 1);
    traj.records.push_back({0, 0.0, x0});

    Eigen::VectorXd x = x0;
    for (int k = 1; k <= steps; ++k) {
        try {
            x = step_once(system, x, mu(x), dt);
        } catch (const std::runtime_error&) {
            traj.diverged = true;
            break;
        }
        traj.records.push_back({k, static_cast<double>(k) * dt, x});
    }
    return traj;
}

}  // namespace dcldmd
