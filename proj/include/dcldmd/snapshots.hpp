#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dcldmd {

/// Training data: M triples (x_k, u_k, y_k) stored column-wise, where
/// y_k is the one-step successor of x_k under input u_k.
struct SnapshotSet {
    Eigen::MatrixXd X;  // n x M states
    Eigen::MatrixXd U;  // m x M inputs
    Eigen::MatrixXd Y;  // n x M successors

    Eigen::Index state_dim() const { return X.rows(); }
    Eigen::Index input_dim() const { return U.rows(); }
    Eigen::Index count() const { return X.cols(); }
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

/// Checks the SnapshotSet invariants (consistent column counts, finite
/// entries, nonzero dimensions). Collects every violation; never throws.
ValidationReport validate(const SnapshotSet& s);

/// CSV persistence. Layout: a header line "n,<n>,m,<m>", a column-name
/// line "x1..xn,u1..um,y1..yn", then one snapshot per row with 17
/// significant digits so that doubles round-trip exactly.
void save_snapshots(const SnapshotSet& s, const std::filesystem::path& path);
SnapshotSet load_snapshots(const std::filesystem::path& path);

/// One step of a rollout: step index k, time k*dt, and the state.
struct TrajectoryRecord {
    int step = 0;
    double time = 0.0;
    Eigen::VectorXd state;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    bool diverged = false;  // set when the rollout was truncated by a blow-up

    Eigen::MatrixXd states() const;  // n x (records) column per record
};

/// A time-aligned comparison table: the true trajectory plus one predicted
/// trajectory per labeled predictor, all sampled at k*dt.
struct TrajectoryTable {
    double dt = 0.0;
    Eigen::MatrixXd truth;  // n x T
    std::vector<std::pair<std::string, Eigen::MatrixXd>> predictions;  // label -> n x T
};

/// CSV with columns k,time,x_true_1..n[,x_<label>_1..n per predictor].
void save_trajectory(const TrajectoryTable& table, const std::filesystem::path& path);
TrajectoryTable load_trajectory(const std::filesystem::path& path);

}  // namespace dcldmd
