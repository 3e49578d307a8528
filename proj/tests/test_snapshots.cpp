#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "dcldmd/snapshots.hpp"

using namespace dcldmd;
using Eigen::MatrixXd;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "dcldmd_test_data";
    fs::create_directories(dir);
    return dir / name;
}

SnapshotSet random_set(std::mt19937& rng, int n, int m, int M) {
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    SnapshotSet s;
    s.X.resize(n, M);
    s.U.resize(m, M);
    s.Y.resize(n, M);
    for (int k = 0; k < M; ++k) {
        for (int i = 0; i < n; ++i) s.X(i, k) = u(rng);
        for (int i = 0; i < m; ++i) s.U(i, k) = u(rng);
        for (int i = 0; i < n; ++i) s.Y(i, k) = u(rng);
    }
    return s;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("validate accepts a well-formed set") {
    std::mt19937 rng(1);
    const SnapshotSet s = random_set(rng, 2, 1, 225);
    CHECK(validate(s).ok());
}

TEST_CASE("validate reports column mismatches") {
    std::mt19937 rng(2);
    SnapshotSet s = random_set(rng, 2, 1, 3);
    s.U = MatrixXd::Zero(1, 2);
    const ValidationReport report = validate(s);
    CHECK_FALSE(report.ok());
    CHECK(report.to_string().find("column mismatch") != std::string::npos);
}

TEST_CASE("validate reports non-finite entries") {
    std::mt19937 rng(3);
    SnapshotSet s = random_set(rng, 2, 1, 3);
    s.Y(1, 2) = std::nan("");
    const ValidationReport report = validate(s);
    CHECK_FALSE(report.ok());
    CHECK(report.to_string().find("non-finite entry in Y") != std::string::npos);
}

TEST_CASE("validate reports empty dimensions") {
    SnapshotSet s;
    s.X.resize(2, 0);
    s.U.resize(1, 0);
    s.Y.resize(2, 0);
    CHECK_FALSE(validate(s).ok());
}

TEST_CASE("snapshot persistence round-trips bit-exactly") {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        std::uniform_int_distribution<int> dims(1, 4);
        std::uniform_int_distribution<int> counts(1, 30);
        const SnapshotSet s = random_set(rng, dims(rng), dims(rng), counts(rng));
        const fs::path path = temp_file("roundtrip.csv");
        save_snapshots(s, path);
        const SnapshotSet loaded = load_snapshots(path);
        CHECK(loaded.X == s.X);
        CHECK(loaded.U == s.U);
        CHECK(loaded.Y == s.Y);
    }
}

TEST_CASE("round-trip preserves extreme magnitudes") {
    SnapshotSet s;
    s.X.resize(1, 3);
    s.U.resize(1, 3);
    s.Y.resize(1, 3);
    s.X << 1e-308, -1.5e17, 0.1;
    s.U << 3.141592653589793, -2.2250738585072014e-305, 1e300;
    s.Y << -0.0, 1.0 / 3.0, 6.02214076e23;
    const fs::path path = temp_file("extreme.csv");
    save_snapshots(s, path);
    const SnapshotSet loaded = load_snapshots(path);
    CHECK(loaded.X == s.X);
    CHECK(loaded.U == s.U);
    CHECK(loaded.Y == s.Y);
}

TEST_CASE("load rejects an empty file") {
    const fs::path path = temp_file("empty.csv");
    write_file(path, "");
    CHECK_THROWS_WITH_AS(load_snapshots(path), doctest::Contains("no snapshots"),
                         std::runtime_error);
}

TEST_CASE("load rejects a header/width mismatch") {
    const fs::path path = temp_file("wide.csv");
    // header says n=2, m=1 but the rows carry four state columns
    write_file(path,
               "n,2,m,1\n"
               "x1,x2,u1,y1,y2\n"
               "0,0,0,0,0.5,1,2\n");
    CHECK_THROWS_WITH_AS(load_snapshots(path), doctest::Contains("line 3"), std::runtime_error);
}

TEST_CASE("load rejects a column-name line that disagrees with the header") {
    const fs::path path = temp_file("bad_names.csv");
    write_file(path,
               "n,2,m,1\n"
               "x1,x2,x3,x4,u1,y1,y2\n"
               "0,0,0,0,0\n");
    CHECK_THROWS_WITH_AS(load_snapshots(path), doctest::Contains("line 2"), std::runtime_error);
}

TEST_CASE("load names the line and column of a bad number") {
    const fs::path path = temp_file("badnum.csv");
    write_file(path,
               "n,1,m,1\n"
               "x1,u1,y1\n"
               "0,0,0\n"
               "1,oops,2\n");
    CHECK_THROWS_WITH_AS(load_snapshots(path), doctest::Contains("line 4, column 2"),
                         std::runtime_error);
}

TEST_CASE("load rejects a file with only headers") {
    const fs::path path = temp_file("headers_only.csv");
    write_file(path, "n,1,m,1\nx1,u1,y1\n");
    CHECK_THROWS_WITH_AS(load_snapshots(path), doctest::Contains("no snapshots"),
                         std::runtime_error);
}

TEST_CASE("trajectory table round-trips") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-5, 5);
    TrajectoryTable table;
    table.dt = 0.1;
    table.truth.resize(2, 7);
    for (int k = 0; k < 7; ++k) {
        table.truth(0, k) = u(rng);
        table.truth(1, k) = u(rng);
    }
    table.predictions.emplace_back("pred", table.truth.array() + 0.25);
    table.predictions.emplace_back("base", table.truth.array() * 2.0);

    const fs::path path = temp_file("trajectory.csv");
    save_trajectory(table, path);
    const TrajectoryTable loaded = load_trajectory(path);
    CHECK(loaded.dt == table.dt);
    CHECK(loaded.truth == table.truth);
    REQUIRE(loaded.predictions.size() == 2);
    CHECK(loaded.predictions[0].first == "pred");
    CHECK(loaded.predictions[0].second == table.predictions[0].second);
    CHECK(loaded.predictions[1].first == "base");
    CHECK(loaded.predictions[1].second == table.predictions[1].second);
}

TEST_CASE("trajectory with no predictors round-trips") {
    TrajectoryTable table;
    table.dt = 0.5;
    table.truth = MatrixXd::Identity(3, 3);
    const fs::path path = temp_file("truth_only.csv");
    save_trajectory(table, path);
    const TrajectoryTable loaded = load_trajectory(path);
    CHECK(loaded.truth == table.truth);
    CHECK(loaded.predictions.empty());
}

TEST_CASE("trajectory loader rejects malformed headers") {
    const fs::path bad_header = temp_file("traj_bad_header.csv");
    write_file(bad_header, "time,k,x_true_1\n0,0,1\n");
    CHECK_THROWS_WITH_AS(load_trajectory(bad_header), doctest::Contains("k,time"),
                         std::runtime_error);

    const fs::path ragged = temp_file("traj_ragged.csv");
    write_file(ragged,
               "k,time,x_true_1,x_pred_1\n"
               "0,0,1,1\n"
               "1,0.1,2\n");
    CHECK_THROWS_WITH_AS(load_trajectory(ragged), doctest::Contains("line 3"),
                         std::runtime_error);
}

TEST_CASE("save_trajectory rejects mismatched predictor shapes") {
    TrajectoryTable table;
    table.dt = 0.1;
    table.truth = MatrixXd::Zero(2, 5);
    table.predictions.emplace_back("pred", MatrixXd::Zero(2, 4));
    CHECK_THROWS_AS(save_trajectory(table, temp_file("bad_table.csv")), std::invalid_argument);
}
