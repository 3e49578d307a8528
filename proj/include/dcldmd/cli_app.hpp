#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcldmd/dcldmd.hpp"
#include "dcldmd/edmdc.hpp"
#include "dcldmd/simulate.hpp"

namespace dcldmd::cli {

/// Effective parameters of one run. Defaults reproduce the first Duffing
/// experiment; the config file and command-line flags override them in
/// that order.
struct RunConfig {
    // system (controlled Duffing oscillator)
    double alpha = 1.0;
    double beta = -1.0;
    double delta = 0.0;
    double dt = 0.1;

    // sampling
    std::vector<AxisGrid> grid = {{-3.0, 3.0, 15}, {-3.0, 3.0, 15}};
    std::vector<Interval> input_bounds = {{-2.0, 2.0}};
    std::uint64_t seed = 1;

    // kernel model
    Kernel kernel = Kernel::gaussian(10.0);
    double epsilon = 1e-6;

    // feedback law u = K x, row-major m x n
    Eigen::MatrixXd feedback_K = (Eigen::MatrixXd(1, 2) << -2.0, -2.0).finished();

    // prediction
    Eigen::VectorXd x0 = (Eigen::VectorXd(2) << 2.0, -2.0).finished();
    double horizon = 6.0;
    std::vector<std::string> predictors = {"dcldmd-indirect", "edmdc"};

    // baseline dictionary
    int rbf_count = 100;
    RbfKind rbf_kind = RbfKind::ThinPlateSpline;
    double rbf_scale = 1.0;
    double ridge = 1e-10;

    ControlAffineSystem system() const;
    FeedbackLaw feedback() const;
    SamplingConfig sampling() const;
    int steps() const;  // round(horizon / dt)

    /// Config-file rendering of every effective parameter.
    std::string to_text() const;
};

/// Parses the key = value config format; unknown keys are rejected.
RunConfig load_run_config(const std::filesystem::path& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);

Eigen::VectorXd parse_double_list(const std::string& text);
Kernel parse_kernel(const std::string& kind, double sigma);

/// Baseline lifting dictionary for the configured run: state coordinates
/// plus rbf_count radial functions with centers drawn uniformly from the
/// sampling grid bounds using the run's seed.
LiftingDictionary baseline_dictionary(const RunConfig& cfg);

struct CommandResult {
    std::vector<std::filesystem::path> files;
    std::string summary;
};

/// Root-mean-square error per state component over the shared horizon.
Eigen::VectorXd rmse_per_component(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);

struct PredictorMetrics {
    std::string label;
    Eigen::VectorXd rmse;
    bool diverged = false;
};

struct ComparisonOutcome {
    TrajectoryTable table;
    std::vector<PredictorMetrics> metrics;
    std::optional<DcldmdModel> dcldmd_model;
    std::optional<EdmdcModel> edmdc_model;
};

/// Simulates the closed loop, fits every configured predictor on `data`,
/// and rolls each one out from cfg.x0 over the configured horizon.
ComparisonOutcome run_comparison(const RunConfig& cfg, const SnapshotSet& data);

CommandResult cmd_gen_data(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_fit(const RunConfig& cfg, const std::filesystem::path& snapshots,
                      const std::filesystem::path& out_dir, bool baseline);
CommandResult cmd_predict(const RunConfig& cfg, const std::filesystem::path& model_path,
                          const std::filesystem::path& out_dir, const std::string& mode);
CommandResult cmd_compare(const RunConfig& cfg, const std::filesystem::path& out_dir,
                          const std::filesystem::path& snapshots = {});
CommandResult cmd_reproduce(int experiment, RunConfig cfg, const std::filesystem::path& out_dir);

/// Experiment presets applied by `reproduce` before flag overrides.
void apply_experiment_preset(RunConfig& cfg, int experiment);

/// Full command-line entry point; returns the process exit status.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // without argv[0]

}  // namespace dcldmd::cli
