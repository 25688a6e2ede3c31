#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phlab/certifier.hpp"
#include "phlab/errors.hpp"
#include "phlab/suspension.hpp"
#include "phlab/twists.hpp"

namespace phlab::cli {

inline constexpr std::string_view kToolVersion = "0.3.0";
inline constexpr int kSchemaVersion = 1;

/// Exit codes. Nothing else is ever returned.
enum ExitCode : int { kPass = 0, kFail = 2, kInvalidInput = 3 };

/// Contents of a model description file.
struct ModelSpec {
    std::string type = "suspension";  // "suspension" or "geodesic"
    Mat2i a = (Mat2i() << 2, 1, 1, 1).finished();
    std::string rho = "1";
    double eta = 0.0;
    double collar_eps = 0.2;
    double step = 1e-3;
};

struct TwistConfig {
    int a = 1;
    int b = 0;
    TwistKind kind = TwistKind::Translation;
    double profile_start = 0.1;
    double profile_end = 0.9;
    Mat2 shear = Mat2::Zero();

    RampProfile profile() const { return {profile_start, profile_end}; }
    TwistPath path() const;
};

struct ExperimentConfig {
    std::filesystem::path config_path;
    std::filesystem::path model_path;
    ModelSpec model;
    /// Applied in order: the first twist acts first.
    std::vector<TwistConfig> twists;
    /// Flow time of F when there are no twists.
    double flow_time = 1.0;

    double alpha = 1e-2;
    int planner_grid = 8;
    int planner_cap = 1024;
    std::optional<int> m;

    double aperture = 0.2;
    int grid = 32;
    int iterates = 1;
    double margin_threshold = 0.9;

    int transversality_grid = 16;
    double transversality_tol = 1e-3;
    TwistGrid twist_grid;

    std::vector<std::uint64_t> seeds{0, 1};
    std::filesystem::path output_dir = "phlab_out";

    std::vector<double> sweep_etas{1, 2, 4, 8, 16};
    int sweep_points = 4;
    bool sweep_plan = true;
    int sweep_planner_grid = 2;

    std::vector<double> shadow_deltas{1e-5, 1e-4, 1e-3};
    int shadow_steps = 200;
    double shadow_eps = 0.05;

    int ftle_n = 100;
    int ftle_points = 8;

    bool sequential = false;

    /// Canonical JSON of everything above that affects results (model inlined).
    std::string resolved;
    /// FNV-1a 64 of `resolved`, 16 hex digits.
    std::string hash;

    int threads() const;
};

/// Command-line overrides; applied before hashing.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    std::optional<double> aperture;
    std::optional<double> tol;
    std::optional<int> m;
    std::optional<std::string> output_dir;
    bool sequential = false;
};

std::uint64_t fnv1a64(std::string_view data);

/// Reads the config and the model file it names (relative to the config).
/// Throws Error(InvalidInput or ParseError). PHLAB_OUT overrides the output directory.
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});
/// Same, from JSON text; relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                              const Overrides& overrides = {});
ModelSpec load_model(const std::filesystem::path& path);

std::shared_ptr<const FlowModel> build_model(const ModelSpec& spec);
SuspensionPtr build_suspension(const ModelSpec& spec);

/// The composed map F with the pieces it was made of.
struct Pipeline {
    std::shared_ptr<const FlowModel> model;
    SuspensionPtr suspension;
    std::vector<DehnTwistSpec> twists;
    std::vector<TransversalityCertificate> transversality;
    std::optional<PlanResult> plan;
    int m = 0;
    ComposedMap map;
};

/// F = f^m h_l ... f^m h_1 for the configured twists, or the plain flow-time
/// map without twists. Runs the transversality checks and, unless m is
/// given, the planner. `check` = false skips both and uses m (default 1).
/// `stage`, when given, names the step in progress (for error messages).
Pipeline build_pipeline(const ExperimentConfig& config, bool check = true, std::string* stage = nullptr);

/// Maps library errors to exit codes: bad inputs to 3, failed checks to 2.
int exit_code_for(ErrorCode code);

/// Each command writes `<output_dir>/<command>.json` and a human-readable
/// `<command>.summary.txt` (the only place wall time is recorded) and returns an exit code.
int cmd_certify(const ExperimentConfig& config, std::ostream& log);
int cmd_sweep_eta(const ExperimentConfig& config, std::ostream& log);
int cmd_twist_check(const ExperimentConfig& config, std::ostream& log);
int cmd_shadow(const ExperimentConfig& config, std::ostream& log);
int cmd_ftle(const ExperimentConfig& config, std::ostream& log);
int cmd_word(const ExperimentConfig& config, std::ostream& log);
/// Re-reads a JSON report written by another command and prints its roll-up.
int cmd_report(const std::filesystem::path& report, std::ostream& log);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace phlab::cli
