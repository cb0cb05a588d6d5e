#pragma once

// Configuration-driven experiment runner behind the command-line tool.
//
// A run evolves one initial curve (or sweeps an ensemble of curves), applies
// the selected checks and writes its artifacts into one output directory:
//
//   config.json       the fully resolved configuration
//   trajectory.csv    one row per sample (trajectory checks only)
//   termination.json  termination record of the trajectory
//   verdict.json      {checks: [{name, paper_ref, value, bound, pass}], summary}
//   summary.txt       the same verdict as aligned text
//   plus per-check detail files (identities.json, rates.json, ...).

#include "curveflow/theorem_suite.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace curveflow::harness {

enum class CheckKind {
  Identities,    ///< Fourier identities over a random ensemble
  Inequalities,  ///< isoperimetric, Wirtinger, Schwarz, interpolation ratios
  Conservation,  ///< flow-specific conserved or monotone quantities
  Audit,         ///< finite-difference evolution identities
  BlowUp,        ///< t_num against the blow-up time bound
  Scaling,       ///< t_num and T_bound scale by lambda^2
  Rates,         ///< blow-up rate fits and curvature bounds
  Decay,         ///< exponential decay of the global solution
  Convergence,   ///< circle decomposition of the limit
  Stationary,    ///< n-fold circles do not move; classifier agreement
};

std::string to_string(CheckKind kind);
std::optional<CheckKind> parse_check_kind(std::string_view text);

struct EnsembleConfig {
  int count = 20;
  std::vector<int> rotations{1, 2, 3};  ///< cycled over the members
  int max_mode = 8;
  double scale = 0.25;
  Index nodes = 512;
};

/// dt-halving study behind the audit check: fixed steps dt, dt/2, ... with a
/// sample after every step, each run to the horizon (capped by stop.t_max).
struct AuditStudy {
  double dt = 0.01;
  double horizon = 1.0;
  int levels = 3;
  double floor = 1e-9;  ///< residuals below this count as converged
};

struct ExperimentConfig {
  std::string name = "custom";
  FlowKind flow = FlowKind::AP;
  CurveSpec curve{Ellipse{2.0, 1.0}, 512};
  /// When set, the amplitude of the first perturbation is solved for so that
  /// I_{-1}(0) equals this value (perturbed circles only).
  std::optional<double> target_I_m1;
  Index bandwidth = 256;  ///< K; the initial curve must be resolved at K
  StoppingPolicy stop{};
  DtPolicy dt{};
  ResolutionPolicy resolution{};
  StepOptions step{};
  long sample_every = 10;
  std::string output_dir;  ///< empty: <CURVEFLOW_OUT or ./curveflow-out>/<name>
  std::uint64_t seed = 0;  ///< ensemble seeds are seed, seed + 1, ...
  std::vector<CheckKind> checks;
  EnsembleConfig ensemble{};
  std::vector<FlowKind> sweep_flows{FlowKind::AP, FlowKind::LP, FlowKind::JP};
  std::vector<int> sweep_rotations{1, 2, 3};
  long stationary_steps = 1000;
  AuditStudy audit{};
  std::vector<double> scaling_factors{0.5, 2.0};
};

/// identities, inequalities, ap-blowup-n2, lp-blowup-n2, jp-blowup-n2,
/// ap-decay-n1, ap-decay-n2, lp-decay-n2, jp-decay-n2, stationary,
/// rates-blowup. Throws UnknownPreset otherwise.
ExperimentConfig preset(std::string_view name);
const std::vector<std::string>& preset_names();

/// Parses a JSON configuration. Keys missing from the document keep their
/// defaults; a "preset" key starts from that preset instead. Throws
/// ConfigError with the line and the offending field.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& file);
nlohmann::json to_json(const ExperimentConfig& config);

/// Default output root: $CURVEFLOW_OUT if set, else ./curveflow-out.
std::filesystem::path output_root();
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

/// Solves for the first perturbation amplitude giving I_{-1}(0) = target by
/// bisection on (0, 0.45]. Throws ConfigError if the target is not bracketed.
CurveSpec calibrate_perturbation(const CurveSpec& spec, double target_I_m1);

/// Mode-1 and mode-5 perturbation of the double circle balanced so that
/// I_{-1} = 0 while the curve is not a circle.
CurveSpec balanced_double_circle(double mode5_amplitude = 0.05);

/// Library module an error code originates from, for error messages.
std::string_view module_of(ErrorCode code);

// ---------------------------------------------------------------------------

struct RunResult {
  std::vector<Check> checks;
  std::filesystem::path output_dir;
  nlohmann::json verdict;
  bool all_pass() const;
};

/// Executes the configuration and writes all artifacts. Library errors
/// propagate as CurveflowError.
RunResult run(const ExperimentConfig& config, std::ostream* log = nullptr);

// ---------------------------------------------------------------------------
// Serialization.

extern const char* const kTrajectoryColumns;

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
nlohmann::json termination_json(const Trajectory& trajectory);
nlohmann::json to_json(const IdentityReport& report);
nlohmann::json to_json(const InequalityReport& report);
nlohmann::json to_json(const Check& check);
nlohmann::json verdict_json(const std::vector<Check>& checks, nlohmann::json summary);
std::string format_verdict(const nlohmann::json& verdict);

/// Prints the stored verdict of an output directory; returns the exit code
/// (0 pass, 1 failed check, 2 unreadable directory).
int report(const std::filesystem::path& dir, std::ostream& out);

/// Writes trajectory.svg (and curves.svg when the curve snapshots exist)
/// from the CSV artifacts of an output directory. Returns the written files.
std::vector<std::filesystem::path> plot(const std::filesystem::path& dir);

}  // namespace curveflow::harness
