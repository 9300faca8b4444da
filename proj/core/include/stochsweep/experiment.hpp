#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochsweep/control.hpp"
#include "stochsweep/model.hpp"
#include "stochsweep/paths.hpp"
#include "stochsweep/sweep.hpp"

namespace stochsweep {

struct ExperimentConfig {
  std::string name = "custom";
  ProblemKind kind;
  ModelParams params;
  TimeGrid grid;
  AdmissibleBox box;
  SweepConfig sweep;
  State initial_state;
  /// Required for the time-optimal problem; reporting-only for LQ runs.
  std::optional<State> target;
  double target_radius = 0.5;
  /// The control held fixed in LQ runs or the initial guess; the controlled
  /// component doubles as the initial guess.
  Controls controls;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  /// Throws ValidationError naming the violated invariant.
  void validate() const;
};

const std::vector<std::string>& preset_names();

/// Throws ValidationError for unknown names.
ExperimentConfig preset(std::string_view name);

/// Parses experiment text. A top-level `preset = "figN"` key starts from that
/// preset and the remaining keys override it. Unknown keys are rejected.
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Full config as text accepted by parse_config.
std::string config_to_text(const ExperimentConfig& config);

/// Replaces the grid step, keeping t0 and t_final.
void set_time_step(ExperimentConfig& config, double dt);

/// Forces sigma1 = sigma2 = 0.
void make_deterministic(ExperimentConfig& config);

struct RunManifest {
  std::string config_echo;
  std::string version;
  std::optional<double> wall_clock_seconds;
  std::vector<IterationRecord> convergence;
  double clamp_fraction = 0.0;
  std::optional<double> hit_fraction;
  bool converged = false;
  std::size_t iterations = 0;
  double final_change = 0.0;
  CostEstimate cost;
  std::optional<double> mean_path_hitting_time;
  std::size_t regression_fallbacks = 0;

  std::string to_text() const;
};

struct RunOptions {
  /// Wall-clock time makes the manifest differ between runs, so it is opt-in.
  bool record_wall_clock = false;
};

struct ExperimentOutcome {
  SweepResult result;
  RunManifest manifest;
};

/// Solves the configured problem without touching the file system.
ExperimentOutcome solve_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes trajectories.csv, phase.csv, convergence.csv and manifest.toml into
/// `dir`, creating it if needed.
void write_outputs(const ExperimentOutcome& outcome, const std::filesystem::path& dir);

/// solve_experiment followed by write_outputs into config.output_dir.
ExperimentOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

const char* library_version();

}  // namespace stochsweep
