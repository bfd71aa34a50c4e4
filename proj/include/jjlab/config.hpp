#pragma once

// Experiment configuration in a flat `section.key = value` format:
//
//   # comment
//   model.kind = ESJJ
//   model.lambda_taper = 0.5
//   grid.nx = 101
//   grid.t_end = 5
//
// Sections: model, grid, data, solver, output, tol, tables. Unknown keys,
// duplicate keys and malformed values are errors anchored at their line.
// Defaults that depend on other keys are resolved by parse_config, so render
// writes every key explicitly and parse_config(render(c)) == c.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jjlab/fd_solver.hpp"
#include "jjlab/model.hpp"

namespace jjlab {

enum class SolverChoice { fd, green, picard, all };
enum class InitialPreset { zero, kink, constant, sine_mode, custom };
enum class VelocityPreset { zero, kink, custom };
enum class BoundaryPreset { zero, constant, ramp, kink, custom };

std::string_view to_string(SolverChoice v);
std::string_view to_string(InitialPreset v);
std::string_view to_string(VelocityPreset v);
std::string_view to_string(BoundaryPreset v);
std::string_view to_string(Formulation v);

struct GridSection {
  int nx = 0;
  /// Defaults to 0.5 dx.
  double dt = 0.0;
  double t_end = 0.0;
  bool operator==(const GridSection&) const = default;
};

/// Initial data, boundary data and source mode.
///   kink:      4 atan(exp((x - kink_center - kink_velocity t) / sqrt(1 - c^2)))
///   constant:  amplitude
///   sine-mode: amplitude sin(mode pi x / L)
///   custom:    piecewise linear through values on a uniform grid over [0, L]
/// Boundary presets: constant value, ramp value (1 - e^{-t}), the kink's own
/// boundary values, or custom values uniform over [0, t_end].
struct DataSection {
  InitialPreset initial = InitialPreset::zero;
  double amplitude = 1.0;
  int mode = 1;
  double kink_center = 0.0;
  double kink_velocity = 0.0;
  std::vector<double> initial_values;
  VelocityPreset velocity = VelocityPreset::zero;
  std::vector<double> velocity_values;
  BoundaryPreset left = BoundaryPreset::zero;
  double left_value = 0.0;
  std::vector<double> left_values;
  BoundaryPreset right = BoundaryPreset::zero;
  double right_value = 0.0;
  std::vector<double> right_values;
  SourceMode source = SourceMode::nonlinear;
  bool operator==(const DataSection&) const = default;
};

struct SolverSection {
  SolverChoice kind = SolverChoice::fd;
  Formulation formulation = Formulation::direct;
  bool operator==(const SolverSection&) const = default;
};

struct OutputSection {
  std::string dir = "out";
  /// Defaults to t_end / 10.
  double snapshot_interval = 0.0;
  bool operator==(const OutputSection&) const = default;
};

struct ToleranceSection {
  double series = 1e-8;
  double quad = 1e-8;
  double fix = 1e-10;
  int max_iterations = 60;
  double window_length = 1.0;
  int quad_nodes = 3;
  /// Pass threshold for the cross-solver comparison.
  double compare = 1e-3;
  bool operator==(const ToleranceSection&) const = default;
};

/// Sampling of the kernel and Green tables.
struct TableSection {
  /// Defaults to {t_end} (1 when t_end = 0).
  std::vector<double> times;
  /// Defaults to grid.nx.
  int points = 0;
  /// Source point of the G slice; defaults to L / 2.
  double xi = 0.0;
  int modes = 8;
  bool operator==(const TableSection&) const = default;
};

struct ExperimentConfig {
  JunctionSpec model;
  GridSection grid;
  DataSection data;
  SolverSection solver;
  OutputSection output;
  ToleranceSection tol;
  TableSection tables;
  bool operator==(const ExperimentConfig&) const = default;
};

struct ConfigIssue {
  int line = 0;  // 0 when the issue is not tied to a line
  std::string message;
};

/// Thrown by parse_config with every issue found.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

ExperimentConfig parse_config(std::string_view text);
std::string render(const ExperimentConfig& config);

/// Checks the invariants parse_config enforces; throws ConfigError.
void validate(const ExperimentConfig& config);

/// Keys accepted by parse_config, in render order.
std::vector<std::string> config_keys();
/// Keys holding a single number (real or integer), usable as sweep parameters.
bool is_numeric_key(std::string_view key);
/// Assigns one key from its text form; throws ConfigError on a bad key or value.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

/// "%.17g", the format of every number written by the harness.
std::string format_number(double v);

}  // namespace jjlab
