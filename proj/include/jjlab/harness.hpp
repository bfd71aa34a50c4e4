#pragma once

// Solver dispatch and CSV artifacts for an ExperimentConfig.
//
// Files written by run() into the output directory:
//   solution.csv     x, t, u                 (first solver that ran: fd, green, picard)
//   diagnostics.csv  t, energy, sup_u, sup_v (same solver)
//   comparison.csv   t, supdiff_fd_green, supdiff_fd_picard, supdiff_green_picard (solver.kind = all)
//   decay.csv        t, initial_term, source_term, boundary_term, total (when picard ran)
// Every number is printed with %.17g. On any failure the files written so far
// are removed before the exception propagates.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "jjlab/config.hpp"
#include "jjlab/fd_solver.hpp"
#include "jjlab/model.hpp"

namespace jjlab {

Grid1D make_grid(const ExperimentConfig& config);
ProblemData make_problem_data(const ExperimentConfig& config);

struct SolverRun {
  std::string name;  // fd, green, picard
  std::vector<FieldState> snapshots;
};

/// Runs the selected solvers without writing files.
std::vector<SolverRun> solve(const ExperimentConfig& config);

struct ComparisonRow {
  double t = 0.0;
  double fd_green = 0.0;
  double fd_picard = 0.0;
  double green_picard = 0.0;
};

/// Pairwise sup differences per snapshot; requires fd, green and picard runs.
std::vector<ComparisonRow> compare_runs(const std::vector<SolverRun>& runs);

struct RunReport {
  std::vector<SolverRun> runs;
  std::vector<ComparisonRow> comparison;
  std::vector<std::filesystem::path> artifacts;
};

RunReport run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct SweepRow {
  double value = 0.0;
  double sup_u_final = 0.0;
  double sup_diff_vs_smallest = 0.0;
};

/// One run per value, each in out_dir/run_<k>, plus out_dir/sweep_summary.csv.
/// Runs execute concurrently. ESJJ with lambda_taper = 0 runs as the
/// untapered PSGE. A failing run aborts the sweep, removes its artifacts and
/// rethrows as RunFailure naming the value.
std::vector<SweepRow> sweep(const ExperimentConfig& config, const std::string& parameter,
                            const std::vector<double>& values, const std::filesystem::path& out_dir);

/// Configuration of one sweep point.
ExperimentConfig sweep_point(const ExperimentConfig& config, const std::string& parameter, double value);

/// kernel.csv: x, t, K, K_bound, theta, theta_x on [-L, L] x tables.times for
/// the kernel the model maps to (RegimeError outside the positivity regime).
std::vector<std::filesystem::path> write_kernel_tables(const ExperimentConfig& config,
                                                       const std::filesystem::path& out_dir);

/// green_modes.csv: n, gamma_n, b_n, g_n, omega_sq, t, G_n, dG_n;
/// green_slice.csv: x, t, G(x, tables.xi, t).
std::vector<std::filesystem::path> write_green_tables(const ExperimentConfig& config,
                                                      const std::filesystem::path& out_dir);

/// Exit status of a failure: 2 for solver divergence (DivergenceError,
/// NonContractionError, SeriesTruncationError), 1 for everything else.
int exit_code_for(const std::exception& e);

/// Failure carrying its exit status, thrown by sweep.
class RunFailure : public std::runtime_error {
 public:
  RunFailure(const std::string& what, int exit_code) : std::runtime_error(what), code_(exit_code) {}
  int exit_code() const noexcept { return code_; }

 private:
  int code_;
};

}  // namespace jjlab
