#pragma once

// Semi-implicit finite differences for
//   u_t = v
//   v_t = eps v_xx + u_xx - alpha v - lambda u_x - eps lambda v_x - f(x, t, u)
// on [0, L] with Dirichlet data at both ends.

#include <functional>
#include <vector>

#include "jjlab/model.hpp"

namespace jjlab {

struct Grid1D {
  int nx = 0;
  double length = 1.0;
  double dx = 0.0;
  double dt = 0.0;
  double t_end = 0.0;
  long steps = 0;

  /// dt <= 0 selects the default 0.5 dx. dt is shrunk so that steps * dt == t_end.
  /// Throws std::invalid_argument when nx < 3 or dt > dx.
  static Grid1D make(double length, int nx, double t_end, double dt = 0.0);

  double x(int i) const { return i * dx; }
  std::vector<double> nodes() const;

  /// Steps between stored snapshots for a snapshot interval; 0 when interval <= 0.
  long snapshot_stride(double interval) const;
};

struct FieldState {
  std::vector<double> u;
  std::vector<double> v;
  double time = 0.0;
};

/// Which form of the tapered equation is integrated. `tapered` integrates the
/// mass/damping form in w = e^{-lambda x/2} u and maps back; for non-ESJJ
/// kinds both are the same equation.
enum class Formulation { direct, tapered };

struct IntegrateOptions {
  /// Time between stored snapshots; <= 0 stores only the initial and final states.
  double snapshot_interval = 0.0;
  Formulation formulation = Formulation::direct;
  /// Called with every stored snapshot.
  std::function<void(const FieldState&)> observer;
};

/// Explicit coefficients of one step: the constant-coefficient operator
///   v_t = eps v_xx + u_xx - damping v - drift (u_x + eps v_x) - mass u - f.
struct FdOperator {
  double epsilon = 0.0;
  double damping = 0.0;
  double drift = 0.0;
  double mass = 0.0;
};

/// One time step. Velocity-Verlet in the explicit (u-dependent) terms,
/// Crank-Nicolson in the velocity terms eps v_xx, damping v and eps drift v_x,
/// which costs two tridiagonal-sized operations per step.
FieldState step(const FieldState& state, const JunctionSpec& spec, const ProblemData& data, const Grid1D& grid,
                long step_index = 0);

/// Repeated step() from (h0, h1) to grid.t_end.
std::vector<FieldState> integrate(const JunctionSpec& spec, const ProblemData& data, const Grid1D& grid,
                                  const IntegrateOptions& options = {});

FieldState initial_state(const ProblemData& data, const Grid1D& grid);

/// Trapezoidal \int [v^2/2 + u_x^2/2 + 1 - cos u] dx with u_x taken per cell.
double energy(const FieldState& state, const Grid1D& grid);

/// Position where u crosses `level` (first crossing from the left, linear
/// interpolation); NaN if it never does.
double crossing_position(const FieldState& state, const Grid1D& grid, double level);

/// Travelling sine-Gordon kink 4 atan(exp((x - x0 - c t) / sqrt(1 - c^2))).
struct Kink {
  double center = 0.0;
  double velocity = 0.0;

  double u(double x, double t) const;
  double u_t(double x, double t) const;
  double energy() const;  // 8 / sqrt(1 - c^2)
};

}  // namespace jjlab
