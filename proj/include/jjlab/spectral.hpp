#pragma once

// Sine-series Green function of the tapered Dirichlet problem
//   (d_xx - lambda d_x)(eps u_t + u) - d_t(u_t + alpha u) = F   on [0, L],
// u = 0 at both ends. With u = e^{lambda x/2} w and w = sum w_n(t) sin(gamma_n x),
// each mode obeys w_n'' + 2 g_n w_n' + b_n w_n = -F_n, F_n the sine coefficient
// of e^{-lambda x/2} F.

#include <functional>
#include <span>
#include <vector>

#include "jjlab/fd_solver.hpp"
#include "jjlab/model.hpp"

namespace jjlab {

inline constexpr double kDefaultSeriesTol = 1e-8;

struct ModeCoefficients {
  int n = 1;
  double gamma_n = 0.0;
  double b_n = 0.0;
  double g_n = 0.0;
  double omega_sq = 0.0;  // g_n^2 - b_n, signed
};

/// `reaction` adds a linear term kappa w to the mode equation (b_n -> b_n + kappa,
/// g_n unchanged); the linearized source sin u ~ u enters with kappa = 1.
ModeCoefficients mode_coeffs(int n, double length, double lambda, double alpha, double epsilon,
                             double reaction = 0.0);

struct ModalResponse {
  double G = 0.0;
  double dG = 0.0;
};

/// G_n(t) = e^{-g t} sinh(omega t) / omega continued analytically through
/// omega_sq = 0, and its time derivative.
ModalResponse modal_response(const ModeCoefficients& c, double t);

/// Number of modes N for which the omitted tail of the series at (x, t) is
/// below tol. The large-n asymptote e^{-t/eps} / (eps b_n) of G_n is summed in
/// closed form (it is the Dirichlet resolvent of -d_xx + lambda^2/4), so the
/// tail is that of G_n minus its asymptote, O(N^{-3}); the bound is valid once
/// gamma_N^2 >= 8 / eps^2. Starts at 32 modes and doubles; throws
/// SeriesTruncationError past max_modes.
int green_mode_count(double x, double t, const JunctionSpec& spec, double tol, int max_modes = 1 << 22);

/// Tail bound used by green_mode_count for a given N.
double green_tail_bound(int n_modes, double x, double t, const JunctionSpec& spec);

/// (2/L) e^{lambda x/2} sum_n G_n(t) sin(gamma_n xi) sin(gamma_n x), truncated at
/// N from green_mode_count at tol / 2 after the asymptote subtraction.
double eval_G(double x, double xi, double t, const JunctionSpec& spec, double series_tol = kDefaultSeriesTol);
double eval_G_truncated(double x, double xi, double t, const JunctionSpec& spec, int n_modes);

/// Discrete sine basis on the interior nodes of a grid, in the tapered
/// variable: project() maps physical nodal values u_i to the coefficients of
/// e^{-lambda x/2} u, synthesize() maps back. The M = nx - 2 modes are exactly
/// invertible on the nodes (DST-I).
class ModalBasis {
 public:
  ModalBasis(const Grid1D& grid, double lambda);

  int modes() const { return m_; }
  std::vector<double> project(std::span<const double> physical) const;
  /// Nodal physical values, zero at both ends.
  std::vector<double> synthesize(std::span<const double> coeffs) const;

 private:
  int m_;
  std::vector<double> sin_;    // sin_[(n-1) * m_ + (i-1)]
  std::vector<double> taper_;  // e^{lambda x_i / 2}
};

struct ModalState {
  std::vector<double> w;
  std::vector<double> wt;
};

/// Exact one-step propagation of w'' + 2 g w' + b w = -F for every mode with
/// F linear in time across the step.
class ModalPropagator {
 public:
  ModalPropagator(std::vector<ModeCoefficients> modes, double dt);

  const std::vector<ModeCoefficients>& modes() const { return modes_; }
  void advance(ModalState& s, std::span<const double> f0, std::span<const double> f1) const;
  /// Free response at time t of the mode state (w, wt) given at time 0.
  ModalState free_response(const ModalState& s0, double t) const;

 private:
  std::vector<ModeCoefficients> modes_;
  double dt_;
  std::vector<ModalResponse> step_;
};

/// The modes of ModalBasis for a junction (lambda = spec.drift()).
std::vector<ModeCoefficients> grid_modes(const Grid1D& grid, const JunctionSpec& spec, double reaction = 0.0);

struct SpectralOptions {
  double snapshot_interval = 0.0;
  /// kappa in F = kappa u + known(x, t); 1 for the linearized sine source.
  double reaction = 0.0;
};

using SpaceTimeFn = std::function<double(double, double)>;

/// Series solution of the linear problem with homogeneous boundary data: the
/// h0 term c_n (G_n' + 2 g_n G_n), the h1 term d_n G_n and the time
/// convolution of G_n with the known source (linear in t between grid
/// times). Snapshots follow the same schedule as integrate().
std::vector<FieldState> solve_linear_dirichlet(const ProblemData& data, const SpaceTimeFn& known_source,
                                               const JunctionSpec& spec, const Grid1D& grid,
                                               const SpectralOptions& options = {});

/// Split of the source of data.source into kappa u + known(x, t), for the
/// linear solvers. Throws UnsupportedOperation for the nonlinear source and
/// for a microshort (x-dependent kappa).
struct LinearSplit {
  double reaction = 0.0;
  SpaceTimeFn known;
};
LinearSplit linear_source(const JunctionSpec& spec, const ProblemData& data);

}  // namespace jjlab
