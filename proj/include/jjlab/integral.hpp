#pragma once

// Picard iteration on the two integral forms of the Dirichlet problem for the
// tapered junction equation
//   (d_xx - lambda d_x)(eps u_t + u) - d_t(u_t + alpha u) = F(x, t, u):
//
// * homogeneous boundary data, through the sine-series Green function
//   (each mode propagated exactly between grid times);
// * general boundary data, through the fundamental solution K of L_R and its
//   image sum theta, applied to w = e^{-lambda x/2} u:
//     w = \int G w0 + \int\int G F_R - 2 eps \int theta_x(x, t - tau) g1
//         + 2 eps \int theta_x(x - L, t - tau) e^{-lambda L/2} g2,
//   G(x, xi, s) = theta(x - xi, s) - theta(x + xi, s),
//   F_R = e^{-beta t} (w1 - eps w0'' + a w0) - \int_0^t e^{-beta (t - tau)} f1 dtau,
//   f1 = e^{-lambda x/2} F(x, t, e^{lambda x/2} w).

#include <vector>

#include "jjlab/fd_solver.hpp"
#include "jjlab/model.hpp"

namespace jjlab {

struct PicardConfig {
  int max_iterations = 60;
  /// Sup-norm change between iterates that ends the iteration.
  double fix_tol = 1e-10;
  /// Length of the marching windows; the iteration restarts on each.
  double window_length = 1.0;
  /// Gauss nodes per time cell for the time convolutions of the theta path.
  int quad_nodes = 3;
  /// Absolute tolerance of the theta functionals.
  double quad_tol = 1e-9;
  /// Keep the initial / source / boundary split for decay_report.
  bool bookkeeping = true;
  double snapshot_interval = 0.0;

  void validate() const;
};

/// Physical-variable terms of the representation at one snapshot time.
struct TermSnapshot {
  double time = 0.0;
  std::vector<double> initial;
  std::vector<double> source;
  std::vector<double> boundary;
};

struct PicardResult {
  /// Physical phase u; v is u_t (exact modal value on the homogeneous path,
  /// central difference of the trajectory on the theta path).
  std::vector<FieldState> snapshots;
  /// Empty unless the run kept bookkeeping.
  std::vector<TermSnapshot> terms;
  /// Picard iterations used on each window.
  std::vector<int> iterations;
  /// u at every grid time.
  std::vector<std::vector<double>> trajectory;
};

/// Series form with g1 = g2 = 0. F is source_term(spec, ...) in data.source mode
/// plus data.forcing. Throws NonContractionError when the iterate change grows
/// three times in a row or max_iterations is exhausted.
PicardResult picard_solve_homogeneous(const ProblemData& data, const JunctionSpec& spec, const PicardConfig& cfg,
                                      const Grid1D& grid);

/// Theta form. `kernel` must be esjj_to_integro(spec.alpha, spec.epsilon,
/// spec.drift()) and lie in the positivity regime (RegimeError otherwise).
PicardResult picard_solve_boundary(const ProblemData& data, const JunctionSpec& spec, const KernelParams& kernel,
                                   const PicardConfig& cfg, const Grid1D& grid);

/// sup |RHS[u] - u| over the stored trajectory, with RHS applied once over the
/// whole time interval (no windows).
double homogeneous_fixed_point_residual(const PicardResult& result, const ProblemData& data,
                                        const JunctionSpec& spec, const Grid1D& grid);
double boundary_fixed_point_residual(const PicardResult& result, const ProblemData& data, const JunctionSpec& spec,
                                     const KernelParams& kernel, const PicardConfig& cfg, const Grid1D& grid);

/// g1 sinh(s (L - x)) / sinh(s L) + g2 sinh(s x) / sinh(s L), s = lambda / 2; the
/// linear interpolant when lambda = 0. This is the t -> infinity limit of the
/// tapered variable w when its right boundary value tends to g2.
double asymptotic_profile(double g1_inf, double g2_inf, double lambda, double length, double x);

struct TermSet {
  bool initial = true;
  bool source = true;
  bool boundary = true;
};

/// Sup-norm of each requested term per snapshot; unrequested columns stay empty.
/// `total` is sup |initial + source + boundary - limit|. A non-empty `limit`
/// (nodal, physical) is subtracted from the boundary term.
struct DecayTrace {
  std::vector<double> t;
  std::vector<double> initial;
  std::vector<double> source;
  std::vector<double> boundary;
  std::vector<double> total;
};

DecayTrace decay_report(const PicardResult& result, TermSet components = {},
                        const std::vector<double>& limit = {});

}  // namespace jjlab
