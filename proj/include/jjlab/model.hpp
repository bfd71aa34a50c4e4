#pragma once

// Junction model catalog, the maps onto the integro-differential operator
//   L_R u = u_t - eps u_xx + a u + b \int_0^t e^{-beta (t - s)} u(x, s) ds,
// and the exponential taper change of variables.

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jjlab {

enum class JunctionKind { SGE, PSGE, FIELD_FORCED, MICROSHORT, ESJJ };

std::string_view to_string(JunctionKind kind);
JunctionKind junction_kind_from_string(std::string_view name);

/// Physical description of one junction model. Coefficients that the chosen
/// kind does not use must be zero; validate() enforces this.
struct JunctionSpec {
  JunctionKind kind = JunctionKind::SGE;
  double epsilon = 0.0;       // surface (longitudinal) loss, multiplies u_xxt
  double alpha = 0.0;         // shunt loss, multiplies u_t
  double gamma = 0.0;         // bias current
  double b_field = 0.0;       // field amplitude of the -b cos(kx) forcing
  double k_mode = 0.0;        // field wavenumber
  double mu = 0.0;            // microshort current density
  double x_ms = 0.0;          // microshort location
  double lambda_taper = 0.0;  // taper rate of the exponentially shaped junction
  double length = 1.0;

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  /// Drift coefficient of the u_x and eps u_xt terms (nonzero only for ESJJ).
  double drift() const { return kind == JunctionKind::ESJJ ? lambda_taper : 0.0; }

  bool operator==(const JunctionSpec&) const = default;
};

/// Fills defaults consistent with `kind` (x_ms = L/2 for a microshort).
JunctionSpec make_junction(JunctionKind kind, double length);

/// How the sin u nonlinearity enters the right-hand side.
enum class SourceMode {
  nonlinear,   // sin u
  linearized,  // sin u replaced by u
  none         // f == 0 (linear, source-free problem)
};

std::string_view to_string(SourceMode mode);
SourceMode source_mode_from_string(std::string_view name);

/// Right-hand side f(x, t, u) of the unified form L u = f. For MICROSHORT the
/// Dirac mass is a spike of height 1/dx at the grid node nearest x_ms, so dx
/// must be the grid spacing the caller samples on.
double source_term(const JunctionSpec& spec, double x, double t, double u, double dx = 0.0,
                   SourceMode mode = SourceMode::nonlinear);

/// d f / d u, used by the linearized solvers.
double source_slope(const JunctionSpec& spec, double x, double u, double dx = 0.0,
                    SourceMode mode = SourceMode::nonlinear);

struct KernelParams {
  double a = 0.0;
  double b = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;

  bool positive() const { return a > 0.0 && b > 0.0 && beta > 0.0 && epsilon > 0.0; }
};

/// Result of a parameter map. Flags mark values outside the positivity
/// regime; they are informational, kernel evaluation is what refuses them.
struct MappedKernel {
  KernelParams params;
  bool a_nonpositive = false;
  bool b_nonpositive = false;

  bool flagged() const { return a_nonpositive || b_nonpositive; }
  std::string reason() const;
};

MappedKernel psge_to_integro(double alpha, double epsilon);
MappedKernel esjj_to_integro(double alpha, double epsilon, double lambda);

enum class TaperDirection { forward, inverse };

/// forward: e^{lambda x / 2} u(x); inverse: e^{-lambda x / 2} u(x).
std::vector<double> taper_transform(std::span<const double> u, std::span<const double> x, double lambda,
                                    TaperDirection direction);

/// Initial and boundary data of the Dirichlet problem on [0, L].
struct ProblemData {
  std::function<double(double)> h0 = [](double) { return 0.0; };
  std::function<double(double)> h1 = [](double) { return 0.0; };
  std::function<double(double)> g1 = [](double) { return 0.0; };
  std::function<double(double)> g2 = [](double) { return 0.0; };
  SourceMode source = SourceMode::nonlinear;
  /// Extra forcing added to f; empty means none. Used for manufactured solutions.
  std::function<double(double, double)> forcing;
  /// Set when g1 and g2 are known to vanish identically.
  bool homogeneous_boundary = true;

  /// Corner compatibility h0(0) = g1(0), h0(L) = g2(0). Returns warnings, never throws.
  std::vector<std::string> compatibility_warnings(double length, double tol = 1e-9) const;
};

/// Closed-form test field u(x, t) = p(x) e^{-c t} with polynomial p, used to
/// check the parameter maps against exact derivatives.
class ManufacturedField {
 public:
  ManufacturedField(std::vector<double> poly_coeffs, double decay);

  double u(double x, double t) const;
  double u_t(double x, double t) const;
  double u_tt(double x, double t) const;
  double u_xx(double x, double t) const;
  double u_xxt(double x, double t) const;
  /// \int_0^t e^{-beta (t - s)} u(x, s) ds and its time derivative.
  double memory(double x, double t, double beta) const;
  double memory_t(double x, double t, double beta) const;

 private:
  double p(double x) const;
  double p_xx(double x) const;
  std::vector<double> coeffs_;
  double decay_;
};

struct SampleGrid {
  int nx = 21;
  int nt = 11;
  double t_max = 2.0;
};

/// sup over the sample grid of |(d/dt + beta) L_R u + L3 u| where L3 is the
/// third-order operator of the model (the eps u_xxt - u_tt + u_xx - alpha u_t
/// form, with the tapered coefficients for ESJJ). Vanishes when the kernel
/// parameters are the image of the model under the corresponding map.
double verify_equivalence_residual(const KernelParams& kernel, const ManufacturedField& field,
                                   const JunctionSpec& model, const SampleGrid& sample = {});

}  // namespace jjlab
