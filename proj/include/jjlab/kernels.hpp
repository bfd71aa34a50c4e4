#pragma once

// Fundamental solution K of L_R, its Gaussian bound, and the periodised
// image sum theta(x, t) = sum_n K(x + 2 n L, t).
//
// K is written as a damped heat kernel minus a Bessel-weighted memory
// convolution of heat kernels,
//   K(x, t) = e^{-a t} h(x, t) - \int_0^t m(t, y) h(x, y) dy,
//   h(x, y) = e^{-x^2/(4 eps y)} / (2 sqrt(pi eps y)),
//   m(t, y) = sqrt(b y) e^{-a y - beta (t - y)} J1(2 sqrt(b y (t - y))) / sqrt(t - y),
// so every linear spatial functional of K (derivative, cell averages) is the
// same functional applied to h inside the y integral. The y integral is
// evaluated after y = t sin^2(phi), which removes the (t - y)^{-1/2} endpoint
// singularity.

#include <span>
#include <vector>

#include "jjlab/model.hpp"

namespace jjlab {

inline constexpr double kDefaultQuadTol = 1e-8;

/// Spatial functional applied to the heat kernel profile at offset z.
enum class HeatFunctional {
  value,       // h(z)
  derivative,  // d h / dz
  hat,         // \int h(s) max(0, 1 - |s - z| / w) ds
  left_half,   // \int_{z-w}^{z} h(s) (1 - (z - s) / w) ds
  right_half   // \int_{z}^{z+w} h(s) (1 - (s - z) / w) ds
};

double heat_functional(HeatFunctional kind, double z, double y, double epsilon, double width = 0.0);

/// Throws RegimeError unless a, b, beta, eps > 0.
void require_positive_regime(const KernelParams& params);

double eval_K(double x, double t, const KernelParams& params, double quad_tol = kDefaultQuadTol);
double eval_K_x(double x, double t, const KernelParams& params, double quad_tol = kDefaultQuadTol);

/// Gaussian envelope of |K|:
///   e^{-x^2/(4 eps t)} / (2 sqrt(pi eps t)) [e^{-a t} + b t (e^{-a t} - e^{-beta t}) / (beta - a)].
/// The bracket is evaluated through expm1, which also covers a == beta (b t^2 e^{-a t}).
double K_bound(double x, double t, const KernelParams& params);

/// Number of images N on each side so that the omitted terms of the image
/// sum at offsets |z| <= max_offset are below tol.
int theta_image_count(double max_offset, double t, const KernelParams& params, double period_length, double tol,
                      HeatFunctional kind = HeatFunctional::value, double width = 0.0);

double eval_theta(double x, double t, const KernelParams& params, double period_length,
                  double quad_tol = kDefaultQuadTol);
double eval_theta_x(double x, double t, const KernelParams& params, double period_length,
                    double quad_tol = kDefaultQuadTol);

/// Vectorised functional of theta at several offsets sharing one quadrature:
/// out[k] = sum_{|n| <= N} Phi[K](offsets[k] + 2 n L, t). Offsets are not
/// reduced modulo 2L.
std::vector<double> theta_functional(std::span<const double> offsets, double t, const KernelParams& params,
                                     double period_length, HeatFunctional kind, double width,
                                     double quad_tol = kDefaultQuadTol);

struct ResidualWindow {
  double x_lo = -2.0, x_hi = 2.0;
  int nx = 9;
  double t_lo = 0.1, t_hi = 1.0;
  int nt = 5;
};

/// sup over the window samples of |K_t - eps K_xx + a K + b \int_0^t e^{-beta(t-s)} K ds|
/// with central differences of step h for K_t and K_xx and adaptive quadrature
/// for the memory integral.
double residual_LR(const ResidualWindow& window, const KernelParams& params, double h);

/// The same discrete operator applied to the closed-form damped heat kernel
/// (the b = 0 fundamental solution), for comparison.
double residual_damped_heat(const ResidualWindow& window, const KernelParams& params, double h);

}  // namespace jjlab
