#include "jjlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jjlab/bessel.hpp"
#include "jjlab/errors.hpp"
#include "jjlab/quadrature.hpp"

namespace jjlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.77245385090551602730;
constexpr double kHalfPi = 0.5 * kPi;

// Antiderivatives of h in z: H1(0) = H2(0) = 0.
double heat_H1(double z, double c) { return 0.5 * std::erf(z / c); }

double heat_H2(double z, double c) {
  const double r = z / c;
  return 0.5 * (z * std::erf(r) + c / kSqrtPi * std::expm1(-r * r));
}

void require_time(double t) {
  if (!(t > 0.0)) throw DomainError("kernel evaluation needs t > 0");
}

// Weight of the memory integral after y = t sin^2(phi):
// m(t, y) dy = 2 t sqrt(b) sin^2(phi) e^{-a t sin^2 - beta t cos^2} J1(sqrt(b) t sin 2phi) dphi.
double memory_weight(double phi, double t, const KernelParams& p) {
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double sb = std::sqrt(p.b);
  return 2.0 * t * sb * s * s * std::exp(-p.a * t * s * s - p.beta * t * c * c) * bessel_j1(sb * t * 2.0 * s * c);
}

}  // namespace

double heat_functional(HeatFunctional kind, double z, double y, double epsilon, double width) {
  const double c = 2.0 * std::sqrt(epsilon * y);
  switch (kind) {
    case HeatFunctional::value: {
      const double r = z / c;
      return std::exp(-r * r) / (kSqrtPi * c);
    }
    case HeatFunctional::derivative: {
      const double r = z / c;
      return -2.0 * z / (c * c) * std::exp(-r * r) / (kSqrtPi * c);
    }
    case HeatFunctional::hat:
      return (heat_H2(z + width, c) - 2.0 * heat_H2(z, c) + heat_H2(z - width, c)) / width;
    case HeatFunctional::left_half:
      return heat_H1(z, c) - (heat_H2(z, c) - heat_H2(z - width, c)) / width;
    case HeatFunctional::right_half:
      return -heat_H1(z, c) + (heat_H2(z + width, c) - heat_H2(z, c)) / width;
  }
  return 0.0;
}

void require_positive_regime(const KernelParams& p) {
  if (!p.positive()) {
    std::ostringstream os;
    os << "kernel parameters a = " << p.a << ", b = " << p.b << ", beta = " << p.beta << ", eps = " << p.epsilon
       << " are outside the regime a, b, beta, eps > 0 where the fundamental solution and its bound hold";
    throw RegimeError(os.str());
  }
}

double K_bound(double x, double t, const KernelParams& p) {
  require_time(t);
  const double gauss = std::exp(-x * x / (4.0 * p.epsilon * t)) / (2.0 * std::sqrt(kPi * p.epsilon * t));
  const double ea = std::exp(-p.a * t);
  const double d = p.beta - p.a;
  // (e^{-a t} - e^{-beta t}) / (beta - a) = e^{-a t} (1 - e^{-d t}) / d
  const double ratio = d == 0.0 ? t * ea : ea * (-std::expm1(-d * t)) / d;
  return gauss * (ea + p.b * t * ratio);
}

int theta_image_count(double max_offset, double t, const KernelParams& p, double period_length, double tol,
                      HeatFunctional kind, double width) {
  require_time(t);
  const double zmax = std::abs(max_offset) + width;
  auto term = [&](int n) {
    const double d = 2.0 * n * period_length - zmax;
    if (d <= 0.0) return std::numeric_limits<double>::infinity();
    double v = K_bound(d, t, p);
    if (kind == HeatFunctional::derivative) v *= 1.0 + (d + 2.0 * zmax) / (2.0 * p.epsilon * t);
    if (width > 0.0) v *= std::max(width, 1.0);
    return v;
  };
  for (int n = 0; n < 100000; ++n) {
    const double t1 = term(n + 1);
    const double t2 = term(n + 2);
    if (t1 < 0.25 * tol && t2 <= 0.5 * t1) return n;
  }
  throw SeriesTruncationError("theta image sum did not reach its tail bound", term(100001));
}

namespace {

double width_factor(double w) { return std::max(w, 1.0); }

// Images n = 1..N on each side so the omitted ones contribute below tol at every
// offset |z| <= zmax (after reduction to [-L, L]).
int heat_image_count(double zmax, double w, double y, double eps, double period_length, double tol,
                     HeatFunctional kind) {
  const double c = 4.0 * eps * y;
  auto term = [&](int n) {
    const double d = 2.0 * n * period_length - zmax - w;
    if (d <= 0.0) return std::numeric_limits<double>::infinity();
    double v = width_factor(w) * std::exp(-d * d / c) / (kSqrtPi * std::sqrt(c));
    if (kind == HeatFunctional::derivative) v *= 1.0 + 2.0 * (d + 2.0 * zmax + 2.0 * w) / c;
    return v;
  };
  for (int n = 0;; ++n) {
    const double t1 = term(n + 1);
    if (t1 < 0.125 * tol && term(n + 2) <= 0.5 * t1) return n;
  }
}

// Fourier modes k = 1..K of the 2L-periodised heat kernel so that the omitted
// ones contribute below tol.
int heat_fourier_count(double w, double y, double eps, double period_length, double tol) {
  const double q = eps * y * kPi * kPi / (period_length * period_length);
  for (int k = 0;; ++k) {
    const double kk = k + 1.0;
    const double kap = kPi * kk / period_length;
    const double term = std::exp(-q * kk * kk) * std::max({1.0, kap, w}) / period_length;
    const double ratio = std::exp(-q * (2.0 * kk + 1.0));
    if (ratio < 1.0 && term / (1.0 - ratio) < 0.25 * tol) return k;
    if (k > 1000000) throw SeriesTruncationError("periodised heat kernel: Fourier series did not converge", term);
  }
}

// (1 - cos x) / x^2 and (x - sin x) / x^2, accurate for small x.
double one_minus_cos_over_sq(double x) {
  const double h = std::sin(0.5 * x);
  return x == 0.0 ? 0.5 : 2.0 * h * h / (x * x);
}

double x_minus_sin_over_sq(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return x / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
  }
  return (x - std::sin(x)) / (x * x);
}

// Periodised functional at offsets z (already reduced to [-L, L]) at heat time y.
class PeriodisedHeat {
 public:
  PeriodisedHeat(std::span<const double> z, HeatFunctional kind, double width, double eps, double period_length)
      : z_(z), kind_(kind), w_(width), eps_(eps), L_(period_length) {
    for (double v : z) zmax_ = std::max(zmax_, std::abs(v));
  }

  void eval(double y, double tol, std::span<double> out) const {
    if (L_ <= 0.0) {
      for (std::size_t k = 0; k < z_.size(); ++k) out[k] = heat_functional(kind_, z_[k], y, eps_, w_);
      return;
    }
    const int n_img = heat_image_count(zmax_, w_, y, eps_, L_, tol, kind_);
    if (n_img <= 2) {
      images(y, n_img, out);
      return;
    }
    const int n_four = heat_fourier_count(w_, y, eps_, L_, tol);
    if (n_four < 2 * n_img + 1)
      fourier(y, n_four, out);
    else
      images(y, n_img, out);
  }

 private:
  void images(double y, int n_img, std::span<double> out) const {
    const double shift = 2.0 * L_;
    for (std::size_t k = 0; k < z_.size(); ++k) {
      double acc = heat_functional(kind_, z_[k], y, eps_, w_);
      for (int n = 1; n <= n_img; ++n) {
        acc += heat_functional(kind_, z_[k] + n * shift, y, eps_, w_);
        acc += heat_functional(kind_, z_[k] - n * shift, y, eps_, w_);
      }
      out[k] = acc;
    }
  }

  // P(z) = (1/2L) [c_0 + 2 sum_k e^{-eps y kappa_k^2} (C_k cos(kappa_k z) + S_k sin(kappa_k z))]
  // with the cosine/sine weights of the functional.
  void fourier(double y, int n_four, std::span<double> out) const {
    const double inv2L = 0.5 / L_;
    double c0 = 0.0;
    switch (kind_) {
      case HeatFunctional::value: c0 = 1.0; break;
      case HeatFunctional::derivative: c0 = 0.0; break;
      case HeatFunctional::hat: c0 = w_; break;
      case HeatFunctional::left_half:
      case HeatFunctional::right_half: c0 = 0.5 * w_; break;
    }
    coef_c_.assign(n_four, 0.0);
    coef_s_.assign(n_four, 0.0);
    for (int k = 1; k <= n_four; ++k) {
      const double kap = kPi * k / L_;
      const double q = 2.0 * std::exp(-eps_ * y * kap * kap);
      const double kw = kap * w_;
      double c = 0.0, sn = 0.0;
      switch (kind_) {
        case HeatFunctional::value: c = 1.0; break;
        case HeatFunctional::derivative: sn = -kap; break;
        case HeatFunctional::hat: c = 2.0 * w_ * one_minus_cos_over_sq(kw); break;
        case HeatFunctional::left_half:
          c = w_ * one_minus_cos_over_sq(kw);
          sn = w_ * x_minus_sin_over_sq(kw);
          break;
        case HeatFunctional::right_half:
          c = w_ * one_minus_cos_over_sq(kw);
          sn = -w_ * x_minus_sin_over_sq(kw);
          break;
      }
      coef_c_[k - 1] = q * c;
      coef_s_[k - 1] = q * sn;
    }
    const double step = kPi / L_;
    for (std::size_t j = 0; j < z_.size(); ++j) {
      const double c1 = std::cos(step * z_[j]);
      const double s1 = std::sin(step * z_[j]);
      double ck = c1, sk = s1, acc = c0;
      for (int k = 0; k < n_four; ++k) {
        acc += coef_c_[k] * ck + coef_s_[k] * sk;
        const double cn = ck * c1 - sk * s1;
        sk = sk * c1 + ck * s1;
        ck = cn;
      }
      out[j] = inv2L * acc;
    }
  }

  std::span<const double> z_;
  HeatFunctional kind_;
  double w_;
  double eps_;
  double L_;
  double zmax_ = 0.0;
  mutable std::vector<double> coef_c_, coef_s_;
};

double reduce_period(double x, double period_length) {
  const double p = 2.0 * period_length;
  return x - p * std::round(x / p);
}

}  // namespace

std::vector<double> theta_functional(std::span<const double> offsets, double t, const KernelParams& p,
                                     double period_length, HeatFunctional kind, double width, double quad_tol) {
  require_positive_regime(p);
  require_time(t);
  const std::size_t dim = offsets.size();
  std::vector<double> z(offsets.begin(), offsets.end());
  if (period_length > 0.0)
    for (auto& v : z) v = reduce_period(v, period_length);
  const PeriodisedHeat heat_sum(z, kind, width, p.epsilon, period_length);

  // Total mass of |m(t, .)| (from |J1(x)| <= x/2) sets the per-y tolerance.
  const double d = p.beta - p.a;
  const double ea = std::exp(-p.a * t);
  const double mass = p.b * t * (d == 0.0 ? t * ea : ea * (-std::expm1(-d * t)) / d);
  const double tol_heat = 0.05 * quad_tol / std::max(ea, 1e-300);
  const double tol_mem = 0.05 * quad_tol / std::max(mass, 1e-300);

  std::vector<double> heat(dim);
  heat_sum.eval(t, std::min(tol_heat, 1.0), heat);
  auto integrand = [&](double phi, std::span<double> out) {
    const double w = memory_weight(phi, t, p);
    if (w == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const double s = std::sin(phi);
    heat_sum.eval(t * s * s, std::min(tol_mem, 1.0), out);
    for (auto& v : out) v *= w;
  };
  const auto mem = quad::integrate_vec(integrand, dim, 0.0, kHalfPi, 0.9 * quad_tol, 4000);
  std::vector<double> out(dim);
  for (std::size_t k = 0; k < dim; ++k) out[k] = ea * heat[k] - mem[k];
  return out;
}

double eval_K(double x, double t, const KernelParams& p, double quad_tol) {
  require_positive_regime(p);
  require_time(t);
  const double z[] = {x};
  return theta_functional(z, t, p, 0.0, HeatFunctional::value, 0.0, quad_tol)[0];
}

double eval_K_x(double x, double t, const KernelParams& p, double quad_tol) {
  require_positive_regime(p);
  require_time(t);
  const double z[] = {x};
  return theta_functional(z, t, p, 0.0, HeatFunctional::derivative, 0.0, quad_tol)[0];
}

double eval_theta(double x, double t, const KernelParams& p, double period_length, double quad_tol) {
  if (!(period_length > 0.0)) throw DomainError("theta needs a positive period length");
  const double z[] = {std::abs(reduce_period(x, period_length))};
  return theta_functional(z, t, p, period_length, HeatFunctional::value, 0.0, quad_tol)[0];
}

double eval_theta_x(double x, double t, const KernelParams& p, double period_length, double quad_tol) {
  if (!(period_length > 0.0)) throw DomainError("theta needs a positive period length");
  const double r = reduce_period(x, period_length);
  const double z[] = {std::abs(r)};
  const double v = theta_functional(z, t, p, period_length, HeatFunctional::derivative, 0.0, quad_tol)[0];
  return r < 0.0 ? -v : v;
}

namespace {

template <class KFn>
double discrete_residual(const ResidualWindow& w, const KernelParams& p, double h, KFn&& K, bool with_memory) {
  double sup = 0.0;
  for (int it = 0; it < w.nt; ++it) {
    const double t = w.nt > 1 ? w.t_lo + (w.t_hi - w.t_lo) * it / (w.nt - 1) : w.t_lo;
    for (int ix = 0; ix < w.nx; ++ix) {
      const double x = w.nx > 1 ? w.x_lo + (w.x_hi - w.x_lo) * ix / (w.nx - 1) : w.x_lo;
      const double k0 = K(x, t);
      const double kt = (K(x, t + h) - K(x, t - h)) / (2.0 * h);
      const double kxx = (K(x + h, t) - 2.0 * k0 + K(x - h, t)) / (h * h);
      double r = kt - p.epsilon * kxx + p.a * k0;
      if (with_memory) {
        // \int_0^t e^{-beta (t - s)} K(x, s) ds with s = t u^2
        auto f = [&](double u) {
          if (u == 0.0) return 0.0;
          return 2.0 * t * u * std::exp(-p.beta * t * (1.0 - u * u)) * K(x, t * u * u);
        };
        r += p.b * quad::integrate(f, 0.0, 1.0, 1e-12, 400).value;
      }
      sup = std::max(sup, std::abs(r));
    }
  }
  return sup;
}

}  // namespace

double residual_LR(const ResidualWindow& window, const KernelParams& p, double h) {
  require_positive_regime(p);
  auto K = [&p](double x, double t) { return eval_K(x, t, p, 1e-14); };
  return discrete_residual(window, p, h, K, true);
}

double residual_damped_heat(const ResidualWindow& window, const KernelParams& p, double h) {
  auto K = [&p](double x, double t) {
    return std::exp(-p.a * t) * heat_functional(HeatFunctional::value, x, t, p.epsilon);
  };
  return discrete_residual(window, p, h, K, false);
}

}  // namespace jjlab
