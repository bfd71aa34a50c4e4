#include "jjlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jjlab/errors.hpp"

namespace jjlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_series_spec(const JunctionSpec& spec) {
  if (!(spec.epsilon > 0.0)) throw DomainError("the Green series needs epsilon > 0");
  if (!(spec.length > 0.0)) throw DomainError("the Green series needs L > 0");
}

void require_inside(double x, double length, const char* name) {
  const double tol = 1e-12 * length;
  if (!(x >= -tol && x <= length + tol)) {
    std::ostringstream os;
    os << name << " = " << x << " outside [0, " << length << "]";
    throw DomainError(os.str());
  }
}

}  // namespace

ModeCoefficients mode_coeffs(int n, double length, double lambda, double alpha, double epsilon, double reaction) {
  if (n < 1) throw std::invalid_argument("mode index must be >= 1");
  if (!(length > 0.0)) throw std::invalid_argument("length must be > 0");
  ModeCoefficients c;
  c.n = n;
  c.gamma_n = n * kPi / length;
  const double b = c.gamma_n * c.gamma_n + 0.25 * lambda * lambda;
  c.g_n = 0.5 * (alpha + epsilon * b);
  c.b_n = b + reaction;
  c.omega_sq = c.g_n * c.g_n - c.b_n;
  return c;
}

ModalResponse modal_response(const ModeCoefficients& c, double t) {
  const double g = c.g_n;
  const double w2 = c.omega_sq;
  if (t == 0.0) return {0.0, 1.0};
  if (std::abs(w2) * t * t < 1e-8) {
    // |omega| t < 1e-4: sinh(omega t)/omega and cosh(omega t) by their series in omega^2.
    const double z = w2 * t * t;
    const double s = t * (1.0 + z / 6.0 * (1.0 + z / 20.0 * (1.0 + z / 42.0)));
    const double ch = 1.0 + z / 2.0 * (1.0 + z / 12.0 * (1.0 + z / 30.0));
    const double e = std::exp(-g * t);
    return {e * s, e * (ch - g * s)};
  }
  if (w2 < 0.0) {
    const double wh = std::sqrt(-w2);
    const double e = std::exp(-g * t);
    const double s = std::sin(wh * t) / wh;
    return {e * s, e * (std::cos(wh * t) - g * s)};
  }
  // Overdamped: e^{-r t} (1 - e^{-2 omega t}) / (2 omega) with r = g - omega = b / (g + omega).
  const double w = std::sqrt(w2);
  const double r = c.b_n / (g + w);
  const double er = std::exp(-r * t);
  const double one_minus = -std::expm1(-2.0 * w * t);
  const double G = er * one_minus / (2.0 * w);
  const double dG = er * (-r * one_minus + 2.0 * w * std::exp(-2.0 * w * t)) / (2.0 * w);
  return {G, dG};
}

namespace {

// sinh(a) sinh(b) / sinh(c) for 0 <= a, b and a + b <= c, without overflow.
double sinh_ratio(double a, double b, double c) {
  return 0.5 * std::exp(a + b - c) * std::expm1(-2.0 * a) * std::expm1(-2.0 * b) / -std::expm1(-2.0 * c);
}

// (2/L) sum_n sin(gamma_n x) sin(gamma_n xi) / (gamma_n^2 + sigma^2): the Dirichlet
// Green function of -d_xx + sigma^2.
double resolvent_sum(double x, double xi, double sigma, double length) {
  const double lo = std::min(x, xi), hi = std::max(x, xi);
  if (sigma == 0.0) return lo * (length - hi) / length;
  const double c = sigma * length;
  if (c < 1e-8) return lo * (length - hi) / length;
  return sinh_ratio(sigma * lo, sigma * (length - hi), c) / sigma;
}

// Large-n asymptote of G_n(t): e^{-t/eps} / (eps b_n).
double asymptote(const ModeCoefficients& c, double t, double epsilon) {
  return std::exp(-t / epsilon) / (epsilon * c.b_n);
}

}  // namespace

double green_tail_bound(int n_modes, double x, double t, const JunctionSpec& spec) {
  require_series_spec(spec);
  const double L = spec.length;
  const double lam = spec.drift();
  const double eps = spec.epsilon;
  const double alpha = spec.alpha;
  const auto c = mode_coeffs(n_modes, L, lam, alpha, eps);
  if (c.gamma_n * c.gamma_n * eps * eps < 8.0) return std::numeric_limits<double>::infinity();
  // For n > N the remainder G_n - e^{-t/eps}/(eps b_n) is at most
  //   e^{-r_N t} [2 (4/eps + alpha) / eps^2 + t c1 / eps] / b_n^2 + 2 e^{-eps b_n t/2} / (eps b_n),
  // r_N = b_N / (alpha + eps b_N), c1 = (2/eps)(2/eps + alpha); sums over n > N bounded
  // by L^4 / (3 pi^4 N^3) and a geometric series.
  const double r = c.b_n / (alpha + eps * c.b_n);
  const double c1 = (2.0 / eps) * (2.0 / eps + alpha);
  const double algebraic = std::exp(-r * t) * (2.0 * (4.0 / eps + alpha) / (eps * eps) + t * c1 / eps) *
                           std::pow(L / kPi, 4) / (3.0 * std::pow(static_cast<double>(n_modes), 3));
  const auto next = mode_coeffs(n_modes + 1, L, lam, alpha, eps);
  const double kappa = eps * kPi * kPi * t / (2.0 * L * L);
  const double fast = 2.0 / (eps * next.b_n) * std::exp(-0.5 * eps * next.b_n * t) /
                      -std::expm1(-kappa * (2.0 * n_modes + 2.0));
  return 2.0 / L * std::exp(0.5 * lam * x) * (algebraic + fast);
}

int green_mode_count(double x, double t, const JunctionSpec& spec, double tol, int max_modes) {
  require_series_spec(spec);
  if (!(t > 0.0)) throw DomainError("the Green series is refused at t <= 0; use the initial data directly");
  int n = 32;
  double bound = green_tail_bound(n, x, t, spec);
  while (!(bound < tol)) {
    if (n > max_modes / 2) {
      std::ostringstream os;
      os << "Green series tail bound " << bound << " at " << n << " modes exceeds tol " << tol << " (t = " << t
         << ")";
      throw SeriesTruncationError(os.str(), bound);
    }
    n *= 2;
    bound = green_tail_bound(n, x, t, spec);
  }
  return n;
}

double eval_G_truncated(double x, double xi, double t, const JunctionSpec& spec, int n_modes) {
  require_series_spec(spec);
  if (!(t > 0.0)) throw DomainError("the Green series is refused at t <= 0; use the initial data directly");
  require_inside(x, spec.length, "x");
  require_inside(xi, spec.length, "xi");
  const double L = spec.length;
  const double lam = spec.drift();
  const double eps = spec.epsilon;
  // The asymptotes are summed in closed form; the series carries G_n minus its asymptote.
  double acc = 0.0;
  for (int n = n_modes; n >= 1; --n) {
    const auto c = mode_coeffs(n, L, lam, spec.alpha, eps);
    acc += (modal_response(c, t).G - asymptote(c, t, eps)) * std::sin(c.gamma_n * xi) * std::sin(c.gamma_n * x);
  }
  const double closed = std::exp(-t / eps) / eps * resolvent_sum(x, xi, 0.5 * lam, L);
  return std::exp(0.5 * lam * x) * (2.0 / L * acc + closed);
}

double eval_G(double x, double xi, double t, const JunctionSpec& spec, double series_tol) {
  const int n = green_mode_count(x, t, spec, 0.5 * series_tol);
  return eval_G_truncated(x, xi, t, spec, n);
}

ModalBasis::ModalBasis(const Grid1D& grid, double lambda) : m_(grid.nx - 2) {
  sin_.resize(static_cast<std::size_t>(m_) * m_);
  taper_.resize(m_);
  for (int i = 1; i <= m_; ++i) taper_[i - 1] = std::exp(0.5 * lambda * grid.x(i));
  for (int n = 1; n <= m_; ++n)
    for (int i = 1; i <= m_; ++i)
      sin_[static_cast<std::size_t>(n - 1) * m_ + (i - 1)] = std::sin(kPi * n * i / (m_ + 1.0));
}

std::vector<double> ModalBasis::project(std::span<const double> physical) const {
  std::vector<double> w(m_);
  for (int i = 0; i < m_; ++i) w[i] = physical[i + 1] / taper_[i];
  std::vector<double> c(m_, 0.0);
  const double scale = 2.0 / (m_ + 1.0);
  for (int n = 0; n < m_; ++n) {
    const double* row = &sin_[static_cast<std::size_t>(n) * m_];
    double acc = 0.0;
    for (int i = 0; i < m_; ++i) acc += row[i] * w[i];
    c[n] = scale * acc;
  }
  return c;
}

std::vector<double> ModalBasis::synthesize(std::span<const double> coeffs) const {
  std::vector<double> u(m_ + 2, 0.0);
  for (int n = 0; n < m_; ++n) {
    const double cn = coeffs[n];
    if (cn == 0.0) continue;
    const double* row = &sin_[static_cast<std::size_t>(n) * m_];
    for (int i = 0; i < m_; ++i) u[i + 1] += cn * row[i];
  }
  for (int i = 0; i < m_; ++i) u[i + 1] *= taper_[i];
  return u;
}

ModalPropagator::ModalPropagator(std::vector<ModeCoefficients> modes, double dt)
    : modes_(std::move(modes)), dt_(dt) {
  step_.reserve(modes_.size());
  for (const auto& c : modes_) step_.push_back(modal_response(c, dt));
}

void ModalPropagator::advance(ModalState& s, std::span<const double> f0, std::span<const double> f1) const {
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    const double g = modes_[k].g_n;
    const double b = modes_[k].b_n;
    // particular solution A + B s of w'' + 2 g w' + b w = -(f0 + (f1 - f0) s / dt)
    const double B = -(f1[k] - f0[k]) / (dt_ * b);
    const double A = (-f0[k] - 2.0 * g * B) / b;
    const double e0 = s.w[k] - A;
    const double e1 = s.wt[k] - B;
    const auto& r = step_[k];
    s.w[k] = A + B * dt_ + (r.dG + 2.0 * g * r.G) * e0 + r.G * e1;
    s.wt[k] = B - b * r.G * e0 + r.dG * e1;
  }
}

ModalState ModalPropagator::free_response(const ModalState& s0, double t) const {
  ModalState out{std::vector<double>(modes_.size()), std::vector<double>(modes_.size())};
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    const auto r = modal_response(modes_[k], t);
    const double g = modes_[k].g_n;
    out.w[k] = (r.dG + 2.0 * g * r.G) * s0.w[k] + r.G * s0.wt[k];
    out.wt[k] = -modes_[k].b_n * r.G * s0.w[k] + r.dG * s0.wt[k];
  }
  return out;
}

std::vector<ModeCoefficients> grid_modes(const Grid1D& grid, const JunctionSpec& spec, double reaction) {
  std::vector<ModeCoefficients> out;
  out.reserve(grid.nx - 2);
  for (int n = 1; n <= grid.nx - 2; ++n)
    out.push_back(mode_coeffs(n, grid.length, spec.drift(), spec.alpha, spec.epsilon, reaction));
  return out;
}

LinearSplit linear_source(const JunctionSpec& spec, const ProblemData& data) {
  LinearSplit s;
  switch (data.source) {
    case SourceMode::nonlinear:
      throw UnsupportedOperation("the linear solvers need source = linearized or none");
    case SourceMode::none:
      s.known = data.forcing;
      return s;
    case SourceMode::linearized:
      if (spec.kind == JunctionKind::MICROSHORT)
        throw UnsupportedOperation("a microshort makes the linearized reaction x-dependent; use the fd solver");
      s.reaction = 1.0;
      s.known = [spec, forcing = data.forcing](double x, double t) {
        double f = source_term(spec, x, t, 0.0, 0.0, SourceMode::linearized);
        if (forcing) f += forcing(x, t);
        return f;
      };
      return s;
  }
  return s;
}

std::vector<FieldState> solve_linear_dirichlet(const ProblemData& data, const SpaceTimeFn& known_source,
                                               const JunctionSpec& spec, const Grid1D& grid,
                                               const SpectralOptions& options) {
  spec.validate();
  require_series_spec(spec);
  if (std::abs(grid.length - spec.length) > 1e-12 * spec.length)
    throw std::invalid_argument("grid length differs from junction length");
  const double lam = spec.drift();
  const ModalBasis basis(grid, lam);
  const ModalPropagator prop(grid_modes(grid, spec, options.reaction), grid.dt);
  const int nx = grid.nx;

  auto check_boundary = [&](double t) {
    if (data.g1(t) != 0.0 || data.g2(t) != 0.0)
      throw std::invalid_argument("solve_linear_dirichlet needs g1 = g2 = 0");
  };
  auto modal_source = [&](double t) {
    std::vector<double> f(nx, 0.0);
    if (known_source)
      for (int i = 1; i < nx - 1; ++i) f[i] = known_source(grid.x(i), t);
    return basis.project(f);
  };

  std::vector<double> u0(nx), u1(nx);
  for (int i = 0; i < nx; ++i) {
    u0[i] = data.h0(grid.x(i));
    u1[i] = data.h1(grid.x(i));
  }
  ModalState s{basis.project(u0), basis.project(u1)};

  std::vector<FieldState> out;
  auto emit = [&](double t) {
    FieldState f;
    f.time = t;
    f.u = basis.synthesize(s.w);
    f.v = basis.synthesize(s.wt);
    out.push_back(std::move(f));
  };
  check_boundary(0.0);
  out.push_back({u0, u1, 0.0});
  out.back().u.front() = out.back().u.back() = 0.0;
  out.back().v.front() = out.back().v.back() = 0.0;
  if (grid.steps == 0) return out;

  const long every = grid.snapshot_stride(options.snapshot_interval);
  std::vector<double> f0 = modal_source(0.0);
  for (long k = 1; k <= grid.steps; ++k) {
    const double t = k * grid.dt;
    check_boundary(t);
    std::vector<double> f1 = modal_source(t);
    prop.advance(s, f0, f1);
    f0 = std::move(f1);
    if (k == grid.steps || (every > 0 && k % every == 0)) emit(t);
  }
  return out;
}

}  // namespace jjlab
