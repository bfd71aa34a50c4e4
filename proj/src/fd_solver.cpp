#include "jjlab/fd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jjlab/errors.hpp"

namespace jjlab {

Grid1D Grid1D::make(double length, int nx, double t_end, double dt) {
  if (nx < 3) throw std::invalid_argument("grid needs nx >= 3");
  if (!(length > 0.0)) throw std::invalid_argument("grid length must be > 0");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
  Grid1D g;
  g.nx = nx;
  g.length = length;
  g.dx = length / (nx - 1);
  g.t_end = t_end;
  double step = dt > 0.0 ? dt : 0.5 * g.dx;
  if (step > g.dx * (1.0 + 1e-12))
    throw std::invalid_argument("dt must not exceed dx (explicit wave part is CFL limited)");
  g.steps = t_end > 0.0 ? static_cast<long>(std::ceil(t_end / step - 1e-9)) : 0;
  g.dt = g.steps > 0 ? t_end / g.steps : step;
  return g;
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> x(nx);
  for (int i = 0; i < nx; ++i) x[i] = this->x(i);
  return x;
}

long Grid1D::snapshot_stride(double interval) const {
  if (!(interval > 0.0)) return 0;
  return std::max(1L, static_cast<long>(std::llround(interval / dt)));
}

namespace {

using SourceFn = std::function<double(int, double, double, double)>;
using TraceFn = std::function<double(double)>;

struct System {
  FdOperator op;
  SourceFn f;
  TraceFn left, right;
};

System direct_system(const JunctionSpec& spec, const ProblemData& data, const Grid1D& grid) {
  System s;
  s.op = {spec.epsilon, spec.alpha, spec.drift(), 0.0};
  const double dx = grid.dx;
  s.f = [&spec, &data, dx](int, double x, double t, double u) {
    double f = source_term(spec, x, t, u, dx, data.source);
    if (data.forcing) f += data.forcing(x, t);
    return f;
  };
  s.left = data.g1;
  s.right = data.g2;
  return s;
}

// w = e^{-lambda x/2} u solves eps w_xxt - w_tt + w_xx - (alpha + eps lambda^2/4) w_t - lambda^2/4 w
//   = e^{-lambda x/2} f(x, t, e^{lambda x/2} w).
System tapered_system(const JunctionSpec& spec, const ProblemData& data, const Grid1D& grid) {
  const double lam = spec.drift();
  System s;
  s.op = {spec.epsilon, spec.alpha + spec.epsilon * lam * lam / 4.0, 0.0, lam * lam / 4.0};
  const double dx = grid.dx;
  s.f = [&spec, &data, dx, lam](int, double x, double t, double w) {
    const double up = std::exp(0.5 * lam * x);
    double f = source_term(spec, x, t, up * w, dx, data.source);
    if (data.forcing) f += data.forcing(x, t);
    return f / up;
  };
  s.left = data.g1;
  const double scale = std::exp(-0.5 * lam * grid.length);
  s.right = [&data, scale](double t) { return scale * data.g2(t); };
  return s;
}

// u_xx - drift u_x - mass u - f at interior nodes.
void explicit_accel(const System& sys, const Grid1D& g, const std::vector<double>& u, double t,
                    std::vector<double>& acc) {
  const double idx2 = 1.0 / (g.dx * g.dx);
  const double i2dx = 0.5 / g.dx;
  for (int i = 1; i < g.nx - 1; ++i) {
    const double x = g.x(i);
    acc[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * idx2 - sys.op.drift * (u[i + 1] - u[i - 1]) * i2dx -
             sys.op.mass * u[i] - sys.f(i, x, t, u[i]);
  }
}

FieldState advance(const FieldState& s, const System& sys, const Grid1D& g, long index) {
  const int n = g.nx;
  const double dt = g.dt;
  const double h = 0.5 * dt;
  const double t0 = s.time;
  const double t1 = t0 + dt;
  const double idx2 = 1.0 / (g.dx * g.dx);
  const double i2dx = 0.5 / g.dx;
  const double eps = sys.op.epsilon;
  // B v = eps v_xx - damping v - eps drift v_x, second-order central.
  const double lo = eps * idx2 + eps * sys.op.drift * i2dx;  // coefficient of v[i-1]
  const double up = eps * idx2 - eps * sys.op.drift * i2dx;  // coefficient of v[i+1]
  const double di = -2.0 * eps * idx2 - sys.op.damping;

  std::vector<double> acc(n, 0.0);
  explicit_accel(sys, g, s.u, t0, acc);

  // Half step, implicit in B: (I - h B) v* = v + h acc.
  std::vector<double> vh(n);
  vh[0] = (sys.left(t1) - sys.left(t0)) / dt;
  vh[n - 1] = (sys.right(t1) - sys.right(t0)) / dt;
  {
    const int m = n - 2;
    std::vector<double> c(m), d(m);
    const double a_sub = -h * lo, b_diag = 1.0 - h * di, c_sup = -h * up;
    for (int k = 0; k < m; ++k) {
      const int i = k + 1;
      double rhs = s.v[i] + h * acc[i];
      if (i == 1) rhs -= a_sub * vh[0];
      if (i == n - 2) rhs -= c_sup * vh[n - 1];
      const double denom = b_diag - (k > 0 ? a_sub * c[k - 1] : 0.0);
      c[k] = c_sup / denom;
      d[k] = (rhs - (k > 0 ? a_sub * d[k - 1] : 0.0)) / denom;
    }
    for (int k = m - 1; k >= 0; --k) vh[k + 1] = d[k] - (k + 1 < m ? c[k] * vh[k + 2] : 0.0);
  }

  FieldState out;
  out.time = t1;
  out.u.resize(n);
  out.v.resize(n);
  for (int i = 1; i < n - 1; ++i) out.u[i] = s.u[i] + dt * vh[i];
  out.u[0] = sys.left(t1);
  out.u[n - 1] = sys.right(t1);

  explicit_accel(sys, g, out.u, t1, acc);
  for (int i = 1; i < n - 1; ++i) {
    const double bv = lo * vh[i - 1] + di * vh[i] + up * vh[i + 1];
    out.v[i] = vh[i] + h * (bv + acc[i]);
  }
  out.v[0] = (sys.left(t1 + h) - sys.left(t1 - h)) / dt;
  out.v[n - 1] = (sys.right(t1 + h) - sys.right(t1 - h)) / dt;

  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(out.u[i]) || !std::isfinite(out.v[i])) {
      std::ostringstream os;
      os << "solution diverged at step " << index << " (t = " << t1 << "); try a smaller dt than " << dt;
      throw DivergenceError(os.str(), index);
    }
  }
  return out;
}

FieldState to_tapered(const FieldState& s, const Grid1D& g, double lam) {
  FieldState w = s;
  for (int i = 0; i < g.nx; ++i) {
    const double e = std::exp(-0.5 * lam * g.x(i));
    w.u[i] *= e;
    w.v[i] *= e;
  }
  return w;
}

FieldState from_tapered(const FieldState& w, const Grid1D& g, double lam) {
  FieldState s = w;
  for (int i = 0; i < g.nx; ++i) {
    const double e = std::exp(0.5 * lam * g.x(i));
    s.u[i] *= e;
    s.v[i] *= e;
  }
  return s;
}

}  // namespace

FieldState step(const FieldState& state, const JunctionSpec& spec, const ProblemData& data, const Grid1D& grid,
                long step_index) {
  if (static_cast<int>(state.u.size()) != grid.nx || static_cast<int>(state.v.size()) != grid.nx)
    throw std::invalid_argument("state size does not match grid");
  return advance(state, direct_system(spec, data, grid), grid, step_index);
}

FieldState initial_state(const ProblemData& data, const Grid1D& grid) {
  FieldState s;
  s.u.resize(grid.nx);
  s.v.resize(grid.nx);
  for (int i = 0; i < grid.nx; ++i) {
    s.u[i] = data.h0(grid.x(i));
    s.v[i] = data.h1(grid.x(i));
  }
  return s;
}

std::vector<FieldState> integrate(const JunctionSpec& spec, const ProblemData& data, const Grid1D& grid,
                                  const IntegrateOptions& options) {
  spec.validate();
  if (std::abs(grid.length - spec.length) > 1e-12 * spec.length)
    throw std::invalid_argument("grid length differs from junction length");
  const bool tapered = options.formulation == Formulation::tapered && spec.drift() > 0.0;
  const double lam = spec.drift();
  const System sys = tapered ? tapered_system(spec, data, grid) : direct_system(spec, data, grid);

  std::vector<FieldState> out;
  auto emit = [&](const FieldState& s) {
    out.push_back(tapered ? from_tapered(s, grid, lam) : s);
    if (options.observer) options.observer(out.back());
  };

  FieldState s = initial_state(data, grid);
  if (tapered) s = to_tapered(s, grid, lam);
  emit(s);
  if (grid.steps == 0) return out;

  const long every = grid.snapshot_stride(options.snapshot_interval);
  for (long k = 1; k <= grid.steps; ++k) {
    s = advance(s, sys, grid, k);
    s.time = k * grid.dt;
    if (k == grid.steps || (every > 0 && k % every == 0)) emit(s);
  }
  return out;
}

double energy(const FieldState& state, const Grid1D& grid) {
  const int n = grid.nx;
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    e += w * (0.5 * state.v[i] * state.v[i] + 1.0 - std::cos(state.u[i]));
  }
  e *= grid.dx;
  for (int i = 0; i + 1 < n; ++i) {
    const double ux = (state.u[i + 1] - state.u[i]) / grid.dx;
    e += 0.5 * ux * ux * grid.dx;
  }
  return e;
}

double crossing_position(const FieldState& state, const Grid1D& grid, double level) {
  for (int i = 0; i + 1 < grid.nx; ++i) {
    const double a = state.u[i] - level;
    const double b = state.u[i + 1] - level;
    if (a == 0.0) return grid.x(i);
    if ((a < 0.0) != (b < 0.0)) return grid.x(i) + grid.dx * a / (a - b);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Kink::u(double x, double t) const {
  const double g = 1.0 / std::sqrt(1.0 - velocity * velocity);
  return 4.0 * std::atan(std::exp(g * (x - center - velocity * t)));
}

double Kink::u_t(double x, double t) const {
  const double g = 1.0 / std::sqrt(1.0 - velocity * velocity);
  const double z = g * (x - center - velocity * t);
  return -2.0 * velocity * g / std::cosh(z);
}

double Kink::energy() const { return 8.0 / std::sqrt(1.0 - velocity * velocity); }

}  // namespace jjlab
