#include "jjlab/integral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jjlab/errors.hpp"
#include "jjlab/kernels.hpp"
#include "jjlab/quadrature.hpp"
#include "jjlab/spectral.hpp"

namespace jjlab {

void PicardConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(fix_tol > 0.0)) throw std::invalid_argument("fix_tol must be > 0");
  if (!(window_length > 0.0)) throw std::invalid_argument("window_length must be > 0");
  if (quad_nodes < 1 || quad_nodes > 20) throw std::invalid_argument("quad_nodes must be in [1, 20]");
  if (!(quad_tol > 0.0)) throw std::invalid_argument("quad_tol must be > 0");
}

namespace {

using Vec = std::vector<double>;

double sup_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void require_finite(const Vec& u, long step, double t) {
  for (double v : u)
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integral solution became non-finite at step " << step << " (t = " << t
         << "); try a smaller dt or window_length";
      throw DivergenceError(os.str(), step);
    }
}

void require_grid(const JunctionSpec& spec, const Grid1D& grid) {
  if (std::abs(grid.length - spec.length) > 1e-12 * spec.length)
    throw std::invalid_argument("grid length differs from junction length");
}

/// Stops the iteration when the change grows three times in a row.
class ContractionGuard {
 public:
  ContractionGuard(double window_start, double window_length)
      : start_(window_start), length_(window_length) {}

  void observe(double diff) {
    growth_ = diff > prev_ ? growth_ + 1 : 0;
    prev_ = diff;
    if (growth_ >= 3) {
      std::ostringstream os;
      os << "Picard iterates stopped contracting on the window starting at t = " << start_
         << " (change " << diff << "); use a smaller window_length than " << length_;
      throw NonContractionError(os.str());
    }
  }

  [[noreturn]] void exhausted(int iterations, double diff) const {
    std::ostringstream os;
    os << "Picard iteration did not reach fix_tol in " << iterations << " iterations on the window starting at t = "
       << start_ << " (last change " << diff << "); use a smaller window_length than " << length_;
    throw NonContractionError(os.str());
  }

 private:
  double start_;
  double length_;
  double prev_ = std::numeric_limits<double>::infinity();
  int growth_ = 0;
};

Vec nodal_source(const JunctionSpec& spec, const ProblemData& data, const Grid1D& g, double t, const Vec& u) {
  Vec f(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    f[i] = source_term(spec, x, t, u[i], g.dx, data.source);
    if (data.forcing) f[i] += data.forcing(x, t);
  }
  return f;
}

bool has_source(const ProblemData& data) { return data.source != SourceMode::none || bool(data.forcing); }

std::vector<FieldState> snapshots_of(const std::vector<Vec>& u, const std::vector<Vec>& v, const Grid1D& g,
                                     double interval) {
  std::vector<FieldState> out;
  const long every = g.snapshot_stride(interval);
  const long n = static_cast<long>(u.size()) - 1;
  for (long k = 0; k <= n; ++k)
    if (k == 0 || k == n || (every > 0 && k % every == 0)) out.push_back({u[k], v[k], k * g.dt});
  return out;
}

std::vector<long> snapshot_indices(const Grid1D& g, double interval, long n) {
  std::vector<long> idx;
  const long every = g.snapshot_stride(interval);
  for (long k = 0; k <= n; ++k)
    if (k == 0 || k == n || (every > 0 && k % every == 0)) idx.push_back(k);
  return idx;
}

// ---------------------------------------------------------------------------
// Homogeneous boundary data: modal propagation.

struct ModalSetup {
  ModalBasis basis;
  ModalPropagator prop;
  ModalState start;
  Vec u0, u1;
};

ModalSetup modal_setup(const ProblemData& data, const JunctionSpec& spec, const Grid1D& grid) {
  for (long k = 0; k <= grid.steps; ++k) {
    const double t = k * grid.dt;
    if (data.g1(t) != 0.0 || data.g2(t) != 0.0)
      throw std::invalid_argument("picard_solve_homogeneous needs g1 = g2 = 0; use picard_solve_boundary");
  }
  ModalBasis basis(grid, spec.drift());
  ModalPropagator prop(grid_modes(grid, spec), grid.dt);
  Vec u0(grid.nx), u1(grid.nx);
  for (int i = 0; i < grid.nx; ++i) {
    u0[i] = data.h0(grid.x(i));
    u1[i] = data.h1(grid.x(i));
  }
  u0.front() = u0.back() = 0.0;
  u1.front() = u1.back() = 0.0;
  ModalState s{basis.project(u0), basis.project(u1)};
  return {std::move(basis), std::move(prop), std::move(s), std::move(u0), std::move(u1)};
}

}  // namespace

PicardResult picard_solve_homogeneous(const ProblemData& data, const JunctionSpec& spec, const PicardConfig& cfg,
                                      const Grid1D& grid) {
  cfg.validate();
  spec.validate();
  require_grid(spec, grid);
  auto setup = modal_setup(data, spec, grid);
  const auto& basis = setup.basis;
  const auto& prop = setup.prop;
  const int m = basis.modes();
  const long steps = grid.steps;
  const Vec zero(m, 0.0);

  std::vector<Vec> traj{setup.u0}, vtraj{setup.u1};
  PicardResult res;
  const long window = std::max(1L, static_cast<long>(std::llround(cfg.window_length / grid.dt)));
  ModalState start = setup.start;

  for (long n0 = 0; n0 < steps; n0 += window) {
    const long n1 = std::min(steps, n0 + window);
    const long len = n1 - n0;
    std::vector<Vec> cur(len + 1), next(len + 1), nextv(len + 1);
    cur[0] = traj[n0];
    {
      ModalState s = start;
      for (long j = 1; j <= len; ++j) {
        prop.advance(s, zero, zero);
        cur[j] = basis.synthesize(s.w);
      }
    }
    ContractionGuard guard(n0 * grid.dt, cfg.window_length);
    ModalState end;
    int it = 0;
    double diff = 0.0;
    for (;;) {
      ++it;
      if (it > cfg.max_iterations) guard.exhausted(cfg.max_iterations, diff);
      ModalState s = start;
      Vec fprev = has_source(data) ? basis.project(nodal_source(spec, data, grid, n0 * grid.dt, cur[0])) : zero;
      diff = 0.0;
      next[0] = cur[0];
      for (long j = 1; j <= len; ++j) {
        const double t = (n0 + j) * grid.dt;
        Vec fj = has_source(data) ? basis.project(nodal_source(spec, data, grid, t, cur[j])) : zero;
        prop.advance(s, fprev, fj);
        fprev = std::move(fj);
        next[j] = basis.synthesize(s.w);
        nextv[j] = basis.synthesize(s.wt);
        require_finite(next[j], n0 + j, t);
        diff = std::max(diff, sup_diff(next[j], cur[j]));
      }
      std::swap(cur, next);
      end = std::move(s);
      if (diff < cfg.fix_tol) break;
      guard.observe(diff);
    }
    res.iterations.push_back(it);
    for (long j = 1; j <= len; ++j) {
      traj.push_back(cur[j]);
      vtraj.push_back(nextv[j]);
    }
    start = std::move(end);
  }

  res.snapshots = snapshots_of(traj, vtraj, grid, cfg.snapshot_interval);
  if (cfg.bookkeeping) {
    const auto idx = snapshot_indices(grid, cfg.snapshot_interval, steps);
    for (long k : idx) {
      const auto free = prop.free_response(setup.start, k * grid.dt);
      TermSnapshot ts;
      ts.time = k * grid.dt;
      ts.initial = k == 0 ? traj[0] : basis.synthesize(free.w);
      ts.source.resize(grid.nx);
      for (int i = 0; i < grid.nx; ++i) ts.source[i] = traj[k][i] - ts.initial[i];
      ts.boundary.assign(grid.nx, 0.0);
      res.terms.push_back(std::move(ts));
    }
  }
  res.trajectory = std::move(traj);
  return res;
}

double homogeneous_fixed_point_residual(const PicardResult& result, const ProblemData& data,
                                        const JunctionSpec& spec, const Grid1D& grid) {
  if (static_cast<long>(result.trajectory.size()) != grid.steps + 1)
    throw std::invalid_argument("trajectory does not match the grid");
  auto setup = modal_setup(data, spec, grid);
  const Vec zero(setup.basis.modes(), 0.0);
  ModalState s = setup.start;
  const auto& u = result.trajectory;
  Vec fprev = has_source(data) ? setup.basis.project(nodal_source(spec, data, grid, 0.0, u[0])) : zero;
  double res = 0.0;
  for (long j = 1; j <= grid.steps; ++j) {
    const double t = j * grid.dt;
    Vec fj = has_source(data) ? setup.basis.project(nodal_source(spec, data, grid, t, u[j])) : zero;
    setup.prop.advance(s, fprev, fj);
    fprev = std::move(fj);
    res = std::max(res, sup_diff(setup.basis.synthesize(s.w), u[j]));
  }
  return res;
}

// ---------------------------------------------------------------------------
// General boundary data: theta representation in w = e^{-lambda x/2} u.

namespace {

struct LagRule {
  Vec s;
  Vec w;
};

// Gauss panels on the lag interval [k dt, (k + 1) dt]; the first interval is
// split geometrically down to a small fraction of dx^2 / eps, where the heat
// functionals change on the diffusive scale.
LagRule lag_rule(long k, double dt, double dx, double eps, const quad::GaussRule& g) {
  LagRule r;
  auto panel = [&](double a, double b) {
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      r.s.push_back(a + (b - a) * g.nodes[q]);
      r.w.push_back((b - a) * g.weights[q]);
    }
  };
  if (k > 0) {
    panel(k * dt, (k + 1) * dt);
    return r;
  }
  const double target = 1e-3 * dx * dx / eps;
  int p = 1;
  while (dt / std::ldexp(1.0, p) > target && p < 60) ++p;
  double a = 0.0;
  for (int j = p; j >= 0; --j) {
    const double b = dt / std::ldexp(1.0, j);
    panel(a, b);
    a = b;
  }
  return r;
}

class ThetaEngine {
 public:
  ThetaEngine(const ProblemData& data, const JunctionSpec& spec, const KernelParams& kernel, const PicardConfig& cfg,
              const Grid1D& grid)
      : data_(data), spec_(spec), p_(kernel), cfg_(cfg), g_(grid) {
    nx_ = g_.nx;
    m_ = nx_ - 2;
    steps_ = g_.steps;
    sigma_ = 0.5 * spec_.drift();
    eps_ = p_.epsilon;
    right_scale_ = std::exp(-sigma_ * g_.length);
    up_.resize(nx_);
    for (int i = 0; i < nx_; ++i) up_[i] = std::exp(sigma_ * g_.x(i));
    initial_data();
    build_tables();
    build_base();
  }

  long steps() const { return steps_; }
  int nx() const { return nx_; }

  /// Nodal w at step n from the interior values.
  Vec assemble(long n, const Vec& interior) const {
    Vec w(nx_);
    const double t = n * g_.dt;
    w[0] = n == 0 ? w0_[0] : data_.g1(t);
    w[nx_ - 1] = n == 0 ? w0_[nx_ - 1] : right_scale_ * data_.g2(t);
    for (int r = 0; r < m_; ++r) w[r + 1] = interior[r];
    return w;
  }

  Vec physical(const Vec& w) const {
    Vec u(nx_);
    for (int i = 0; i < nx_; ++i) u[i] = up_[i] * w[i];
    return u;
  }

  Vec f1(long n, const Vec& w) const {
    Vec u = physical(w);
    Vec f = nodal_source(spec_, data_, g_, n * g_.dt, u);
    for (int i = 0; i < nx_; ++i) f[i] /= up_[i];
    return f;
  }

  /// I_{n+1} = E I_n + om0 f_n + om1 f_{n+1}: product integration of
  /// e^{-beta (t - tau)} against f linear on the step.
  void memory_step(const Vec& i_n, const Vec& f_n, const Vec& f_n1, Vec& i_n1) const {
    for (int j = 0; j < nx_; ++j) i_n1[j] = e_ * i_n[j] + om0_ * f_n[j] + om1_ * f_n1[j];
  }

  /// acc += M_k x (interior rows).
  void apply_M(long k, const Vec& x, Vec& acc) const {
    const double* mat = &M_[static_cast<std::size_t>(k) * m_ * nx_];
    for (int r = 0; r < m_; ++r) {
      const double* row = mat + static_cast<std::size_t>(r) * nx_;
      double s = 0.0;
      for (int j = 0; j < nx_; ++j) s += row[j] * x[j];
      acc[r] += s;
    }
  }

  const Vec& base(long n) const { return base_[n]; }
  const Vec& initial_part(long n) const { return initial_[n]; }
  const Vec& boundary_part(long n) const { return boundary_[n]; }

 private:
  void initial_data() {
    w0_.resize(nx_);
    Vec w1(nx_);
    for (int i = 0; i < nx_; ++i) {
      w0_[i] = data_.h0(g_.x(i)) / up_[i];
      w1[i] = data_.h1(g_.x(i)) / up_[i];
    }
    const double idx2 = 1.0 / (g_.dx * g_.dx);
    Vec w0xx(nx_);
    for (int i = 1; i < nx_ - 1; ++i) w0xx[i] = (w0_[i + 1] - 2.0 * w0_[i] + w0_[i - 1]) * idx2;
    if (nx_ >= 4) {
      w0xx[0] = (2.0 * w0_[0] - 5.0 * w0_[1] + 4.0 * w0_[2] - w0_[3]) * idx2;
      const int n = nx_ - 1;
      w0xx[n] = (2.0 * w0_[n] - 5.0 * w0_[n - 1] + 4.0 * w0_[n - 2] - w0_[n - 3]) * idx2;
    } else {
      w0xx[0] = w0xx[1];
      w0xx[nx_ - 1] = w0xx[1];
    }
    p0_.resize(nx_);
    for (int i = 0; i < nx_; ++i) p0_[i] = w1[i] - eps_ * w0xx[i] + p_.a * w0_[i];

    const double z = p_.beta * g_.dt;
    e_ = std::exp(-z);
    if (z < 1e-4) {
      om0_ = g_.dt * (0.5 - z / 3.0 + z * z / 8.0);
      om1_ = g_.dt * (0.5 - z / 6.0 + z * z / 24.0);
    } else {
      om0_ = (1.0 - e_ - z * e_) / (p_.beta * z);
      om1_ = -std::expm1(-z) / p_.beta - om0_;
    }
  }

  // Spatial weights W_ij(s) = \int G(x_i, xi, s) phi_j(xi) dxi for the hat basis,
  // rows i = 1..nx-2, columns j = 0..nx-1.
  Vec weight_matrix(double s) const {
    const double dx = g_.dx;
    const double L = g_.length;
    Vec off_h(2 * nx_ - 1);
    for (int k = 0; k < 2 * nx_ - 1; ++k) off_h[k] = k * dx;
    Vec off_l(2 * m_), off_r(2 * m_);
    for (int r = 0; r < m_; ++r) {
      const double x = g_.x(r + 1);
      off_l[r] = x;
      off_l[m_ + r] = x + L;
      off_r[r] = x;
      off_r[m_ + r] = x - L;
    }
    const auto H = theta_functional(off_h, s, p_, L, HeatFunctional::hat, dx, cfg_.quad_tol);
    const auto LH = theta_functional(off_l, s, p_, L, HeatFunctional::left_half, dx, cfg_.quad_tol);
    const auto RH = theta_functional(off_r, s, p_, L, HeatFunctional::right_half, dx, cfg_.quad_tol);
    Vec W(static_cast<std::size_t>(m_) * nx_);
    for (int r = 0; r < m_; ++r) {
      const int i = r + 1;
      double* row = &W[static_cast<std::size_t>(r) * nx_];
      for (int j = 1; j < nx_ - 1; ++j) row[j] = H[std::abs(i - j)] - H[i + j];
      row[0] = LH[r] - RH[r];
      row[nx_ - 1] = RH[m_ + r] - LH[m_ + r];
    }
    return W;
  }

  // -2 eps theta_x(x_i, s) and 2 eps e^{-lambda L/2} theta_x(x_i - L, s).
  std::pair<Vec, Vec> boundary_kernels(double s) const {
    Vec off(2 * m_);
    for (int r = 0; r < m_; ++r) {
      off[r] = g_.x(r + 1);
      off[m_ + r] = g_.x(r + 1) - g_.length;
    }
    const auto d = theta_functional(off, s, p_, g_.length, HeatFunctional::derivative, 0.0, cfg_.quad_tol);
    Vec bl(m_), br(m_);
    for (int r = 0; r < m_; ++r) {
      bl[r] = -2.0 * eps_ * d[r];
      br[r] = 2.0 * eps_ * right_scale_ * d[m_ + r];
    }
    return {bl, br};
  }

  void build_tables() {
    const auto gauss = quad::gauss_legendre01(cfg_.quad_nodes);
    const std::size_t block = static_cast<std::size_t>(m_) * nx_;
    M_.assign(block * std::max<long>(steps_, 1), 0.0);
    Vec b_prev;
    bnd_s_.resize(steps_);
    bnd_w_.resize(steps_);
    bnd_l_.resize(steps_);
    bnd_r_.resize(steps_);
    b_p0_.resize(steps_);
    const bool boundary = !data_.homogeneous_boundary || !boundary_vanishes();
    for (long k = 0; k < steps_; ++k) {
      const auto rule = lag_rule(k, g_.dt, g_.dx, eps_, gauss);
      Vec A(block, 0.0), B(block, 0.0);
      for (std::size_t q = 0; q < rule.s.size(); ++q) {
        const double s = rule.s[q];
        const double nu = s / g_.dt - k;
        const Vec W = weight_matrix(s);
        for (std::size_t e = 0; e < block; ++e) {
          A[e] += rule.w[q] * (1.0 - nu) * W[e];
          B[e] += rule.w[q] * nu * W[e];
        }
        if (boundary) {
          auto [bl, br] = boundary_kernels(s);
          bnd_s_[k].push_back(s);
          bnd_w_[k].push_back(rule.w[q]);
          bnd_l_[k].push_back(std::move(bl));
          bnd_r_[k].push_back(std::move(br));
        }
      }
      double* Mk = &M_[block * k];
      for (std::size_t e = 0; e < block; ++e) Mk[e] = A[e] + (k > 0 ? b_prev[e] : 0.0);
      // B_k acts only on the t = 0 value of F_R, which is P0.
      b_p0_[k].assign(m_, 0.0);
      for (int r = 0; r < m_; ++r)
        for (int j = 0; j < nx_; ++j) b_p0_[k][r] += B[static_cast<std::size_t>(r) * nx_ + j] * p0_[j];
      b_prev = std::move(B);
    }
  }

  bool boundary_vanishes() const {
    for (long n = 0; n <= steps_; ++n)
      if (data_.g1(n * g_.dt) != 0.0 || data_.g2(n * g_.dt) != 0.0) return false;
    return true;
  }

  void build_base() {
    base_.assign(steps_ + 1, Vec(m_, 0.0));
    initial_.assign(steps_ + 1, Vec(m_, 0.0));
    boundary_.assign(steps_ + 1, Vec(m_, 0.0));
    for (int r = 0; r < m_; ++r) base_[0][r] = initial_[0][r] = w0_[r + 1];
    std::vector<Vec> fp(steps_ + 1);
    for (long j = 0; j <= steps_; ++j) {
      fp[j] = p0_;
      const double e = std::exp(-p_.beta * j * g_.dt);
      for (auto& v : fp[j]) v *= e;
    }
    for (long n = 1; n <= steps_; ++n) {
      const double t = n * g_.dt;
      Vec& init = initial_[n];
      // \int G(x, xi, t) w0(xi) dxi
      const Vec W = weight_matrix(t);
      for (int r = 0; r < m_; ++r)
        for (int j = 0; j < nx_; ++j) init[r] += W[static_cast<std::size_t>(r) * nx_ + j] * w0_[j];
      // time convolution of e^{-beta tau} P0
      for (long j = 1; j <= n; ++j) apply_M(n - j, fp[j], init);
      for (int r = 0; r < m_; ++r) init[r] += b_p0_[n - 1][r];

      Vec& bnd = boundary_[n];
      for (long k = 0; k < n && k < static_cast<long>(bnd_s_.size()); ++k)
        for (std::size_t q = 0; q < bnd_s_[k].size(); ++q) {
          const double tau = t - bnd_s_[k][q];
          const double g1 = data_.g1(tau), g2 = data_.g2(tau);
          const double w = bnd_w_[k][q];
          for (int r = 0; r < m_; ++r) bnd[r] += w * (bnd_l_[k][q][r] * g1 + bnd_r_[k][q][r] * g2);
        }
      for (int r = 0; r < m_; ++r) base_[n][r] = init[r] + bnd[r];
    }
  }

  const ProblemData& data_;
  const JunctionSpec& spec_;
  KernelParams p_;
  PicardConfig cfg_;
  Grid1D g_;
  int nx_ = 0, m_ = 0;
  long steps_ = 0;
  double sigma_ = 0.0, eps_ = 0.0, right_scale_ = 1.0;
  double e_ = 0.0, om0_ = 0.0, om1_ = 0.0;
  Vec up_, w0_, p0_;
  Vec M_;
  std::vector<Vec> b_p0_;
  std::vector<Vec> bnd_s_, bnd_w_;
  std::vector<std::vector<Vec>> bnd_l_, bnd_r_;
  std::vector<Vec> base_, initial_, boundary_;
};

void require_mapped_kernel(const JunctionSpec& spec, const KernelParams& kernel) {
  const auto expect = esjj_to_integro(spec.alpha, spec.epsilon, spec.drift()).params;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)); };
  if (!close(kernel.a, expect.a) || !close(kernel.b, expect.b) || !close(kernel.beta, expect.beta) ||
      !close(kernel.epsilon, expect.epsilon))
    throw std::invalid_argument("kernel parameters are not the image of the junction under esjj_to_integro");
  require_positive_regime(kernel);
}

// Interior part of the memory convolution sum_{j=lo..hi} M_{n-j} I_j.
void conv_range(const ThetaEngine& eng, long n, long lo, long hi, const std::vector<Vec>& I, Vec& acc) {
  for (long j = lo; j <= hi; ++j) eng.apply_M(n - j, I[j], acc);
}

}  // namespace

PicardResult picard_solve_boundary(const ProblemData& data, const JunctionSpec& spec, const KernelParams& kernel,
                                   const PicardConfig& cfg, const Grid1D& grid) {
  cfg.validate();
  spec.validate();
  require_grid(spec, grid);
  require_mapped_kernel(spec, kernel);
  const ThetaEngine eng(data, spec, kernel, cfg, grid);
  const long steps = eng.steps();
  const int nx = eng.nx();
  const int m = nx - 2;

  std::vector<Vec> w(steps + 1), I(steps + 1, Vec(nx, 0.0)), f(steps + 1);
  std::vector<Vec> src(steps + 1, Vec(m, 0.0));  // memory convolution, interior
  w[0] = eng.assemble(0, eng.base(0));
  PicardResult res;

  if (!has_source(data)) {
    for (long n = 1; n <= steps; ++n) w[n] = eng.assemble(n, eng.base(n));
  } else {
    f[0] = eng.f1(0, w[0]);
    const long window = std::max(1L, static_cast<long>(std::llround(cfg.window_length / grid.dt)));
    for (long n0 = 0; n0 < steps; n0 += window) {
      const long n1 = std::min(steps, n0 + window);
      std::vector<Vec> hist(n1 - n0 + 1, Vec(m, 0.0));
      for (long n = n0 + 1; n <= n1; ++n) conv_range(eng, n, 1, n0, I, hist[n - n0]);
      for (long n = n0 + 1; n <= n1; ++n) {
        Vec in(m);
        for (int r = 0; r < m; ++r) in[r] = eng.base(n)[r] - hist[n - n0][r];
        w[n] = eng.assemble(n, in);
      }
      ContractionGuard guard(n0 * grid.dt, cfg.window_length);
      int it = 0;
      double diff = 0.0;
      for (;;) {
        ++it;
        if (it > cfg.max_iterations) guard.exhausted(cfg.max_iterations, diff);
        for (long n = n0 + 1; n <= n1; ++n) {
          f[n] = eng.f1(n, w[n]);
          eng.memory_step(I[n - 1], f[n - 1], f[n], I[n]);
        }
        diff = 0.0;
        for (long n = n0 + 1; n <= n1; ++n) {
          Vec c = hist[n - n0];
          conv_range(eng, n, n0 + 1, n, I, c);
          Vec in(m);
          for (int r = 0; r < m; ++r) in[r] = eng.base(n)[r] - c[r];
          Vec wn = eng.assemble(n, in);
          require_finite(wn, n, n * grid.dt);
          for (int i = 0; i < nx; ++i)
            diff = std::max(diff, std::abs(wn[i] - w[n][i]) * std::exp(0.5 * spec.drift() * grid.x(i)));
          w[n] = std::move(wn);
          src[n] = std::move(c);
        }
        if (diff < cfg.fix_tol) break;
        guard.observe(diff);
      }
      // f and I consistent with the accepted iterate
      for (long n = n0 + 1; n <= n1; ++n) {
        f[n] = eng.f1(n, w[n]);
        eng.memory_step(I[n - 1], f[n - 1], f[n], I[n]);
      }
      res.iterations.push_back(it);
    }
  }

  std::vector<Vec> u(steps + 1), v(steps + 1);
  for (long n = 0; n <= steps; ++n) u[n] = eng.physical(w[n]);
  for (long n = 0; n <= steps; ++n) {
    v[n].resize(nx);
    for (int i = 0; i < nx; ++i) {
      if (n == 0)
        v[n][i] = data.h1(grid.x(i));
      else if (n < steps)
        v[n][i] = (u[n + 1][i] - u[n - 1][i]) / (2.0 * grid.dt);
      else if (n >= 2)
        v[n][i] = (3.0 * u[n][i] - 4.0 * u[n - 1][i] + u[n - 2][i]) / (2.0 * grid.dt);
      else
        v[n][i] = (u[n][i] - u[n - 1][i]) / grid.dt;
    }
  }
  res.snapshots = snapshots_of(u, v, grid, cfg.snapshot_interval);
  if (cfg.bookkeeping) {
    for (long k : snapshot_indices(grid, cfg.snapshot_interval, steps)) {
      TermSnapshot ts;
      ts.time = k * grid.dt;
      ts.initial.assign(nx, 0.0);
      ts.source.assign(nx, 0.0);
      ts.boundary.assign(nx, 0.0);
      if (k == 0) {
        ts.initial = u[0];
      } else {
        for (int r = 0; r < m; ++r) {
          const double up = std::exp(0.5 * spec.drift() * grid.x(r + 1));
          ts.initial[r + 1] = up * eng.initial_part(k)[r];
          ts.source[r + 1] = -up * src[k][r];
          ts.boundary[r + 1] = up * eng.boundary_part(k)[r];
        }
        ts.boundary[0] = u[k][0];
        ts.boundary[nx - 1] = u[k][nx - 1];
      }
      res.terms.push_back(std::move(ts));
    }
  }
  res.trajectory = std::move(u);
  return res;
}

double boundary_fixed_point_residual(const PicardResult& result, const ProblemData& data, const JunctionSpec& spec,
                                     const KernelParams& kernel, const PicardConfig& cfg, const Grid1D& grid) {
  require_mapped_kernel(spec, kernel);
  if (static_cast<long>(result.trajectory.size()) != grid.steps + 1)
    throw std::invalid_argument("trajectory does not match the grid");
  const ThetaEngine eng(data, spec, kernel, cfg, grid);
  const long steps = eng.steps();
  const int nx = eng.nx();
  const int m = nx - 2;
  std::vector<Vec> w(steps + 1), I(steps + 1, Vec(nx, 0.0)), f(steps + 1);
  for (long n = 0; n <= steps; ++n) {
    w[n].resize(nx);
    for (int i = 0; i < nx; ++i) w[n][i] = result.trajectory[n][i] * std::exp(-0.5 * spec.drift() * grid.x(i));
  }
  const bool src = has_source(data);
  if (src) {
    f[0] = eng.f1(0, w[0]);
    for (long n = 1; n <= steps; ++n) {
      f[n] = eng.f1(n, w[n]);
      eng.memory_step(I[n - 1], f[n - 1], f[n], I[n]);
    }
  }
  double res = 0.0;
  for (long n = 1; n <= steps; ++n) {
    Vec c(m, 0.0);
    if (src) conv_range(eng, n, 1, n, I, c);
    Vec in(m);
    for (int r = 0; r < m; ++r) in[r] = eng.base(n)[r] - c[r];
    const Vec u = eng.physical(eng.assemble(n, in));
    res = std::max(res, sup_diff(u, result.trajectory[n]));
  }
  return res;
}

double asymptotic_profile(double g1_inf, double g2_inf, double lambda, double length, double x) {
  if (!(x >= -1e-12 * length && x <= length * (1.0 + 1e-12)))
    throw DomainError("asymptotic_profile: x outside [0, L]");
  const double s = 0.5 * lambda;
  if (s * length < 1e-8) return g1_inf * (length - x) / length + g2_inf * x / length;
  // sinh(s a) / sinh(s L) = e^{s (a - L)} (1 - e^{-2 s a}) / (1 - e^{-2 s L})
  auto ratio = [&](double a) {
    return std::exp(s * (a - length)) * -std::expm1(-2.0 * s * a) / -std::expm1(-2.0 * s * length);
  };
  return g1_inf * ratio(length - x) + g2_inf * ratio(x);
}

DecayTrace decay_report(const PicardResult& result, TermSet components, const std::vector<double>& limit) {
  if (result.terms.empty())
    throw UnsupportedOperation("decay_report needs a run with bookkeeping enabled");
  DecayTrace tr;
  for (const auto& ts : result.terms) {
    const std::size_t n = ts.initial.size();
    if (!limit.empty() && limit.size() != n) throw std::invalid_argument("limit profile has the wrong size");
    double si = 0.0, ss = 0.0, sb = 0.0, st = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double b = ts.boundary[i] - (limit.empty() ? 0.0 : limit[i]);
      si = std::max(si, std::abs(ts.initial[i]));
      ss = std::max(ss, std::abs(ts.source[i]));
      sb = std::max(sb, std::abs(b));
      st = std::max(st, std::abs(ts.initial[i] + ts.source[i] + b));
    }
    tr.t.push_back(ts.time);
    if (components.initial) tr.initial.push_back(si);
    if (components.source) tr.source.push_back(ss);
    if (components.boundary) tr.boundary.push_back(sb);
    tr.total.push_back(st);
  }
  return tr;
}

}  // namespace jjlab
