#include "jjlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <optional>
#include <thread>

#include "jjlab/errors.hpp"
#include "jjlab/integral.hpp"
#include "jjlab/kernels.hpp"
#include "jjlab/spectral.hpp"

namespace jjlab {

namespace fs = std::filesystem;

Grid1D make_grid(const ExperimentConfig& config) {
  return Grid1D::make(config.model.length, config.grid.nx, config.grid.t_end, config.grid.dt);
}

namespace {

/// Piecewise linear through values on a uniform grid over [lo, hi], clamped.
double table_lookup(const std::vector<double>& v, double lo, double hi, double s) {
  if (v.size() == 1 || !(hi > lo)) return v.front();
  const double pos = std::clamp((s - lo) / (hi - lo), 0.0, 1.0) * (v.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), v.size() - 2);
  const double f = pos - i;
  return (1.0 - f) * v[i] + f * v[i + 1];
}

std::function<double(double)> boundary_fn(BoundaryPreset p, double value, const std::vector<double>& values,
                                          double t_end, const Kink& kink, double x) {
  switch (p) {
    case BoundaryPreset::zero: return [](double) { return 0.0; };
    case BoundaryPreset::constant: return [value](double) { return value; };
    case BoundaryPreset::ramp: return [value](double t) { return -value * std::expm1(-t); };
    case BoundaryPreset::kink: return [kink, x](double t) { return kink.u(x, t); };
    case BoundaryPreset::custom: return [values, t_end](double t) { return table_lookup(values, 0.0, t_end, t); };
  }
  return [](double) { return 0.0; };
}

bool vanishes(BoundaryPreset p, double value) {
  return p == BoundaryPreset::zero || ((p == BoundaryPreset::constant || p == BoundaryPreset::ramp) && value == 0.0);
}

}  // namespace

ProblemData make_problem_data(const ExperimentConfig& config) {
  const auto& d = config.data;
  const double L = config.model.length;
  const double T = config.grid.t_end;
  const Kink kink{d.kink_center, d.kink_velocity};
  ProblemData p;
  switch (d.initial) {
    case InitialPreset::zero: p.h0 = [](double) { return 0.0; }; break;
    case InitialPreset::kink: p.h0 = [kink](double x) { return kink.u(x, 0.0); }; break;
    case InitialPreset::constant: p.h0 = [a = d.amplitude](double) { return a; }; break;
    case InitialPreset::sine_mode:
      p.h0 = [a = d.amplitude, k = d.mode * std::acos(-1.0) / L](double x) { return a * std::sin(k * x); };
      break;
    case InitialPreset::custom:
      p.h0 = [v = d.initial_values, L](double x) { return table_lookup(v, 0.0, L, x); };
      break;
  }
  switch (d.velocity) {
    case VelocityPreset::zero: p.h1 = [](double) { return 0.0; }; break;
    case VelocityPreset::kink: p.h1 = [kink](double x) { return kink.u_t(x, 0.0); }; break;
    case VelocityPreset::custom:
      p.h1 = [v = d.velocity_values, L](double x) { return table_lookup(v, 0.0, L, x); };
      break;
  }
  p.g1 = boundary_fn(d.left, d.left_value, d.left_values, T, kink, 0.0);
  p.g2 = boundary_fn(d.right, d.right_value, d.right_values, T, kink, L);
  p.homogeneous_boundary = vanishes(d.left, d.left_value) && vanishes(d.right, d.right_value);
  p.source = d.source;
  return p;
}

namespace {

struct Solved {
  std::vector<SolverRun> runs;
  std::optional<PicardResult> picard;
};

Solved solve_impl(const ExperimentConfig& config) {
  validate(config);
  const auto& spec = config.model;
  const Grid1D grid = make_grid(config);
  const ProblemData data = make_problem_data(config);
  const double interval = config.output.snapshot_interval;
  const auto kind = config.solver.kind;
  const bool all = kind == SolverChoice::all;
  Solved out;
  if (all || kind == SolverChoice::fd) {
    IntegrateOptions opt;
    opt.snapshot_interval = interval;
    opt.formulation = config.solver.formulation;
    out.runs.push_back({"fd", integrate(spec, data, grid, opt)});
  }
  if (all || kind == SolverChoice::green) {
    const auto split = linear_source(spec, data);
    out.runs.push_back({"green", solve_linear_dirichlet(data, split.known, spec, grid, {interval, split.reaction})});
  }
  if (all || kind == SolverChoice::picard) {
    PicardConfig pc;
    pc.max_iterations = config.tol.max_iterations;
    pc.fix_tol = config.tol.fix;
    pc.window_length = config.tol.window_length;
    pc.quad_nodes = config.tol.quad_nodes;
    pc.quad_tol = config.tol.quad;
    pc.snapshot_interval = interval;
    PicardResult r;
    if (data.homogeneous_boundary) {
      r = picard_solve_homogeneous(data, spec, pc, grid);
    } else {
      if (spec.epsilon <= 0.0)
        throw RegimeError("picard with boundary data needs epsilon > 0 (kernel positivity regime)");
      const auto kernel = esjj_to_integro(spec.alpha, spec.epsilon, spec.drift()).params;
      r = picard_solve_boundary(data, spec, kernel, pc, grid);
    }
    out.runs.push_back({"picard", r.snapshots});
    out.picard = std::move(r);
  }
  return out;
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Files of one run; removed unless commit() is reached.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    created_dir_ = !fs::exists(dir_);
    fs::create_directories(dir_);
  }
  Artifacts(const Artifacts&) = delete;
  Artifacts& operator=(const Artifacts&) = delete;
  ~Artifacts() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

  void write_csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
    const fs::path p = dir_ / name;
    files_.push_back(p);
    std::FILE* f = std::fopen(p.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + p.string());
    for (std::size_t i = 0; i < header.size(); ++i) std::fprintf(f, i ? ",%s" : "%s", header[i].c_str());
    std::fputc('\n', f);
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) std::fprintf(f, i ? ",%.17g" : "%.17g", r[i]);
      std::fputc('\n', f);
    }
    const bool bad = std::ferror(f) != 0;
    if (std::fclose(f) != 0 || bad) throw std::runtime_error("error writing " + p.string());
  }

  std::vector<fs::path> commit() {
    committed_ = true;
    return files_;
  }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool created_dir_ = false;
  bool committed_ = false;
};

/// Physical t -> infinity profile when the boundary data settle to constants
/// and there is no source; empty otherwise.
std::vector<double> boundary_limit(const ExperimentConfig& config, const Grid1D& grid) {
  const auto& d = config.data;
  auto settles = [](BoundaryPreset p) {
    return p == BoundaryPreset::zero || p == BoundaryPreset::constant || p == BoundaryPreset::ramp;
  };
  if (d.source != SourceMode::none || !settles(d.left) || !settles(d.right)) return {};
  const double g1 = d.left == BoundaryPreset::zero ? 0.0 : d.left_value;
  const double g2 = d.right == BoundaryPreset::zero ? 0.0 : d.right_value;
  if (g1 == 0.0 && g2 == 0.0) return {};
  const double lam = config.model.drift();
  const double L = config.model.length;
  std::vector<double> lim(grid.nx);
  for (int i = 0; i < grid.nx; ++i) {
    const double x = grid.x(i);
    lim[i] = std::exp(0.5 * lam * x) * asymptotic_profile(g1, std::exp(-0.5 * lam * L) * g2, lam, L, x);
  }
  return lim;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = i == n - 1 ? b : a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

std::vector<SolverRun> solve(const ExperimentConfig& config) { return solve_impl(config).runs; }

std::vector<ComparisonRow> compare_runs(const std::vector<SolverRun>& runs) {
  auto find = [&](const char* name) -> const SolverRun& {
    for (const auto& r : runs)
      if (r.name == name) return r;
    throw std::invalid_argument(std::string("comparison needs a ") + name + " run");
  };
  const auto& fd = find("fd");
  const auto& gr = find("green");
  const auto& pi = find("picard");
  if (fd.snapshots.size() != gr.snapshots.size() || fd.snapshots.size() != pi.snapshots.size())
    throw std::logic_error("solver runs stored different snapshot times");
  std::vector<ComparisonRow> rows;
  for (std::size_t k = 0; k < fd.snapshots.size(); ++k) {
    const auto& a = fd.snapshots[k].u;
    const auto& b = gr.snapshots[k].u;
    const auto& c = pi.snapshots[k].u;
    rows.push_back({fd.snapshots[k].time, sup_diff(a, b), sup_diff(a, c), sup_diff(b, c)});
  }
  return rows;
}

RunReport run(const ExperimentConfig& config, const fs::path& out_dir) {
  Artifacts art(out_dir);
  Solved solved = solve_impl(config);
  const Grid1D grid = make_grid(config);
  RunReport rep;

  const auto& main = solved.runs.front();
  std::vector<std::vector<double>> sol, diag;
  for (const auto& s : main.snapshots) {
    for (int i = 0; i < grid.nx; ++i) sol.push_back({grid.x(i), s.time, s.u[i]});
    diag.push_back({s.time, energy(s, grid), sup_abs(s.u), sup_abs(s.v)});
  }
  art.write_csv("solution.csv", {"x", "t", "u"}, sol);
  art.write_csv("diagnostics.csv", {"t", "energy", "sup_u", "sup_v"}, diag);

  if (config.solver.kind == SolverChoice::all) {
    rep.comparison = compare_runs(solved.runs);
    std::vector<std::vector<double>> rows;
    for (const auto& r : rep.comparison) rows.push_back({r.t, r.fd_green, r.fd_picard, r.green_picard});
    art.write_csv("comparison.csv", {"t", "supdiff_fd_green", "supdiff_fd_picard", "supdiff_green_picard"}, rows);
  }

  if (solved.picard) {
    const auto tr = decay_report(*solved.picard, {}, boundary_limit(config, grid));
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < tr.t.size(); ++k)
      rows.push_back({tr.t[k], tr.initial[k], tr.source[k], tr.boundary[k], tr.total[k]});
    art.write_csv("decay.csv", {"t", "initial_term", "source_term", "boundary_term", "total"}, rows);
  }

  rep.runs = std::move(solved.runs);
  rep.artifacts = art.commit();
  return rep;
}

ExperimentConfig sweep_point(const ExperimentConfig& config, const std::string& parameter, double value) {
  if (!is_numeric_key(parameter)) throw ConfigError({{0, "sweep parameter is not a numeric key: " + parameter}});
  ExperimentConfig c = config;
  set_config_value(c, parameter, format_number(value));
  // the taper reduces to the untapered operator at lambda = 0
  if (parameter == "model.lambda_taper" && c.model.kind == JunctionKind::ESJJ && value == 0.0)
    c.model.kind = JunctionKind::PSGE;
  validate(c);
  return c;
}

std::vector<SweepRow> sweep(const ExperimentConfig& config, const std::string& parameter,
                            const std::vector<double>& values, const fs::path& out_dir) {
  if (values.empty()) throw ConfigError({{0, "sweep needs at least one value"}});
  const std::size_t n = values.size();
  std::vector<ExperimentConfig> cfgs;
  for (double v : values) {
    try {
      cfgs.push_back(sweep_point(config, parameter, v));
    } catch (const std::exception& e) {
      throw RunFailure("sweep value " + parameter + " = " + format_number(v) + " is invalid: " + e.what(), 1);
    }
  }

  Artifacts art(out_dir);
  auto run_dir = [&](std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%03zu", k);
    return out_dir / buf;
  };
  std::vector<std::optional<RunReport>> reports(n);
  std::optional<RunFailure> failure;
  const std::size_t batch = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t b0 = 0; b0 < n; b0 += batch) {
    std::vector<std::future<RunReport>> fut;
    for (std::size_t k = b0; k < std::min(n, b0 + batch); ++k)
      fut.push_back(std::async(std::launch::async, [&, k] { return run(cfgs[k], run_dir(k)); }));
    for (std::size_t j = 0; j < fut.size(); ++j) {
      const std::size_t k = b0 + j;
      try {
        reports[k] = fut[j].get();
      } catch (const std::exception& e) {
        if (!failure)
          failure.emplace("sweep value " + parameter + " = " + format_number(values[k]) + " failed: " + e.what(),
                          exit_code_for(e));
      }
    }
    if (failure) break;
  }
  if (failure) {
    std::error_code ec;
    for (std::size_t k = 0; k < n; ++k)
      if (reports[k]) fs::remove_all(run_dir(k), ec);
    throw *failure;
  }

  const auto ref_k = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  const Grid1D ref_grid = make_grid(cfgs[ref_k]);
  const auto& ref = reports[ref_k]->runs.front().snapshots.back().u;
  std::vector<SweepRow> rows;
  std::vector<std::vector<double>> csv;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& u = reports[k]->runs.front().snapshots.back().u;
    const Grid1D g = make_grid(cfgs[k]);
    double diff = 0.0;
    if (g.nx == ref_grid.nx)
      diff = sup_diff(u, ref);
    else
      for (int i = 0; i < g.nx; ++i)
        diff = std::max(diff, std::abs(u[i] - table_lookup(ref, 0.0, ref_grid.length, g.x(i))));
    rows.push_back({values[k], sup_abs(u), diff});
    csv.push_back({values[k], rows.back().sup_u_final, diff});
  }
  art.write_csv("sweep_summary.csv", {"value", "sup_u_final", "sup_diff_vs_smallest"}, csv);
  art.commit();
  return rows;
}

std::vector<fs::path> write_kernel_tables(const ExperimentConfig& config, const fs::path& out_dir) {
  validate(config);
  const auto& m = config.model;
  const KernelParams p = m.kind == JunctionKind::ESJJ ? esjj_to_integro(m.alpha, m.epsilon, m.drift()).params
                                                       : psge_to_integro(m.alpha, m.epsilon).params;
  require_positive_regime(p);
  Artifacts art(out_dir);
  std::vector<std::vector<double>> rows;
  for (double t : config.tables.times)
    for (double x : linspace(-m.length, m.length, config.tables.points))
      rows.push_back({x, t, eval_K(x, t, p, config.tol.quad), K_bound(x, t, p),
                      eval_theta(x, t, p, m.length, config.tol.quad), eval_theta_x(x, t, p, m.length, config.tol.quad)});
  art.write_csv("kernel.csv", {"x", "t", "K", "K_bound", "theta", "theta_x"}, rows);
  return art.commit();
}

std::vector<fs::path> write_green_tables(const ExperimentConfig& config, const fs::path& out_dir) {
  validate(config);
  const auto& m = config.model;
  if (!(m.epsilon > 0.0)) throw DomainError("Green tables need epsilon > 0");
  Artifacts art(out_dir);
  std::vector<std::vector<double>> modes, slice;
  for (int n = 1; n <= config.tables.modes; ++n) {
    const auto c = mode_coeffs(n, m.length, m.drift(), m.alpha, m.epsilon);
    for (double t : config.tables.times) {
      const auto r = modal_response(c, t);
      modes.push_back({double(n), c.gamma_n, c.b_n, c.g_n, c.omega_sq, t, r.G, r.dG});
    }
  }
  for (double t : config.tables.times)
    for (double x : linspace(0.0, m.length, config.tables.points))
      slice.push_back({x, t, eval_G(x, config.tables.xi, t, m, config.tol.series)});
  art.write_csv("green_modes.csv", {"n", "gamma_n", "b_n", "g_n", "omega_sq", "t", "G_n", "dG_n"}, modes);
  art.write_csv("green_slice.csv", {"x", "t", "G"}, slice);
  return art.commit();
}

int exit_code_for(const std::exception& e) {
  if (auto* f = dynamic_cast<const RunFailure*>(&e)) return f->exit_code();
  if (dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const NonContractionError*>(&e) ||
      dynamic_cast<const SeriesTruncationError*>(&e))
    return 2;
  return 1;
}

}  // namespace jjlab
