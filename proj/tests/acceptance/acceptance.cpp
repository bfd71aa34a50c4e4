// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jjlab/config.hpp"
#include "jjlab/fd_solver.hpp"
#include "jjlab/harness.hpp"
#include "jjlab/integral.hpp"
#include "jjlab/kernels.hpp"
#include "jjlab/model.hpp"
#include "jjlab/spectral.hpp"
#include "support/config_gen.hpp"

using namespace jjlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fixture(const char* name) { return fs::path(JJLAB_FIXTURE_DIR) / name; }

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// 1. parameter maps
Outcome parameter_maps() {
  Outcome o;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> al(0.0, 5.0), ep(1e-3, 5.0), la(0.0, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double alpha = al(rng), eps = ep(rng), lam = la(rng);
    const auto p = psge_to_integro(alpha, eps).params;
    worst = std::max({worst, rel_gap(p.a + 1.0 / eps, alpha), std::abs(p.b + p.a / eps) / (1.0 + std::abs(p.b)), rel_gap(p.beta * eps, 1.0)});
    const auto q = esjj_to_integro(alpha, eps, lam).params;
    worst = std::max({worst, rel_gap(q.beta * eps, 1.0), rel_gap(q.a * q.beta + q.b, lam * lam / 4.0)});
  }
  o.require(worst < 1e-12, "1000 random identity checks, worst relative gap " + num(worst));

  ManufacturedField field({1.0, 1.0, -0.5, 0.25}, 0.7);
  auto psge = make_junction(JunctionKind::PSGE, 1.0);
  psge.alpha = 2.5;
  psge.epsilon = 0.5;
  auto esjj = make_junction(JunctionKind::ESJJ, 1.0);
  esjj.alpha = 1.2;
  esjj.epsilon = 0.8;
  esjj.lambda_taper = 1.0;
  const double rp = verify_equivalence_residual(psge_to_integro(psge.alpha, psge.epsilon).params, field, psge);
  const double re =
      verify_equivalence_residual(esjj_to_integro(esjj.alpha, esjj.epsilon, esjj.lambda_taper).params, field, esjj);
  o.require(rp < 1e-8 && re < 1e-8, "equivalence residuals " + num(rp) + ", " + num(re));
  return o;
}

// 2. fundamental solution
Outcome fundamental_solution() {
  Outcome o;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  int violations = 0;
  for (int set = 0; set < 10; ++set) {
    const KernelParams p{u(rng), u(rng), u(rng), u(rng)};
    for (int ix = 0; ix < 50; ++ix)
      for (int it = 0; it < 20; ++it) {
        const double x = -4.0 + 8.0 * ix / 49.0;
        const double t = 0.05 + 2.95 * it / 19.0;
        if (std::abs(eval_K(x, t, p)) > K_bound(x, t, p) + kDefaultQuadTol) ++violations;
      }
  }
  o.require(violations == 0, "|K| <= bound at 10 x 50 x 20 samples, " + std::to_string(violations) + " violations");

  const KernelParams pr{1.0, 1.0, 2.0, 1.0};
  const double r1 = residual_LR({}, pr, 0.001), r2 = residual_LR({}, pr, 0.0005);
  const double order = std::log2(r1 / r2);
  o.require(r2 < 1e-4 && order > 1.7 && order < 2.3,
            "L_R K residual " + num(r2) + ", observed order " + num(order));

  // sup over |x| >= 0.5 must fall with t; values may underflow to exactly 0
  const KernelParams pm{0.5, 1.2, 1.0, 1.0};
  bool mono = true;
  std::vector<double> sups(4, 0.0);
  for (double x = 0.5; x <= 3.0; x += 0.1) {
    for (double s : {-1.0, 1.0}) {
      double prev = eval_K(s * x, 0.1, pm);
      sups[0] = std::max(sups[0], std::abs(prev));
      for (int k = 2; k <= 4; ++k) {
        const double v = eval_K(s * x, std::pow(10.0, -k), pm, 1e-300);
        if (!(v <= prev && (prev == 0.0 || v < prev))) mono = false;
        sups[k - 1] = std::max(sups[k - 1], std::abs(v));
        prev = v;
      }
    }
  }
  o.require(mono, "sup_{|x| >= 0.5} |K| at t = 1e-1 .. 1e-4: " + num(sups[0]) + ", " + num(sups[1]) + ", " +
                      num(sups[2]) + ", " + num(sups[3]));

  const KernelParams p0{1.0, 1e-12, 1.0, 1.0};
  double gap = 0.0;
  for (double x : {-2.0, -0.4, 0.0, 0.7, 1.5})
    for (double t : {0.02, 0.3, 1.0, 4.0}) {
      const double heat = std::exp(-x * x / (4 * t) - t) / (2 * std::sqrt(std::numbers::pi * t));
      gap = std::max(gap, std::abs(eval_K(x, t, p0) - heat));
    }
  o.require(gap < 1e-10, "b -> 0 gap to the damped heat kernel " + num(gap));
  return o;
}

// 3. spectral Green function
Outcome spectral() {
  Outcome o;
  const double h = 1e-5;
  double worst = 0.0;
  for (double lam : {0.0, 0.5, 1.0})
    for (int n = 1; n <= 40; ++n) {
      const auto c = mode_coeffs(n, 1.0, lam, 1.0, 0.1);
      for (double t = 0.05; t <= 5.0; t += 0.05) {
        const auto r = modal_response(c, t);
        const double d2 = (modal_response(c, t + h).dG - modal_response(c, t - h).dG) / (2 * h);
        worst = std::max(worst, std::abs(d2 + 2 * c.g_n * r.dG + c.b_n * r.G));
      }
    }
  o.require(worst < 1e-6, "mode ODE residual " + num(worst) + " over 3 x 40 modes");

  double cont = 0.0;
  for (double g : {0.05, 0.3, 1.5})
    for (double w2 : {1e-9, -1e-9, 0.0})
      for (double t = 0.25; t <= 10.0; t += 0.25) {
        const ModeCoefficients c{1, 1.0, g * g - w2, g, w2};
        const double taylor = t * std::exp(-g * t) * (1 + w2 * t * t / 6 + w2 * w2 * std::pow(t, 4) / 120);
        cont = std::max(cont, std::abs(modal_response(c, t).G - taylor));
      }
  o.require(cont < 1e-10, "critical-damping continuity " + num(cont));

  auto spec = make_junction(JunctionKind::ESJJ, 1.0);
  spec.alpha = 1.0;
  spec.epsilon = 0.1;
  spec.lambda_taper = 0.5;
  double dbl = 0.0;
  for (double t : {0.5, 1.0, 3.0})
    for (double x : {0.1, 0.5, 0.9})
      for (double xi : {0.2, 0.6}) {
        const int n = green_mode_count(x, t, spec, 0.5 * kDefaultSeriesTol);
        dbl = std::max(dbl, std::abs(eval_G(x, xi, t, spec) - eval_G_truncated(x, xi, t, spec, 2 * n)));
      }
  o.require(dbl < kDefaultSeriesTol, "doubling the mode cap moves eval_G by " + num(dbl));
  return o;
}

// 4. three-way agreement
Outcome three_way() {
  Outcome o;
  const auto cfg = parse_config(read_file(fixture("benchmark_esjj.cfg")));
  const auto rows = compare_runs(solve(cfg));
  double a = 0, b = 0, c = 0;
  for (const auto& r : rows) {
    a = std::max(a, r.fd_green);
    b = std::max(b, r.fd_picard);
    c = std::max(c, r.green_picard);
  }
  const double tol = 1e-3 + cfg.tol.series + cfg.tol.fix;
  o.require(a < tol && b < tol && c < tol,
            "sup diffs fd-green " + num(a) + ", fd-picard " + num(b) + ", green-picard " + num(c));
  return o;
}

// 5. long-time limit under boundary data
Outcome long_time_limit() {
  Outcome o;
  const double alpha = 1.2, eps = 0.8, lam = 1.0, L = 1.0;
  auto spec = make_junction(JunctionKind::ESJJ, L);
  spec.alpha = alpha;
  spec.epsilon = eps;
  spec.lambda_taper = lam;
  const auto kernel = esjj_to_integro(alpha, eps, lam).params;
  const auto grid = Grid1D::make(L, 21, 50.0 / alpha, 0.05);
  PicardConfig cfg;
  cfg.snapshot_interval = 0.5;

  ProblemData d;
  d.source = SourceMode::none;
  d.g1 = [](double) { return 1.0; };
  d.homogeneous_boundary = false;
  const auto r = picard_solve_boundary(d, spec, kernel, cfg, grid);
  const auto& u = r.snapshots.back().u;
  double gap = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    const double x = grid.x(i);
    gap = std::max(gap, std::abs(std::exp(-0.5 * lam * x) * u[i] - asymptotic_profile(1.0, 0.0, lam, L, x)));
  }
  o.require(gap < 1e-2, "sup |w(t_end) - profile| = " + num(gap) + " at t_end = " + num(grid.t_end));

  ProblemData ramp = d;
  ramp.g1 = [](double t) { return -std::expm1(-t); };
  const auto rr = picard_solve_boundary(ramp, spec, kernel, cfg, grid);
  std::vector<double> limit(grid.nx);
  for (int i = 0; i < grid.nx; ++i)
    limit[i] = std::exp(0.5 * lam * grid.x(i)) * asymptotic_profile(1.0, 0.0, lam, L, grid.x(i));
  const auto tr = decay_report(rr, {}, limit);
  const double peak = *std::max_element(tr.boundary.begin(), tr.boundary.end());
  o.require(tr.boundary.back() < 1e-3 * peak,
            "ramp boundary deviation " + num(tr.boundary.back()) + " vs peak " + num(peak));
  return o;
}

// 6. conservative limit
Outcome conservative_limit() {
  Outcome o;
  // brute-force energy of 4 atan(e^x) on [-30, 30]
  const int n = 2000000;
  const double a = -30.0, b = 30.0, hq = (b - a) / n, hd = 1e-5;
  auto kink = [](double x) { return 4.0 * std::atan(std::exp(x)); };
  double oracle = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = a + (k + 0.5) * hq;
    const double ux = (kink(x + hd) - kink(x - hd)) / (2 * hd);
    oracle += (0.5 * ux * ux + 1.0 - std::cos(kink(x))) * hq;
  }
  o.require(std::abs(oracle - 8.0) < 1e-6, "quadrature oracle " + num(oracle));

  const auto cfg = parse_config(read_file(fixture("kink_sge.cfg")));
  const auto grid = make_grid(cfg);
  const auto snaps = solve(cfg).front().snapshots;
  const double e0 = energy(snaps.front(), grid);
  double drift = 0.0;
  for (const auto& s : snaps) drift = std::max(drift, std::abs(energy(s, grid) - e0) / e0);
  o.require(drift < 1e-3, "energy drift " + num(drift) + " (dx = " + num(grid.dx) + ", t_end = " + num(grid.t_end) + ")");
  o.require(std::abs(e0 - oracle) < 0.01 * oracle, "kink energy " + num(e0));
  return o;
}

// 7. eps -> 0 on the nonlinear PSGE benchmark
Outcome eps_limit() {
  Outcome o;
  const auto base = parse_config(read_file(fixture("psge_kink.cfg")));
  std::vector<std::vector<FieldState>> runs;
  const std::vector<double> eps = {0.0, 1e-3, 1e-2, 1e-1};
  for (double e : eps) runs.push_back(solve(sweep_point(base, "model.epsilon", e)).front().snapshots);
  double bound = 0.0;
  for (const auto& r : runs)
    for (const auto& s : r) bound = std::max(bound, sup_abs(s.u));
  std::vector<double> diff;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    double m = 0.0;
    for (std::size_t j = 0; j < runs[k].size(); ++j)
      for (std::size_t i = 0; i < runs[k][j].u.size(); ++i)
        m = std::max(m, std::abs(runs[k][j].u[i] - runs[0][j].u[i]));
    diff.push_back(m);
  }
  o.require(bound < 2.0 * 2.0 * std::numbers::pi, "sup |u_eps| <= " + num(bound) + " for all eps");
  const double q1 = diff[2] / diff[1], q2 = diff[1] / diff[0];
  o.require(diff[0] < diff[1] && diff[1] < diff[2] && q1 >= 2 && q1 <= 30 && q2 >= 2 && q2 <= 30,
            "sup |u_eps - u_0| = " + num(diff[0]) + ", " + num(diff[1]) + ", " + num(diff[2]) + " (ratios " +
                num(q2) + ", " + num(q1) + ")");
  return o;
}

int run_cli(const std::string& args, const fs::path& out) {
  const std::string cmd = "JJLAB_OUTPUT_DIR='" + out.string() + "' '" + JJLAB_CLI_PATH + "' --quiet " + args +
                          " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 8. determinism and interface
Outcome determinism() {
  Outcome o;
  const auto tmp = fs::temp_directory_path() / "jjlab_acceptance";
  fs::remove_all(tmp);
  const std::string bench = "simulate '" + fixture("benchmark_esjj.cfg").string() + "'";
  const int c1 = run_cli(bench, tmp / "a"), c2 = run_cli(bench, tmp / "b");
  bool same = c1 == 0 && c2 == 0;
  int files = 0;
  if (same)
    for (const auto& e : fs::directory_iterator(tmp / "a")) {
      ++files;
      same = same && read_file(e.path()) == read_file(tmp / "b" / e.path().filename());
    }
  o.require(same && files == 4, "two CLI runs give byte-identical CSVs (" + std::to_string(files) + " files)");

  testing::ConfigGen gen(8);
  int ok = 0;
  for (int i = 0; i < 200; ++i) {
    const auto c = gen.next();
    try {
      if (parse_config(render(c)) == c) ++ok;
    } catch (const std::exception&) {
    }
  }
  o.require(ok == 200, "config round-trip " + std::to_string(ok) + "/200");

  struct Case {
    const char* file;
    int code;
  };
  std::string codes;
  bool codes_ok = true;
  for (auto [file, code] :
       {Case{"bad_unknown_key.cfg", 1}, Case{"bad_esjj_taper.cfg", 1}, Case{"diverging_picard.cfg", 2}}) {
    const auto out = tmp / file;
    const int got = run_cli("simulate '" + fixture(file).string() + "'", out);
    codes += (codes.empty() ? "" : ", ") + std::string(file) + " -> " + std::to_string(got);
    codes_ok = codes_ok && got == code && !fs::exists(out);
  }
  o.require(codes_ok, "exit codes " + codes);
  fs::remove_all(tmp);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"parameter-map identities and equivalence residual", parameter_maps},
      {"fundamental solution: bound, residual, small-t decay, b -> 0 limit", fundamental_solution},
      {"spectral Green function: mode ODEs, critical damping, truncation", spectral},
      {"three-way agreement on the linearized tapered benchmark", three_way},
      {"long-time limit under constant and ramped boundary data", long_time_limit},
      {"conservative limit: kink energy", conservative_limit},
      {"eps -> 0 boundedness and convergence", eps_limit},
      {"determinism, config round-trip, exit codes", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu: %s | %s | %.1f s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
