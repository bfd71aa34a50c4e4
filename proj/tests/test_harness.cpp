#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "jjlab/config.hpp"
#include "jjlab/errors.hpp"
#include "jjlab/harness.hpp"
#include "jjlab/integral.hpp"
#include "jjlab/kernels.hpp"
#include "jjlab/spectral.hpp"
#include "support/config_gen.hpp"

using namespace jjlab;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fixture(const char* name) { return fs::path(JJLAB_FIXTURE_DIR) / name; }

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("jjlab_test_harness_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig base_config(const char* kind = "PSGE") {
  return parse_config(std::string("model.kind = ") + kind + "\ngrid.nx = 21\ngrid.t_end = 1\n");
}

}  // namespace

TEST_CASE("parse_config errors") {
  CHECK_THROWS_WITH_AS(parse_config(""), "missing section: model\nmissing section: grid", ConfigError);
  try {
    parse_config("");
  } catch (const ConfigError& e) {
    REQUIRE(!e.issues().empty());
    CHECK(e.issues().front().message == "missing section: model");
  }

  auto issue_of = [](const std::string& text) -> ConfigIssue {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.issues().front();
    }
    return {-1, "no error"};
  };
  auto i1 = issue_of("model.kind = SGE\ngrid.nx = 21\ngrid.t_end = 1\ngrid.tend = 2\n");
  CHECK(i1.line == 4);
  CHECK(i1.message == "unknown key: grid.tend");
  auto i2 = issue_of("model.kind = SGE\ngrid.nx = twenty\ngrid.t_end = 1\n");
  CHECK(i2.line == 2);
  CHECK(i2.message.find("expected an integer") != std::string::npos);
  auto i3 = issue_of("# c\nmodel.kind = ESJJ\nmodel.lambda_taper = 0\ngrid.nx = 21\ngrid.t_end = 1\n");
  CHECK(i3.line == 3);
  CHECK(i3.message.find("ESJJ requires lambda_taper > 0") != std::string::npos);
  auto i4 = issue_of("model.kind = SGE\ngrid.nx = 21\n");
  CHECK(i4.message == "missing key: grid.t_end");
  auto i5 = issue_of("model.kind = SGE\ngrid.nx = 21\ngrid.t_end = 1\ngrid.nx = 22\n");
  CHECK(i5.line == 4);
  CHECK(i5.message.find("duplicate key") != std::string::npos);
  auto i6 = issue_of("model.kind = SGE\ngrid.nx = 21\ngrid.t_end = inf\n");
  CHECK(i6.line == 3);
  auto i7 = issue_of("model.kind = SGE\ngrid.nx = 21\ngrid.t_end = 1\ndata.initial = gaussian\n");
  CHECK(i7.line == 4);
  CHECK(i7.message.find("sine-mode") != std::string::npos);
  auto i8 = issue_of("model.kind = SGE\ngrid.nx = 21\ngrid.t_end = 1\nsolver.kind = green\n");
  CHECK(i8.line == 4);
  auto i9 = issue_of("model.kind = SGE\nthis line has no equals\ngrid.nx = 21\ngrid.t_end = 1\n");
  CHECK(i9.line == 2);
}

TEST_CASE("minimal config gets documented defaults") {
  auto c = parse_config("model.kind = SGE  # conservative\ngrid.nx = 41\ngrid.t_end = 2\n");
  CHECK(c.model == make_junction(JunctionKind::SGE, 1.0));
  CHECK(c.grid.dt == doctest::Approx(0.5 / 40));
  CHECK(c.tol.series == kDefaultSeriesTol);
  CHECK(c.tol.quad == kDefaultQuadTol);
  const PicardConfig pc;
  CHECK(c.tol.fix == pc.fix_tol);
  CHECK(c.tol.max_iterations == pc.max_iterations);
  CHECK(c.tol.window_length == pc.window_length);
  CHECK(c.tol.quad_nodes == pc.quad_nodes);
  CHECK(c.output.snapshot_interval == doctest::Approx(0.2));
  CHECK(c.tables.times == std::vector<double>{2.0});
  CHECK(c.tables.points == 41);
  CHECK(c.data.initial == InitialPreset::zero);
  CHECK(c.solver.kind == SolverChoice::fd);

  auto k = parse_config("model.kind = SGE\nmodel.length = 20\ngrid.nx = 41\ngrid.t_end = 2\ndata.initial = kink\n");
  CHECK(k.data.kink_center == 10.0);
  CHECK(k.data.velocity == VelocityPreset::kink);
  CHECK(k.data.left == BoundaryPreset::kink);
  auto ms = parse_config("model.kind = MICROSHORT\nmodel.length = 4\ngrid.nx = 41\ngrid.t_end = 2\n");
  CHECK(ms.model.x_ms == 2.0);
}

TEST_CASE("render and parse round-trip on random valid configs") {
  testing::ConfigGen gen(20261015);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const auto c = gen.next();
    REQUIRE_NOTHROW(validate(c));
    const auto text = render(c);
    ExperimentConfig back;
    REQUIRE_NOTHROW(back = parse_config(text));
    CHECK(back == c);
    CHECK(render(back) == text);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("zero data gives zero solutions for every solver") {
  for (const char* s : {"fd", "green", "picard", "all"}) {
    auto c = parse_config(std::string("model.kind = ESJJ\nmodel.epsilon = 0.8\nmodel.alpha = 1.2\n"
                                      "model.lambda_taper = 1\ngrid.nx = 21\ngrid.t_end = 1\n"
                                      "data.source = linearized\nsolver.kind = ") +
                          s + "\n");
    for (const auto& r : solve(c))
      for (const auto& snap : r.snapshots)
        for (double u : snap.u) CHECK(u == 0.0);
  }
}

TEST_CASE("run writes deterministic artifacts") {
  auto c = parse_config(read_file(fixture("benchmark_esjj.cfg")));
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto ra = run(c, a);
  const auto rb = run(c, b);
  REQUIRE(ra.artifacts.size() == 4);
  for (const auto& p : ra.artifacts) {
    const auto other = b / p.filename();
    REQUIRE(fs::exists(other));
    CHECK(read_file(p) == read_file(other));
  }
  CHECK(read_file(a / "solution.csv").rfind("x,t,u\n", 0) == 0);
  CHECK(read_file(a / "comparison.csv").rfind("t,supdiff_fd_green,supdiff_fd_picard,supdiff_green_picard\n", 0) == 0);
  for (const auto& r : ra.comparison) {
    CHECK(r.fd_green < c.tol.compare);
    CHECK(r.fd_picard < c.tol.compare);
    CHECK(r.green_picard < c.tol.compare);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("kink run conserves energy") {
  auto c = parse_config(read_file(fixture("kink_sge.cfg")));
  const auto runs = solve(c);
  const auto& snaps = runs.front().snapshots;
  const Grid1D g = make_grid(c);
  const double e0 = energy(snaps.front(), g);
  CHECK(e0 == doctest::Approx(8.0).epsilon(0.01));
  for (const auto& s : snaps) CHECK(std::abs(energy(s, g) - e0) < 1e-3 * e0);
}

TEST_CASE("failures map to exit codes and leave no artifacts") {
  struct Case {
    const char* file;
    int code;
  };
  for (auto [file, code] : {Case{"bad_unknown_key.cfg", 1}, Case{"bad_esjj_taper.cfg", 1},
                            Case{"diverging_picard.cfg", 2}}) {
    const auto dir = scratch(std::string("fail_") + file);
    int got = 0;
    try {
      run(parse_config(read_file(fixture(file))), dir);
    } catch (const std::exception& e) {
      got = exit_code_for(e);
    }
    CHECK(got == code);
    CHECK(!fs::exists(dir));
  }
  CHECK(exit_code_for(DivergenceError("x", 3)) == 2);
  CHECK(exit_code_for(SeriesTruncationError("x", 1.0)) == 2);
  CHECK(exit_code_for(RegimeError("x")) == 1);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("sweep") {
  auto c = parse_config(
      "model.kind = PSGE\nmodel.alpha = 1\nmodel.epsilon = 0.1\nmodel.gamma = 0.1\n"
      "grid.nx = 41\ngrid.dt = 0.0125\ngrid.t_end = 2\ndata.initial = sine-mode\n");

  SUBCASE("single value equals run") {
    const auto dir = scratch("sweep_single");
    auto rows = sweep(c, "model.epsilon", {0.1}, dir);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].sup_diff_vs_smallest == 0.0);
    const auto plain = scratch("sweep_plain");
    run(c, plain);
    CHECK(read_file(dir / "run_000" / "solution.csv") == read_file(plain / "solution.csv"));
    CHECK(read_file(dir / "sweep_summary.csv").rfind("value,sup_u_final,sup_diff_vs_smallest\n", 0) == 0);
    fs::remove_all(dir);
    fs::remove_all(plain);
  }

  SUBCASE("eps sweep approaches the smallest eps") {
    const auto dir = scratch("sweep_eps");
    auto rows = sweep(c, "model.epsilon", {0.1, 0.01, 0.001}, dir);
    CHECK(rows[0].sup_diff_vs_smallest > rows[1].sup_diff_vs_smallest);
    CHECK(rows[1].sup_diff_vs_smallest > rows[2].sup_diff_vs_smallest);
    CHECK(rows[2].sup_diff_vs_smallest == 0.0);
    fs::remove_all(dir);
  }

  SUBCASE("lambda = 0 reproduces the untapered run") {
    auto e = c;
    e.model.kind = JunctionKind::ESJJ;
    e.model.lambda_taper = 0.5;
    const auto dir = scratch("sweep_lambda");
    sweep(e, "model.lambda_taper", {0.5, 0.0}, dir);
    const auto plain = scratch("sweep_psge");
    run(c, plain);
    CHECK(read_file(dir / "run_001" / "solution.csv") == read_file(plain / "solution.csv"));
    CHECK(read_file(dir / "run_000" / "solution.csv") != read_file(plain / "solution.csv"));
    fs::remove_all(dir);
    fs::remove_all(plain);
  }

  SUBCASE("a failing value aborts the sweep and names it") {
    auto p = c;
    p.solver.kind = SolverChoice::picard;
    const auto dir = scratch("sweep_fail");
    try {
      sweep(p, "tol.max_iterations", {30, 1}, dir);
      FAIL("sweep should fail");
    } catch (const RunFailure& e) {
      CHECK(std::string(e.what()).find("tol.max_iterations = 1") != std::string::npos);
      CHECK(e.exit_code() == 2);
    }
    CHECK(!fs::exists(dir / "run_000"));
    CHECK_THROWS_AS(sweep(c, "data.initial", {1.0}, dir), RunFailure);
    CHECK_THROWS_AS(sweep(c, "model.epsilon", {-1.0}, dir), RunFailure);
    fs::remove_all(dir);
  }
}

TEST_CASE("kernel and green tables") {
  auto e = parse_config(
      "model.kind = ESJJ\nmodel.alpha = 1.2\nmodel.epsilon = 0.8\nmodel.lambda_taper = 1\n"
      "grid.nx = 11\ngrid.t_end = 1\ntables.times = 0.5, 1\n");
  const auto dir = scratch("tables");
  auto k = write_kernel_tables(e, dir);
  REQUIRE(k.size() == 1);
  const auto text = read_file(k[0]);
  CHECK(text.rfind("x,t,K,K_bound,theta,theta_x\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 11);
  auto g = write_green_tables(e, dir);
  REQUIRE(g.size() == 2);
  const auto modes = read_file(g[0]);
  CHECK(std::count(modes.begin(), modes.end(), '\n') == 1 + 8 * 2);
  fs::remove_all(dir);

  auto p = base_config();
  p.model.epsilon = 0.5;
  p.model.alpha = 1.0;
  CHECK_THROWS_AS(write_kernel_tables(p, dir), RegimeError);
  CHECK(!fs::exists(dir / "kernel.csv"));
}
