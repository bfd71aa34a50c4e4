// jjlab: run junction experiments from a flat config file.
//
//   jjlab simulate <config>
//   jjlab compare <config>
//   jjlab kernel <config>
//   jjlab green <config>
//   jjlab sweep <config> --param model.epsilon --values 0.1,0.01,0.001
//
// The output directory is output.dir unless JJLAB_OUTPUT_DIR is set.
// Exit status: 0 success, 1 configuration error, 2 solver divergence.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "jjlab/config.hpp"
#include "jjlab/harness.hpp"

namespace {

jjlab::ExperimentConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw jjlab::ConfigError({{0, "cannot read config file " + path}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return jjlab::parse_config(ss.str());
}

std::filesystem::path output_dir(const jjlab::ExperimentConfig& c) {
  if (const char* env = std::getenv("JJLAB_OUTPUT_DIR"); env && *env) return env;
  return c.output.dir;
}

std::vector<double> parse_values(const std::string& text) {
  // reuse the config list syntax
  jjlab::ExperimentConfig scratch;
  jjlab::set_config_value(scratch, "tables.times", text);
  return scratch.tables.times;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Josephson junction solvers: finite differences, Green series, Picard iteration"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Print nothing on success");

  std::string config_path;
  auto* simulate = app.add_subcommand("simulate", "Run the solver(s) selected in the config");
  auto* compare = app.add_subcommand("compare", "Run fd, green and picard and write comparison.csv");
  auto* kernel = app.add_subcommand("kernel", "Tabulate K, its bound and theta");
  auto* green = app.add_subcommand("green", "Tabulate Green modes and a G slice");
  auto* sweep = app.add_subcommand("sweep", "Repeat a run over values of one numeric key");
  std::string param, values;
  for (auto* sub : {simulate, compare, kernel, green, sweep})
    sub->add_option("config", config_path, "Config file")->required();
  sweep->add_option("--param", param, "Numeric config key, e.g. model.epsilon")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto say = [&](const std::string& s) {
    if (!quiet) std::cout << s << '\n';
  };

  try {
    auto cfg = load(config_path);
    const auto dir = output_dir(cfg);
    if (*compare) cfg.solver.kind = jjlab::SolverChoice::all;
    if (*simulate || *compare) {
      const auto rep = jjlab::run(cfg, dir);
      if (!rep.comparison.empty()) {
        double a = 0, b = 0, c = 0;
        for (const auto& r : rep.comparison) {
          a = std::max(a, r.fd_green);
          b = std::max(b, r.fd_picard);
          c = std::max(c, r.green_picard);
        }
        char buf[200];
        std::snprintf(buf, sizeof buf, "max supdiff fd-green %.3g, fd-picard %.3g, green-picard %.3g (tol %.3g)", a,
                      b, c, cfg.tol.compare);
        say(buf);
      }
      for (const auto& p : rep.artifacts) say("wrote " + p.string());
    } else if (*kernel) {
      for (const auto& p : jjlab::write_kernel_tables(cfg, dir)) say("wrote " + p.string());
    } else if (*green) {
      for (const auto& p : jjlab::write_green_tables(cfg, dir)) say("wrote " + p.string());
    } else if (*sweep) {
      const auto rows = jjlab::sweep(cfg, param, parse_values(values), dir);
      say("wrote " + (dir / "sweep_summary.csv").string() + " (" + std::to_string(rows.size()) + " runs)");
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return jjlab::exit_code_for(e);
  }
}
