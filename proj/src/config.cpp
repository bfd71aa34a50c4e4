#include "jjlab/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace jjlab {

std::string_view to_string(SolverChoice v) {
  switch (v) {
    case SolverChoice::fd: return "fd";
    case SolverChoice::green: return "green";
    case SolverChoice::picard: return "picard";
    case SolverChoice::all: return "all";
  }
  return "?";
}

std::string_view to_string(InitialPreset v) {
  switch (v) {
    case InitialPreset::zero: return "zero";
    case InitialPreset::kink: return "kink";
    case InitialPreset::constant: return "constant";
    case InitialPreset::sine_mode: return "sine-mode";
    case InitialPreset::custom: return "custom";
  }
  return "?";
}

std::string_view to_string(VelocityPreset v) {
  switch (v) {
    case VelocityPreset::zero: return "zero";
    case VelocityPreset::kink: return "kink";
    case VelocityPreset::custom: return "custom";
  }
  return "?";
}

std::string_view to_string(BoundaryPreset v) {
  switch (v) {
    case BoundaryPreset::zero: return "zero";
    case BoundaryPreset::constant: return "constant";
    case BoundaryPreset::ramp: return "ramp";
    case BoundaryPreset::kink: return "kink";
    case BoundaryPreset::custom: return "custom";
  }
  return "?";
}

std::string_view to_string(Formulation v) { return v == Formulation::direct ? "direct" : "tapered"; }

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << '\n';
    if (issues[i].line > 0) os << "line " << issues[i].line << ": ";
    os << issues[i].message;
  }
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::invalid_argument(join_issues(issues)), issues_(std::move(issues)) {}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(std::string_view s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v))
    throw std::invalid_argument("expected a finite number, got '" + std::string(s) + "'");
  return v;
}

int parse_int(std::string_view s) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
  return v;
}

std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  while (true) {
    const auto c = s.find(',');
    out.push_back(parse_real(trim(s.substr(0, c))));
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return out;
}

std::string render_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_number(v[i]);
  }
  return s;
}

template <class E>
E parse_word(std::string_view s, std::initializer_list<E> all) {
  for (E e : all)
    if (to_string(e) == s) return e;
  std::string names;
  for (E e : all) names += (names.empty() ? "" : ", ") + std::string(to_string(e));
  throw std::invalid_argument("unknown name '" + std::string(s) + "' (expected one of " + names + ")");
}

enum class ValueKind { real, integer, word, text, list };

struct Field {
  std::string key;
  ValueKind kind;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

#define JJ_REAL(name, member)                                                        \
  Field {                                                                            \
    name, ValueKind::real, [](const ExperimentConfig& c) { return format_number(c.member); }, \
        [](ExperimentConfig& c, std::string_view v) { c.member = parse_real(v); }    \
  }
#define JJ_INT(name, member)                                                              \
  Field {                                                                                 \
    name, ValueKind::integer, [](const ExperimentConfig& c) { return std::to_string(c.member); }, \
        [](ExperimentConfig& c, std::string_view v) { c.member = parse_int(v); }          \
  }
#define JJ_LIST(name, member)                                                           \
  Field {                                                                               \
    name, ValueKind::list, [](const ExperimentConfig& c) { return render_list(c.member); }, \
        [](ExperimentConfig& c, std::string_view v) { c.member = parse_list(v); }       \
  }
#define JJ_WORD(name, member, ...)                                                                \
  Field {                                                                                         \
    name, ValueKind::word, [](const ExperimentConfig& c) { return std::string(to_string(c.member)); }, \
        [](ExperimentConfig& c, std::string_view v) {                                             \
          c.member = parse_word(v, {__VA_ARGS__});                                                \
        }                                                                                         \
  }

const std::vector<Field>& fields() {
  using JK = JunctionKind;
  using IP = InitialPreset;
  using VP = VelocityPreset;
  using BP = BoundaryPreset;
  static const std::vector<Field> f = {
      JJ_WORD("model.kind", model.kind, JK::SGE, JK::PSGE, JK::FIELD_FORCED, JK::MICROSHORT, JK::ESJJ),
      JJ_REAL("model.length", model.length),
      JJ_REAL("model.epsilon", model.epsilon),
      JJ_REAL("model.alpha", model.alpha),
      JJ_REAL("model.gamma", model.gamma),
      JJ_REAL("model.b_field", model.b_field),
      JJ_REAL("model.k_mode", model.k_mode),
      JJ_REAL("model.mu", model.mu),
      JJ_REAL("model.x_ms", model.x_ms),
      JJ_REAL("model.lambda_taper", model.lambda_taper),
      JJ_INT("grid.nx", grid.nx),
      JJ_REAL("grid.dt", grid.dt),
      JJ_REAL("grid.t_end", grid.t_end),
      JJ_WORD("data.initial", data.initial, IP::zero, IP::kink, IP::constant, IP::sine_mode, IP::custom),
      JJ_REAL("data.amplitude", data.amplitude),
      JJ_INT("data.mode", data.mode),
      JJ_REAL("data.kink_center", data.kink_center),
      JJ_REAL("data.kink_velocity", data.kink_velocity),
      JJ_LIST("data.initial_values", data.initial_values),
      JJ_WORD("data.velocity", data.velocity, VP::zero, VP::kink, VP::custom),
      JJ_LIST("data.velocity_values", data.velocity_values),
      JJ_WORD("data.left", data.left, BP::zero, BP::constant, BP::ramp, BP::kink, BP::custom),
      JJ_REAL("data.left_value", data.left_value),
      JJ_LIST("data.left_values", data.left_values),
      JJ_WORD("data.right", data.right, BP::zero, BP::constant, BP::ramp, BP::kink, BP::custom),
      JJ_REAL("data.right_value", data.right_value),
      JJ_LIST("data.right_values", data.right_values),
      JJ_WORD("data.source", data.source, SourceMode::nonlinear, SourceMode::linearized, SourceMode::none),
      JJ_WORD("solver.kind", solver.kind, SolverChoice::fd, SolverChoice::green, SolverChoice::picard,
              SolverChoice::all),
      JJ_WORD("solver.formulation", solver.formulation, Formulation::direct, Formulation::tapered),
      Field{"output.dir", ValueKind::text, [](const ExperimentConfig& c) { return c.output.dir; },
            [](ExperimentConfig& c, std::string_view v) { c.output.dir = std::string(v); }},
      JJ_REAL("output.snapshot_interval", output.snapshot_interval),
      JJ_REAL("tol.series", tol.series),
      JJ_REAL("tol.quad", tol.quad),
      JJ_REAL("tol.fix", tol.fix),
      JJ_INT("tol.max_iterations", tol.max_iterations),
      JJ_REAL("tol.window_length", tol.window_length),
      JJ_INT("tol.quad_nodes", tol.quad_nodes),
      JJ_REAL("tol.compare", tol.compare),
      JJ_LIST("tables.times", tables.times),
      JJ_INT("tables.points", tables.points),
      JJ_REAL("tables.xi", tables.xi),
      JJ_INT("tables.modes", tables.modes),
  };
  return f;
}

#undef JJ_REAL
#undef JJ_INT
#undef JJ_LIST
#undef JJ_WORD

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

using LineMap = std::map<std::string, int, std::less<>>;

int line_of(const LineMap& lines, std::string_view key) {
  auto it = lines.find(key);
  return it == lines.end() ? 0 : it->second;
}

bool zero_boundary(BoundaryPreset p, double value) {
  return p == BoundaryPreset::zero || ((p == BoundaryPreset::constant || p == BoundaryPreset::ramp) && value == 0.0);
}

void collect_issues(const ExperimentConfig& c, const LineMap& lines, std::vector<ConfigIssue>& issues) {
  auto issue = [&](std::string_view key, std::string msg) {
    int line = line_of(lines, key);
    issues.push_back({line, std::string(key) + ": " + msg});
  };

  try {
    c.model.validate();
  } catch (const std::invalid_argument& e) {
    // anchor at the field the message names, else at model.kind
    const std::string what = e.what();
    std::string key = "model.kind";
    for (const char* name : {"epsilon", "alpha", "gamma", "b_field", "k_mode", "mu", "x_ms", "lambda_taper", "length"})
      if (what.find(name) != std::string::npos && lines.count("model." + std::string(name))) {
        key = "model." + std::string(name);
        break;
      }
    issues.push_back({line_of(lines, key), "invalid model: " + what});
  }

  if (c.grid.nx < 3) issue("grid.nx", "must be >= 3");
  if (c.grid.t_end < 0.0) issue("grid.t_end", "must be >= 0");
  if (c.grid.nx >= 3) {
    const double dx = c.model.length / (c.grid.nx - 1);
    if (!(c.grid.dt > 0.0)) issue("grid.dt", "must be > 0");
    else if (c.grid.dt > dx * (1.0 + 1e-12)) issue("grid.dt", "must not exceed dx = " + format_number(dx));
  }

  const auto& d = c.data;
  if (d.mode < 1) issue("data.mode", "must be >= 1");
  if (!(std::abs(d.kink_velocity) < 1.0)) issue("data.kink_velocity", "must satisfy |c| < 1");
  if (d.initial == InitialPreset::custom && d.initial_values.size() < 2)
    issue("data.initial_values", "custom initial data needs at least two values");
  if (d.velocity == VelocityPreset::custom && d.velocity_values.size() < 2)
    issue("data.velocity_values", "custom velocity needs at least two values");
  if (d.left == BoundaryPreset::custom && d.left_values.size() < 2)
    issue("data.left_values", "custom boundary data needs at least two values");
  if (d.right == BoundaryPreset::custom && d.right_values.size() < 2)
    issue("data.right_values", "custom boundary data needs at least two values");

  if (c.solver.kind == SolverChoice::green || c.solver.kind == SolverChoice::all) {
    const std::string who = "solver.kind = " + std::string(to_string(c.solver.kind));
    if (d.source == SourceMode::nonlinear)
      issue("solver.kind", who + " needs data.source = linearized or none (the Green solver is linear)");
    if (d.source == SourceMode::linearized && c.model.kind == JunctionKind::MICROSHORT)
      issue("solver.kind", who + " cannot linearize the microshort source");
    if (!zero_boundary(d.left, d.left_value) || !zero_boundary(d.right, d.right_value))
      issue("solver.kind", who + " needs zero boundary data");
  }

  if (c.output.dir.empty() || c.output.dir != trim(c.output.dir) || c.output.dir.find_first_of("#\n") != std::string::npos)
    issue("output.dir", "must be a non-empty path without '#' or surrounding spaces");
  if (c.output.snapshot_interval < 0.0) issue("output.snapshot_interval", "must be >= 0");

  const auto& t = c.tol;
  if (!(t.series > 0.0)) issue("tol.series", "must be > 0");
  if (!(t.quad > 0.0)) issue("tol.quad", "must be > 0");
  if (!(t.fix > 0.0)) issue("tol.fix", "must be > 0");
  if (t.max_iterations < 1) issue("tol.max_iterations", "must be >= 1");
  if (!(t.window_length > 0.0)) issue("tol.window_length", "must be > 0");
  if (t.quad_nodes < 1 || t.quad_nodes > 20) issue("tol.quad_nodes", "must be in [1, 20]");
  if (!(t.compare > 0.0)) issue("tol.compare", "must be > 0");

  if (c.tables.times.empty()) issue("tables.times", "needs at least one time");
  for (double s : c.tables.times)
    if (!(s > 0.0)) {
      issue("tables.times", "times must be > 0");
      break;
    }
  if (c.tables.points < 2) issue("tables.points", "must be >= 2");
  if (c.tables.xi < 0.0 || c.tables.xi > c.model.length) issue("tables.xi", "must lie in [0, model.length]");
  if (c.tables.modes < 1) issue("tables.modes", "must be >= 1");
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> k;
  for (const auto& f : fields()) k.push_back(f.key);
  return k;
}

bool is_numeric_key(std::string_view key) {
  const Field* f = find_field(key);
  return f && (f->kind == ValueKind::real || f->kind == ValueKind::integer);
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError({{0, "unknown key: " + std::string(key)}});
  try {
    f->set(config, trim(value));
  } catch (const std::invalid_argument& e) {
    throw ConfigError({{0, std::string(key) + ": " + e.what()}});
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::vector<ConfigIssue> issues;
  LineMap lines;
  int lineno = 0;
  for (std::size_t pos = 0; pos <= text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++lineno;
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back({lineno, "expected 'section.key = value'"});
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) {
      issues.push_back({lineno, "unknown key: " + key});
      continue;
    }
    if (lines.count(key)) {
      issues.push_back({lineno, "duplicate key: " + key + " (first set on line " + std::to_string(lines[key]) + ")"});
      continue;
    }
    lines[key] = lineno;
    if (value.empty()) {
      issues.push_back({lineno, key + ": missing value"});
      continue;
    }
    try {
      f->set(c, value);
    } catch (const std::invalid_argument& e) {
      issues.push_back({lineno, key + ": " + e.what()});
    }
  }

  auto has_section = [&](std::string_view s) {
    for (const auto& [k, l] : lines)
      if (k.starts_with(s) && k.size() > s.size() && k[s.size()] == '.') return true;
    return false;
  };
  if (!has_section("model")) issues.push_back({0, "missing section: model"});
  if (!has_section("grid")) issues.push_back({0, "missing section: grid"});
  for (const char* req : {"model.kind", "grid.nx", "grid.t_end"})
    if (!lines.count(req) && has_section(std::string_view(req).substr(0, std::string_view(req).find('.'))))
      issues.push_back({0, "missing key: " + std::string(req)});
  if (!issues.empty()) throw ConfigError(std::move(issues));

  // defaults that depend on other keys
  const double L = c.model.length;
  const bool seen_x_ms = lines.count("model.x_ms") > 0;
  if (!seen_x_ms && c.model.kind == JunctionKind::MICROSHORT) c.model.x_ms = 0.5 * L;
  if (!lines.count("grid.dt") && c.grid.nx >= 2) c.grid.dt = 0.5 * L / (c.grid.nx - 1);
  if (!lines.count("data.kink_center")) c.data.kink_center = 0.5 * L;
  const bool kink = c.data.initial == InitialPreset::kink;
  if (!lines.count("data.velocity") && kink) c.data.velocity = VelocityPreset::kink;
  if (!lines.count("data.left") && kink) c.data.left = BoundaryPreset::kink;
  if (!lines.count("data.right") && kink) c.data.right = BoundaryPreset::kink;
  if (!lines.count("output.snapshot_interval")) c.output.snapshot_interval = 0.1 * c.grid.t_end;
  if (!lines.count("tables.times")) c.tables.times = {c.grid.t_end > 0.0 ? c.grid.t_end : 1.0};
  if (!lines.count("tables.points")) c.tables.points = c.grid.nx;
  if (!lines.count("tables.xi")) c.tables.xi = 0.5 * L;

  collect_issues(c, lines, issues);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

void validate(const ExperimentConfig& config) {
  std::vector<ConfigIssue> issues;
  collect_issues(config, {}, issues);
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::string render(const ExperimentConfig& config) {
  std::string out = "# jjlab experiment\n";
  std::string section;
  for (const auto& f : fields()) {
    const std::string s = f.key.substr(0, f.key.find('.'));
    if (s != section) {
      if (!section.empty()) out += '\n';
      section = s;
    }
    if (f.kind == ValueKind::list && f.get(config).empty()) continue;
    out += f.key + " = " + f.get(config) + '\n';
  }
  return out;
}

}  // namespace jjlab
