#include "jjlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "jjlab/errors.hpp"

namespace jjlab {

std::string_view to_string(JunctionKind kind) {
  switch (kind) {
    case JunctionKind::SGE: return "SGE";
    case JunctionKind::PSGE: return "PSGE";
    case JunctionKind::FIELD_FORCED: return "FIELD_FORCED";
    case JunctionKind::MICROSHORT: return "MICROSHORT";
    case JunctionKind::ESJJ: return "ESJJ";
  }
  return "?";
}

JunctionKind junction_kind_from_string(std::string_view name) {
  for (auto k : {JunctionKind::SGE, JunctionKind::PSGE, JunctionKind::FIELD_FORCED, JunctionKind::MICROSHORT,
                 JunctionKind::ESJJ})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown junction kind '" + std::string(name) + "'");
}

std::string_view to_string(SourceMode mode) {
  switch (mode) {
    case SourceMode::nonlinear: return "nonlinear";
    case SourceMode::linearized: return "linearized";
    case SourceMode::none: return "none";
  }
  return "?";
}

SourceMode source_mode_from_string(std::string_view name) {
  for (auto m : {SourceMode::nonlinear, SourceMode::linearized, SourceMode::none})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown source mode '" + std::string(name) + "'");
}

void JunctionSpec::validate() const {
  const double fields[] = {epsilon, alpha, gamma, b_field, k_mode, mu, x_ms, lambda_taper, length};
  for (double f : fields)
    if (!std::isfinite(f)) throw std::invalid_argument("junction coefficients must be finite");
  if (length <= 0.0) throw std::invalid_argument("length must be > 0");
  if (epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  if (lambda_taper < 0.0) throw std::invalid_argument("lambda_taper must be >= 0");

  auto require_zero = [&](double v, const char* name) {
    if (v != 0.0)
      throw std::invalid_argument(std::string(name) + " must be 0 for kind " + std::string(to_string(kind)));
  };
  switch (kind) {
    case JunctionKind::SGE:
      require_zero(epsilon, "epsilon");
      require_zero(alpha, "alpha");
      require_zero(gamma, "gamma");
      [[fallthrough]];
    case JunctionKind::PSGE:
      require_zero(b_field, "b_field");
      require_zero(k_mode, "k_mode");
      [[fallthrough]];
    case JunctionKind::FIELD_FORCED:
      require_zero(mu, "mu");
      require_zero(x_ms, "x_ms");
      require_zero(lambda_taper, "lambda_taper");
      break;
    case JunctionKind::MICROSHORT:
      require_zero(lambda_taper, "lambda_taper");
      if (x_ms < 0.0 || x_ms > length) throw std::invalid_argument("x_ms must lie in [0, length]");
      break;
    case JunctionKind::ESJJ:
      require_zero(b_field, "b_field");
      require_zero(k_mode, "k_mode");
      require_zero(mu, "mu");
      require_zero(x_ms, "x_ms");
      if (lambda_taper <= 0.0) throw std::invalid_argument("ESJJ requires lambda_taper > 0");
      break;
  }
}

JunctionSpec make_junction(JunctionKind kind, double length) {
  JunctionSpec s;
  s.kind = kind;
  s.length = length;
  if (kind == JunctionKind::MICROSHORT) s.x_ms = 0.5 * length;
  return s;
}

namespace {

double microshort_spike(const JunctionSpec& spec, double x, double dx) {
  if (dx <= 0.0) throw DomainError("microshort source needs the grid spacing dx > 0");
  const double node = std::round(spec.x_ms / dx) * dx;
  return std::abs(x - node) < 0.5 * dx ? 1.0 / dx : 0.0;
}

}  // namespace

double source_term(const JunctionSpec& spec, double x, double t, double u, double dx, SourceMode mode) {
  (void)t;  // all catalogued models are autonomous
  const double tol = 1e-12 * spec.length;
  if (!(x >= -tol && x <= spec.length + tol))
    throw DomainError("source_term: x = " + std::to_string(x) + " outside [0, L]");
  if (mode == SourceMode::none) return 0.0;
  const double s = mode == SourceMode::nonlinear ? std::sin(u) : u;
  switch (spec.kind) {
    case JunctionKind::SGE: return s;
    case JunctionKind::PSGE:
    case JunctionKind::ESJJ: return s - spec.gamma;
    case JunctionKind::FIELD_FORCED: return s - spec.gamma - spec.b_field * std::cos(spec.k_mode * x);
    case JunctionKind::MICROSHORT:
      return (1.0 - spec.mu * microshort_spike(spec, x, dx)) * s - spec.gamma -
             spec.b_field * std::cos(spec.k_mode * x);
  }
  return s;
}

double source_slope(const JunctionSpec& spec, double x, double u, double dx, SourceMode mode) {
  if (mode == SourceMode::none) return 0.0;
  const double ds = mode == SourceMode::nonlinear ? std::cos(u) : 1.0;
  if (spec.kind == JunctionKind::MICROSHORT) return (1.0 - spec.mu * microshort_spike(spec, x, dx)) * ds;
  return ds;
}

std::string MappedKernel::reason() const {
  std::string r;
  if (a_nonpositive) r += "a <= 0";
  if (b_nonpositive) r += std::string(r.empty() ? "" : ", ") + "b <= 0";
  if (!r.empty()) r += " (outside the kernel positivity regime)";
  return r;
}

MappedKernel psge_to_integro(double alpha, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("psge_to_integro requires epsilon > 0");
  MappedKernel m;
  m.params.epsilon = epsilon;
  m.params.beta = 1.0 / epsilon;
  m.params.a = alpha - 1.0 / epsilon;
  m.params.b = -m.params.a / epsilon;
  m.a_nonpositive = m.params.a <= 0.0;
  m.b_nonpositive = m.params.b <= 0.0;
  return m;
}

MappedKernel esjj_to_integro(double alpha, double epsilon, double lambda) {
  if (!(epsilon > 0.0)) throw DomainError("esjj_to_integro requires epsilon > 0");
  MappedKernel m;
  m.params.epsilon = epsilon;
  m.params.beta = 1.0 / epsilon;
  m.params.b = m.params.beta * m.params.beta * (1.0 - alpha * epsilon);
  m.params.a = (0.25 * lambda * lambda - m.params.b) / m.params.beta;
  m.a_nonpositive = m.params.a <= 0.0;
  m.b_nonpositive = m.params.b <= 0.0;
  return m;
}

std::vector<double> taper_transform(std::span<const double> u, std::span<const double> x, double lambda,
                                    TaperDirection direction) {
  if (u.size() != x.size()) throw std::invalid_argument("taper_transform: field and grid sizes differ");
  const double sign = direction == TaperDirection::forward ? 0.5 : -0.5;
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::exp(sign * lambda * x[i]) * u[i];
  return out;
}

std::vector<std::string> ProblemData::compatibility_warnings(double length, double tol) const {
  std::vector<std::string> w;
  const double left = h0(0.0) - g1(0.0);
  const double right = h0(length) - g2(0.0);
  if (std::abs(left) > tol) {
    std::ostringstream os;
    os << "corner mismatch at x = 0: h0(0) - g1(0) = " << left;
    w.push_back(os.str());
  }
  if (std::abs(right) > tol) {
    std::ostringstream os;
    os << "corner mismatch at x = L: h0(L) - g2(0) = " << right;
    w.push_back(os.str());
  }
  return w;
}

ManufacturedField::ManufacturedField(std::vector<double> poly_coeffs, double decay)
    : coeffs_(std::move(poly_coeffs)), decay_(decay) {}

double ManufacturedField::p(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double ManufacturedField::p_xx(double x) const {
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 2;) acc = acc * x + coeffs_[k] * double(k) * double(k - 1);
  return acc;
}

double ManufacturedField::u(double x, double t) const { return p(x) * std::exp(-decay_ * t); }
double ManufacturedField::u_t(double x, double t) const { return -decay_ * u(x, t); }
double ManufacturedField::u_tt(double x, double t) const { return decay_ * decay_ * u(x, t); }
double ManufacturedField::u_xx(double x, double t) const { return p_xx(x) * std::exp(-decay_ * t); }
double ManufacturedField::u_xxt(double x, double t) const { return -decay_ * u_xx(x, t); }

double ManufacturedField::memory(double x, double t, double beta) const {
  const double d = beta - decay_;
  if (std::abs(d) < 1e-12) return p(x) * t * std::exp(-beta * t);
  return p(x) * (std::exp(-decay_ * t) - std::exp(-beta * t)) / d;
}

double ManufacturedField::memory_t(double x, double t, double beta) const {
  const double d = beta - decay_;
  if (std::abs(d) < 1e-12) return p(x) * (1.0 - beta * t) * std::exp(-beta * t);
  return p(x) * (beta * std::exp(-beta * t) - decay_ * std::exp(-decay_ * t)) / d;
}

double verify_equivalence_residual(const KernelParams& k, const ManufacturedField& f, const JunctionSpec& model,
                                   const SampleGrid& sample) {
  const double lambda = model.kind == JunctionKind::ESJJ ? model.lambda_taper : 0.0;
  const double damping = model.alpha + model.epsilon * lambda * lambda / 4.0;
  const double mass = lambda * lambda / 4.0;
  double sup = 0.0;
  for (int j = 1; j <= sample.nt; ++j) {
    const double t = sample.t_max * j / sample.nt;
    for (int i = 0; i < sample.nx; ++i) {
      const double x = model.length * i / std::max(1, sample.nx - 1);
      const double lr = f.u_t(x, t) - k.epsilon * f.u_xx(x, t) + k.a * f.u(x, t) + k.b * f.memory(x, t, k.beta);
      const double lr_t =
          f.u_tt(x, t) - k.epsilon * f.u_xxt(x, t) + k.a * f.u_t(x, t) + k.b * f.memory_t(x, t, k.beta);
      const double third = model.epsilon * f.u_xxt(x, t) - f.u_tt(x, t) + f.u_xx(x, t) - damping * f.u_t(x, t) -
                           mass * f.u(x, t);
      sup = std::max(sup, std::abs(lr_t + k.beta * lr + third));
    }
  }
  return sup;
}

}  // namespace jjlab
