#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "jjlab/errors.hpp"
#include "jjlab/model.hpp"

using namespace jjlab;
using doctest::Approx;

TEST_CASE("source_term per model kind") {
  auto sge = make_junction(JunctionKind::SGE, 10.0);
  CHECK(source_term(sge, 3.0, 1.0, 0.0) == 0.0);

  auto psge = make_junction(JunctionKind::PSGE, 10.0);
  psge.gamma = 0.3;
  CHECK(source_term(psge, 2.0, 0.0, 0.0) == Approx(-0.3));

  auto ff = make_junction(JunctionKind::FIELD_FORCED, 2.0);
  ff.b_field = 0.5;
  ff.k_mode = std::numbers::pi / 2.0;
  CHECK(source_term(ff, 0.0, 0.0, std::numbers::pi / 2.0) == Approx(0.5).epsilon(1e-15));

  auto esjj = make_junction(JunctionKind::ESJJ, 1.0);
  esjj.lambda_taper = 0.5;
  CHECK(source_term(esjj, 0.5, 0.0, 1.0) == Approx(std::sin(1.0)));
}

TEST_CASE("source_term modes and domain") {
  auto psge = make_junction(JunctionKind::PSGE, 1.0);
  psge.gamma = 0.1;
  CHECK(source_term(psge, 0.5, 0.0, 0.2, 0.0, SourceMode::linearized) == Approx(0.1));
  CHECK(source_term(psge, 0.5, 0.0, 0.2, 0.0, SourceMode::none) == 0.0);
  CHECK_THROWS_AS(source_term(psge, 1.5, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(source_term(psge, -0.1, 0.0, 0.0), DomainError);
}

TEST_CASE("microshort spike sits on the node nearest x_ms with unit mass") {
  auto ms = make_junction(JunctionKind::MICROSHORT, 1.0);
  ms.mu = 0.7;
  CHECK(ms.x_ms == Approx(0.5));
  const double dx = 0.1;
  const double u = 1.2;
  double mass = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double x = i * dx;
    const double w = (i == 0 || i == 10) ? 0.5 : 1.0;
    // (f - sin u) / (-mu sin u) is the discrete delta
    mass += w * dx * (source_term(ms, x, 0.0, u, dx) - std::sin(u)) / (-ms.mu * std::sin(u));
  }
  CHECK(mass == Approx(1.0).epsilon(1e-12));
  CHECK(source_term(ms, 0.5, 0.0, u, dx) == Approx((1.0 - 0.7 / dx) * std::sin(u)));
  CHECK_THROWS_AS(source_term(ms, 0.5, 0.0, u), DomainError);
}

TEST_CASE("junction invariants") {
  auto sge = make_junction(JunctionKind::SGE, 1.0);
  CHECK_NOTHROW(sge.validate());
  sge.epsilon = 0.1;
  CHECK_THROWS_AS(sge.validate(), std::invalid_argument);

  auto esjj = make_junction(JunctionKind::ESJJ, 1.0);
  CHECK_THROWS_WITH_AS(esjj.validate(), "ESJJ requires lambda_taper > 0", std::invalid_argument);
  esjj.lambda_taper = 0.3;
  CHECK_NOTHROW(esjj.validate());

  auto bad = make_junction(JunctionKind::PSGE, -1.0);
  CHECK_THROWS(bad.validate());
  auto neg = make_junction(JunctionKind::PSGE, 1.0);
  neg.epsilon = -0.1;
  CHECK_THROWS(neg.validate());

  auto ms = make_junction(JunctionKind::MICROSHORT, 1.0);
  ms.x_ms = 2.0;
  CHECK_THROWS(ms.validate());
}

TEST_CASE("psge_to_integro examples") {
  auto m = psge_to_integro(1.0, 0.5);
  CHECK(m.params.a == Approx(-1.0));
  CHECK(m.params.beta == Approx(2.0));
  CHECK(m.params.b == Approx(2.0));
  CHECK(m.a_nonpositive);
  CHECK_FALSE(m.b_nonpositive);

  m = psge_to_integro(3.0, 1.0);
  CHECK(m.params.a == Approx(2.0));
  CHECK(m.params.beta == Approx(1.0));
  CHECK(m.params.b == Approx(-2.0));
  CHECK(m.b_nonpositive);
  CHECK_FALSE(m.a_nonpositive);

  m = psge_to_integro(2.5, 0.5);
  CHECK(m.params.a == Approx(0.5));
  CHECK(m.params.beta == Approx(2.0));
  CHECK(m.params.b == Approx(-1.0));
  CHECK(m.flagged());

  CHECK_THROWS_AS(psge_to_integro(1.0, 0.0), DomainError);
}

TEST_CASE("esjj_to_integro examples") {
  auto m = esjj_to_integro(1.2, 0.8, 1.0);
  CHECK(m.params.beta == Approx(1.25));
  CHECK(m.params.b == Approx(0.0625));
  CHECK(m.params.a == Approx(0.15));
  CHECK_FALSE(m.flagged());

  m = esjj_to_integro(1.0 / 0.4, 0.4, 0.7);
  CHECK(m.params.b == Approx(0.0).epsilon(1e-12));
  CHECK(m.b_nonpositive);

  m = esjj_to_integro(1.0, 0.5, 0.2);
  CHECK(m.params.beta == Approx(2.0));
  CHECK(m.params.b == Approx(2.0));
  CHECK(m.params.a == Approx(-0.995));
  CHECK(m.a_nonpositive);
}

TEST_CASE("parameter maps satisfy their defining identities") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> al(0.0, 5.0), ep(0.01, 3.0), la(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double alpha = al(rng), eps = ep(rng), lam = la(rng);
    auto p = psge_to_integro(alpha, eps).params;
    CHECK(p.a + 1.0 / eps == Approx(alpha).epsilon(1e-12));
    CHECK(std::abs(p.b + p.a / eps) <= 1e-12 * (1.0 + std::abs(p.b)));
    auto q = esjj_to_integro(alpha, eps, lam).params;
    CHECK(q.beta * eps == Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(q.a * q.beta + q.b - lam * lam / 4.0) <= 1e-12 * (1.0 + std::abs(q.b)));
  }
}

TEST_CASE("taper_transform") {
  std::vector<double> x(11), one(11, 1.0);
  for (int i = 0; i < 11; ++i) x[i] = 0.1 * i;
  CHECK(taper_transform(one, x, 0.0, TaperDirection::forward) == one);

  const double lam = 0.8;
  std::vector<double> u(11);
  for (int i = 0; i < 11; ++i) u[i] = std::exp(-lam * x[i] / 2.0);
  for (double v : taper_transform(u, x, lam, TaperDirection::forward)) CHECK(v == Approx(1.0).epsilon(1e-15));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f(11);
    for (auto& v : f) v = n(rng);
    const double l = std::abs(n(rng));
    auto back = taper_transform(taper_transform(f, x, l, TaperDirection::forward), x, l, TaperDirection::inverse);
    for (int i = 0; i < 11; ++i) CHECK(back[i] == Approx(f[i]).epsilon(1e-14));
  }
}

TEST_CASE("equivalence residual of the parameter maps") {
  // u = (1 + x - 0.5 x^2 + 0.25 x^3) e^{-0.7 t}
  ManufacturedField field({1.0, 1.0, -0.5, 0.25}, 0.7);

  auto psge = make_junction(JunctionKind::PSGE, 1.0);
  psge.alpha = 2.5;
  psge.epsilon = 0.5;
  auto kp = psge_to_integro(psge.alpha, psge.epsilon).params;
  CHECK(verify_equivalence_residual(kp, field, psge) < 1e-8);

  auto esjj = make_junction(JunctionKind::ESJJ, 1.0);
  esjj.alpha = 1.2;
  esjj.epsilon = 0.8;
  esjj.lambda_taper = 1.0;
  auto ke = esjj_to_integro(esjj.alpha, esjj.epsilon, esjj.lambda_taper).params;
  CHECK(verify_equivalence_residual(ke, field, esjj) < 1e-8);

  ManufacturedField zero({0.0}, 1.0);
  CHECK(verify_equivalence_residual(kp, zero, psge) == 0.0);

  // A wrong map is detected.
  auto off = kp;
  off.b *= 1.1;
  CHECK(verify_equivalence_residual(off, field, psge) > 1e-3);
  // ESJJ parameters do not certify the untapered model.
  CHECK(verify_equivalence_residual(ke, field, psge) > 1e-3);
}

TEST_CASE("equivalence residual stays at round-off under sample refinement") {
  ManufacturedField field({0.3, -1.0, 2.0}, 1.3);
  auto esjj = make_junction(JunctionKind::ESJJ, 2.0);
  esjj.alpha = 1.5;
  esjj.epsilon = 0.7;
  esjj.lambda_taper = 0.6;
  auto k = esjj_to_integro(esjj.alpha, esjj.epsilon, esjj.lambda_taper).params;
  for (int n : {5, 20, 80}) CHECK(verify_equivalence_residual(k, field, esjj, {n, n, 3.0}) < 1e-12);
}

TEST_CASE("corner compatibility warnings") {
  ProblemData d;
  d.h0 = [](double x) { return x; };
  d.g2 = [](double) { return 1.0; };
  CHECK(d.compatibility_warnings(1.0).empty());
  d.g1 = [](double) { return 0.5; };
  CHECK(d.compatibility_warnings(1.0).size() == 1);
}
