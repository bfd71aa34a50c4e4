#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with an absolute error target, and
// composite Gauss-Legendre panels for fixed-node rules.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

namespace jjlab::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

// QUADPACK qk15 nodes and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double fsum = f(c - dx) + f(c + dx);
    resk += kWgk[j] * fsum;
    // Gauss nodes sit at odd Kronrod indices.
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;
  }
  return {a, b, resk * h, std::abs((resk - resg) * h)};
}

}  // namespace detail

/// Globally adaptive integration of a scalar function over [a, b]. Stops when
/// the summed error estimate falls below abs_tol or max_intervals is reached.
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol, int max_intervals = 2000) {
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gk15(f, a, b);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  int n = 1;
  while (err > abs_tol && n < max_intervals) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n;
  }
  // Recompute from the segments to shed accumulated cancellation in the running sums.
  double value = 0.0;
  double error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  return {value, error, n};
}

/// Vector-valued variant: f(x, out) fills out[0..dim). The error used for
/// refinement is the max over components.
template <class F>
std::vector<double> integrate_vec(F&& f, std::size_t dim, double a, double b, double abs_tol,
                                  int max_intervals = 2000) {
  struct Seg {
    double a, b, err;
    std::vector<double> val;
    bool operator<(const Seg& o) const { return err < o.err; }
  };
  std::vector<double> fv(dim), fv2(dim), resk(dim), resg(dim);
  auto rule = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    f(c, std::span<double>(fv));
    for (std::size_t i = 0; i < dim; ++i) {
      resk[i] = fv[i] * detail::kWgk[7];
      resg[i] = fv[i] * detail::kWg[3];
    }
    for (int j = 0; j < 7; ++j) {
      const double dx = h * detail::kXgk[j];
      f(c - dx, std::span<double>(fv));
      f(c + dx, std::span<double>(fv2));
      for (std::size_t i = 0; i < dim; ++i) {
        const double s = fv[i] + fv2[i];
        resk[i] += detail::kWgk[j] * s;
        if (j % 2 == 1) resg[i] += detail::kWg[j / 2] * s;
      }
    }
    Seg s{lo, hi, 0.0, std::vector<double>(dim)};
    for (std::size_t i = 0; i < dim; ++i) {
      s.val[i] = resk[i] * h;
      s.err = std::max(s.err, std::abs((resk[i] - resg[i]) * h));
    }
    return s;
  };
  std::priority_queue<Seg> heap;
  heap.push(rule(a, b));
  double err = heap.top().err;
  int n = 1;
  while (err > abs_tol && n < max_intervals) {
    Seg worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Seg l = rule(worst.a, mid);
    Seg r = rule(mid, worst.b);
    err += l.err + r.err - worst.err;
    heap.push(std::move(l));
    heap.push(std::move(r));
    ++n;
  }
  // Sum in interval order so the result does not depend on heap layout.
  std::vector<Seg> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Seg& x, const Seg& y) { return x.a < y.a; });
  std::vector<double> out(dim, 0.0);
  for (const auto& s : segs)
    for (std::size_t i = 0; i < dim; ++i) out[i] += s.val[i];
  return out;
}

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre01(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < n; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.nodes[n - 1 - i] = 0.5 * (1.0 + z);
    r.weights[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

}  // namespace jjlab::quad
