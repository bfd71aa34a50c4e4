#include "jjlab/bessel.hpp"

#include <cmath>

namespace jjlab {

namespace {

constexpr double kSwitch = 12.0;
constexpr double kPi = 3.14159265358979323846;

double series(double x) {
  const double q = 0.25 * x * x;
  double term = 0.5 * x;
  double sum = term;
  for (int k = 1; k < 60; ++k) {
    term *= -q / (double(k) * double(k + 1));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && k > 2) break;
  }
  return sum;
}

// J1(x) ~ sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - 3 pi / 4, summed
// up to the smallest term of the divergent series.
double asymptotic(double x) {
  const double mu = 4.0;
  double p = 1.0, q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 80; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) >= std::abs(last) && k > 2) break;
    term = next;
    last = next;
    // terms alternate between Q (odd k) and P (even k) with sign (-1)^{floor(k/2)}
    const int sign = ((k / 2) % 2 == 0) ? 1 : -1;
    if (k % 2 == 1)
      q += sign * term;
    else
      p += sign * term;
  }
  const double chi = x - 0.75 * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j1(double x) {
  const double ax = std::abs(x);
  const double v = ax < kSwitch ? series(ax) : asymptotic(ax);
  return x < 0.0 ? -v : v;
}

}  // namespace jjlab
