#pragma once

namespace jjlab {

/// Bessel function of the first kind, order one. Power series below |x| = 12,
/// Hankel asymptotic expansion above; absolute error below 1e-10.
double bessel_j1(double x);

}  // namespace jjlab
