#pragma once

// Reference values computed independently of the library: closed forms and
// the integral representation of the stable density on a bounded angle range.

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

constexpr double pi = 3.14159265358979323846;

// N(0, 2): the alpha = 2 member with unit scale.
inline double gauss_pdf(double x) { return std::exp(-x * x / 4) / std::sqrt(4 * pi); }

inline double cauchy_pdf(double x) { return 1.0 / (pi * (1 + x * x)); }

// Levy law with unit scale supported on (0, inf).
inline double levy_pdf(double y) {
  if (y <= 0) return 0.0;
  return std::exp(-1.0 / (2 * y)) / std::sqrt(2 * pi * y * y * y);
}

// Density of the standardized stable law whose characteristic function is
// exp(-|t|^a + i b tan(a pi / 2) t (|t|^(a-1) - 1)), a != 1, as a one-dimensional
// integral over theta of g exp(-g), split at the peak g = 1.
inline double stable_pdf(double x, double a, double b) {
  const double zeta = -b * std::tan(a * pi / 2);
  if (x < zeta) return stable_pdf(-x, a, -b);
  const double theta0 = std::atan(b * std::tan(a * pi / 2)) / a;
  if (x - zeta < 1e-10) {
    return std::tgamma(1 + 1 / a) * std::cos(theta0) / (pi * std::pow(1 + zeta * zeta, 1 / (2 * a)));
  }
  const double d = x - zeta;
  auto V = [&](double th) {
    const double c = std::cos(th);
    return std::pow(std::cos(a * theta0), 1 / (a - 1)) * std::pow(c / std::sin(a * (theta0 + th)), a / (a - 1)) *
           std::cos(a * theta0 + (a - 1) * th) / c;
  };
  const double scale = std::pow(d, a / (a - 1));
  auto g = [&](double th) { return scale * V(th); };
  auto h = [&](double th) {
    const double v = g(th);
    if (!std::isfinite(v) || v < 0 || v > 700) return 0.0;  // v < 0 only from rounding at an endpoint
    return v * std::exp(-v);
  };
  double lo = -theta0, hi = pi / 2;
  // g is monotone on the range; locate g = 1 by bisection in log space.
  const double eps = 1e-12;
  const bool increasing = g(lo + eps * (hi - lo) + 1e-14) < g(hi - eps * (hi - lo) - 1e-14);
  double l = lo, r = hi;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (l + r);
    const double v = g(m);
    const bool below = !(v >= 1.0);
    if (below == increasing) l = m;
    else r = m;
  }
  const double peak = 0.5 * (l + r);
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  const double i1 = gauss_kronrod<double, 61>::integrate(h, lo, peak, 12, 1e-12, &err);
  const double i2 = gauss_kronrod<double, 61>::integrate(h, peak, hi, 12, 1e-12, &err);
  return a / (pi * std::abs(a - 1) * d) * (i1 + i2);
}

}  // namespace oracle
