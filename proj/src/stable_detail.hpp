#pragma once

#include <complex>
#include <functional>

namespace stablegarch::detail {

struct FourierValue {
  double pdf = 0.0;
  double dx = 0.0;
  bool ok = false;
};

/// Standardized (M) density and slope by inversion of the characteristic
/// function along a ray from the origin, rotated into the half plane where
/// e^{-itx} decays whenever the rotation is admissible.
FourierValue fourier_density(double x, double alpha, double beta, double tol);

struct FourierDerivatives {
  double pdf = 0.0;
  double dx = 0.0;
  double dalpha = 0.0;
  double dbeta = 0.0;
  bool ok = false;
};

/// Density together with its derivatives in x, alpha and beta from a single
/// quadrature pass (alpha not in {1, 2}).
FourierDerivatives fourier_density_derivatives(double x, double alpha, double beta, double tol);

/// P[X <= x] by the Gil-Pelaez formula.
double fourier_cdf(double x, double alpha, double beta, double tol, bool& ok);

/// Adaptive 7/15-point Gauss-Kronrod on [a, b]; returns false when the
/// requested absolute tolerance is not met within the recursion budget.
bool gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                   double tol, double& result, int depth = 40);

}  // namespace stablegarch::detail
