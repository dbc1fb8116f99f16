#include "psi_gradient.hpp"

namespace stablegarch::detail {
namespace {

constexpr double kPsiStep = 1e-4;

}  // namespace

double PsiGradient::Stencil::apply(double x) const {
  double s = 0.0;
  for (const auto& [w, d] : terms) s += w * d.pdf(x);
  return s;
}

PsiGradient::PsiGradient(double alpha, double beta, const DensityAccuracy& acc) : dens_(alpha, beta, acc) {
  const double h = kPsiStep;
  if (alpha + h <= 2.0) {
    da_.terms.emplace_back(0.5 / h, StableDensity(alpha + h, beta, acc));
    da_.terms.emplace_back(-0.5 / h, StableDensity(alpha - h, beta, acc));
  } else {
    da_.terms.emplace_back(1.5 / h, dens_);
    da_.terms.emplace_back(-2.0 / h, StableDensity(alpha - h, beta, acc));
    da_.terms.emplace_back(0.5 / h, StableDensity(alpha - 2 * h, beta, acc));
  }
  if (beta + h <= 1.0 && beta - h >= -1.0) {
    db_.terms.emplace_back(0.5 / h, StableDensity(alpha, beta + h, acc));
    db_.terms.emplace_back(-0.5 / h, StableDensity(alpha, beta - h, acc));
  } else {
    const double sgn = beta > 0 ? -1.0 : 1.0;  // step away from the bound
    db_.terms.emplace_back(-1.5 * sgn / h, dens_);
    db_.terms.emplace_back(2.0 * sgn / h, StableDensity(alpha, beta + sgn * h, acc));
    db_.terms.emplace_back(-0.5 * sgn / h, StableDensity(alpha, beta + 2 * sgn * h, acc));
  }
}

DensityGradient PsiGradient::gradient(double x) const {
  auto series = dens_.mode_series(x);
  if (!series) series = dens_.tail_series(x);
  if (!series) {
    // One quadrature pass instead of a value plus four stencil densities.
    if (auto fg = dens_.fourier_gradient(x)) return *fg;
    series = dens_.evaluate(x);
  }
  return DensityGradient{series->pdf, series->dx, da_.apply(x), db_.apply(x)};
}

}  // namespace stablegarch::detail
