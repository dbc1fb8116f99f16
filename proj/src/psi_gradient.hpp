#pragma once

#include <utility>
#include <vector>

#include "stablegarch/stable.hpp"

namespace stablegarch::detail {

/// Density of S(alpha, beta, 0, 1) with its derivatives in x, alpha and beta.
/// Series regions use finite-difference stencils in the parameters; the
/// Fourier region gets them analytically from the same quadrature pass.
class PsiGradient {
 public:
  PsiGradient(double alpha, double beta, const DensityAccuracy& acc);

  const StableDensity& density() const { return dens_; }
  DensityValue value(double x) const { return dens_.evaluate(x); }
  DensityGradient gradient(double x) const;

 private:
  struct Stencil {
    std::vector<std::pair<double, StableDensity>> terms;
    double apply(double x) const;
  };
  StableDensity dens_;
  Stencil da_, db_;
};

}  // namespace stablegarch::detail
