#pragma once

#include <cmath>
#include <numbers>
#include <random>

namespace stablegarch {

template <typename Engine>
double sample_standard(double alpha, double beta, Engine& engine) {
  constexpr double pi = std::numbers::pi;
  std::uniform_real_distribution<double> angle(-pi / 2, pi / 2);
  std::exponential_distribution<double> expo(1.0);
  double v = angle(engine);
  while (v == -pi / 2) v = angle(engine);
  const double w = expo(engine);

  if (alpha == 1.0) {
    const double h = pi / 2 + beta * v;
    return (2 / pi) * (h * std::tan(v) - beta * std::log((pi / 2) * w * std::cos(v) / h));
  }
  const double tau = alpha == 2.0 ? 0.0 : beta * std::tan(alpha * pi / 2);
  const double b = std::atan(tau) / alpha;
  const double s = std::pow(1 + tau * tau, 1 / (2 * alpha));
  const double x = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1 / alpha) *
                   std::pow(std::cos(v - alpha * (v + b)) / w, (1 - alpha) / alpha);
  // CMS yields the S1 form; the (M) form is shifted by -tau.
  return x - tau;
}

}  // namespace stablegarch
