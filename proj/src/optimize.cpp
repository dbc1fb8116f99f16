#include "stablegarch/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stablegarch {
namespace {

double logistic(double u) { return u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u)); }

}  // namespace

Eigen::VectorXd BoxTransform::to_box(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * logistic(u(i));
  return x;
}

Eigen::VectorXd BoxTransform::to_free(const Eigen::VectorXd& x, double margin) const {
  Eigen::VectorXd u(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double s = (x(i) - lo(i)) / (hi(i) - lo(i));
    s = std::clamp(s, margin, 1.0 - margin);
    u(i) = std::log(s / (1.0 - s));
  }
  return u;
}

Eigen::VectorXd BoxTransform::jacobian(const Eigen::VectorXd& u) const {
  Eigen::VectorXd j(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double s = logistic(u(i));
    j(i) = (hi(i) - lo(i)) * s * (1.0 - s);
  }
  return j;
}

MinimizeResult bfgs_minimize(const Objective& f, Eigen::VectorXd u0, const MinimizeOptions& opts) {
  const Eigen::Index d = u0.size();
  MinimizeResult res;
  res.u = std::move(u0);
  res.gradient.resize(d);
  res.value = f(res.u, &res.gradient);
  if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
    res.message = "objective not finite at the starting point";
    return res;
  }
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d);
  bool scaled = false;
  int stalls = 0;
  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    if (res.gradient.norm() <= opts.grad_tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }
    Eigen::VectorXd dir = -H * res.gradient;
    double slope = dir.dot(res.gradient);
    if (!(slope < 0)) {
      H.setIdentity();
      dir = -res.gradient;
      slope = dir.dot(res.gradient);
    }
    // Keep the first trial step bounded in the free coordinates.
    const double max_step = 5.0;
    double step = std::min(1.0, max_step / std::max(dir.norm(), 1e-300));
    Eigen::VectorXd u_new, g_new(d);
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      u_new = res.u + step * dir;
      f_new = f(u_new, &g_new);
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= res.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (H.isIdentity()) {
        res.message = "line search failed";
        return res;
      }
      H.setIdentity();  // retry once along steepest descent
      scaled = false;
      continue;
    }
    const Eigen::VectorXd s = u_new - res.u;
    const Eigen::VectorXd y = g_new - res.gradient;
    const double sy = s.dot(y);
    const double improvement = res.value - f_new;
    res.u = u_new;
    res.value = f_new;
    res.gradient = g_new;
    stalls = improvement <= 1e-15 * std::max(1.0, std::abs(f_new)) ? stalls + 1 : 0;
    if (stalls >= 5) {
      res.converged = res.gradient.norm() <= opts.grad_tol;
      res.message = "no further decrease";
      return res;
    }
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      H += (rho * rho * y.dot(Hy) + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
    }
  }
  res.converged = res.gradient.norm() <= opts.grad_tol;
  res.message = res.converged ? "gradient tolerance reached" : "iteration limit reached";
  return res;
}

}  // namespace stablegarch
