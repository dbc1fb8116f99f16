#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace stablegarch {

/// Componentwise logistic map from R^d onto the open box (lo, hi).
struct BoxTransform {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::VectorXd to_box(const Eigen::VectorXd& u) const;
  /// Inverse map; points are first pulled a relative `margin` inside the box.
  Eigen::VectorXd to_free(const Eigen::VectorXd& x, double margin = 1e-6) const;
  /// d x_i / d u_i.
  Eigen::VectorXd jacobian(const Eigen::VectorXd& u) const;
};

/// Objective returning f(u) and, when grad is non-null, its gradient.
/// Non-finite values are treated as +infinity by the line search.
using Objective = std::function<double(const Eigen::VectorXd& u, Eigen::VectorXd* grad)>;

struct MinimizeOptions {
  int max_iterations = 500;
  double grad_tol = 1e-5;  // on the Euclidean norm of the gradient
};

struct MinimizeResult {
  Eigen::VectorXd u;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// BFGS with Armijo backtracking on an unconstrained objective.
MinimizeResult bfgs_minimize(const Objective& f, Eigen::VectorXd u0, const MinimizeOptions& opts = {});

}  // namespace stablegarch
