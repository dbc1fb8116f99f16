#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stablegarch/garch.hpp"
#include "stablegarch/series.hpp"
#include "stablegarch/stable.hpp"

namespace stablegarch {

/// tau = (theta, alpha, beta, mu) with the stable scale pinned to 1.
/// Packed order: omega, a_1..a_q, b_1..b_p, alpha, beta, mu.
struct ModelParams {
  GarchParams theta;
  double alpha = 1.6;
  double beta = 0.0;
  double mu = 0.0;

  StableParams psi() const { return {alpha, beta, mu, 1.0}; }
  GarchOrder order() const { return theta.order(); }
  int dim() const { return order().dim() + 3; }

  Eigen::VectorXd pack() const;
  static ModelParams unpack(const Eigen::VectorXd& v, GarchOrder order);
  static std::vector<std::string> names(GarchOrder order);
};

/// Box realizing the compact parameter space.
struct BoundsConfig {
  double omega_lo = 1e-8, omega_hi = 10.0;
  double a_lo = 0.0, a_hi = 5.0;
  double b_lo = 0.0, b_hi = 0.999;
  double b_sum_hi = 0.999;
  double alpha_lo = 0.4, alpha_hi = 1.99;
  double beta_lo = -0.99, beta_hi = 0.99;
  double mu_lo = -10.0, mu_hi = 10.0;

  bool valid() const;
  void validate() const;
  Eigen::VectorXd lower(GarchOrder order) const;  // full tau
  Eigen::VectorXd upper(GarchOrder order) const;
  bool contains(const ModelParams& tau) const;
};

enum class FitMethod { Stable, Gaussian };
std::string to_string(FitMethod m);

/// Estimate, information matrix and diagnostics. For the Gaussian QMLE the
/// matrices and standard errors cover theta only.
struct FitResult {
  FitMethod method = FitMethod::Stable;
  ModelParams tau_hat;
  double neg_loglik = 0.0;
  Eigen::MatrixXd J_n;
  Eigen::MatrixXd outer_product;  // (1/n) sum of score outer products
  Eigen::VectorXd std_errors;
  std::int64_t n = 0;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  std::vector<bool> constraint_active;
  bool jn_positive_definite = true;
  bool beta_identified = true;
  PresampleRule presample = PresampleRule::SampleMean;
  std::string message;

  std::vector<std::string> names() const;
  std::string to_json() const;
  static FitResult from_json(const std::string& text);
};

class NonFinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitOptions {
  int starts = 5;
  std::uint64_t seed = 1;  // only affects random starts beyond the fixed grid
  std::optional<ModelParams> start;
  GarchOrder order{1, 1};
  PresampleRule presample = PresampleRule::SampleMean;
  int max_iterations = 500;
  double grad_tol = 1e-5;
  bool enforce_min_n = true;  // n >= 50 dim(tau)
  bool compute_covariance = true;
};

/// Mean negative log-likelihood, its gradient and per-observation scores.
struct LikelihoodValue {
  double value = 0.0;
  Eigen::VectorXd gradient;       // d value / d tau
  Eigen::MatrixXd contributions;  // row t = d l_t / d tau, when requested
};

enum class Derivatives { None, Gradient, Contributions };

LikelihoodValue stable_likelihood(const Eigen::VectorXd& eps, const ModelParams& tau,
                                  const DensityAccuracy& acc, PresampleRule rule, Derivatives want);

double neg_log_likelihood(const ReturnSeries& eps, const ModelParams& tau,
                          const DensityAccuracy& acc = {},
                          PresampleRule rule = PresampleRule::SampleMean);

/// Analytic d/d theta of the mean negative log-likelihood.
Eigen::VectorXd score_theta(const ReturnSeries& eps, const ModelParams& tau,
                            const DensityAccuracy& acc = {},
                            PresampleRule rule = PresampleRule::SampleMean);

/// Per-observation standardized residual terms Z_t = 1 + eta_t f'/f.
Eigen::VectorXd z_terms(const ReturnSeries& eps, const ModelParams& tau,
                        const DensityAccuracy& acc = {},
                        PresampleRule rule = PresampleRule::SampleMean);

FitResult fit_stable_mle(const ReturnSeries& eps, const BoundsConfig& bounds = {},
                         const FitOptions& opts = {}, const DensityAccuracy& acc = {});

/// Gaussian QMLE of theta under (1/n) sum (log sigma^2 + eps^2 / sigma^2).
FitResult fit_gaussian_qmle(const ReturnSeries& eps, const BoundsConfig& bounds = {},
                            const FitOptions& opts = {});

/// Gaussian criterion value and gradient (theta only).
LikelihoodValue gaussian_likelihood(const Eigen::VectorXd& eps, const GarchParams& theta,
                                    PresampleRule rule, Derivatives want);

/// (1/n) sum of second derivatives of l_t at tau_hat by central differences of
/// the gradient, symmetrized.
Eigen::MatrixXd compute_Jn(const ReturnSeries& eps, const ModelParams& tau_hat,
                           const DensityAccuracy& acc = {},
                           PresampleRule rule = PresampleRule::SampleMean);

/// (1/n) sum of d l_t d l_t' at tau_hat.
Eigen::MatrixXd outer_product_information(const ReturnSeries& eps, const ModelParams& tau_hat,
                                          const DensityAccuracy& acc = {},
                                          PresampleRule rule = PresampleRule::SampleMean);

/// sqrt(diag(J^-1) / n); NaN for directions where J is not positive definite.
Eigen::VectorXd standard_errors(const Eigen::MatrixXd& J, std::int64_t n, bool* positive_definite = nullptr);

}  // namespace stablegarch
