#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stablegarch/series.hpp"
#include "stablegarch/stable.hpp"

namespace stablegarch {

struct GarchOrder {
  int p = 1;  // sigma^2 lags
  int q = 1;  // eps^2 lags

  bool valid() const { return p >= 0 && q >= 1; }
  int dim() const { return 1 + p + q; }
};

/// theta = (omega, a_1..a_q, b_1..b_p).
struct GarchParams {
  double omega = 0.01;
  Eigen::VectorXd a = Eigen::VectorXd::Constant(1, 0.02);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 0.7);

  GarchParams() = default;
  GarchParams(double omega_, Eigen::VectorXd a_, Eigen::VectorXd b_)
      : omega(omega_), a(std::move(a_)), b(std::move(b_)) {}
  /// GARCH(1,1) shorthand.
  GarchParams(double omega_, double a1, double b1)
      : omega(omega_), a(Eigen::VectorXd::Constant(1, a1)), b(Eigen::VectorXd::Constant(1, b1)) {}

  GarchOrder order() const { return {static_cast<int>(b.size()), static_cast<int>(a.size())}; }
  bool valid() const;
  void validate() const;

  /// Flat vector (omega, a, b) and its inverse.
  Eigen::VectorXd pack() const;
  static GarchParams unpack(const Eigen::VectorXd& v, GarchOrder order);
};

/// How the presample values eps~^2_{t<=0} and sigma~^2_{t<=0} are chosen.
enum class PresampleRule {
  SampleMean,    // both set to mean(eps^2)
  Unconditional  // both set to omega / (1 - sum a - sum b), falling back to mean(eps^2)
};

std::string to_string(PresampleRule r);
PresampleRule presample_rule_from_string(const std::string& s);

struct VolatilityPath {
  Eigen::VectorXd sigma2;
  PresampleRule init_rule = PresampleRule::SampleMean;

  std::string description() const;
};

class Explosion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Presample level under the given rule.
double presample_value(const Eigen::VectorXd& eps, const GarchParams& theta, PresampleRule rule);

/// The GARCH(p,q) recursion with constant presample level `init`. Templated so
/// the same kernel serves plain doubles and other scalar types.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> volatility_recursion(
    const Eigen::VectorXd& eps, const Scalar& omega,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b, const Scalar& init) {
  const Eigen::Index n = eps.size();
  const Eigen::Index q = a.size();
  const Eigen::Index p = b.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> s2(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    Scalar v = omega;
    for (Eigen::Index i = 1; i <= q; ++i)
      v += a(i - 1) * (t - i >= 0 ? Scalar(eps(t - i) * eps(t - i)) : init);
    for (Eigen::Index j = 1; j <= p; ++j) v += b(j - 1) * (t - j >= 0 ? s2(t - j) : init);
    s2(t) = v;
  }
  return s2;
}

VolatilityPath volatility_path(const ReturnSeries& eps, const GarchParams& theta,
                               PresampleRule rule = PresampleRule::SampleMean);

/// sigma~^2_t together with d sigma~^2_t / d theta (rows t, columns omega, a, b),
/// including the dependence of the presample level on theta.
struct VolatilityDerivatives {
  Eigen::VectorXd sigma2;
  Eigen::MatrixXd dsigma2;
};
VolatilityDerivatives volatility_derivatives(const Eigen::VectorXd& eps, const GarchParams& theta,
                                             PresampleRule rule = PresampleRule::SampleMean);

/// Companion matrix A(eta) of the Markov vector representation
/// z_t = (eps_t^2..eps_{t-q+1}^2, sigma_t^2..sigma_{t-p+1}^2).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> companion_matrix(const GarchParams& theta,
                                                                      const Scalar& eta) {
  const Eigen::Index q = theta.a.size();
  const Eigen::Index p = theta.b.size();
  const Eigen::Index m = p + q;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(m, m);
  const Scalar e2 = eta * eta;
  for (Eigen::Index i = 0; i < q; ++i) A(0, i) = Scalar(theta.a(i)) * e2;
  for (Eigen::Index j = 0; j < p; ++j) A(0, q + j) = Scalar(theta.b(j)) * e2;
  for (Eigen::Index i = 1; i < q; ++i) A(i, i - 1) = Scalar(1);
  if (p > 0) {
    for (Eigen::Index i = 0; i < q; ++i) A(q, i) = Scalar(theta.a(i));
    for (Eigen::Index j = 0; j < p; ++j) A(q, q + j) = Scalar(theta.b(j));
    for (Eigen::Index j = 1; j < p; ++j) A(q + j, q + j - 1) = Scalar(1);
  }
  return A;
}

/// Draws one innovation from the caller's engine.
using InnovationSource = std::function<double(std::mt19937_64&)>;

struct SimulationConfig {
  double overflow_factor = 1e12;  // Explosion once sigma^2 > overflow_factor * omega
};

struct Simulation {
  ReturnSeries eps;
  VolatilityPath sigma2;
  Eigen::VectorXd eta;
};

/// Simulates eps_t = sigma_t eta_t with stable innovations.
Simulation simulate(const GarchParams& theta, const StableParams& psi, std::int64_t n,
                    std::int64_t burn_in, std::uint64_t seed, const SimulationConfig& cfg = {});
/// Same with an arbitrary innovation source (summed Student draws, etc.).
Simulation simulate(const GarchParams& theta, const InnovationSource& innovations, std::int64_t n,
                    std::int64_t burn_in, std::uint64_t seed, const SimulationConfig& cfg = {});

struct LyapunovEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Monte-Carlo top Lyapunov exponent of the companion-matrix products.
/// Replication r uses its own engine seeded from (seed, r).
LyapunovEstimate lyapunov_exponent(const GarchParams& theta, const StableParams& psi,
                                   std::int64_t horizon, int replications, std::uint64_t seed);

struct FrontierPoint {
  double alpha = 0.0;
  double b = 0.0;
  double a_star = 0.0;
  double stderr_ = 0.0;
};

struct FrontierOptions {
  std::int64_t horizon = 20000;
  int replications = 8;
  std::uint64_t seed = 1;
  double a_max = 50.0;
  int max_bisections = 40;
};

/// GARCH(1,1) strict-stationarity frontier: for each b, the ARCH coefficient
/// a* where the top Lyapunov exponent crosses zero (symmetric innovations).
std::vector<FrontierPoint> stationarity_frontier(double alpha, const std::vector<double>& b_grid,
                                                 const FrontierOptions& opts = {});

}  // namespace stablegarch
