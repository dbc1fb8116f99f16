#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "stablegarch/garch.hpp"
#include "stablegarch/stable.hpp"

namespace stablegarch {

/// Tail description of a law in the domain of attraction of an alpha-stable
/// law: P[X > x] ~ K1 x^-alpha and P[X < -x] ~ K2 x^-alpha.
struct GcltSpec {
  double alpha = 1.5;
  double K1 = 1.0;
  double K2 = 1.0;

  bool valid() const;
  void validate() const;
};

enum class Centering { Mean, None };

/// Normalization of the generalized CLT: (S_n - n m) / (a n^(1/alpha)) converges to
/// S(alpha, beta, beta tan(alpha pi / 2), 1). m is E X when alpha > 1, else 0.
struct GcltConstants {
  double alpha = 1.5;
  double beta = 0.0;
  double a = 1.0;
  Centering m_rule = Centering::Mean;

  StableParams limit() const;
};

/// M(alpha) = Gamma(2 - alpha) / (alpha (alpha - 1)) for alpha > 1 and
/// -Gamma(1 - alpha) / alpha for alpha < 1.
double gclt_M(double alpha);

GcltConstants gclt_constants(const GcltSpec& spec);

/// K with P[T > x] ~ K x^-nu for Student-t with nu degrees of freedom.
double student_tail_constant(double nu);

/// Tail spec of Student-t_nu (symmetric, K1 = K2).
GcltSpec student_gclt_spec(double nu);

/// Summed-Student innovations (1 / (jK K^(1/alpha))) sum_{k<=K} nu_k with
/// nu_k iid t_alpha. K == kInfiniteK draws (a / jK) Z with Z ~ S(alpha, 0, 0, 1)
/// and a the normalization of t_alpha, so jK = a gives the standard limit.
inline constexpr std::int64_t kInfiniteK = -1;

struct SummedInnovationSpec {
  double alpha = 1.6;
  std::int64_t K = 1;
  double jK = 1.0;

  bool infinite() const { return K == kInfiniteK; }
  bool valid() const;
  void validate() const;
};

std::string k_label(std::int64_t K);  // "inf" for kInfiniteK
std::int64_t parse_k(const std::string& text);

double draw_summed_innovation(const SummedInnovationSpec& spec, std::mt19937_64& engine);

Eigen::VectorXd summed_innovations(const SummedInnovationSpec& spec, std::int64_t n, std::uint64_t seed);

/// Adapter for garch::simulate.
InnovationSource summed_innovation_source(const SummedInnovationSpec& spec);

/// Four-parameter i.i.d. stable maximum likelihood.
struct IidStableFit {
  StableParams psi;
  double neg_loglik = 0.0;  // mean
  int iterations = 0;
  bool converged = false;
  std::string message;
};

IidStableFit fit_stable_iid(const Eigen::VectorXd& sample, const DensityAccuracy& acc = {});

struct JkCalibration {
  double jK = 1.0;
  double stderr_ = 0.0;
  int successes = 0;
  int reps = 0;
};

class CalibrationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean fitted gamma over `reps` samples of K^(-1/alpha) sum nu_k. Throws
/// CalibrationFailed when fewer than 80% of the fits converge.
JkCalibration calibrate_jK(double alpha, std::int64_t K, std::int64_t samples, int reps, std::uint64_t seed,
                           const DensityAccuracy& acc = {});

/// Same, consulting and updating a JSON sidecar keyed by all arguments.
JkCalibration calibrate_jK_cached(const std::string& cache_path, double alpha, std::int64_t K,
                                  std::int64_t samples, int reps, std::uint64_t seed,
                                  const DensityAccuracy& acc = {});

struct KdeOptions {
  double bandwidth = 0.0;      // 0 selects 0.9 (IQR / 1.34) n^(-1/5)
  int grid_size = 1024;
  double central_mass = 0.999;  // evaluation range in sample quantiles
};

double kde_bandwidth(const Eigen::VectorXd& sample);

/// sup over the grid of (1 + |x|)^delta |f_n(x) - f(x, psi)| with f_n a
/// linearly binned Gaussian kernel density estimate.
double density_sup_distance(const Eigen::VectorXd& sample, const StableParams& psi, double delta,
                            const KdeOptions& opts = {}, const DensityAccuracy& acc = {});

}  // namespace stablegarch
