#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "stablegarch/domain_attraction.hpp"
#include "stablegarch/estimate.hpp"
#include "stablegarch/garch.hpp"

namespace stablegarch {

/// Monte-Carlo study of the stable PMLE under summed-Student innovations.
struct ExperimentConfig {
  GarchParams theta0{0.01, 0.02, 0.7};
  double alpha = 1.6;
  std::vector<std::int64_t> K_list{10, 1000, kInfiniteK};
  std::int64_t n = 1000;
  int reps = 100;
  std::uint64_t seed = 1;
  std::int64_t burn_in = 500;
  BoundsConfig bounds;
  DensityAccuracy accuracy;
  int starts = 1;
  PresampleRule presample = PresampleRule::SampleMean;
  std::int64_t calibration_samples = 1000;
  int calibration_reps = 10;
  std::string calibration_cache;  // empty disables the sidecar
  double max_failure_share = 0.2;

  bool valid() const;
  void validate() const;

  /// Overrides fields present in a JSON object; unknown keys are rejected.
  void apply_json(const std::string& text);
  std::string to_json() const;
};

struct ParameterError {
  std::string name;
  double rmse = 0.0;  // sqrt of the mean squared error
  double mse = 0.0;
  double Q = 0.0;      // rmse at K = inf over rmse at K
  double Q_mse = 0.0;  // same ratio on the mean squared errors
};

struct KResult {
  std::int64_t K = 1;
  double jK = 1.0;
  double jK_stderr = 0.0;
  int fits = 0;
  int failures = 0;
  std::vector<ParameterError> params;  // omega, a..., b..., alpha, beta, mu
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<KResult> per_K;

  /// Long format: parameter,K,jK,rmse,mse,Q,Q_mse,fits,failures.
  void write_csv(std::ostream& out) const;
};

class ExperimentAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ExperimentLog = std::function<void(const std::string&)>;

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentLog& log = {});

}  // namespace stablegarch
