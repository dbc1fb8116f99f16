#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stablegarch/estimate.hpp"
#include "stablegarch/series.hpp"

namespace stablegarch {

/// Which volatility multiplies the innovation quantile for the return at t.
/// Current is sigma~_t, computed from returns through t-1 (the model's own
/// conditional volatility). Lagged is sigma~_(t-1).
enum class VolatilityIndex { Current, Lagged };

struct VarOptions {
  VolatilityIndex index = VolatilityIndex::Current;
};

struct VarForecast {
  std::int64_t t = 0;
  double var_value = 0.0;
  double sigma = 0.0;
  double p = 0.0;
};

/// Innovation p-quantile of the fitted model: the stable quantile for a stable
/// fit, the standard normal quantile for the Gaussian QMLE.
double innovation_quantile(const FitResult& fit, double p, const DensityAccuracy& acc = {});

/// VaR for the return at index t of `history` using returns before t.
VarForecast var_forecast(const FitResult& fit, const ReturnSeries& history, double p, std::int64_t t,
                         const VarOptions& opts = {}, const DensityAccuracy& acc = {});

struct BacktestReport {
  double p = 0.0;
  std::int64_t hits = 0;
  std::int64_t total = 0;
  double hit_frequency = 0.0;
  FitMethod method = FitMethod::Stable;
  double band_lo = 0.0;  // binomial 99% band around p
  double band_hi = 0.0;
  bool within_band = false;
  bool overlap_warning = false;  // outsample dates do not follow the history

  std::string to_json() const;
};

struct BacktestPath {
  Eigen::VectorXd sigma;
  Eigen::VectorXd var;
  std::vector<bool> hit;  // eps_t <= VaR_t
};

struct Backtest {
  BacktestReport report;
  BacktestPath path;
};

/// Rolling one-step VaR over `outsample` with parameters frozen. The
/// recursion is started on `history` (the fitting window) when it is non-empty,
/// else on the outsample itself with the fit's presample rule.
Backtest backtest(const FitResult& fit, const ReturnSeries& history, const ReturnSeries& outsample, double p,
                  const VarOptions& opts = {}, const DensityAccuracy& acc = {});

/// p +- 2.576 sqrt(p (1 - p) / n), clipped to [0, 1].
std::pair<double, double> binomial_band(double p, std::int64_t n);

/// Columns date (or t), return, sigma, var_value, hit.
void write_backtest_csv(std::ostream& out, const ReturnSeries& outsample, const Backtest& bt);

}  // namespace stablegarch
