#include "stablegarch/risk.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

#include "stablegarch/garch.hpp"

namespace stablegarch {
namespace {

void check_p(double p) {
  if (!(p > 0 && p < 1)) throw std::invalid_argument("VaR level p must lie in (0, 1)");
}

// sigma~^2 over eps plus one step past its end.
Eigen::VectorXd extended_sigma2(const Eigen::VectorXd& eps, const GarchParams& theta, double init) {
  Eigen::VectorXd ext(eps.size() + 1);
  ext.head(eps.size()) = eps;
  ext(eps.size()) = 0.0;  // never enters sigma~^2 at its own index
  return volatility_recursion<double>(ext, theta.omega, theta.a, theta.b, init);
}

}  // namespace

double innovation_quantile(const FitResult& fit, double p, const DensityAccuracy& acc) {
  check_p(p);
  if (fit.method == FitMethod::Gaussian) {
    // Unit-variance innovations: N(0, 1) is S(2, 0, 0, 1/sqrt 2).
    return quantile(p, StableParams{2.0, 0.0, 0.0, std::sqrt(0.5)}, acc);
  }
  return quantile(p, fit.tau_hat.psi(), acc);
}

VarForecast var_forecast(const FitResult& fit, const ReturnSeries& history, double p, std::int64_t t,
                         const VarOptions& opts, const DensityAccuracy& acc) {
  check_p(p);
  const std::int64_t lag = opts.index == VolatilityIndex::Lagged ? 1 : 0;
  if (t < 1 + lag || t > history.size()) {
    throw std::invalid_argument("var_forecast: t must lie in [" + std::to_string(1 + lag) + ", " +
                                std::to_string(history.size()) + "]");
  }
  const GarchParams& theta = fit.tau_hat.theta;
  const Eigen::VectorXd past = history.values.head(t);
  const double init = presample_value(past, theta, fit.presample);
  const Eigen::VectorXd s2 = extended_sigma2(past, theta, init);
  VarForecast f;
  f.t = t;
  f.p = p;
  f.sigma = std::sqrt(s2(t - lag));
  f.var_value = f.sigma * innovation_quantile(fit, p, acc);
  return f;
}

std::pair<double, double> binomial_band(double p, std::int64_t n) {
  check_p(p);
  if (n < 1) throw std::invalid_argument("binomial_band: n must be >= 1");
  const double half = 2.576 * std::sqrt(p * (1 - p) / static_cast<double>(n));
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

Backtest backtest(const FitResult& fit, const ReturnSeries& history, const ReturnSeries& outsample, double p,
                  const VarOptions& opts, const DensityAccuracy& acc) {
  check_p(p);
  outsample.validate();
  const GarchParams& theta = fit.tau_hat.theta;
  theta.validate();
  const Eigen::Index h = history.size();
  const Eigen::Index n = outsample.size();
  if (h > 0) history.validate();

  Eigen::VectorXd all(h + n);
  all << history.values, outsample.values;
  const double init = presample_value(h > 0 ? history.values : outsample.values, theta, fit.presample);
  const Eigen::VectorXd s2 = volatility_recursion<double>(all, theta.omega, theta.a, theta.b, init);
  const double q = innovation_quantile(fit, p, acc);

  Backtest bt;
  bt.path.sigma.resize(n);
  bt.path.var.resize(n);
  bt.path.hit.resize(n);
  std::int64_t hits = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index t = h + i;
    // The lagged convention has no sigma~_(t-1) at the very first index.
    const Eigen::Index src = opts.index == VolatilityIndex::Lagged ? std::max<Eigen::Index>(t - 1, 0) : t;
    const double sigma = std::sqrt(s2(src));
    const double var = sigma * q;
    const bool hit = outsample.values(i) <= var;
    bt.path.sigma(i) = sigma;
    bt.path.var(i) = var;
    bt.path.hit[i] = hit;
    hits += hit ? 1 : 0;
  }
  BacktestReport& r = bt.report;
  r.p = p;
  r.hits = hits;
  r.total = n;
  r.hit_frequency = static_cast<double>(hits) / static_cast<double>(n);
  r.method = fit.method;
  std::tie(r.band_lo, r.band_hi) = binomial_band(p, n);
  r.within_band = r.hit_frequency >= r.band_lo && r.hit_frequency <= r.band_hi;
  if (history.has_dates() && outsample.has_dates() && h > 0) {
    // ISO-8601 labels order lexicographically.
    r.overlap_warning = !(outsample.dates.front() > history.dates.back());
  }
  return bt;
}

std::string BacktestReport::to_json() const {
  nlohmann::json j;
  j["p"] = p;
  j["hits"] = hits;
  j["total"] = total;
  j["hit_frequency"] = hit_frequency;
  j["method"] = to_string(method);
  j["band"] = {band_lo, band_hi};
  j["within_band"] = within_band;
  j["overlap_warning"] = overlap_warning;
  return j.dump(2);
}

void write_backtest_csv(std::ostream& out, const ReturnSeries& outsample, const Backtest& bt) {
  const auto old = out.precision(17);
  out << (outsample.has_dates() ? "date" : "t") << ",return,sigma,var_value,hit\n";
  for (Eigen::Index i = 0; i < outsample.size(); ++i) {
    if (outsample.has_dates()) out << outsample.dates[i];
    else out << i;
    out << ',' << outsample.values(i) << ',' << bt.path.sigma(i) << ',' << bt.path.var(i) << ','
        << (bt.path.hit[i] ? 1 : 0) << '\n';
  }
  out.precision(old);
}

}  // namespace stablegarch
