#include "stablegarch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace stablegarch {

double sample_quantile(Eigen::VectorXd x, double p) {
  if (x.size() == 0) throw std::invalid_argument("sample_quantile: empty sample");
  std::sort(x.data(), x.data() + x.size());
  const double h = (x.size() - 1) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x(lo) + (h - lo) * (x(hi) - x(lo));
}

double median(const Eigen::VectorXd& x) { return sample_quantile(x, 0.5); }

double interquartile_range(const Eigen::VectorXd& x) {
  return sample_quantile(x, 0.75) - sample_quantile(x, 0.25);
}

double sample_variance(const Eigen::VectorXd& x) {
  if (x.size() < 2) return 0.0;
  const double m = x.mean();
  return (x.array() - m).square().sum() / (x.size() - 1);
}

double autocorrelation(const Eigen::VectorXd& x, int lag) {
  const Eigen::Index n = x.size();
  if (lag < 0 || lag >= n) throw std::invalid_argument("autocorrelation: bad lag");
  const Eigen::ArrayXd d = x.array() - x.mean();
  const double denom = d.square().sum();
  if (denom == 0) return 0.0;
  return (d.head(n - lag) * d.tail(n - lag)).sum() / denom;
}

double ks_distance(const Eigen::VectorXd& sample, const Eigen::VectorXd& model_cdf) {
  const Eigen::Index n = sample.size();
  if (n == 0 || model_cdf.size() != n) throw std::invalid_argument("ks_distance: size mismatch");
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return sample(a) < sample(b); });
  double d = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = model_cdf(order[i]);
    d = std::max({d, (i + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace stablegarch
