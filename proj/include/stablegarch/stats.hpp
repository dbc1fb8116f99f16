#pragma once

#include <Eigen/Dense>

namespace stablegarch {

/// Linear-interpolation sample quantile (the usual "type 7" rule).
double sample_quantile(Eigen::VectorXd x, double p);
double median(const Eigen::VectorXd& x);
double interquartile_range(const Eigen::VectorXd& x);
double sample_variance(const Eigen::VectorXd& x);

/// Lag-k sample autocorrelation.
double autocorrelation(const Eigen::VectorXd& x, int lag);

/// Two-sided Kolmogorov-Smirnov distance between the empirical distribution of
/// a sample and a model CDF evaluated at the same points (any order).
double ks_distance(const Eigen::VectorXd& sample, const Eigen::VectorXd& model_cdf);

}  // namespace stablegarch
