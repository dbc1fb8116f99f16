#include "stablegarch/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"

#include "stablegarch/optimize.hpp"
#include "psi_gradient.hpp"
#include "stablegarch/stats.hpp"

namespace stablegarch {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool theta_usable(const GarchParams& theta) {
  return theta.omega > 0 && (theta.a.array() >= 0).all() && (theta.b.array() >= 0).all() &&
         theta.b.sum() < 1.0 && theta.a.allFinite() && theta.b.allFinite();
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i))) a.push_back(v(i));
    else a.push_back(nullptr);
  }
  return a;
}

Eigen::VectorXd json_vec(const nlohmann::json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = a[i].is_null() ? kNaN : a[i].get<double>();
  return v;
}

nlohmann::json mat_json(const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(std::isfinite(m(r, c)) ? nlohmann::json(m(r, c)) : nlohmann::json(nullptr));
  j["data"] = data;
  return j;
}

Eigen::MatrixXd json_mat(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  Eigen::MatrixXd m(rows, cols);
  const auto& data = j.at("data");
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& e = data.at(static_cast<std::size_t>(r * cols + c));
      m(r, c) = e.is_null() ? kNaN : e.get<double>();
    }
  return m;
}

std::vector<std::string> theta_names(GarchOrder order) {
  std::vector<std::string> names{"omega"};
  for (int i = 1; i <= order.q; ++i) names.push_back("a" + std::to_string(i));
  for (int j = 1; j <= order.p; ++j) names.push_back("b" + std::to_string(j));
  return names;
}

std::vector<bool> active_flags(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  std::vector<bool> flags(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double tol = 1e-4 * (hi(i) - lo(i));
    flags[i] = x(i) - lo(i) <= tol || hi(i) - x(i) <= tol;
  }
  return flags;
}

// Central differences of a gradient, one-sided where the natural domain ends.
template <typename Grad>
Eigen::MatrixXd hessian_of(const Grad& grad, const Eigen::VectorXd& x, const Eigen::VectorXd& steps,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const Eigen::Index d = x.size();
  Eigen::MatrixXd H(d, d);
  const Eigen::VectorXd g0 = grad(x);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double h = steps(i);
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    if (xm(i) < lo(i)) {
      H.col(i) = (grad(xp) - g0) / h;
    } else if (xp(i) > hi(i)) {
      H.col(i) = (g0 - grad(xm)) / h;
    } else {
      H.col(i) = (grad(xp) - grad(xm)) / (2 * h);
    }
  }
  return 0.5 * (H + H.transpose());
}

Eigen::VectorXd pull_inside(Eigen::VectorXd x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double margin = 1e-3 * (hi(i) - lo(i));
    x(i) = std::clamp(x(i), lo(i) + margin, hi(i) - margin);
  }
  return x;
}

}  // namespace

Eigen::VectorXd ModelParams::pack() const {
  const Eigen::VectorXd t = theta.pack();
  Eigen::VectorXd v(t.size() + 3);
  v << t, alpha, beta, mu;
  return v;
}

ModelParams ModelParams::unpack(const Eigen::VectorXd& v, GarchOrder order) {
  if (v.size() != order.dim() + 3) throw std::invalid_argument("ModelParams::unpack: size mismatch");
  ModelParams m;
  m.theta = GarchParams::unpack(v.head(order.dim()), order);
  m.alpha = v(order.dim());
  m.beta = v(order.dim() + 1);
  m.mu = v(order.dim() + 2);
  return m;
}

std::vector<std::string> ModelParams::names(GarchOrder order) {
  auto names = theta_names(order);
  names.insert(names.end(), {"alpha", "beta", "mu"});
  return names;
}

bool BoundsConfig::valid() const {
  return omega_lo > 0 && omega_lo < omega_hi && a_lo >= 0 && a_lo < a_hi && b_lo >= 0 && b_lo < b_hi &&
         b_hi < 1 && b_sum_hi > 0 && b_sum_hi < 1 && alpha_lo > 0 && alpha_lo < alpha_hi && alpha_hi <= 2 &&
         beta_lo >= -1 && beta_lo < beta_hi && beta_hi <= 1 && mu_lo < mu_hi;
}

void BoundsConfig::validate() const {
  if (!valid()) throw std::invalid_argument("invalid parameter bounds");
}

Eigen::VectorXd BoundsConfig::lower(GarchOrder order) const {
  Eigen::VectorXd v(order.dim() + 3);
  v(0) = omega_lo;
  v.segment(1, order.q).setConstant(a_lo);
  v.segment(1 + order.q, order.p).setConstant(b_lo);
  v.tail(3) << alpha_lo, beta_lo, mu_lo;
  return v;
}

Eigen::VectorXd BoundsConfig::upper(GarchOrder order) const {
  Eigen::VectorXd v(order.dim() + 3);
  v(0) = omega_hi;
  v.segment(1, order.q).setConstant(a_hi);
  v.segment(1 + order.q, order.p).setConstant(b_hi);
  v.tail(3) << alpha_hi, beta_hi, mu_hi;
  return v;
}

bool BoundsConfig::contains(const ModelParams& tau) const {
  const Eigen::VectorXd x = tau.pack();
  const GarchOrder o = tau.order();
  return (x.array() >= lower(o).array()).all() && (x.array() <= upper(o).array()).all() &&
         tau.theta.b.sum() <= b_sum_hi;
}

std::string to_string(FitMethod m) { return m == FitMethod::Stable ? "stable" : "gaussian"; }

LikelihoodValue stable_likelihood(const Eigen::VectorXd& eps, const ModelParams& tau,
                                  const DensityAccuracy& acc, PresampleRule rule, Derivatives want) {
  LikelihoodValue out;
  const Eigen::Index n = eps.size();
  const int d = tau.dim();
  const int dt = tau.order().dim();
  if (!theta_usable(tau.theta) || !tau.psi().valid()) {
    out.value = kInf;
    return out;
  }
  const bool grad = want != Derivatives::None;
  VolatilityDerivatives vd;
  if (grad) {
    vd = volatility_derivatives(eps, tau.theta, rule);
  } else {
    vd.sigma2 = volatility_recursion<double>(eps, tau.theta.omega, tau.theta.a, tau.theta.b,
                                             presample_value(eps, tau.theta, rule));
  }
  const detail::PsiGradient pg(tau.alpha, tau.beta, acc);
  if (grad) {
    out.gradient = Eigen::VectorXd::Zero(d);
    if (want == Derivatives::Contributions) out.contributions.resize(n, d);
  }
  double total = 0.0;
  Eigen::VectorXd row(d);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double s2 = vd.sigma2(t);
    const double eta = eps(t) / std::sqrt(s2);
    const double x = eta - tau.mu;
    DensityGradient v;
    if (grad) {
      v = pg.gradient(x);
    } else {
      const DensityValue dv = pg.value(x);
      v.pdf = dv.pdf;
    }
    if (!(v.pdf > 0)) {
      out.value = kInf;
      return out;
    }
    total += 0.5 * std::log(s2) - std::log(v.pdf);
    if (!grad) continue;
    const double r = v.dx / v.pdf;
    const double z = 1.0 + eta * r;
    row.head(dt) = (0.5 * z / s2) * vd.dsigma2.row(t).transpose();
    row(dt) = -v.dalpha / v.pdf;
    row(dt + 1) = -v.dbeta / v.pdf;
    row(dt + 2) = r;
    out.gradient += row;
    if (want == Derivatives::Contributions) out.contributions.row(t) = row.transpose();
  }
  out.value = total / n;
  if (grad) out.gradient /= static_cast<double>(n);
  return out;
}

double neg_log_likelihood(const ReturnSeries& eps, const ModelParams& tau, const DensityAccuracy& acc,
                          PresampleRule rule) {
  eps.validate();
  return stable_likelihood(eps.values, tau, acc, rule, Derivatives::None).value;
}

Eigen::VectorXd score_theta(const ReturnSeries& eps, const ModelParams& tau, const DensityAccuracy& acc,
                            PresampleRule rule) {
  eps.validate();
  tau.theta.validate();
  const Eigen::Index n = eps.size();
  const VolatilityDerivatives vd = volatility_derivatives(eps.values, tau.theta, rule);
  const StableDensity dens(tau.alpha, tau.beta, acc);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(tau.order().dim());
  for (Eigen::Index t = 0; t < n; ++t) {
    const double eta = eps.values(t) / std::sqrt(vd.sigma2(t));
    const DensityValue v = dens.evaluate(eta - tau.mu);
    const double z = 1.0 + eta * v.dx / v.pdf;
    g += (0.5 * z / vd.sigma2(t)) * vd.dsigma2.row(t).transpose();
  }
  return g / static_cast<double>(n);
}

Eigen::VectorXd z_terms(const ReturnSeries& eps, const ModelParams& tau, const DensityAccuracy& acc,
                        PresampleRule rule) {
  eps.validate();
  const VolatilityPath path = volatility_path(eps, tau.theta, rule);
  const StableDensity dens(tau.alpha, tau.beta, acc);
  Eigen::VectorXd z(eps.size());
  for (Eigen::Index t = 0; t < eps.size(); ++t) {
    const double eta = eps.values(t) / std::sqrt(path.sigma2(t));
    const DensityValue v = dens.evaluate(eta - tau.mu);
    z(t) = 1.0 + eta * v.dx / v.pdf;
  }
  return z;
}

LikelihoodValue gaussian_likelihood(const Eigen::VectorXd& eps, const GarchParams& theta, PresampleRule rule,
                                    Derivatives want) {
  LikelihoodValue out;
  if (!theta_usable(theta)) {
    out.value = kInf;
    return out;
  }
  const Eigen::Index n = eps.size();
  const bool grad = want != Derivatives::None;
  VolatilityDerivatives vd;
  if (grad) {
    vd = volatility_derivatives(eps, theta, rule);
    out.gradient = Eigen::VectorXd::Zero(vd.dsigma2.cols());
    if (want == Derivatives::Contributions) out.contributions.resize(n, vd.dsigma2.cols());
  } else {
    vd.sigma2 = volatility_recursion<double>(eps, theta.omega, theta.a, theta.b, presample_value(eps, theta, rule));
  }
  double total = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double s2 = vd.sigma2(t);
    const double u = eps(t) * eps(t) / s2;
    total += 0.5 * (std::log(s2) + u);
    if (!grad) continue;
    const Eigen::VectorXd row = (0.5 * (1.0 - u) / s2) * vd.dsigma2.row(t).transpose();
    out.gradient += row;
    if (want == Derivatives::Contributions) out.contributions.row(t) = row.transpose();
  }
  out.value = total / n;
  if (grad) out.gradient /= static_cast<double>(n);
  return out;
}

Eigen::VectorXd standard_errors(const Eigen::MatrixXd& J, std::int64_t n, bool* positive_definite) {
  const Eigen::Index d = J.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const Eigen::VectorXd ev = es.eigenvalues();
  const Eigen::MatrixXd V = es.eigenvectors();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd inv_diag = Eigen::VectorXd::Zero(d);
  std::vector<bool> bad(d, false);
  bool pd = true;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (ev(k) > 1e-12 * scale) {
      inv_diag += V.col(k).cwiseAbs2() / ev(k);
    } else {
      pd = false;
      for (Eigen::Index i = 0; i < d; ++i)
        if (V(i, k) * V(i, k) > 1e-6) bad[i] = true;
    }
  }
  if (positive_definite) *positive_definite = pd;
  Eigen::VectorXd se(d);
  for (Eigen::Index i = 0; i < d; ++i) se(i) = bad[i] ? kNaN : std::sqrt(inv_diag(i) / static_cast<double>(n));
  return se;
}

Eigen::MatrixXd compute_Jn(const ReturnSeries& eps, const ModelParams& tau_hat, const DensityAccuracy& acc,
                           PresampleRule rule) {
  eps.validate();
  const GarchOrder order = tau_hat.order();
  const Eigen::VectorXd x = tau_hat.pack();
  const Eigen::Index d = x.size();
  const int dt = order.dim();
  Eigen::VectorXd steps(d), lo(d), hi(d);
  for (int i = 0; i < dt; ++i) steps(i) = 1e-4 * std::max(std::abs(x(i)), 1e-3);
  // The psi gradient is itself a difference quotient; a wider outer step keeps
  // its rounding noise out of the second derivative.
  steps.tail(3) << 1e-3, 1e-3, 1e-4;
  lo.head(dt).setZero();
  hi.head(dt).setConstant(kInf);
  lo(0) = 0.5 * x(0);
  if (order.p > 0) hi.segment(1 + order.q, order.p).setConstant(1.0 - 1e-9);
  lo.tail(3) << 1e-3, -1.0, -kInf;
  hi.tail(3) << 2.0, 1.0, kInf;
  auto grad = [&](const Eigen::VectorXd& v) {
    const ModelParams m = ModelParams::unpack(v, order);
    return stable_likelihood(eps.values, m, acc, rule, Derivatives::Gradient).gradient;
  };
  return hessian_of(grad, x, steps, lo, hi);
}

Eigen::MatrixXd outer_product_information(const ReturnSeries& eps, const ModelParams& tau_hat,
                                          const DensityAccuracy& acc, PresampleRule rule) {
  eps.validate();
  const LikelihoodValue lv = stable_likelihood(eps.values, tau_hat, acc, rule, Derivatives::Contributions);
  return lv.contributions.transpose() * lv.contributions / static_cast<double>(eps.size());
}

FitResult fit_gaussian_qmle(const ReturnSeries& eps, const BoundsConfig& bounds, const FitOptions& opts) {
  eps.validate();
  bounds.validate();
  const GarchOrder order = opts.order;
  if (!order.valid()) throw std::invalid_argument("invalid GARCH order");
  const Eigen::Index n = eps.size();
  if (opts.enforce_min_n && n < 50 * order.dim())
    throw std::invalid_argument("fit_gaussian_qmle: need n >= 50 * dim(theta)");
  const Eigen::VectorXd lo = bounds.lower(order).head(order.dim());
  const Eigen::VectorXd hi = bounds.upper(order).head(order.dim());
  const BoxTransform box{lo, hi};
  const double m2 = eps.values.squaredNorm() / n;
  auto objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd* g) {
    const GarchParams th = GarchParams::unpack(box.to_box(u), order);
    if (th.b.sum() > bounds.b_sum_hi) return kInf;
    const LikelihoodValue lv = gaussian_likelihood(eps.values, th, opts.presample,
                                                   g ? Derivatives::Gradient : Derivatives::None);
    if (g && std::isfinite(lv.value)) *g = lv.gradient.cwiseProduct(box.jacobian(u));
    return lv.value;
  };
  std::vector<GarchParams> starts;
  if (opts.start) starts.push_back(opts.start->theta);
  for (auto [a, b] : {std::pair{0.05, 0.9}, {0.1, 0.6}, {0.2, 0.3}}) {
    const double bsum = order.p > 0 ? b : 0.0;
    starts.emplace_back(std::max(m2, 1e-6) * (1 - a - bsum), Eigen::VectorXd::Constant(order.q, a / order.q),
                        Eigen::VectorXd::Constant(order.p, bsum / std::max(order.p, 1)));
  }
  MinimizeResult best;
  best.value = kInf;
  for (const auto& s : starts) {
    const Eigen::VectorXd u0 = box.to_free(pull_inside(s.pack(), lo, hi));
    const MinimizeResult r = bfgs_minimize(objective, u0, {opts.max_iterations, opts.grad_tol});
    if (r.value < best.value || (r.value == best.value && r.gradient.norm() < best.gradient.norm())) best = r;
  }
  if (!std::isfinite(best.value)) throw NonFinite("Gaussian criterion not finite at any start");
  FitResult res;
  res.method = FitMethod::Gaussian;
  res.tau_hat.theta = GarchParams::unpack(box.to_box(best.u), order);
  res.tau_hat.alpha = 2.0;
  res.tau_hat.beta = 0.0;
  res.tau_hat.mu = 0.0;
  res.neg_loglik = best.value;
  res.n = n;
  res.iterations = best.iterations;
  res.converged = best.converged;
  res.grad_norm = best.gradient.norm();
  res.constraint_active = active_flags(res.tau_hat.theta.pack(), lo, hi);
  res.presample = opts.presample;
  res.message = best.message;
  if (opts.compute_covariance) {
    const Eigen::VectorXd x = res.tau_hat.theta.pack();
    Eigen::VectorXd steps(x.size()), nlo = Eigen::VectorXd::Zero(x.size()), nhi = Eigen::VectorXd::Constant(x.size(), kInf);
    for (Eigen::Index i = 0; i < x.size(); ++i) steps(i) = 1e-4 * std::max(std::abs(x(i)), 1e-3);
    nlo(0) = 0.5 * x(0);
    if (order.p > 0) nhi.tail(order.p).setConstant(1.0 - 1e-9);
    auto grad = [&](const Eigen::VectorXd& v) {
      return gaussian_likelihood(eps.values, GarchParams::unpack(v, order), opts.presample, Derivatives::Gradient)
          .gradient;
    };
    res.J_n = hessian_of(grad, x, steps, nlo, nhi);
    const LikelihoodValue lv =
        gaussian_likelihood(eps.values, res.tau_hat.theta, opts.presample, Derivatives::Contributions);
    res.outer_product = lv.contributions.transpose() * lv.contributions / static_cast<double>(n);
    // Sandwich: the Gaussian criterion is misspecified for non-Gaussian innovations.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(res.J_n);
    res.jn_positive_definite = es.eigenvalues().minCoeff() > 0;
    if (res.jn_positive_definite) {
      const Eigen::MatrixXd Jinv = es.operatorInverseSqrt() * es.operatorInverseSqrt();
      const Eigen::MatrixXd cov = Jinv * res.outer_product * Jinv / static_cast<double>(n);
      res.std_errors = cov.diagonal().cwiseSqrt();
    } else {
      res.std_errors = Eigen::VectorXd::Constant(x.size(), kNaN);
    }
  }
  return res;
}

FitResult fit_stable_mle(const ReturnSeries& eps, const BoundsConfig& bounds, const FitOptions& opts,
                         const DensityAccuracy& acc) {
  eps.validate();
  bounds.validate();
  acc.validate();
  const GarchOrder order = opts.start ? opts.start->order() : opts.order;
  if (!order.valid()) throw std::invalid_argument("invalid GARCH order");
  const Eigen::Index n = eps.size();
  const int d = order.dim() + 3;
  if (opts.enforce_min_n && n < 50 * d)
    throw std::invalid_argument("fit_stable_mle: need n >= 50 * dim(tau) = " + std::to_string(50 * d));
  if (opts.starts < 1) throw std::invalid_argument("fit_stable_mle: starts must be >= 1");
  const Eigen::VectorXd lo = bounds.lower(order);
  const Eigen::VectorXd hi = bounds.upper(order);
  const BoxTransform box{lo, hi};

  auto objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd* g) {
    const ModelParams tau = ModelParams::unpack(box.to_box(u), order);
    if (tau.theta.b.sum() > bounds.b_sum_hi) return kInf;
    try {
      const LikelihoodValue lv =
          stable_likelihood(eps.values, tau, acc, opts.presample, g ? Derivatives::Gradient : Derivatives::None);
      if (g && std::isfinite(lv.value)) *g = lv.gradient.cwiseProduct(box.jacobian(u));
      return lv.value;
    } catch (const AccuracyNotReached&) {
      return kInf;
    }
  };

  std::vector<ModelParams> starts;
  if (opts.start) starts.push_back(*opts.start);
  if (static_cast<int>(starts.size()) < opts.starts) {
    FitOptions gopts = opts;
    gopts.compute_covariance = false;
    gopts.start.reset();
    gopts.order = order;
    gopts.enforce_min_n = false;
    const GarchParams tg = fit_gaussian_qmle(eps, bounds, gopts).tau_hat.theta;
    const VolatilityPath path = volatility_path(eps, tg, opts.presample);
    const Eigen::VectorXd abs_eta = (eps.values.array() / path.sigma2.array().sqrt()).abs().matrix();
    const double med = median(abs_eta);
    std::vector<std::pair<double, double>> grid{{1.7, 0.0}, {1.4, 0.0}, {1.9, 0.0}, {1.2, 0.0}, {1.55, 0.0}};
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> ua(std::max(bounds.alpha_lo, 1.05), bounds.alpha_hi);
    std::uniform_real_distribution<double> ub(-0.5, 0.5);
    for (std::size_t k = 0; static_cast<int>(starts.size()) < opts.starts; ++k) {
      const auto [a0, b0] = k < grid.size() ? grid[k] : std::pair{ua(rng), ub(rng)};
      // Match the median of |eta| to that of the candidate stable law.
      const double s = med / quantile(0.75, StableParams{a0, 0.0, 0.0, 1.0});
      ModelParams m;
      m.theta = GarchParams(s * s * tg.omega, s * s * tg.a, tg.b);
      m.alpha = std::clamp(a0, bounds.alpha_lo, bounds.alpha_hi);
      m.beta = b0;
      m.mu = 0.0;
      starts.push_back(m);
    }
  }

  MinimizeResult best;
  best.value = kInf;
  for (const auto& s : starts) {
    const Eigen::VectorXd u0 = box.to_free(pull_inside(s.pack(), lo, hi));
    const MinimizeResult r = bfgs_minimize(objective, u0, {opts.max_iterations, opts.grad_tol});
    if (!std::isfinite(r.value)) continue;
    if (r.value < best.value || (r.value == best.value && r.gradient.norm() < best.gradient.norm())) best = r;
  }
  if (!std::isfinite(best.value)) throw NonFinite("stable likelihood not finite at any start");

  FitResult res;
  res.method = FitMethod::Stable;
  res.tau_hat = ModelParams::unpack(box.to_box(best.u), order);
  res.neg_loglik = best.value;
  res.n = n;
  res.iterations = best.iterations;
  res.converged = best.converged;
  res.grad_norm = best.gradient.norm();
  res.constraint_active = active_flags(res.tau_hat.pack(), lo, hi);
  res.presample = opts.presample;
  res.message = best.message;
  res.beta_identified = !res.constraint_active[order.dim()] || res.tau_hat.alpha < 0.5 * (lo(order.dim()) + hi(order.dim()));
  if (opts.compute_covariance) {
    res.J_n = compute_Jn(eps, res.tau_hat, acc, opts.presample);
    res.outer_product = outer_product_information(eps, res.tau_hat, acc, opts.presample);
    res.std_errors = standard_errors(res.J_n, n, &res.jn_positive_definite);
    if (!res.beta_identified) res.std_errors(order.dim() + 1) = kNaN;
  }
  return res;
}

std::vector<std::string> FitResult::names() const {
  return method == FitMethod::Stable ? ModelParams::names(tau_hat.order()) : theta_names(tau_hat.order());
}

std::string FitResult::to_json() const {
  nlohmann::json j;
  const auto nm = names();
  const Eigen::VectorXd est =
      method == FitMethod::Stable ? tau_hat.pack() : tau_hat.theta.pack();
  j["method"] = to_string(method);
  j["order"] = {{"p", tau_hat.order().p}, {"q", tau_hat.order().q}};
  j["names"] = nm;
  j["estimates"] = nlohmann::json::object();
  for (std::size_t i = 0; i < nm.size(); ++i) j["estimates"][nm[i]] = est(static_cast<Eigen::Index>(i));
  j["tau"] = vec_json(est);
  j["std_errors"] = vec_json(std_errors);
  j["J_n"] = mat_json(J_n);
  j["outer_product"] = mat_json(outer_product);
  j["neg_loglik"] = neg_loglik;
  j["n"] = n;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["grad_norm"] = grad_norm;
  j["constraint_active"] = constraint_active;
  j["jn_positive_definite"] = jn_positive_definite;
  j["beta_identified"] = beta_identified;
  j["presample"] = to_string(presample);
  j["message"] = message;
  return j.dump(2);
}

FitResult FitResult::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  FitResult r;
  const std::string method = j.at("method").get<std::string>();
  if (method != "stable" && method != "gaussian") throw std::invalid_argument("unknown fit method '" + method + "'");
  r.method = method == "stable" ? FitMethod::Stable : FitMethod::Gaussian;
  const GarchOrder order{j.at("order").at("p").get<int>(), j.at("order").at("q").get<int>()};
  const Eigen::VectorXd tau = json_vec(j.at("tau"));
  if (r.method == FitMethod::Stable) {
    r.tau_hat = ModelParams::unpack(tau, order);
  } else {
    r.tau_hat.theta = GarchParams::unpack(tau, order);
    r.tau_hat.alpha = 2.0;
    r.tau_hat.beta = 0.0;
    r.tau_hat.mu = 0.0;
  }
  r.std_errors = json_vec(j.at("std_errors"));
  r.J_n = json_mat(j.at("J_n"));
  r.outer_product = json_mat(j.at("outer_product"));
  r.neg_loglik = j.at("neg_loglik").get<double>();
  r.n = j.at("n").get<std::int64_t>();
  r.iterations = j.at("iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.grad_norm = j.at("grad_norm").get<double>();
  r.constraint_active = j.at("constraint_active").get<std::vector<bool>>();
  r.jn_positive_definite = j.at("jn_positive_definite").get<bool>();
  r.beta_identified = j.at("beta_identified").get<bool>();
  r.presample = presample_rule_from_string(j.at("presample").get<std::string>());
  r.message = j.value("message", "");
  return r;
}

}  // namespace stablegarch
