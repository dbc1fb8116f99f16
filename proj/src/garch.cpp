#include "stablegarch/garch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace stablegarch {

bool GarchParams::valid() const {
  if (!(omega > 0) || !std::isfinite(omega) || a.size() < 1) return false;
  if ((a.array() < 0).any() || (b.array() < 0).any()) return false;
  if (!a.allFinite() || !b.allFinite()) return false;
  return b.sum() < 1.0;
}

void GarchParams::validate() const {
  if (!valid()) {
    std::ostringstream msg;
    msg << "invalid GARCH parameters: omega=" << omega << " a=(" << a.transpose() << ") b=("
        << b.transpose() << ")";
    throw std::invalid_argument(msg.str());
  }
}

Eigen::VectorXd GarchParams::pack() const {
  Eigen::VectorXd v(1 + a.size() + b.size());
  v << omega, a, b;
  return v;
}

GarchParams GarchParams::unpack(const Eigen::VectorXd& v, GarchOrder order) {
  if (v.size() != order.dim()) throw std::invalid_argument("GarchParams::unpack: size mismatch");
  return GarchParams(v(0), v.segment(1, order.q), v.segment(1 + order.q, order.p));
}

std::string to_string(PresampleRule r) {
  return r == PresampleRule::SampleMean ? "sample_mean" : "unconditional";
}

PresampleRule presample_rule_from_string(const std::string& s) {
  if (s == "sample_mean") return PresampleRule::SampleMean;
  if (s == "unconditional") return PresampleRule::Unconditional;
  throw std::invalid_argument("unknown presample rule '" + s + "'");
}

std::string VolatilityPath::description() const {
  return init_rule == PresampleRule::SampleMean
             ? "presample eps^2 and sigma^2 set to mean(eps^2)"
             : "presample eps^2 and sigma^2 set to omega/(1 - sum a - sum b)";
}

namespace {

struct Presample {
  double value;
  double scale;  // d value / d omega; d value / d(a_i or b_j) is value * scale
  bool depends_on_theta;
};

Presample presample(const Eigen::VectorXd& eps, const GarchParams& theta, PresampleRule rule) {
  const double mean_sq = eps.size() > 0 ? eps.squaredNorm() / eps.size() : theta.omega;
  if (rule == PresampleRule::Unconditional) {
    const double persistence = theta.a.sum() + theta.b.sum();
    if (persistence < 1.0) {
      const double s = 1.0 / (1.0 - persistence);
      return {theta.omega * s, s, true};
    }
  }
  return {mean_sq, 0.0, false};
}

}  // namespace

double presample_value(const Eigen::VectorXd& eps, const GarchParams& theta, PresampleRule rule) {
  return presample(eps, theta, rule).value;
}

VolatilityPath volatility_path(const ReturnSeries& eps, const GarchParams& theta, PresampleRule rule) {
  theta.validate();
  const double init = presample_value(eps.values, theta, rule);
  return {volatility_recursion<double>(eps.values, theta.omega, theta.a, theta.b, init), rule};
}

VolatilityDerivatives volatility_derivatives(const Eigen::VectorXd& eps, const GarchParams& theta,
                                             PresampleRule rule) {
  theta.validate();
  const Eigen::Index n = eps.size();
  const Eigen::Index q = theta.a.size();
  const Eigen::Index p = theta.b.size();
  const Eigen::Index d = 1 + q + p;
  const Presample pre = presample(eps, theta, rule);
  // Gradient of the presample level with respect to theta.
  Eigen::RowVectorXd dinit = Eigen::RowVectorXd::Zero(d);
  if (pre.depends_on_theta) {
    dinit(0) = pre.scale;
    dinit.tail(q + p).setConstant(pre.value * pre.scale);
  }
  VolatilityDerivatives out;
  out.sigma2.resize(n);
  out.dsigma2.setZero(n, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    double v = theta.omega;
    Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(d);
    g(0) = 1.0;
    for (Eigen::Index i = 1; i <= q; ++i) {
      const double ai = theta.a(i - 1);
      if (t - i >= 0) {
        const double e2 = eps(t - i) * eps(t - i);
        v += ai * e2;
        g(i) += e2;
      } else {
        v += ai * pre.value;
        g(i) += pre.value;
        g += ai * dinit;
      }
    }
    for (Eigen::Index j = 1; j <= p; ++j) {
      const double bj = theta.b(j - 1);
      if (t - j >= 0) {
        v += bj * out.sigma2(t - j);
        g(q + j) += out.sigma2(t - j);
        g += bj * out.dsigma2.row(t - j);
      } else {
        v += bj * pre.value;
        g(q + j) += pre.value;
        g += bj * dinit;
      }
    }
    out.sigma2(t) = v;
    out.dsigma2.row(t) = g;
  }
  return out;
}

Simulation simulate(const GarchParams& theta, const StableParams& psi, std::int64_t n,
                    std::int64_t burn_in, std::uint64_t seed, const SimulationConfig& cfg) {
  psi.validate();
  const InnovationSource draw = [psi](std::mt19937_64& eng) {
    return psi.mu + psi.gamma * sample_standard(psi.alpha, psi.beta, eng);
  };
  return simulate(theta, draw, n, burn_in, seed, cfg);
}

Simulation simulate(const GarchParams& theta, const InnovationSource& innovations, std::int64_t n,
                    std::int64_t burn_in, std::uint64_t seed, const SimulationConfig& cfg) {
  theta.validate();
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("simulate: burn_in must be >= 0");
  const Eigen::Index q = theta.a.size();
  const Eigen::Index p = theta.b.size();
  const std::int64_t total = n + burn_in;
  std::mt19937_64 engine(seed);
  // Ring buffers of the most recent eps^2 and sigma^2, newest first.
  std::vector<double> e2(q, theta.omega), s2(std::max<Eigen::Index>(p, 1), theta.omega);
  Simulation out;
  out.eps.values.resize(n);
  out.sigma2.sigma2.resize(n);
  out.eta.resize(n);
  const double guard = cfg.overflow_factor * theta.omega;
  for (std::int64_t t = 0; t < total; ++t) {
    double v = theta.omega;
    for (Eigen::Index i = 0; i < q; ++i) v += theta.a(i) * e2[i];
    for (Eigen::Index j = 0; j < p; ++j) v += theta.b(j) * s2[j];
    if (!(v <= guard)) {
      std::ostringstream msg;
      msg << "sigma^2 exceeded " << cfg.overflow_factor << " * omega at step " << t
          << " (omega=" << theta.omega << ", a=(" << theta.a.transpose() << "), b=("
          << theta.b.transpose() << "))";
      throw Explosion(msg.str());
    }
    const double eta = innovations(engine);
    const double e = std::sqrt(v) * eta;
    std::rotate(e2.rbegin(), e2.rbegin() + 1, e2.rend());
    e2[0] = e * e;
    if (p > 0) {
      std::rotate(s2.rbegin(), s2.rbegin() + 1, s2.rend());
      s2[0] = v;
    }
    if (t >= burn_in) {
      const auto k = static_cast<Eigen::Index>(t - burn_in);
      out.eps.values(k) = e;
      out.sigma2.sigma2(k) = v;
      out.eta(k) = eta;
    }
  }
  return out;
}

namespace {

// Slope of log||A_t...A_1|| over the horizon after discarding the first 10%.
template <typename Matrix, typename Step>
double lyapunov_slope(Matrix prod, std::int64_t horizon, Step&& multiply) {
  const std::int64_t skip = horizon / 10;
  double log_norm = 0.0;
  double log_at_skip = 0.0;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    multiply(prod);
    if (t % 10 == 0 || t == skip || t == horizon) {
      const double nrm = prod.cwiseAbs().sum();
      if (!(nrm > 0)) return -std::numeric_limits<double>::infinity();
      log_norm += std::log(nrm);
      prod /= nrm;
    }
    if (t == skip) log_at_skip = log_norm;
  }
  return (log_norm - log_at_skip) / static_cast<double>(horizon - skip);
}

// Squared innovations for one replication; shared across a's in a frontier search.
Eigen::VectorXd squared_draws(const StableParams& psi, std::int64_t horizon, std::uint64_t seed, int rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), 0x5eedu};
  std::mt19937_64 engine(seq);
  Eigen::VectorXd e2(horizon);
  for (std::int64_t t = 0; t < horizon; ++t) {
    const double eta = psi.mu + psi.gamma * sample_standard(psi.alpha, psi.beta, engine);
    e2(t) = eta * eta;
  }
  return e2;
}

double slope_from_draws(const GarchParams& theta, const Eigen::VectorXd& eta2) {
  const std::int64_t horizon = eta2.size();
  std::int64_t t = 0;
  if (theta.a.size() == 1 && theta.b.size() == 1) {
    const double a = theta.a(0);
    const double b = theta.b(0);
    return lyapunov_slope(Eigen::Matrix2d::Identity().eval(), horizon, [&](Eigen::Matrix2d& m) {
      const double e2 = eta2(t++);
      // Left-multiply by [[a e2, b e2], [a, b]] = (e2, 1)' (a, b).
      const Eigen::RowVector2d r = a * m.row(0) + b * m.row(1);
      m.row(0) = e2 * r;
      m.row(1) = r;
    });
  }
  const Eigen::Index dim = theta.a.size() + theta.b.size();
  return lyapunov_slope(Eigen::MatrixXd::Identity(dim, dim).eval(), horizon, [&](Eigen::MatrixXd& m) {
    const double eta = std::sqrt(eta2(t++));
    m = companion_matrix<double>(theta, eta) * m;
  });
}

LyapunovEstimate summarize(const std::vector<double>& slopes) {
  const double n = static_cast<double>(slopes.size());
  const double mean = std::accumulate(slopes.begin(), slopes.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : slopes) ss += (s - mean) * (s - mean);
  const double sd = slopes.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return {mean, sd / std::sqrt(n)};
}

}  // namespace

LyapunovEstimate lyapunov_exponent(const GarchParams& theta, const StableParams& psi,
                                   std::int64_t horizon, int replications, std::uint64_t seed) {
  theta.validate();
  psi.validate();
  if (horizon < 1000) throw std::invalid_argument("lyapunov_exponent: horizon must be >= 1000");
  if (replications < 1) throw std::invalid_argument("lyapunov_exponent: replications must be >= 1");
  std::vector<double> slopes;
  for (int r = 0; r < replications; ++r)
    slopes.push_back(slope_from_draws(theta, squared_draws(psi, horizon, seed, r)));
  return summarize(slopes);
}

std::vector<FrontierPoint> stationarity_frontier(double alpha, const std::vector<double>& b_grid,
                                                 const FrontierOptions& opts) {
  const StableParams psi{alpha, 0.0, 0.0, 1.0};
  psi.validate();
  if (opts.horizon < 1000 || opts.replications < 2)
    throw std::invalid_argument("stationarity_frontier: need horizon >= 1000 and >= 2 replications");
  // Common random numbers: the same innovations for every (b, a) evaluated, so
  // gamma(a) is monotone in a and bisection is well posed.
  std::vector<Eigen::VectorXd> draws;
  for (int r = 0; r < opts.replications; ++r) draws.push_back(squared_draws(psi, opts.horizon, opts.seed, r));
  auto gamma_at = [&](double a, double b) {
    std::vector<double> slopes;
    for (const auto& d : draws) slopes.push_back(slope_from_draws(GarchParams(1.0, a, b), d));
    return summarize(slopes);
  };
  std::vector<FrontierPoint> out;
  for (double b : b_grid) {
    if (!(b >= 0 && b < 1)) throw std::invalid_argument("stationarity_frontier: b must lie in [0, 1)");
    double lo = 0.0;
    double hi = opts.a_max;
    LyapunovEstimate at_lo = gamma_at(lo, b);
    if (at_lo.estimate >= 0) {
      out.push_back({alpha, b, 0.0, at_lo.stderr_});
      continue;
    }
    for (int it = 0; it < opts.max_bisections && hi - lo > 1e-6 * std::max(hi, 1e-3); ++it) {
      const double mid = 0.5 * (lo + hi);
      (gamma_at(mid, b).estimate < 0 ? lo : hi) = mid;
    }
    const double a_star = 0.5 * (lo + hi);
    // Translate the Monte-Carlo error of gamma into an error on a* via the local slope.
    const LyapunovEstimate g = gamma_at(a_star, b);
    const double h = std::max(1e-3 * a_star, 1e-5);
    const double slope = (gamma_at(a_star + h, b).estimate - gamma_at(std::max(a_star - h, 0.0), b).estimate) /
                         (a_star + h - std::max(a_star - h, 0.0));
    out.push_back({alpha, b, a_star, slope > 0 ? g.stderr_ / slope : g.stderr_});
  }
  return out;
}

}  // namespace stablegarch
