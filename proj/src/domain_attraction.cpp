#include "stablegarch/domain_attraction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "psi_gradient.hpp"
#include "stablegarch/optimize.hpp"
#include "stablegarch/stats.hpp"

namespace stablegarch {
namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), tag};
  return std::mt19937_64(seq);
}

}  // namespace

bool GcltSpec::valid() const {
  return alpha > 0 && alpha < 2 && alpha != 1.0 && K1 > 0 && K2 > 0 && std::isfinite(K1) &&
         std::isfinite(K2);
}

void GcltSpec::validate() const {
  if (!valid()) {
    std::ostringstream msg;
    msg << "GcltSpec: need alpha in (0,2) without 1 and K1, K2 > 0 (alpha=" << alpha << ", K1=" << K1
        << ", K2=" << K2 << ")";
    throw std::invalid_argument(msg.str());
  }
}

StableParams GcltConstants::limit() const {
  return {alpha, beta, beta * std::tan(alpha * pi / 2), 1.0};
}

double gclt_M(double alpha) {
  if (!(alpha > 0 && alpha < 2) || alpha == 1.0)
    throw std::invalid_argument("gclt_M: alpha must lie in (0, 2) without 1");
  if (alpha > 1) return std::tgamma(2 - alpha) / (alpha * (alpha - 1));
  return -std::tgamma(1 - alpha) / alpha;
}

GcltConstants gclt_constants(const GcltSpec& spec) {
  spec.validate();
  GcltConstants c;
  c.alpha = spec.alpha;
  c.beta = (spec.K1 - spec.K2) / (spec.K1 + spec.K2);
  const double base = -spec.alpha * gclt_M(spec.alpha) * (spec.K1 + spec.K2) * std::cos(spec.alpha * pi / 2);
  c.a = std::pow(base, 1.0 / spec.alpha);
  c.m_rule = spec.alpha > 1 ? Centering::Mean : Centering::None;
  return c;
}

double student_tail_constant(double nu) {
  if (!(nu > 0)) throw std::invalid_argument("student_tail_constant: nu must be > 0");
  // Density ~ c nu^((nu+1)/2) x^-(nu+1) with c = Gamma((nu+1)/2) / (sqrt(nu pi) Gamma(nu/2)).
  const double lk = std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) + (nu / 2 - 1) * std::log(nu) -
                    0.5 * std::log(pi);
  return std::exp(lk);
}

GcltSpec student_gclt_spec(double nu) {
  const double k = student_tail_constant(nu);
  return {nu, k, k};
}

bool SummedInnovationSpec::valid() const {
  return alpha > 0 && alpha < 2 && alpha != 1.0 && (K >= 1 || K == kInfiniteK) && jK > 0 &&
         std::isfinite(jK);
}

void SummedInnovationSpec::validate() const {
  if (!valid()) {
    std::ostringstream msg;
    msg << "SummedInnovationSpec: need alpha in (0,2) without 1, K >= 1 or infinite, jK > 0 (alpha=" << alpha
        << ", K=" << K << ", jK=" << jK << ")";
    throw std::invalid_argument(msg.str());
  }
}

std::string k_label(std::int64_t K) { return K == kInfiniteK ? "inf" : std::to_string(K); }

std::int64_t parse_k(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (t == "inf" || t == "infinity" || t == "oo") return kInfiniteK;
  std::size_t used = 0;
  long long k = 0;
  try {
    k = std::stoll(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != t.size() || k < 1) throw std::invalid_argument("invalid K '" + text + "': expected a count >= 1 or inf");
  return k;
}

double draw_summed_innovation(const SummedInnovationSpec& spec, std::mt19937_64& engine) {
  if (spec.infinite()) {
    const double a = gclt_constants(student_gclt_spec(spec.alpha)).a;
    return a / spec.jK * sample_standard(spec.alpha, 0.0, engine);
  }
  std::student_t_distribution<double> t(spec.alpha);
  double s = 0.0;
  for (std::int64_t k = 0; k < spec.K; ++k) s += t(engine);
  return s / (spec.jK * std::pow(static_cast<double>(spec.K), 1.0 / spec.alpha));
}

Eigen::VectorXd summed_innovations(const SummedInnovationSpec& spec, std::int64_t n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("summed_innovations: n must be >= 1");
  std::mt19937_64 engine(seed);
  Eigen::VectorXd out(n);
  for (std::int64_t i = 0; i < n; ++i) out(i) = draw_summed_innovation(spec, engine);
  return out;
}

InnovationSource summed_innovation_source(const SummedInnovationSpec& spec) {
  spec.validate();
  return [spec](std::mt19937_64& engine) { return draw_summed_innovation(spec, engine); };
}

IidStableFit fit_stable_iid(const Eigen::VectorXd& sample, const DensityAccuracy& acc) {
  const Eigen::Index n = sample.size();
  if (n < 10) throw std::invalid_argument("fit_stable_iid: need at least 10 observations");
  if (!sample.allFinite()) throw std::invalid_argument("fit_stable_iid: sample has non-finite values");
  const BoxTransform box{Eigen::Vector2d(0.4, -0.99), Eigen::Vector2d(1.99, 0.99)};

  auto mean_nll = [&](double alpha, double beta, double mu, double gamma, Eigen::Vector4d* grad) {
    const detail::PsiGradient pg(alpha, beta, acc);
    double total = 0.0;
    Eigen::Vector4d g = Eigen::Vector4d::Zero();  // alpha, beta, mu, log gamma
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = (sample(i) - mu) / gamma;
      DensityGradient v;
      if (grad) {
        v = pg.gradient(z);
      } else {
        v.pdf = pg.value(z).pdf;
      }
      if (!(v.pdf > 0)) return kInf;
      total += -std::log(v.pdf);
      if (grad) {
        const double r = v.dx / v.pdf;
        g += Eigen::Vector4d(-v.dalpha / v.pdf, -v.dbeta / v.pdf, r / gamma, 1.0 + z * r);
      }
    }
    if (grad) *grad = g / static_cast<double>(n);
    return total / n + std::log(gamma);
  };

  const Objective objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
    const Eigen::VectorXd ab = box.to_box(u.head(2));
    const double gamma = std::exp(u(3));
    try {
      if (!grad) return mean_nll(ab(0), ab(1), u(2), gamma, nullptr);
      Eigen::Vector4d g;
      const double v = mean_nll(ab(0), ab(1), u(2), gamma, &g);
      const Eigen::VectorXd jac = box.jacobian(u.head(2));
      grad->resize(4);
      *grad << g(0) * jac(0), g(1) * jac(1), g(2), g(3);
      return v;
    } catch (const AccuracyNotReached&) {
      return kInf;
    }
  };

  // Coarse start: symmetric laws matched on median and interquartile range.
  const double med = median(sample);
  const double iqr = std::max(interquartile_range(sample), 1e-12);
  Eigen::VectorXd best_u;
  double best = kInf;
  for (double a0 : {1.8, 1.5, 1.2, 0.9}) {
    const double gamma0 = iqr / (2 * quantile(0.75, StableParams{a0, 0.0, 0.0, 1.0}, acc));
    Eigen::VectorXd u(4);
    u << box.to_free(Eigen::Vector2d(a0, 0.0)), med, std::log(gamma0);
    const double v = objective(u, nullptr);
    if (v < best) {
      best = v;
      best_u = u;
    }
  }
  IidStableFit out;
  if (!std::isfinite(best)) {
    out.message = "no finite starting value";
    return out;
  }
  const MinimizeResult r = bfgs_minimize(objective, best_u);
  const Eigen::VectorXd ab = box.to_box(r.u.head(2));
  out.psi = StableParams{ab(0), ab(1), r.u(2), std::exp(r.u(3))};
  out.neg_loglik = r.value;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.message = r.message;
  return out;
}

JkCalibration calibrate_jK(double alpha, std::int64_t K, std::int64_t samples, int reps, std::uint64_t seed,
                           const DensityAccuracy& acc) {
  if (reps < 10) throw std::invalid_argument("calibrate_jK: reps must be >= 10");
  if (samples < 10) throw std::invalid_argument("calibrate_jK: samples must be >= 10");
  const SummedInnovationSpec spec{alpha, K, 1.0};
  spec.validate();
  std::vector<double> gammas;
  for (int r = 0; r < reps; ++r) {
    std::mt19937_64 engine = substream(seed, static_cast<std::uint64_t>(r), 0x6a4bu);
    Eigen::VectorXd x(samples);
    for (std::int64_t i = 0; i < samples; ++i) x(i) = draw_summed_innovation(spec, engine);
    try {
      const IidStableFit fit = fit_stable_iid(x, acc);
      if (fit.converged) gammas.push_back(fit.psi.gamma);
    } catch (const std::exception&) {
      // counted as a failed replication
    }
  }
  JkCalibration out;
  out.reps = reps;
  out.successes = static_cast<int>(gammas.size());
  if (out.successes < 0.8 * reps) {
    std::ostringstream msg;
    msg << "calibrate_jK: only " << out.successes << " of " << reps << " stable fits converged (alpha=" << alpha
        << ", K=" << k_label(K) << ")";
    throw CalibrationFailed(msg.str());
  }
  const Eigen::Map<const Eigen::VectorXd> g(gammas.data(), static_cast<Eigen::Index>(gammas.size()));
  out.jK = g.mean();
  out.stderr_ = std::sqrt(sample_variance(g) / static_cast<double>(g.size()));
  return out;
}

JkCalibration calibrate_jK_cached(const std::string& cache_path, double alpha, std::int64_t K,
                                  std::int64_t samples, int reps, std::uint64_t seed, const DensityAccuracy& acc) {
  std::ostringstream key;
  key.precision(17);
  key << "alpha=" << alpha << ";K=" << k_label(K) << ";samples=" << samples << ";reps=" << reps
      << ";seed=" << seed << ";tol=" << acc.abs_tol;
  nlohmann::json cache = nlohmann::json::object();
  {
    std::ifstream in(cache_path);
    if (in) {
      try {
        in >> cache;
      } catch (const nlohmann::json::exception&) {
        cache = nlohmann::json::object();  // unreadable cache is rebuilt
      }
    }
  }
  if (cache.is_object() && cache.contains(key.str())) {
    const auto& e = cache[key.str()];
    JkCalibration c;
    c.jK = e.at("jK").get<double>();
    c.stderr_ = e.at("stderr").get<double>();
    c.successes = e.at("successes").get<int>();
    c.reps = e.at("reps").get<int>();
    return c;
  }
  const JkCalibration c = calibrate_jK(alpha, K, samples, reps, seed, acc);
  if (!cache.is_object()) cache = nlohmann::json::object();
  cache[key.str()] = {{"jK", c.jK}, {"stderr", c.stderr_}, {"successes", c.successes}, {"reps", c.reps}};
  std::ofstream out(cache_path);
  if (!out) throw std::runtime_error("cannot write calibration cache " + cache_path);
  out << cache.dump(2) << '\n';
  return c;
}

double kde_bandwidth(const Eigen::VectorXd& sample) {
  const double scale = interquartile_range(sample) / 1.34;
  return 0.9 * scale * std::pow(static_cast<double>(sample.size()), -0.2);
}

double density_sup_distance(const Eigen::VectorXd& sample, const StableParams& psi, double delta,
                            const KdeOptions& opts, const DensityAccuracy& acc) {
  psi.validate();
  if (sample.size() < 2) throw std::invalid_argument("density_sup_distance: need at least 2 observations");
  if (delta < 0 || delta > psi.alpha) throw std::invalid_argument("density_sup_distance: need 0 <= delta <= alpha");
  if (opts.grid_size < 16) throw std::invalid_argument("density_sup_distance: grid_size must be >= 16");
  const double h = opts.bandwidth > 0 ? opts.bandwidth : kde_bandwidth(sample);
  if (!(h > 0)) throw std::invalid_argument("density_sup_distance: degenerate sample");
  const double tail = 0.5 * (1.0 - opts.central_mass);
  const double lo = sample_quantile(sample, tail);
  const double hi = sample_quantile(sample, 1.0 - tail);

  // Bin on a grid padded by the kernel reach so edge points keep their mass.
  const double reach = 6.0 * h;
  const int m = opts.grid_size;
  const double dx = (hi - lo) / (m - 1);
  const int pad = static_cast<int>(std::ceil(reach / dx));
  const int total = m + 2 * pad;
  const double origin = lo - pad * dx;
  std::vector<double> bins(total, 0.0);
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double pos = (sample(i) - origin) / dx;
    if (pos < 0 || pos > total - 1) continue;
    const int j = std::min(static_cast<int>(pos), total - 2);
    const double w = pos - j;
    bins[j] += 1.0 - w;
    bins[j + 1] += w;
  }
  std::vector<double> kernel(2 * pad + 1);
  for (int k = -pad; k <= pad; ++k) {
    const double u = k * dx / h;
    kernel[k + pad] = std::exp(-0.5 * u * u) / (std::sqrt(2 * pi) * h * static_cast<double>(sample.size()));
  }
  const StableDensity dens(psi.alpha, psi.beta, acc);
  double sup = 0.0;
  for (int g = 0; g < m; ++g) {
    const int c = g + pad;
    double f = 0.0;
    for (int k = -pad; k <= pad; ++k) f += bins[c + k] * kernel[k + pad];
    const double x = lo + g * dx;
    const double model = dens.pdf((x - psi.mu) / psi.gamma) / psi.gamma;
    sup = std::max(sup, std::pow(1.0 + std::abs(x), delta) * std::abs(f - model));
  }
  return sup;
}

}  // namespace stablegarch
