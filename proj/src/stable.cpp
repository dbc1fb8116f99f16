#include "stablegarch/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <unsupported/Eigen/FFT>

#include "stable_detail.hpp"

namespace stablegarch {
namespace {

constexpr double pi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

double shift_of(double alpha, double beta) {
  if (alpha == 1.0 || alpha == 2.0) return 0.0;
  return beta * std::tan(alpha * pi / 2);
}

double gaussian_pdf(double x) { return std::exp(-x * x / 4) / (2 * std::sqrt(pi)); }

}  // namespace

bool StableParams::valid() const {
  return alpha > 0 && alpha <= 2 && beta >= -1 && beta <= 1 && gamma > 0 && std::isfinite(mu) &&
         std::isfinite(gamma);
}

void StableParams::validate() const {
  if (!valid()) throw std::invalid_argument("invalid stable parameters");
}

bool DensityAccuracy::valid() const {
  return abs_tol > 0 && max_series_terms >= 10 && fft_grid_size >= (1 << 10) &&
         (fft_grid_size & (fft_grid_size - 1)) == 0 && fft_domain_halfwidth >= 0;
}

void DensityAccuracy::validate() const {
  if (!valid()) throw std::invalid_argument("invalid density accuracy settings");
}

std::string to_string(DensityStrategy s) {
  switch (s) {
    case DensityStrategy::ModeSeries: return "mode_series";
    case DensityStrategy::TailSeries: return "tail_series";
    case DensityStrategy::Fourier: return "fourier";
    case DensityStrategy::Gaussian: return "gaussian";
  }
  return "unknown";
}

StableDensity::StableDensity(double alpha, double beta, const DensityAccuracy& acc)
    : alpha_(alpha), beta_(beta), acc_(acc) {
  StableParams{alpha, beta, 0.0, 1.0}.validate();
  acc_.validate();
  gaussian_ = alpha == 2.0;
  if (gaussian_) return;
  tau_ = shift_of(alpha, beta);
  rho_ = std::hypot(1.0, tau_);
  phi_ = std::atan(tau_);
  // alpha == 1 with beta != 0 has logarithmic terms that neither series covers.
  has_series_ = alpha != 1.0 || beta == 0.0;
  if (!has_series_) return;
  if (alpha >= 1.0) build_mode_series();
  build_tail_series();
}

void StableDensity::build_mode_series() {
  const int kmax = acc_.max_series_terms;
  std::vector<double> log_env(kmax);
  for (int k = 0; k < kmax; ++k) {
    const double a = (k + 1) / alpha_;
    log_env[k] = std::lgamma(a) - std::lgamma(k + 1.0) - a * std::log(rho_) - std::log(alpha_ * pi);
  }
  const double trunc = std::log(1e-3 * acc_.abs_tol);
  // Number of terms needed at radius r, or -1 when r is not certified.
  auto terms_needed = [&](double r) {
    const double lr = std::log(r);
    double abs_sum = 0.0;
    for (int k = 0; k + 2 < kmax; ++k) {
      const double lt = log_env[k] + k * lr;
      // Relative error of a term grows with the size of lgamma and the cosine argument.
      abs_sum += (k + 2 + std::abs(log_env[k]) + (k + 1) * (std::abs(phi_) / alpha_ + 2)) * std::exp(lt);
      const double lnext = log_env[k + 1] + (k + 1) * lr;
      if (lt < trunc && lnext < lt) {
        // Term ratios decrease in k, so the remainder is bounded geometrically.
        const double q = std::exp(lnext - lt);
        if (lnext - std::log1p(-q) >= trunc) continue;
        if (abs_sum * 4 * kEps > 0.05 * acc_.abs_tol) return -1;
        return k + 2;
      }
    }
    return -1;
  };
  double lo = 0.0;
  double hi = 0.25;
  if (terms_needed(hi) < 0) return;
  while (hi < 1e3 && terms_needed(2 * hi) > 0) hi *= 2;
  lo = hi;
  hi *= 2;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (terms_needed(mid) > 0 ? lo : hi) = mid;
  }
  mode_radius_ = lo;
  const int n = terms_needed(lo);
  mode_coef_.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double a = (k + 1) / alpha_;
    mode_coef_[k] = std::exp(log_env[k]) * std::cos(a * phi_ - k * pi / 2);
  }
}

void StableDensity::build_tail_series() {
  const int kmax = acc_.max_series_terms;
  tail_log_env_.assign(kmax + 1, 0.0);
  tail_coef_pos_.assign(kmax + 1, 0.0);
  tail_coef_neg_.assign(kmax + 1, 0.0);
  for (int k = 1; k <= kmax; ++k) {
    const double le = std::lgamma(k * alpha_ + 1) - std::lgamma(k + 1.0) + k * std::log(rho_) -
                      std::log(pi);
    tail_log_env_[k] = le;
    const double sgn = (k % 2 == 1) ? 1.0 : -1.0;
    // Only the oscillating factor; the magnitude stays in log form.
    tail_coef_pos_[k] = sgn * std::sin(k * (phi_ + alpha_ * pi / 2));
    tail_coef_neg_[k] = sgn * std::sin(k * (-phi_ + alpha_ * pi / 2));
  }
  auto certified = [&](double r) { return sum_tail(r).ok; };
  double hi = 1.0;
  while (hi < 1e12 && !certified(hi)) hi *= 2;
  if (!certified(hi)) return;
  while (hi > 1e-3 && certified(hi / 2)) hi /= 2;
  double lo = hi / 2;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (certified(mid) ? hi : lo) = mid;
  }
  tail_start_ = hi;
}

// Sums the tail series at shifted coordinate z (sign picks the side).
StableDensity::TailSum StableDensity::sum_tail(double z) const {
  TailSum out{0.0, 0.0, 0.0, 0.0, false};
  if (!has_series_ || tail_log_env_.empty()) return out;
  const double r = std::abs(z);
  if (r == 0) return out;
  const std::vector<double>& coef = z > 0 ? tail_coef_pos_ : tail_coef_neg_;
  const double lr = std::log(r);
  const int kmax = static_cast<int>(tail_log_env_.size()) - 1;
  double abs_sum = 0.0;
  double prev_env = std::numeric_limits<double>::infinity();
  double min_env = prev_env;
  const double tol = acc_.abs_tol;
  for (int k = 1; k <= kmax; ++k) {
    const double lenv = tail_log_env_[k] - (k * alpha_ + 1) * lr;
    const double env = std::exp(lenv);
    if (alpha_ > 1.0 && env > prev_env) break;  // asymptotic: stop at the smallest term
    const double term = coef[k] * env;
    out.pdf += term;
    out.dx -= (k * alpha_ + 1) * term / r;
    out.survival += term * r / (k * alpha_);
    abs_sum += env * (1 + (k * alpha_ + 1) / r);
    min_env = std::min(min_env, env);
    if (env < 1e-4 * tol && env < 1e-17 * abs_sum) {
      out.min_term = env;
      out.ok = abs_sum * 8 * kEps <= 0.05 * tol;
      if (z < 0) out.dx = -out.dx;
      return out;
    }
    prev_env = env;
  }
  out.min_term = min_env;
  out.ok = min_env <= 0.1 * tol && abs_sum * 8 * kEps <= 0.05 * tol;
  if (alpha_ <= 1.0) out.ok = out.ok && min_env <= 1e-4 * tol;
  if (z < 0) out.dx = -out.dx;
  return out;
}

std::optional<DensityValue> StableDensity::mode_series(double x) const {
  if (gaussian_) return DensityValue{gaussian_pdf(x), -x / 2 * gaussian_pdf(x), DensityStrategy::Gaussian};
  if (mode_coef_.empty()) return std::nullopt;
  const double z = x + tau_;
  if (std::abs(z) > mode_radius_) return std::nullopt;
  double f = 0.0;
  double d = 0.0;
  for (std::size_t k = mode_coef_.size(); k-- > 0;) {
    f = f * z + mode_coef_[k];
    if (k > 0) d = d * z + k * mode_coef_[k];
  }
  return DensityValue{f, d, DensityStrategy::ModeSeries};
}

std::optional<DensityValue> StableDensity::tail_series(double x) const {
  if (gaussian_ || !has_series_) return std::nullopt;
  const double z = x + tau_;
  if (std::abs(z) < tail_start_) return std::nullopt;
  const TailSum s = sum_tail(z);
  if (!s.ok) return std::nullopt;
  return DensityValue{std::max(0.0, s.pdf), s.dx, DensityStrategy::TailSeries};
}

std::optional<DensityValue> StableDensity::fourier(double x) const {
  const auto v = detail::fourier_density(x, alpha_, beta_, acc_.abs_tol);
  if (!v.ok) return std::nullopt;
  return DensityValue{v.pdf, v.dx, DensityStrategy::Fourier};
}

std::optional<DensityGradient> StableDensity::fourier_gradient(double x) const {
  if (gaussian_ || alpha_ == 1.0) return std::nullopt;
  const auto v = detail::fourier_density_derivatives(x, alpha_, beta_, acc_.abs_tol);
  if (!v.ok) return std::nullopt;
  return DensityGradient{v.pdf, v.dx, v.dalpha, v.dbeta};
}

DensityValue StableDensity::evaluate(double x) const {
  if (auto v = mode_series(x)) return *v;
  if (auto v = tail_series(x)) return *v;
  if (auto v = fourier(x)) return *v;
  throw AccuracyNotReached("stable density: no strategy certified the tolerance at x=" +
                           std::to_string(x));
}

std::optional<double> StableDensity::tail_survival(double x) const {
  if (gaussian_ || !has_series_) return std::nullopt;
  const double z = x + tau_;
  if (std::abs(z) < tail_start_) return std::nullopt;
  const TailSum s = sum_tail(z);
  if (!s.ok) return std::nullopt;
  // For z < 0 this is the left tail mass P[X < x].
  return std::clamp(s.survival, 0.0, 1.0);
}

std::optional<double> StableDensity::mode_cdf(double x) const {
  if (gaussian_) return 0.5 * std::erfc(-x / 2);
  if (mode_coef_.empty()) return std::nullopt;
  const double z = x + tau_;
  if (std::abs(z) > mode_radius_) return std::nullopt;
  const double f0 = alpha_ == 1.0 ? 0.5 : 0.5 - phi_ / (pi * alpha_);
  double acc = 0.0;
  for (std::size_t k = mode_coef_.size(); k-- > 0;) acc = acc * z + mode_coef_[k] / (k + 1.0);
  return std::clamp(f0 + acc * z, 0.0, 1.0);
}

double StableDensity::fourier_cdf(double x) const {
  bool ok = false;
  const double v = detail::fourier_cdf(x, alpha_, beta_, acc_.abs_tol, ok);
  if (!ok) throw AccuracyNotReached("stable cdf: Fourier inversion did not converge");
  return v;
}

double StableDensity::integrate_pdf(double lo, double hi) const {
  if (lo == hi) return 0.0;
  double out = 0.0;
  const bool ok = detail::gauss_kronrod([this](double x) { return pdf(x); }, lo, hi,
                                        0.1 * acc_.abs_tol, out, 30);
  if (!ok) throw AccuracyNotReached("stable cdf: density integration did not converge");
  return out;
}

double StableDensity::cdf(double x) const {
  if (auto v = mode_cdf(x)) return *v;
  const double z = x + tau_;
  if (auto s = tail_survival(x)) return z > 0 ? 1.0 - *s : *s;
  // Integrate the density from the nearest point where a series anchors the CDF.
  struct Anchor {
    double x;
    double value;
  };
  std::vector<Anchor> anchors;
  if (!mode_coef_.empty()) {
    for (double side : {-1.0, 1.0}) {
      const double xa = side * mode_radius_ * (1 - 1e-12) - tau_;
      anchors.push_back({xa, *mode_cdf(xa)});
    }
  }
  if (std::isfinite(tail_start_)) {
    for (double side : {-1.0, 1.0}) {
      const double xa = side * tail_start_ * (1 + 1e-12) - tau_;
      if (auto s = tail_survival(xa)) anchors.push_back({xa, side > 0 ? 1.0 - *s : *s});
    }
  }
  if (anchors.empty()) return fourier_cdf(x);
  const auto best = std::min_element(anchors.begin(), anchors.end(), [x](const Anchor& a, const Anchor& b) {
    return std::abs(a.x - x) < std::abs(b.x - x);
  });
  const double v = best->value + (x > best->x ? integrate_pdf(best->x, x) : -integrate_pdf(x, best->x));
  return std::clamp(v, 0.0, 1.0);
}

std::complex<double> char_fn(double t, const StableParams& psi) {
  psi.validate();
  const double alpha = psi.alpha;
  const double u = psi.gamma * t;
  const double au = std::abs(u);
  std::complex<double> logphi;
  if (u == 0.0) {
    logphi = 0.0;
  } else if (alpha == 1.0) {
    logphi = {-au, -psi.beta * (2 / pi) * u * std::log(au)};
  } else {
    const double tau = shift_of(alpha, psi.beta);
    logphi = {-std::pow(au, alpha), tau * u * std::expm1((alpha - 1) * std::log(au))};
  }
  logphi += std::complex<double>(0.0, psi.mu * t);
  return std::exp(logphi);
}

double density(double x, const StableParams& psi, const DensityAccuracy& acc) {
  psi.validate();
  const StableDensity d(psi.alpha, psi.beta, acc);
  return d.pdf((x - psi.mu) / psi.gamma) / psi.gamma;
}

double density_dx(double x, const StableParams& psi, const DensityAccuracy& acc) {
  psi.validate();
  const StableDensity d(psi.alpha, psi.beta, acc);
  return d.pdf_dx((x - psi.mu) / psi.gamma) / (psi.gamma * psi.gamma);
}

Eigen::Vector4d log_density_grad(double x, const StableParams& psi, const DensityAccuracy& acc) {
  psi.validate();
  constexpr double h = 1e-4;
  const double f = density(x, psi, acc);
  auto at = [&](double alpha, double beta, double mu) {
    return density(x, StableParams{alpha, beta, mu, psi.gamma}, acc);
  };
  // Central difference, or a second-order one-sided difference at a bound.
  auto diff = [&](double v, double lo, double hi, auto&& eval) {
    if (v + h <= hi && v - h >= lo) return (eval(v + h) - eval(v - h)) / (2 * h);
    if (v + h > hi) return (3 * eval(v) - 4 * eval(v - h) + eval(v - 2 * h)) / (2 * h);
    return (-3 * eval(v) + 4 * eval(v + h) - eval(v + 2 * h)) / (2 * h);
  };
  Eigen::Vector4d g;
  g(0) = diff(psi.alpha, 1e-3, 2.0, [&](double a) { return at(a, psi.beta, psi.mu); }) / f;
  g(1) = diff(psi.beta, -1.0, 1.0, [&](double b) { return at(psi.alpha, b, psi.mu); }) / f;
  g(2) = diff(psi.mu, -1e300, 1e300, [&](double m) { return at(psi.alpha, psi.beta, m); }) / f;
  g(3) = density_dx(x, psi, acc) / f;
  return g;
}

double cdf(double x, const StableParams& psi, const DensityAccuracy& acc) {
  psi.validate();
  const StableDensity d(psi.alpha, psi.beta, acc);
  return d.cdf((x - psi.mu) / psi.gamma);
}

Eigen::VectorXd cdf(std::span<const double> xs, const StableParams& psi, const DensityAccuracy& acc) {
  psi.validate();
  const StableDensity d(psi.alpha, psi.beta, acc);
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  double prev_z = 0.0;
  double prev_f = 0.0;
  bool have_prev = false;
  // 3-point Gauss-Legendre for short steps between neighbouring points.
  const double gl_x = std::sqrt(0.6);
  for (std::size_t idx : order) {
    const double z = (xs[idx] - psi.mu) / psi.gamma;
    double f;
    if (auto v = d.mode_cdf(z)) {
      f = *v;
    } else if (auto s = d.tail_survival(z)) {
      f = z + d.shift() > 0 ? 1.0 - *s : *s;
    } else if (have_prev && z - prev_z < 0.01) {
      const double c = 0.5 * (z + prev_z);
      const double hw = 0.5 * (z - prev_z);
      f = prev_f + hw * (5.0 / 9 * (d.pdf(c - hw * gl_x) + d.pdf(c + hw * gl_x)) + 8.0 / 9 * d.pdf(c));
    } else {
      f = d.cdf(z);
    }
    f = std::clamp(f, 0.0, 1.0);
    out(static_cast<Eigen::Index>(idx)) = f;
    prev_z = z;
    prev_f = f;
    have_prev = true;
  }
  return out;
}

double quantile(double p, const StableParams& psi, const DensityAccuracy& acc) {
  psi.validate();
  if (!(p > 0 && p < 1)) throw std::invalid_argument("quantile: p must lie in (0, 1)");
  const StableDensity d(psi.alpha, psi.beta, acc);
  const double tol = acc.abs_tol;
  double lo = -1.0;
  double hi = 1.0;
  double flo = d.cdf(lo);
  double fhi = d.cdf(hi);
  while (flo > p) {
    hi = lo;
    fhi = flo;
    lo *= 2;
    flo = d.cdf(lo);
  }
  while (fhi < p) {
    lo = hi;
    flo = fhi;
    hi *= 2;
    fhi = d.cdf(hi);
  }
  double x = lo + (p - flo) / (fhi - flo) * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    const double fx = d.cdf(x);
    if (std::abs(fx - p) <= tol) break;
    (fx < p ? lo : hi) = x;
    const double dens = d.pdf(x);
    double next = x - (fx - p) / dens;
    if (!(dens > 0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4 * kEps * std::max(1.0, std::abs(x))) break;
    x = next;
  }
  return psi.mu + psi.gamma * x;
}

Eigen::VectorXd sample(const StableParams& psi, std::int64_t count, std::uint64_t seed) {
  psi.validate();
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  std::mt19937_64 engine(seed);
  Eigen::VectorXd out(count);
  for (std::int64_t i = 0; i < count; ++i) {
    out(i) = psi.mu + psi.gamma * sample_standard(psi.alpha, psi.beta, engine);
  }
  return out;
}

DensityGrid density_grid_fft(const StableParams& psi, const DensityAccuracy& acc) {
  psi.validate();
  acc.validate();
  const int n = acc.fft_grid_size;
  const double t_needed = std::pow(40.0, 1.0 / psi.alpha);
  const double half = acc.fft_domain_halfwidth > 0 ? acc.fft_domain_halfwidth : n * pi / (2 * t_needed);
  const double dx = 2 * half / n;
  const double dt = 2 * pi / (n * dx);
  const StableParams unit{psi.alpha, psi.beta, 0.0, 1.0};
  std::vector<std::complex<double>> in(n), out;
  for (int k = 0; k < n; ++k) {
    const double t = (k - n / 2) * dt;
    in[k] = ((k % 2) ? -1.0 : 1.0) * char_fn(t, unit);
  }
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  DensityGrid grid;
  grid.x.resize(n);
  grid.pdf.resize(n);
  const double sign_n = (n / 2) % 2 ? -1.0 : 1.0;
  for (int j = 0; j < n; ++j) {
    const double val = sign_n * ((j % 2) ? -1.0 : 1.0) * out[j].real() * dt / (2 * pi);
    grid.x(j) = psi.mu + psi.gamma * (j - n / 2) * dx;
    grid.pdf(j) = val / psi.gamma;
  }
  return grid;
}

}  // namespace stablegarch
