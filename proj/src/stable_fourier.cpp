#include "stable_detail.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace stablegarch::detail {
namespace {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// exp(w) - 1 without cancellation for small |w|.
cplx expm1c(cplx w) {
  const double a = w.real();
  const double b = w.imag();
  const double s = std::sin(b / 2);
  return {std::expm1(a) * std::cos(b) - 2 * s * s, std::exp(a) * std::sin(b)};
}

// Log of the integrand e^{-itx} phi(t) for the standardized law, t in the
// closed lower-right quadrant.
struct Exponent {
  double x;
  double alpha;
  double beta;
  double tau;

  cplx value(cplx t) const {
    const cplx i(0, 1);
    if (alpha == 1.0) {
      return -i * t * x - t - i * (2 * beta / pi) * t * std::log(t);
    }
    const cplx lt = std::log(t);
    const cplx ta = std::exp(alpha * lt);
    return -i * t * x - ta + i * tau * t * expm1c((alpha - 1) * lt);
  }

  cplx derivative(cplx t) const {
    const cplx i(0, 1);
    if (alpha == 1.0) {
      return -i * x - 1.0 - i * (2 * beta / pi) * (std::log(t) + 1.0);
    }
    const cplx tam1 = std::exp((alpha - 1) * std::log(t));
    return -i * x - alpha * tam1 + i * tau * (alpha * tam1 - 1.0);
  }
};

// Adaptive G7K15 on K complex components at once. tol[k] bounds component k.
template <std::size_t K, typename F>
bool gk_complex(const F& f, double a, double b, const std::array<double, K>& tol,
                std::array<cplx, K>& acc, int depth) {
  using Vals = std::array<cplx, K>;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  Vals k{}, g{};
  std::array<double, K> mag{};
  auto add = [&](const Vals& v, double wk, double wg) {
    for (std::size_t i = 0; i < K; ++i) {
      k[i] += wk * v[i];
      g[i] += wg * v[i];
      mag[i] += wk * std::abs(v[i]);
    }
  };
  add(f(c), kWgk[7], kWg[3]);
  for (int j = 0; j < 7; ++j) {
    const double wg = (j % 2 == 1) ? kWg[j / 2] : 0.0;
    add(f(c + h * kXgk[j]), kWgk[j], wg);
    add(f(c - h * kXgk[j]), kWgk[j], wg);
  }
  bool within = true;
  bool finite = true;
  for (std::size_t i = 0; i < K; ++i) {
    k[i] *= h;
    g[i] *= h;
    const double err = std::abs(k[i] - g[i]);
    finite = finite && std::isfinite(err);
    // Below this the estimate is dominated by rounding in the sum itself.
    const double floor = 100 * std::numeric_limits<double>::epsilon() * h * mag[i];
    within = within && (err <= tol[i] || err <= floor);
  }
  if (!finite) return false;
  if (within || depth <= 0) {
    for (std::size_t i = 0; i < K; ++i) acc[i] += k[i];
    return within;
  }
  std::array<double, K> half;
  for (std::size_t i = 0; i < K; ++i) half[i] = tol[i] / 2;
  const bool left = gk_complex<K>(f, a, c, half, acc, depth - 1);
  const bool right = gk_complex<K>(f, c, b, half, acc, depth - 1);
  return left && right;
}

// Integrates F(s) over the ray s in [start, stop) with panels sized to the
// local rate of change of the exponent, stopping once it has decayed below cut.
template <std::size_t K, typename F>
bool integrate_ray(const Exponent& ex, cplx dir, double radius, double cut,
                   const std::array<double, K>& tol, const F& f, std::array<cplx, K>& acc,
                   double start = 0.0) {
  constexpr double kRadiansPerPanel = 4.0;
  auto width_at = [&](double s) {
    return std::min(3.0 * s, kRadiansPerPanel / std::max(std::abs(ex.derivative(s * dir)), 1e-300));
  };
  bool ok = true;
  double lo = start;
  double hi;
  if (start == 0.0) {
    // t = h v^4 smooths the |t|^alpha branch point at the origin.
    const double h0 = 0.5 / (1.0 + std::abs(ex.x) + std::abs(ex.tau));
    auto g = [&](double v) {
      const double v3 = v * v * v;
      auto vals = f(h0 * v3 * v);
      for (auto& e : vals) e *= 4 * h0 * v3;
      return vals;
    };
    ok = gk_complex<K>(g, 0.0, 1.0, tol, acc, 12);
    lo = h0;
    hi = lo + width_at(lo);
  } else {
    hi = 4 * start;
  }
  for (int panel = 0; panel < 20000; ++panel) {
    ok = gk_complex<K>(f, lo, hi, tol, acc, 12) && ok;
    if (hi >= radius) return ok;
    const cplx t = hi * dir;
    const double slope = (dir * ex.derivative(t)).real();
    if (ex.value(t).real() < cut && slope < 0) return ok;
    lo = hi;
    hi = std::min(hi + width_at(hi), radius);
  }
  return false;  // panel budget exhausted before the integrand decayed
}

double decay_radius(double alpha) { return std::pow(60.0, 1.0 / alpha); }

// Largest admissible rotation: along the ray and on the closing arc the
// integrand stays bounded and has decayed where the real axis has.
double choose_rotation(const Exponent& ex, double cut) {
  const double alpha = ex.alpha;
  double cap = pi / 2;
  if (alpha > 1.0) cap = std::min(pi / 2, 0.9 * (pi / 2 - std::atan(ex.tau)) / alpha);
  const double radius = decay_radius(alpha);
  for (double theta : {cap, 0.75 * cap, 0.5 * cap, 0.25 * cap}) {
    if (theta <= 0) continue;
    const cplx dir = std::polar(1.0, -theta);
    bool admissible = true;
    bool decayed = false;
    for (int j = 0; j <= 120 && admissible; ++j) {
      const double s = 1e-6 * std::pow(radius / 1e-6, j / 120.0);
      const double re = ex.value(s * dir).real();
      if (re > 2.0) admissible = false;
      if (re < cut) decayed = true;
      if (decayed && re > cut + 5) admissible = false;
    }
    if (!admissible || !decayed) continue;
    for (int j = 0; j <= 32 && admissible; ++j) {
      const double v = theta * j / 32.0;
      if (ex.value(radius * std::polar(1.0, -v)).real() > cut) admissible = false;
    }
    if (admissible) return theta;
  }
  return 0.0;
}

}  // namespace

bool gauss_kronrod(const std::function<double(double)>& f, double a, double b, double tol,
                   double& result, int depth) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = kWgk[7] * fc;
  double g = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double s = f(c + h * kXgk[j]) + f(c - h * kXgk[j]);
    k += kWgk[j] * s;
    if (j % 2 == 1) g += kWg[j / 2] * s;
  }
  k *= h;
  g *= h;
  const double err = std::abs(k - g);
  if (!std::isfinite(err)) return false;
  if (err <= tol || depth <= 0) {
    result += k;
    return err <= tol;
  }
  const bool l = gauss_kronrod(f, a, c, tol / 2, result, depth - 1);
  const bool r = gauss_kronrod(f, c, b, tol / 2, result, depth - 1);
  return l && r;
}

namespace {

struct Reflected {
  double x, beta, tau, sign;
};

// f(x; beta) = f(-x; -beta): evaluate on the side where the shifted argument is >= 0.
Reflected reflect(double x, double alpha, double beta) {
  double tau = 0.0;
  if (alpha != 1.0 && alpha != 2.0) tau = beta * std::tan(alpha * pi / 2);
  const double z = alpha == 1.0 ? x : x + tau;
  if (z < 0) return {-x, -beta, -tau, -1.0};
  return {x, beta, tau, 1.0};
}

}  // namespace

FourierValue fourier_density(double x, double alpha, double beta, double tol) {
  const Reflected r = reflect(x, alpha, beta);
  const Exponent ex{r.x, alpha, r.beta, r.tau};
  const double cut = std::log(tol) - 14.0;
  const cplx dir = std::polar(1.0, -choose_rotation(ex, cut));
  const cplx i(0, 1);
  auto integrand = [&](double s) -> std::array<cplx, 2> {
    if (s <= 0) return {dir, 0.0};
    const cplx t = s * dir;
    const cplx e = dir * std::exp(ex.value(t));
    return {e, -i * t * e};
  };
  std::array<cplx, 2> acc{};
  const double ptol = 1e-3 * pi * tol;
  const bool ok = integrate_ray<2>(ex, dir, decay_radius(alpha), cut, {ptol, ptol}, integrand, acc);
  FourierValue out;
  out.pdf = std::max(0.0, acc[0].real() / pi);
  out.dx = r.sign * acc[1].real() / pi;
  out.ok = ok && std::isfinite(out.pdf) && std::isfinite(out.dx);
  return out;
}

FourierDerivatives fourier_density_derivatives(double x, double alpha, double beta, double tol) {
  FourierDerivatives out;
  if (alpha == 1.0 || alpha == 2.0) return out;  // caller falls back to differences
  const Reflected r = reflect(x, alpha, beta);
  const Exponent ex{r.x, alpha, r.beta, r.tau};
  const double cut = std::log(tol) - 14.0;
  const cplx dir = std::polar(1.0, -choose_rotation(ex, cut));
  const cplx i(0, 1);
  const double tn = std::tan(alpha * pi / 2);
  const double dtau_dalpha = r.beta * (pi / 2) / std::pow(std::cos(alpha * pi / 2), 2);
  auto integrand = [&](double s) -> std::array<cplx, 4> {
    if (s <= 0) return {dir, 0.0, 0.0, 0.0};
    const cplx t = s * dir;
    const cplx lt = std::log(t);
    const cplx tam1 = std::exp((alpha - 1) * lt);
    const cplx e = dir * std::exp(ex.value(t));
    // d g / d alpha and d g / d beta of the exponent in the reflected frame.
    const cplx dga = -t * tam1 * lt + i * dtau_dalpha * t * (tam1 - 1.0) + i * r.tau * t * tam1 * lt;
    const cplx dgb = i * tn * t * (tam1 - 1.0);
    return {e, -i * t * e, dga * e, dgb * e};
  };
  std::array<cplx, 4> acc{};
  const double ptol = 1e-3 * pi * tol;
  const bool ok = integrate_ray<4>(ex, dir, decay_radius(alpha), cut, {ptol, ptol, 1e2 * ptol, 1e2 * ptol},
                                   integrand, acc);
  out.pdf = std::max(0.0, acc[0].real() / pi);
  out.dx = r.sign * acc[1].real() / pi;
  out.dalpha = acc[2].real() / pi;
  out.dbeta = r.sign * acc[3].real() / pi;  // beta enters reflected
  out.ok = ok && std::isfinite(out.pdf) && std::isfinite(out.dx) && std::isfinite(out.dalpha) &&
           std::isfinite(out.dbeta);
  return out;
}

double fourier_cdf(double x, double alpha, double beta, double tol, bool& ok) {
  const Reflected r = reflect(x, alpha, beta);
  const Exponent ex{r.x, alpha, r.beta, r.tau};
  const double cut = std::log(tol) - 14.0;
  // Rotating the ray by theta leaves Im int e^g / t dt unchanged up to -theta:
  // the -1/t part of (e^g - 1)/t is real on the ray and picks up i theta on the arc.
  const double theta = choose_rotation(ex, cut);
  const cplx dir = std::polar(1.0, -theta);
  auto integrand = [&](double s) -> std::array<cplx, 1> {
    if (s <= 0) return {0.0};
    return {std::exp(ex.value(s * dir)).imag() / s};
  };
  // Near the origin Im(e^g)/s ~ Im(g)/s, integrated in closed form.
  const double eps = 1e-10 / (1.0 + std::abs(r.x));
  const double c = std::cos(theta);
  std::array<cplx, 1> acc{};
  if (alpha == 1.0) {
    const double k = 2 * r.beta / pi;
    acc[0] = -r.x * c * eps + std::sin(theta) * eps - k * c * (eps * std::log(eps) - eps) +
             k * theta * std::sin(theta) * eps;
  } else {
    const cplx da = std::polar(1.0, -alpha * theta);
    acc[0] = -(r.x + r.tau) * c * eps + (r.tau * da.real() - da.imag()) * std::pow(eps, alpha) / alpha;
  }
  ok = integrate_ray<1>(ex, dir, decay_radius(alpha), cut, {1e-3 * pi * tol}, integrand, acc, eps);
  ok = ok && std::isfinite(acc[0].real());
  const double f = std::clamp(0.5 - (acc[0].real() - theta) / pi, 0.0, 1.0);
  return r.sign > 0 ? f : 1.0 - f;
}

}  // namespace stablegarch::detail
