#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stablegarch {

/// Parameters of an alpha-stable law in the continuous (M) parameterization.
///
/// X ~ S(alpha, beta, mu, gamma) means X = gamma * Z + mu where Z has the
/// standardized characteristic function
///   exp(-|t|^alpha + i beta tan(alpha pi / 2) t (|t|^(alpha-1) - 1)),  alpha != 1
///   exp(-|t| - i beta (2/pi) t log|t|),                               alpha == 1.
/// At alpha == 2 the law is N(mu, 2 gamma^2) and beta has no effect.
struct StableParams {
  double alpha = 2.0;
  double beta = 0.0;
  double mu = 0.0;
  double gamma = 1.0;

  bool valid() const;
  void validate() const;
};

/// Controls for density evaluation. The series/Fourier dispatch thresholds are
/// derived from these per (alpha, beta): a series is used only where its
/// truncation and rounding error are both provably below abs_tol.
struct DensityAccuracy {
  double abs_tol = 1e-11;
  int max_series_terms = 400;
  int fft_grid_size = 1 << 14;
  /// Half-width of the x-domain used by density_grid_fft; 0 selects it from
  /// the decay of the characteristic function.
  double fft_domain_halfwidth = 0.0;

  bool valid() const;
  void validate() const;
};

class AccuracyNotReached : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Which evaluation route produced a value.
enum class DensityStrategy { ModeSeries, TailSeries, Fourier, Gaussian };

std::string to_string(DensityStrategy s);

/// Density value together with its x-derivative.
struct DensityValue {
  double pdf = 0.0;
  double dx = 0.0;
  DensityStrategy strategy = DensityStrategy::Fourier;
};

struct DensityGradient {
  double pdf = 0.0;
  double dx = 0.0;
  double dalpha = 0.0;
  double dbeta = 0.0;
};

/// Standardized stable density (mu = 0, gamma = 1) for a fixed (alpha, beta).
///
/// Construction precomputes both series' coefficients and the regions in which
/// each certifies abs_tol, so repeated evaluation (likelihoods, grids) is cheap.
/// Three routes:
///   - the convergent power series around the mode (alpha > 1),
///   - the series in |z|^-alpha for large |z| (convergent for alpha < 1,
///     asymptotic for alpha > 1 and truncated at its smallest term),
///   - numerical Fourier inversion along a (possibly rotated) ray.
/// Series are written in the shifted coordinate z = x + beta tan(alpha pi/2).
class StableDensity {
 public:
  StableDensity(double alpha, double beta, const DensityAccuracy& acc = {});

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const DensityAccuracy& accuracy() const { return acc_; }

  double pdf(double x) const { return evaluate(x).pdf; }
  double pdf_dx(double x) const { return evaluate(x).dx; }
  DensityValue evaluate(double x) const;

  double cdf(double x) const;

  /// Individual strategies; nullopt when the route cannot certify abs_tol at x.
  std::optional<DensityValue> mode_series(double x) const;
  std::optional<DensityValue> tail_series(double x) const;
  std::optional<DensityValue> fourier(double x) const;

  /// Density with its x, alpha and beta derivatives from one Fourier pass.
  /// Unavailable at alpha in {1, 2}.
  std::optional<DensityGradient> fourier_gradient(double x) const;

  /// Mass beyond x from the term-wise integrated tail series, when certified:
  /// P[X > x] on the right of the shift, P[X < x] on the left.
  std::optional<double> tail_survival(double x) const;
  /// P[X <= x] from the term-wise integrated mode series, when certified.
  std::optional<double> mode_cdf(double x) const;
  /// Gil-Pelaez inversion of the characteristic function.
  double fourier_cdf(double x) const;

  /// Certified regions in the shifted coordinate; NaN/inf when absent.
  double mode_series_radius() const { return mode_radius_; }
  double tail_series_start() const { return tail_start_; }
  double shift() const { return tau_; }

 private:
  double alpha_;
  double beta_;
  DensityAccuracy acc_;
  double tau_ = 0.0;    // beta tan(alpha pi / 2); 0 at alpha == 1 or 2
  double rho_ = 1.0;    // sqrt(1 + tau^2)
  double phi_ = 0.0;    // arctan(tau)
  bool gaussian_ = false;
  bool has_series_ = false;

  std::vector<double> mode_coef_;      // f(z) = sum c_k z^k
  double mode_radius_ = 0.0;
  std::vector<double> tail_log_env_;   // log |d_k| envelope, k >= 1
  std::vector<double> tail_coef_pos_;  // sign of d_k times its sine factor, z > 0
  std::vector<double> tail_coef_neg_;  // same for z < 0 (reflected beta)
  double tail_start_ = std::numeric_limits<double>::infinity();

  void build_mode_series();
  void build_tail_series();
  struct TailSum {
    double pdf, dx, survival;
    double min_term;
    bool ok;
  };
  TailSum sum_tail(double z) const;
  double integrate_pdf(double lo, double hi) const;
};

std::complex<double> char_fn(double t, const StableParams& psi);

double density(double x, const StableParams& psi, const DensityAccuracy& acc = {});
double density_dx(double x, const StableParams& psi, const DensityAccuracy& acc = {});

/// Gradient of log f(x, psi) in (alpha, beta, mu, x). The parameter components
/// use central differences of the density; the x component is f'/f.
Eigen::Vector4d log_density_grad(double x, const StableParams& psi,
                                 const DensityAccuracy& acc = {});

double cdf(double x, const StableParams& psi, const DensityAccuracy& acc = {});

/// CDF at many points; points are integrated cumulatively in sorted order so
/// the cost per point is a handful of density evaluations.
Eigen::VectorXd cdf(std::span<const double> xs, const StableParams& psi,
                    const DensityAccuracy& acc = {});

double quantile(double p, const StableParams& psi, const DensityAccuracy& acc = {});

/// Chambers-Mallows-Stuck draws mapped to the (M) parameterization.
Eigen::VectorXd sample(const StableParams& psi, std::int64_t count, std::uint64_t seed);

/// Unit-scale draws from a caller-owned engine (used by simulators).
template <typename Engine>
double sample_standard(double alpha, double beta, Engine& engine);

/// Density on a uniform grid by FFT of the characteristic function.
struct DensityGrid {
  Eigen::VectorXd x;
  Eigen::VectorXd pdf;
};
DensityGrid density_grid_fft(const StableParams& psi, const DensityAccuracy& acc = {});

}  // namespace stablegarch

#include "stablegarch/stable_sample.ipp"
