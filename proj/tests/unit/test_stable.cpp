#include "doctest.h"

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "../oracles.hpp"
#include "stablegarch/stable.hpp"
#include "stablegarch/stats.hpp"

using namespace stablegarch;

namespace {

const std::vector<double> kAlphas{0.5, 0.8, 1.0, 1.3, 1.6, 1.9, 2.0};
const std::vector<double> kBetas{-1.0, -0.5, 0.0, 0.5, 1.0};

}  // namespace

TEST_CASE("gaussian and cauchy members match their closed forms") {
  for (int i = 0; i < 200; ++i) {
    const double x = -20.0 + 40.0 * i / 199.0;
    CHECK(std::abs(density(x, {2.0, 0.0, 0.0, 1.0}) - oracle::gauss_pdf(x)) <= 1e-12);
    CHECK(std::abs(density(x, {1.0, 0.0, 0.0, 1.0}) - oracle::cauchy_pdf(x)) <= 1e-12);
  }
}

TEST_CASE("beta has no effect at alpha = 2") {
  for (double x : {-3.0, -0.4, 0.0, 1.7, 6.0}) {
    CHECK(density(x, {2.0, 0.9, 0.0, 1.0}) == doctest::Approx(oracle::gauss_pdf(x)).epsilon(1e-12));
  }
}

TEST_CASE("totally skewed alpha = 1/2 is a shifted Levy law") {
  // Shift by tan(pi/4) = 1 between the two coordinate systems.
  for (double x = -0.999; x < 40; x += 0.173) {
    CHECK(std::abs(density(x, {0.5, 1.0, 0.0, 1.0}) - oracle::levy_pdf(x + 1.0)) <= 1e-12);
  }
  CHECK(density(-1.5, {0.5, 1.0, 0.0, 1.0}) <= 1e-12);
}

TEST_CASE("density matches the angular integral representation") {
  for (double a : {0.5, 0.8, 1.3, 1.6, 1.9}) {
    for (double b : kBetas) {
      const StableDensity d(a, b);
      for (double x = -25; x <= 25; x += 1.37) {
        INFO("alpha=" << a << " beta=" << b << " x=" << x);
        CHECK(std::abs(d.pdf(x) - oracle::stable_pdf(x, a, b)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("reflection symmetry f(x; beta) = f(-x; -beta)") {
  for (double a : kAlphas) {
    for (double b : kBetas) {
      for (double x : {-7.3, -1.1, 0.0, 0.6, 3.3, 40.0}) {
        CHECK(std::abs(density(x, {a, b, 0, 1}) - density(-x, {a, -b, 0, 1})) <= 1e-11);
      }
    }
  }
}

TEST_CASE("location-scale family") {
  const StableParams unit{1.4, 0.3, 0.0, 1.0};
  const StableParams ls{1.4, 0.3, 0.7, 2.5};
  for (double x : {-5.0, 0.0, 0.7, 4.2}) {
    CHECK(density(x, ls) == doctest::Approx(density((x - 0.7) / 2.5, unit) / 2.5).epsilon(1e-12));
    CHECK(cdf(x, ls) == doctest::Approx(cdf((x - 0.7) / 2.5, unit)).epsilon(1e-12));
  }
}

TEST_CASE("every evaluation route agrees where it certifies the tolerance") {
  for (double a : {0.7, 1.2, 1.5, 1.8}) {
    for (double b : {-0.6, 0.0, 1.0}) {
      const StableDensity d(a, b);
      for (double x = -15; x <= 15; x += 0.29) {
        const auto f = d.fourier(x);
        REQUIRE(f);
        for (auto s : {d.mode_series(x), d.tail_series(x)}) {
          if (!s) continue;
          CHECK(std::abs(s->pdf - f->pdf) <= 1e-11);
          CHECK(std::abs(s->dx - f->dx) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("x-derivative agrees with central differences") {
  const double h = 1e-5;
  for (double a : {0.6, 1.0, 1.5, 1.95}) {
    const StableDensity d(a, 0.4);
    for (double x : {-6.0, -1.3, 0.2, 2.5, 9.0}) {
      const double fd = (d.pdf(x + h) - d.pdf(x - h)) / (2 * h);
      CHECK(std::abs(d.pdf_dx(x) - fd) <= 1e-7);
    }
  }
}

TEST_CASE("Fourier parameter derivatives agree with differences in alpha and beta") {
  const double h = 1e-5;
  for (double a : {0.7, 1.3, 1.7}) {
    const double b = 0.3;
    const StableDensity d(a, b);
    for (double x : {-2.0, 0.0, 1.5, 4.0}) {
      const auto g = d.fourier_gradient(x);
      REQUIRE(g);
      const double fa = (StableDensity(a + h, b).pdf(x) - StableDensity(a - h, b).pdf(x)) / (2 * h);
      const double fb = (StableDensity(a, b + h).pdf(x) - StableDensity(a, b - h).pdf(x)) / (2 * h);
      CHECK(g->dalpha == doctest::Approx(fa).epsilon(1e-5));
      CHECK(g->dbeta == doctest::Approx(fb).epsilon(1e-5));
      CHECK(g->pdf == doctest::Approx(d.pdf(x)).epsilon(1e-10));
    }
  }
  CHECK_FALSE(StableDensity(1.0, 0.2).fourier_gradient(0.5));
}

TEST_CASE("log-density gradient matches differences of log f") {
  const StableParams psi{1.5, 0.2, 0.1, 1.0};
  const double x = 1.3;
  const Eigen::Vector4d g = log_density_grad(x, psi);
  const double h = 1e-5;
  auto lf = [&](StableParams p, double xx) { return std::log(density(xx, p)); };
  CHECK(g(0) == doctest::Approx((lf({1.5 + h, 0.2, 0.1, 1}, x) - lf({1.5 - h, 0.2, 0.1, 1}, x)) / (2 * h)).epsilon(1e-4));
  CHECK(g(1) == doctest::Approx((lf({1.5, 0.2 + h, 0.1, 1}, x) - lf({1.5, 0.2 - h, 0.1, 1}, x)) / (2 * h)).epsilon(1e-4));
  CHECK(g(2) == doctest::Approx((lf({1.5, 0.2, 0.1 + h, 1}, x) - lf({1.5, 0.2, 0.1 - h, 1}, x)) / (2 * h)).epsilon(1e-4));
  CHECK(g(3) == doctest::Approx((lf(psi, x + h) - lf(psi, x - h)) / (2 * h)).epsilon(1e-4));
}

TEST_CASE("density integrates to one") {
  using boost::math::quadrature::tanh_sinh;
  tanh_sinh<double> integrator;
  for (double a : {0.5, 0.9, 1.0, 1.5, 1.9}) {
    for (double b : {-0.5, 0.0, 1.0}) {
      const StableDensity d(a, b);
      // x = tan(u) maps the real line onto (-pi/2, pi/2).
      auto f = [&](double u) {
        const double c = std::cos(u);
        return d.pdf(std::tan(u)) / (c * c);
      };
      const double total = integrator.integrate(f, -oracle::pi / 2, oracle::pi / 2);
      INFO("alpha=" << a << " beta=" << b);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("f(x) x^(alpha+1) approaches a positive constant on the heavy side") {
  for (double a : {0.5, 1.0, 1.5, 1.9}) {
    for (double b : {-0.5, 0.0, 0.7}) {
      const StableDensity d(a, b);
      const double c1 = d.pdf(1e3) * std::pow(1e3, a + 1);
      const double c2 = d.pdf(1e4) * std::pow(1e4, a + 1);
      CHECK(c1 > 0);
      CHECK(std::abs(c1 / c2 - 1) < 0.05);
    }
  }
}

TEST_CASE("characteristic function basics") {
  const StableParams psi{1.3, 0.6, 0.4, 1.7};
  CHECK(std::abs(char_fn(0.0, psi) - std::complex<double>(1, 0)) < 1e-15);
  for (double t : {0.3, 1.0, 4.0}) {
    CHECK(std::abs(char_fn(t, psi)) <= 1.0);
    CHECK(std::abs(char_fn(-t, psi) - std::conj(char_fn(t, psi))) < 1e-14);
  }
  // Gaussian member: exp(-t^2) for unit scale.
  CHECK(char_fn(1.5, {2.0, 0.0, 0.0, 1.0}).real() == doctest::Approx(std::exp(-2.25)));
}

TEST_CASE("cdf is a distribution function consistent with the density") {
  using boost::math::quadrature::gauss_kronrod;
  for (double a : {0.6, 1.0, 1.4, 1.8}) {
    for (double b : {-0.8, 0.0, 0.5}) {
      const StableParams psi{a, b, 0.0, 1.0};
      const StableDensity d(a, b);
      double prev = 0.0;
      for (double x = -30; x <= 30; x += 0.5) {
        const double c = cdf(x, psi);
        CHECK(c >= prev - 1e-12);
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
        prev = c;
      }
      auto f = [&](double x) { return d.pdf(x); };
      const double mass = gauss_kronrod<double, 61>::integrate(f, -1.0, 2.0, 15, 1e-13);
      CHECK(cdf(2.0, psi) - cdf(-1.0, psi) == doctest::Approx(mass).epsilon(1e-9));
    }
  }
  CHECK(cdf(0.0, {1.0, 0.0, 0.0, 1.0}) == doctest::Approx(0.5));
  CHECK(cdf(1.0, {1.0, 0.0, 0.0, 1.0}) == doctest::Approx(0.75));
  CHECK(cdf(1.0, {2.0, 0.0, 0.0, 1.0}) == doctest::Approx(0.5 * std::erfc(-0.5)));
}

TEST_CASE("batch cdf equals pointwise cdf") {
  const StableParams psi{1.6, 0.2, 0.1, 1.3};
  std::vector<double> xs{4.0, -3.0, 0.0, 0.05, 12.0, -40.0, 1.0};
  const Eigen::VectorXd batch = cdf(std::span<const double>(xs), psi);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(batch(i) == doctest::Approx(cdf(xs[i], psi)).epsilon(1e-9));
}

TEST_CASE("quantile inverts the cdf") {
  for (double a : {0.7, 1.0, 1.6, 2.0}) {
    const StableParams psi{a, 0.3, -0.2, 0.8};
    for (double p : {1e-4, 0.01, 0.05, 0.5, 0.9, 0.999}) {
      CHECK(cdf(quantile(p, psi), psi) == doctest::Approx(p).epsilon(1e-8));
    }
    CHECK(quantile(0.01, psi) < quantile(0.05, psi));
  }
  CHECK(quantile(0.5, {1.5, 0.0, 0.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK_THROWS_AS(quantile(0.0, {1.5, 0.0, 0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("sampler is deterministic and follows the cdf") {
  const StableParams psi{1.5, 0.5, 0.0, 1.0};
  const Eigen::VectorXd x1 = sample(psi, 20000, 42);
  const Eigen::VectorXd x2 = sample(psi, 20000, 42);
  CHECK(x1 == x2);
  CHECK(x1 != sample(psi, 20000, 43));
  std::vector<double> xs(x1.data(), x1.data() + x1.size());
  const Eigen::VectorXd F = cdf(std::span<const double>(xs), psi);
  CHECK(ks_distance(x1, F) < 1.63 / std::sqrt(20000.0));
}

TEST_CASE("FFT grid agrees with pointwise evaluation") {
  const StableParams psi{1.5, 0.3, 0.0, 1.0};
  const DensityGrid g = density_grid_fft(psi);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < g.x.size(); i += 97) {
    if (std::abs(g.x(i)) > 20) continue;
    worst = std::max(worst, std::abs(g.pdf(i) - density(g.x(i), psi)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(density(0.0, {2.5, 0.0, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(density(0.0, {1.5, 1.2, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(density(0.0, {1.5, 0.0, 0.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(StableDensity(0.0, 0.0), std::invalid_argument);
  DensityAccuracy bad;
  bad.abs_tol = -1;
  CHECK_THROWS_AS(StableDensity(1.5, 0.0, bad), std::invalid_argument);
}
