#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "stablegarch/domain_attraction.hpp"
#include "stablegarch/stats.hpp"

using namespace stablegarch;

namespace {

constexpr double kPi = 3.14159265358979323846;

double ks_to_stable(const Eigen::VectorXd& x, const StableParams& psi) {
  return ks_distance(x, cdf(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), psi));
}

double ks_to_student(const Eigen::VectorXd& x, double nu) {
  const boost::math::students_t_distribution<double> t(nu);
  Eigen::VectorXd F(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) F(i) = boost::math::cdf(t, x(i));
  return ks_distance(x, F);
}

// Normalized sums S_n / (a n^(1/alpha)) of symmetric Student draws.
Eigen::VectorXd normalized_student_sums(double nu, std::int64_t n, std::int64_t count, double a, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::student_t_distribution<double> t(nu);
  Eigen::VectorXd out(count);
  const double norm = a * std::pow(static_cast<double>(n), 1.0 / nu);
  for (std::int64_t i = 0; i < count; ++i) {
    double s = 0.0;
    for (std::int64_t k = 0; k < n; ++k) s += t(eng);
    out(i) = s / norm;
  }
  return out;
}

}  // namespace

TEST_CASE("skewness follows the tail constants") {
  CHECK(gclt_constants({1.5, 2.0, 2.0}).beta == 0.0);
  CHECK(gclt_constants({1.5, 3.0, 1.0}).beta == doctest::Approx(0.5));
  CHECK(gclt_constants({0.7, 0.0 + 1e-9, 1.0}).beta == doctest::Approx(-1.0).epsilon(1e-8));
  const GcltConstants c = gclt_constants({1.5, 3.0, 1.0});
  const StableParams lim = c.limit();
  CHECK(lim.alpha == 1.5);
  CHECK(lim.beta == doctest::Approx(0.5));
  CHECK(lim.mu == doctest::Approx(0.5 * std::tan(1.5 * kPi / 2)));
  CHECK(lim.gamma == 1.0);
  CHECK(c.m_rule == Centering::Mean);
  CHECK(gclt_constants({0.6, 1.0, 1.0}).m_rule == Centering::None);
}

TEST_CASE("M(alpha) uses the branch for its side of one") {
  CHECK(gclt_M(1.5) == doctest::Approx(std::tgamma(0.5) / (1.5 * 0.5)).epsilon(1e-14));
  CHECK(gclt_M(0.6) == doctest::Approx(-std::tgamma(0.4) / 0.6).epsilon(1e-14));
  // a at alpha = 0.6 from the formula with the negative branch.
  const double M = -std::tgamma(0.4) / 0.6;
  const double a = std::pow(-0.6 * M * 2.0 * std::cos(0.6 * kPi / 2), 1 / 0.6);
  CHECK(gclt_constants({0.6, 1.0, 1.0}).a == doctest::Approx(a).epsilon(1e-13));
  CHECK_THROWS_AS(gclt_M(1.0), std::invalid_argument);
  CHECK_THROWS_AS(GcltSpec({1.0, 1.0, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(GcltSpec({1.5, 0.0, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(GcltSpec({2.0, 1.0, 1.0}).validate(), std::invalid_argument);
}

TEST_CASE("normalization constant is continuous in alpha") {
  // a diverges like Gamma(2 - alpha)^(1/alpha) at 2, so steps stay small there.
  double prev = gclt_constants({1.001, 0.5, 0.5}).a;
  for (int i = 2; i <= 990; ++i) {
    const double alpha = 1.0 + 0.001 * i;
    const double a = gclt_constants({alpha, 0.5, 0.5}).a;
    CHECK(std::isfinite(a));
    CHECK(a > 0);
    CHECK(std::abs(a - prev) < 0.05 * prev);
    prev = a;
  }
  // Both branches approach the same value from either side of one.
  const double left = gclt_constants({1.0 - 1e-6, 0.5, 0.5}).a;
  const double right = gclt_constants({1.0 + 1e-6, 0.5, 0.5}).a;
  CHECK(left == doctest::Approx(right).epsilon(1e-4));
}

TEST_CASE("Student tail constant matches the tail ratio") {
  for (double nu : {1.0, 1.2, 1.5, 1.6, 1.9, 3.0}) {
    const boost::math::students_t_distribution<double> t(nu);
    const double x = 1e5;
    const double ratio = boost::math::cdf(boost::math::complement(t, x)) * std::pow(x, nu);
    INFO("nu=" << nu);
    CHECK(student_tail_constant(nu) == doctest::Approx(ratio).epsilon(1e-6));
  }
  CHECK(student_tail_constant(1.0) == doctest::Approx(1 / kPi).epsilon(1e-14));
  const GcltSpec s = student_gclt_spec(1.5);
  CHECK(s.K1 == s.K2);
  CHECK(s.alpha == 1.5);
}

TEST_CASE("normalized Student sums converge to the standard limit") {
  // 2000 sums of 5000 draws: ten million t_1.5 variates in total.
  const double a = gclt_constants(student_gclt_spec(1.5)).a;
  const Eigen::VectorXd sums = normalized_student_sums(1.5, 5000, 2000, a, 21);
  CHECK(ks_to_stable(sums, {1.5, 0.0, 0.0, 1.0}) < 1.358 / std::sqrt(2000.0));
}

TEST_CASE("K = 1 with jK = 1 gives plain Student draws") {
  const Eigen::VectorXd x = summed_innovations({1.6, 1, 1.0}, 20000, 5);
  CHECK(ks_to_student(x, 1.6) < 1.358 / std::sqrt(20000.0));
  CHECK(summed_innovations({1.6, 1, 1.0}, 100, 5) == x.head(100));
  CHECK(summed_innovations({1.6, 1, 1.0}, 100, 6) != x.head(100));
}

TEST_CASE("infinite K draws from the scaled stable limit") {
  const double a = gclt_constants(student_gclt_spec(1.6)).a;
  int passes = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Eigen::VectorXd x = summed_innovations({1.6, kInfiniteK, a}, 2000, seed);
    passes += ks_to_stable(x, {1.6, 0.0, 0.0, 1.0}) < 1.358 / std::sqrt(2000.0) ? 1 : 0;
  }
  CHECK(passes >= 8);
  // jK rescales the draw.
  const Eigen::VectorXd one = summed_innovations({1.6, kInfiniteK, 1.0}, 50, 3);
  const Eigen::VectorXd two = summed_innovations({1.6, kInfiniteK, 2.0}, 50, 3);
  CHECK((one - 2.0 * two).cwiseAbs().maxCoeff() <= 1e-14 * one.cwiseAbs().maxCoeff());
}

TEST_CASE("KS distance to the limit shrinks with K") {
  const double a = gclt_constants(student_gclt_spec(1.6)).a;
  const StableParams limit{1.6, 0.0, 0.0, a};
  const double d10 = ks_to_stable(summed_innovations({1.6, 10, 1.0}, 2000, 31), limit);
  const double d4 = ks_to_stable(summed_innovations({1.6, 10000, 1.0}, 2000, 31), limit);
  CHECK(d4 < d10);
}

TEST_CASE("K labels round trip") {
  CHECK(k_label(kInfiniteK) == "inf");
  CHECK(k_label(1000) == "1000");
  CHECK(parse_k("inf") == kInfiniteK);
  CHECK(parse_k("10") == 10);
  CHECK_THROWS(parse_k("0"));
  CHECK_THROWS(parse_k("ten"));
  CHECK_THROWS_AS(SummedInnovationSpec({1.6, 10, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(SummedInnovationSpec({2.5, 10, 1.0}).validate(), std::invalid_argument);
}

TEST_CASE("i.i.d. stable fit recovers all four parameters") {
  const StableParams truth{1.5, 0.3, 0.2, 2.0};
  const Eigen::VectorXd x = sample(truth, 5000, 41);
  const IidStableFit fit = fit_stable_iid(x);
  CHECK(fit.converged);
  CHECK(fit.psi.alpha == doctest::Approx(truth.alpha).epsilon(0.05 / 1.5));
  CHECK(std::abs(fit.psi.beta - truth.beta) < 0.15);
  CHECK(std::abs(fit.psi.mu - truth.mu) < 0.15);
  CHECK(fit.psi.gamma == doctest::Approx(truth.gamma).epsilon(0.05));
}

TEST_CASE("i.i.d. Cauchy sample fits close to the Cauchy law") {
  const Eigen::VectorXd x = sample({1.0, 0.0, 0.0, 1.0}, 10000, 42);
  const IidStableFit fit = fit_stable_iid(x);
  CHECK(fit.converged);
  CHECK(std::abs(fit.psi.alpha - 1.0) < 0.05);
  CHECK(std::abs(fit.psi.beta) < 0.05);
  CHECK(std::abs(fit.psi.mu) < 0.05);
  CHECK(std::abs(fit.psi.gamma - 1.0) < 0.05);
}

TEST_CASE("jK calibration is reproducible and cached") {
  CHECK_THROWS_AS(calibrate_jK(1.6, 1, 500, 9, 1), std::invalid_argument);
  const JkCalibration c1 = calibrate_jK(1.6, 1, 500, 10, 1);
  const JkCalibration c2 = calibrate_jK(1.6, 1, 500, 10, 2);
  CHECK(c1.successes >= 8);
  CHECK(c1.reps == 10);
  CHECK(c1.stderr_ > 0);
  CHECK(std::abs(c1.jK - c2.jK) <= 2 * std::hypot(c1.stderr_, c2.stderr_));

  const std::filesystem::path cache = std::filesystem::temp_directory_path() / "stablegarch_jk_cache_test.json";
  std::filesystem::remove(cache);
  const JkCalibration first = calibrate_jK_cached(cache.string(), 1.6, 1, 500, 10, 1);
  CHECK(first.jK == c1.jK);
  REQUIRE(std::filesystem::exists(cache));
  // A doctored entry proves the second call reads the sidecar instead of recomputing.
  std::string text;
  {
    std::ifstream in(cache);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  const auto pos = text.find("\"jK\"");
  REQUIRE(pos != std::string::npos);
  const auto end = text.find_first_of(",\n}", pos);
  text.replace(pos, end - pos, "\"jK\": 123.5");
  {
    std::ofstream out(cache);
    out << text;
  }
  CHECK(calibrate_jK_cached(cache.string(), 1.6, 1, 500, 10, 1).jK == 123.5);
  std::filesystem::remove(cache);
}

TEST_CASE("jK calibration settles as K grows") {
  // Student sums approach the limit slowly (error of order K^(1 - 2/alpha)), so
  // the check is that increments shrink, plus exactness at the limit itself.
  const double a = gclt_constants(student_gclt_spec(1.6)).a;
  const JkCalibration c2 = calibrate_jK(1.6, 100, 500, 10, 7);
  const JkCalibration c3 = calibrate_jK(1.6, 1000, 500, 10, 7);
  const JkCalibration c4 = calibrate_jK(1.6, 10000, 500, 10, 7);
  const double d1 = std::abs(c3.jK - c2.jK);
  const double d2 = std::abs(c4.jK - c3.jK);
  CHECK(d2 < d1);
  CHECK(d2 <= 3 * std::hypot(c3.stderr_, c4.stderr_));
  const JkCalibration inf = calibrate_jK(1.6, kInfiniteK, 500, 10, 7);
  CHECK(std::abs(inf.jK - a) <= 3 * inf.stderr_);
}

TEST_CASE("weighted sup distance") {
  const StableParams psi{1.6, 0.0, 0.0, 1.0};
  const Eigen::VectorXd x = sample(psi, 200000, 51);
  const double d0 = density_sup_distance(x, psi, 0.0);
  const double d1 = density_sup_distance(x, psi, 1.0);
  CHECK(d0 < 0.01);
  CHECK(d1 >= d0);
  CHECK_THROWS_AS(density_sup_distance(x, psi, 1.7), std::invalid_argument);
  // Bandwidth scales with the data.
  CHECK(kde_bandwidth(3.0 * x) == doctest::Approx(3.0 * kde_bandwidth(x)).epsilon(1e-12));
  const double iqr = interquartile_range(x);
  CHECK(kde_bandwidth(x) == doctest::Approx(0.9 * iqr / 1.34 * std::pow(200000.0, -0.2)).epsilon(1e-12));
}

TEST_CASE("sup distance to the limit shrinks from K = 10 to K = 1000") {
  const double a = gclt_constants(student_gclt_spec(1.6)).a;
  const StableParams limit{1.6, 0.0, 0.0, 1.0};
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double d10 = density_sup_distance(summed_innovations({1.6, 10, a}, 20000, seed), limit, 0.5);
    const double d3 = density_sup_distance(summed_innovations({1.6, 1000, a}, 20000, seed), limit, 0.5);
    wins += d3 < d10 ? 1 : 0;
  }
  CHECK(wins >= 3);
}
