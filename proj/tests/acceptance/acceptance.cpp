// Acceptance checks. Usage: acceptance <1..10 | all>
// Prints one "criterion N: PASS|FAIL" line per criterion and exits nonzero on
// any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "../oracles.hpp"
#include "stablegarch/domain_attraction.hpp"
#include "stablegarch/estimate.hpp"
#include "stablegarch/experiment.hpp"
#include "stablegarch/garch.hpp"
#include "stablegarch/risk.hpp"
#include "stablegarch/stable.hpp"
#include "stablegarch/stats.hpp"

using namespace stablegarch;

namespace {

const ModelParams kTau0{GarchParams(0.01, 0.02, 0.7), 1.6, 0.0, 0.0};

ReturnSeries simulated(const ModelParams& tau, std::int64_t n, std::uint64_t seed) {
  return simulate(tau.theta, tau.psi(), n, 500, seed).eps;
}

void note(const char* fmt, auto... args) {
  std::printf("  ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

bool closed_form_oracles() {
  double worst_cg = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = -20.0 + 40.0 * i / 199.0;
    worst_cg = std::max(worst_cg, std::abs(density(x, {1.0, 0.0, 0.0, 1.0}) - oracle::cauchy_pdf(x)));
    worst_cg = std::max(worst_cg, std::abs(density(x, {2.0, 0.0, 0.0, 1.0}) - oracle::gauss_pdf(x)));
  }
  // Totally skewed alpha = 1/2 against the angular-integral quadrature.
  double worst_levy = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = -0.99 + 30.0 * i / 199.0;
    worst_levy = std::max(worst_levy, std::abs(density(x, {0.5, 1.0, 0.0, 1.0}) - oracle::stable_pdf(x, 0.5, 1.0)));
  }
  note("max |f - closed form| = %.3g (Cauchy, Gaussian), max |f - quadrature| = %.3g (Levy)", worst_cg, worst_levy);
  return worst_cg <= 1e-8 && worst_levy <= 1e-6;
}

bool normalization_and_tails() {
  boost::math::quadrature::tanh_sinh<double> integrator;
  bool ok = true;
  for (double a : {0.6, 1.0, 1.3, 1.7, 2.0}) {
    for (double b : {-0.9, 0.0, 0.9}) {
      const StableDensity d(a, b);
      auto f = [&](double u) {
        const double c = std::cos(u);
        return d.pdf(std::tan(u)) / (c * c);
      };
      const double total = integrator.integrate(f, -oracle::pi / 2, oracle::pi / 2);
      double spread = 0.0;
      if (a < 2.0) {
        for (double sign : {-1.0, 1.0}) {
          double lo = INFINITY, hi = 0.0;
          for (int k = 0; k <= 10; ++k) {
            const double x = std::pow(10.0, 3.0 + k / 10.0);
            const double c = d.pdf(sign * x) * std::pow(x, a + 1);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
          }
          spread = std::max(spread, lo > 0 ? hi / lo - 1 : INFINITY);
        }
      }
      const bool pass = std::abs(total - 1) <= 1e-4 && spread <= 0.05;
      if (!pass) note("alpha=%.1f beta=%.1f integral=%.8f plateau spread=%.4f", a, b, total, spread);
      ok = ok && pass;
    }
  }
  note("%d grid points checked", 15);
  return ok;
}

bool sampler_ks() {
  const std::int64_t n = 100000;
  const double critical = 1.358 / std::sqrt(static_cast<double>(n));
  int passed = 0;
  std::uint64_t seed = 1000;
  for (double a : {0.6, 1.0, 1.3, 1.7, 2.0}) {
    for (double b : {0.0, 0.9}) {
      const StableParams psi{a, b, 0.0, 1.0};
      const Eigen::VectorXd x = sample(psi, n, ++seed);
      const Eigen::VectorXd F = cdf(std::span<const double>(x.data(), x.size()), psi);
      const double D = ks_distance(x, F);
      note("alpha=%.1f beta=%.1f KS=%.5f (critical %.5f)", a, b, D, critical);
      passed += D < critical;
    }
  }
  note("%d of 10 below the critical value", passed);
  return passed >= 9;
}

bool score_consistency() {
  const ReturnSeries eps = simulated(kTau0, 2000, 41);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    ModelParams tau = kTau0;
    tau.theta.omega *= 1 + 0.5 * u(rng);
    tau.theta.a(0) *= 1 + 0.5 * u(rng);
    tau.theta.b(0) += 0.1 * u(rng);
    tau.alpha += 0.2 * u(rng);
    tau.beta = 0.3 * u(rng);
    tau.mu = 0.05 * u(rng);
    const Eigen::VectorXd g = score_theta(eps, tau);
    Eigen::VectorXd v = tau.theta.pack();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double h = 1e-5 * std::abs(v(i));
      ModelParams up = tau, dn = tau;
      Eigen::VectorXd vu = v, vd = v;
      vu(i) += h;
      vd(i) -= h;
      up.theta = GarchParams::unpack(vu, tau.order());
      dn.theta = GarchParams::unpack(vd, tau.order());
      const double fd = (neg_log_likelihood(eps, up) - neg_log_likelihood(eps, dn)) / (2 * h);
      worst = std::max(worst, std::abs(g(i) - fd) / std::abs(fd));
    }
  }
  const Eigen::VectorXd z = z_terms(simulated(kTau0, 100000, 43), kTau0);
  const double mean = z.mean();
  const double se = std::sqrt(sample_variance(z) / z.size());
  note("worst relative score error %.3g over 20 points; mean Z = %.4g, stderr %.4g", worst, mean, se);
  return worst <= 1e-4 && std::abs(mean) <= 3 * se;
}

bool parameter_recovery() {
  const int fits = 50;
  std::vector<double> err_b, err_alpha;
  int within = 0, components = 0;
  const Eigen::VectorXd truth = kTau0.pack();
  for (int r = 0; r < fits; ++r) {
    const FitResult f = fit_stable_mle(simulated(kTau0, 1000, 500 + r));
    const Eigen::VectorXd est = f.tau_hat.pack();
    err_b.push_back(std::abs(f.tau_hat.theta.b(0) - 0.7));
    err_alpha.push_back(std::abs(f.tau_hat.alpha - 1.6));
    for (Eigen::Index i = 0; i < est.size(); ++i) {
      ++components;
      within += std::abs(est(i) - truth(i)) <= 4 * f.std_errors(i);
    }
  }
  const double mb = median(Eigen::Map<Eigen::VectorXd>(err_b.data(), fits));
  const double ma = median(Eigen::Map<Eigen::VectorXd>(err_alpha.data(), fits));
  const double share = static_cast<double>(within) / components;
  note("median |b error| %.4f, median |alpha error| %.4f, %.1f%% of components within 4 SE", mb, ma, 100 * share);
  return mb < 0.1 && ma < 0.1 && share >= 0.9;
}

bool information_equality() {
  const ReturnSeries eps = simulated(kTau0, 100000, 61);
  const Eigen::MatrixXd J = compute_Jn(eps, kTau0);
  const Eigen::MatrixXd I = outer_product_information(eps, kTau0);
  const double rel = (J - I).norm() / J.norm();
  note("||J - OPG|| / ||J|| = %.4f", rel);
  return rel <= 0.05;
}

bool efficiency_trend() {
  const std::vector<std::string> tracked{"omega", "a1", "b1", "alpha"};
  int good_seeds = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    ExperimentConfig cfg;
    cfg.alpha = 1.6;
    cfg.K_list = {10, 1000, kInfiniteK};
    cfg.reps = 100;
    cfg.seed = seed;
    const ExperimentResult r = run_experiment(cfg);
    int monotone = 0;
    for (const std::string& name : tracked) {
      std::vector<double> q;
      for (const KResult& k : r.per_K)
        for (const ParameterError& p : k.params)
          if (p.name == name) q.push_back(p.Q);
      const bool up = q.size() == 3 && q[0] <= q[1] && q[1] <= q[2];
      note("seed %llu %-5s Q = %.3f %.3f %.3f%s", static_cast<unsigned long long>(seed), name.c_str(), q[0], q[1], q[2],
           up ? "" : "  (not monotone)");
      monotone += up;
    }
    good_seeds += monotone >= 3;
  }
  note("%d of 3 seeds with a nondecreasing Q for at least 3 of 4 parameters", good_seeds);
  return good_seeds >= 2;
}

bool frontier_nesting() {
  const std::vector<double> alphas{2.0, 1.6, 1.2, 0.8};
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(0.1 * i);
  FrontierOptions opts;
  std::vector<std::vector<FrontierPoint>> curves;
  for (double a : alphas) curves.push_back(stationarity_frontier(a, grid, opts));
  bool nested = true;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::string row;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      char cell[48];
      std::snprintf(cell, sizeof cell, " %.4f(%.4f)", curves[i][j].a_star, curves[i][j].stderr_);
      row += cell;
      if (i > 0) {
        if (!(curves[i - 1][j].a_star > curves[i][j].a_star)) nested = false;
      }
    }
    note("b=%.1f a*:%s", grid[j], row.c_str());
  }
  // The Gaussian curve meets a = 0 at b = 1. Near b = 1, E log(b + a eta^2) ~ (b - 1) + 2a with
  // Var eta = 2, so a* ~ (1 - b) / 2.
  const auto near_one = stationarity_frontier(2.0, {0.99, 0.999, 0.9999}, opts);
  bool intercept = true;
  for (const FrontierPoint& p : near_one) {
    note("alpha=2 b=%.4f a*=%.6f", p.b, p.a_star);
    intercept = intercept && p.a_star > 0 && p.a_star <= 1 - p.b;
  }
  return nested && intercept;
}

bool var_calibration() {
  bool ok = true;
  {
    const FitResult fit = fit_stable_mle(simulated(kTau0, 2000, 71));
    const ModelParams& th = fit.tau_hat;
    const Simulation out = simulate(th.theta, th.psi(), 102000, 500, 72);
    ReturnSeries h, o;
    h.values = out.eps.values.head(2000);
    o.values = out.eps.values.tail(100000);
    for (double p : {0.01, 0.05}) {
      const Backtest bt = backtest(fit, h, o, p);
      note("fitted stable model, p=%.2f: hit frequency %.5f, band [%.5f, %.5f]", p, bt.report.hit_frequency,
           bt.report.band_lo, bt.report.band_hi);
      ok = ok && bt.report.within_band;
    }
  }
  int stable_wins = 0;
  for (int trial = 0; trial < 20; ++trial) {
    // Same out-of-sample length as above, so the comparison is not swamped by hit-count noise.
    const ReturnSeries all = simulated(kTau0, 102000, 800 + trial);
    ReturnSeries h, o;
    h.values = all.values.head(2000);
    o.values = all.values.tail(100000);
    const double ds = std::abs(backtest(fit_stable_mle(h), h, o, 0.01).report.hit_frequency - 0.01);
    const double dg = std::abs(backtest(fit_gaussian_qmle(h), h, o, 0.01).report.hit_frequency - 0.01);
    stable_wins += ds < dg;
  }
  note("stable VaR closer to p = 0.01 than Gaussian VaR in %d of 20 trials", stable_wins);
  return ok && stable_wins >= 14;
}

bool presample_negligible() {
  int agree = 0;
  for (int d = 0; d < 10; ++d) {
    const ReturnSeries eps = simulated(kTau0, 1000, 900 + d);
    FitOptions o1, o2;
    o2.presample = PresampleRule::Unconditional;
    const FitResult f1 = fit_stable_mle(eps, {}, o1);
    const FitResult f2 = fit_stable_mle(eps, {}, o2);
    const Eigen::VectorXd diff = (f1.tau_hat.pack() - f2.tau_hat.pack()).cwiseAbs();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < diff.size(); ++i) worst = std::max(worst, diff(i) / f1.std_errors(i));
    const bool same = worst <= 1.0;
    note("dataset %d: largest difference %.3f standard errors", d, worst);
    agree += same;
  }
  note("%d of 10 datasets agree within one standard error", agree);
  return agree == 10;
}

const std::vector<std::function<bool()>> kCriteria{
    closed_form_oracles, normalization_and_tails, sampler_ks,        score_consistency, parameter_recovery,
    information_equality, efficiency_trend,      frontier_nesting, var_calibration,   presample_negligible,
};

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  std::vector<int> run;
  if (which == "all") {
    for (int i = 1; i <= 10; ++i) run.push_back(i);
  } else {
    const int k = std::atoi(which.c_str());
    if (k < 1 || k > 10) {
      std::cerr << "usage: acceptance <1..10 | all>\n";
      return 2;
    }
    run.push_back(k);
  }
  int failures = 0;
  for (int k : run) {
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    try {
      pass = kCriteria[k - 1]();
    } catch (const std::exception& e) {
      note("exception: %s", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s (%.1f s)\n", k, pass ? "PASS" : "FAIL", secs);
    std::fflush(stdout);
    failures += !pass;
  }
  return failures == 0 ? 0 : 1;
}
