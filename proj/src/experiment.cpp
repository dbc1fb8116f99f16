#include "stablegarch/experiment.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace stablegarch {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sections read by the command-line front end rather than the experiment.
const std::set<std::string> kForeignSections{"fit", "simulate", "frontier", "var"};

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key) && !(where.empty() && kForeignSections.count(key))) {
      throw std::invalid_argument("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

Eigen::VectorXd to_vec(const json& j) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json from_vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

// Per-replication seed derived from the master seed by a counter.
std::uint64_t rep_seed(std::uint64_t seed, std::size_t k_index, int rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k_index), static_cast<std::uint32_t>(rep), 0x51e5u};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

bool ExperimentConfig::valid() const {
  if (!theta0.valid() || !(alpha > 0 && alpha < 2 && alpha != 1.0)) return false;
  if (K_list.empty() || reps < 2 || n < 100 || burn_in < 0 || starts < 1) return false;
  for (auto K : K_list) {
    if (!(K >= 1 || K == kInfiniteK)) return false;
  }
  return bounds.valid() && accuracy.valid() && calibration_samples >= 10 && calibration_reps >= 10 &&
         max_failure_share >= 0 && max_failure_share <= 1;
}

void ExperimentConfig::validate() const {
  if (valid()) return;
  theta0.validate();
  bounds.validate();
  accuracy.validate();
  throw std::invalid_argument(
      "ExperimentConfig: need alpha in (0,2) without 1, non-empty K list of counts >= 1 or inf, reps >= 2, "
      "n >= 100, starts >= 1, calibration samples >= 10 and reps >= 10");
}

void ExperimentConfig::apply_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  reject_unknown(j,
                 {"theta0", "alpha", "K_list", "n", "reps", "seed", "burn_in", "bounds", "accuracy", "starts",
                  "presample", "calibration", "max_failure_share"},
                 "");
  if (j.contains("theta0")) {
    const json& t = j.at("theta0");
    reject_unknown(t, {"omega", "a", "b"}, "theta0");
    theta0 = GarchParams(t.value("omega", theta0.omega), t.contains("a") ? to_vec(t.at("a")) : theta0.a,
                         t.contains("b") ? to_vec(t.at("b")) : theta0.b);
  }
  read(j, "alpha", alpha);
  if (j.contains("K_list")) {
    K_list.clear();
    for (const auto& k : j.at("K_list")) K_list.push_back(k.is_string() ? parse_k(k.get<std::string>()) : k.get<std::int64_t>());
  }
  read(j, "n", n);
  read(j, "reps", reps);
  read(j, "seed", seed);
  read(j, "burn_in", burn_in);
  read(j, "starts", starts);
  read(j, "max_failure_share", max_failure_share);
  if (j.contains("presample")) presample = presample_rule_from_string(j.at("presample").get<std::string>());
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    reject_unknown(b,
                   {"omega_lo", "omega_hi", "a_lo", "a_hi", "b_lo", "b_hi", "b_sum_hi", "alpha_lo", "alpha_hi",
                    "beta_lo", "beta_hi", "mu_lo", "mu_hi"},
                   "bounds");
    read(b, "omega_lo", bounds.omega_lo);
    read(b, "omega_hi", bounds.omega_hi);
    read(b, "a_lo", bounds.a_lo);
    read(b, "a_hi", bounds.a_hi);
    read(b, "b_lo", bounds.b_lo);
    read(b, "b_hi", bounds.b_hi);
    read(b, "b_sum_hi", bounds.b_sum_hi);
    read(b, "alpha_lo", bounds.alpha_lo);
    read(b, "alpha_hi", bounds.alpha_hi);
    read(b, "beta_lo", bounds.beta_lo);
    read(b, "beta_hi", bounds.beta_hi);
    read(b, "mu_lo", bounds.mu_lo);
    read(b, "mu_hi", bounds.mu_hi);
  }
  if (j.contains("accuracy")) {
    const json& a = j.at("accuracy");
    reject_unknown(a, {"abs_tol", "max_series_terms", "fft_grid_size", "fft_domain_halfwidth"}, "accuracy");
    read(a, "abs_tol", accuracy.abs_tol);
    read(a, "max_series_terms", accuracy.max_series_terms);
    read(a, "fft_grid_size", accuracy.fft_grid_size);
    read(a, "fft_domain_halfwidth", accuracy.fft_domain_halfwidth);
  }
  if (j.contains("calibration")) {
    const json& c = j.at("calibration");
    reject_unknown(c, {"samples", "reps", "cache"}, "calibration");
    read(c, "samples", calibration_samples);
    read(c, "reps", calibration_reps);
    read(c, "cache", calibration_cache);
  }
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["theta0"] = {{"omega", theta0.omega}, {"a", from_vec(theta0.a)}, {"b", from_vec(theta0.b)}};
  j["alpha"] = alpha;
  json ks = json::array();
  for (auto K : K_list) {
    if (K == kInfiniteK) ks.push_back("inf");
    else ks.push_back(K);
  }
  j["K_list"] = ks;
  j["n"] = n;
  j["reps"] = reps;
  j["seed"] = seed;
  j["burn_in"] = burn_in;
  j["starts"] = starts;
  j["presample"] = to_string(presample);
  j["max_failure_share"] = max_failure_share;
  j["bounds"] = {{"omega_lo", bounds.omega_lo}, {"omega_hi", bounds.omega_hi}, {"a_lo", bounds.a_lo},
                 {"a_hi", bounds.a_hi},         {"b_lo", bounds.b_lo},         {"b_hi", bounds.b_hi},
                 {"b_sum_hi", bounds.b_sum_hi}, {"alpha_lo", bounds.alpha_lo}, {"alpha_hi", bounds.alpha_hi},
                 {"beta_lo", bounds.beta_lo},   {"beta_hi", bounds.beta_hi},   {"mu_lo", bounds.mu_lo},
                 {"mu_hi", bounds.mu_hi}};
  j["accuracy"] = {{"abs_tol", accuracy.abs_tol},
                   {"max_series_terms", accuracy.max_series_terms},
                   {"fft_grid_size", accuracy.fft_grid_size},
                   {"fft_domain_halfwidth", accuracy.fft_domain_halfwidth}};
  j["calibration"] = {{"samples", calibration_samples}, {"reps", calibration_reps}, {"cache", calibration_cache}};
  return j.dump(2);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentLog& log) {
  cfg.validate();
  auto note = [&](const std::string& s) {
    if (log) log(s);
  };
  ModelParams truth;
  truth.theta = cfg.theta0;
  truth.alpha = cfg.alpha;
  const Eigen::VectorXd tau0 = truth.pack();
  const auto names = ModelParams::names(cfg.theta0.order());
  const double a_limit = gclt_constants(student_gclt_spec(cfg.alpha)).a;

  ExperimentResult res;
  res.config = cfg;
  for (std::size_t ki = 0; ki < cfg.K_list.size(); ++ki) {
    const std::int64_t K = cfg.K_list[ki];
    KResult kr;
    kr.K = K;
    if (K == kInfiniteK) {
      kr.jK = a_limit;  // the limit law itself has gamma = 1 after this division
    } else {
      const JkCalibration c =
          cfg.calibration_cache.empty()
              ? calibrate_jK(cfg.alpha, K, cfg.calibration_samples, cfg.calibration_reps, cfg.seed, cfg.accuracy)
              : calibrate_jK_cached(cfg.calibration_cache, cfg.alpha, K, cfg.calibration_samples,
                                    cfg.calibration_reps, cfg.seed, cfg.accuracy);
      kr.jK = c.jK;
      kr.jK_stderr = c.stderr_;
    }
    note("K=" + k_label(K) + " jK=" + std::to_string(kr.jK));
    const InnovationSource source = summed_innovation_source({cfg.alpha, K, kr.jK});
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(tau0.size());
    for (int r = 0; r < cfg.reps; ++r) {
      const std::uint64_t s = rep_seed(cfg.seed, ki, r);
      try {
        const Simulation sim = simulate(cfg.theta0, source, cfg.n, cfg.burn_in, s);
        FitOptions fo;
        fo.starts = cfg.starts;
        fo.seed = s;
        fo.order = cfg.theta0.order();
        fo.presample = cfg.presample;
        fo.compute_covariance = false;
        const FitResult fit = fit_stable_mle(sim.eps, cfg.bounds, fo, cfg.accuracy);
        if (!fit.converged) {
          ++kr.failures;
          note("K=" + k_label(K) + " rep " + std::to_string(r) + ": not converged (" + fit.message + ")");
          continue;
        }
        sq += (fit.tau_hat.pack() - tau0).array().square().matrix();
        ++kr.fits;
      } catch (const std::exception& e) {
        ++kr.failures;
        note("K=" + k_label(K) + " rep " + std::to_string(r) + ": " + e.what());
      }
    }
    if (kr.failures > cfg.max_failure_share * cfg.reps || kr.fits == 0) {
      throw ExperimentAborted("experiment aborted: " + std::to_string(kr.failures) + " of " +
                              std::to_string(cfg.reps) + " fits failed at K=" + k_label(K));
    }
    for (Eigen::Index i = 0; i < tau0.size(); ++i) {
      ParameterError pe;
      pe.name = names[static_cast<std::size_t>(i)];
      pe.mse = sq(i) / kr.fits;
      pe.rmse = std::sqrt(pe.mse);
      kr.params.push_back(pe);
    }
    res.per_K.push_back(std::move(kr));
  }
  const KResult* ref = nullptr;
  for (const auto& kr : res.per_K) {
    if (kr.K == kInfiniteK) ref = &kr;
  }
  for (auto& kr : res.per_K) {
    for (std::size_t i = 0; i < kr.params.size(); ++i) {
      ParameterError& pe = kr.params[i];
      pe.Q = ref ? ref->params[i].rmse / pe.rmse : kNaN;
      pe.Q_mse = ref ? ref->params[i].mse / pe.mse : kNaN;
    }
  }
  return res;
}

void ExperimentResult::write_csv(std::ostream& out) const {
  const auto old = out.precision(10);
  out << "parameter,K,jK,rmse,mse,Q,Q_mse,fits,failures\n";
  for (const auto& kr : per_K) {
    for (const auto& pe : kr.params) {
      out << pe.name << ',' << k_label(kr.K) << ',' << kr.jK << ',' << pe.rmse << ',' << pe.mse << ',' << pe.Q
          << ',' << pe.Q_mse << ',' << kr.fits << ',' << kr.failures << '\n';
    }
  }
  out.precision(old);
}

}  // namespace stablegarch
