#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "stablegarch/domain_attraction.hpp"
#include "stablegarch/estimate.hpp"
#include "stablegarch/experiment.hpp"
#include "stablegarch/garch.hpp"
#include "stablegarch/risk.hpp"
#include "stablegarch/series.hpp"

using namespace stablegarch;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Writes to `path`, or to stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw UsageError(flag + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::vector<std::int64_t> parse_k_list(const std::string& text) {
  std::vector<std::int64_t> out;
  try {
    for (const auto& item : split_list(text)) out.push_back(parse_k(item));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--k-list: ") + e.what());
  }
  if (out.empty()) throw UsageError("--k-list: empty list");
  return out;
}

CsvReadOptions csv_options(const std::string& column, const std::string& date_column) {
  CsvReadOptions o;
  auto select = [](const std::string& s, CsvColumn& c) {
    if (s.empty()) return;
    if (s.find_first_not_of("0123456789") == std::string::npos) c.index = std::stoi(s);
    else c.name = s;
  };
  select(column, o.value);
  select(date_column, o.date);
  return o;
}

// Settings shared by all commands: one JSON document plus flag overrides.
struct Settings {
  std::string config_path;
  std::uint64_t seed = 1;
  bool seed_given = false;
  ExperimentConfig cfg;
  json sections = json::object();

  void load() {
    if (config_path.empty()) return;
    const std::string text = read_file(config_path);
    try {
      cfg.apply_json(text);
      sections = json::parse(text);
    } catch (const json::exception& e) {
      throw UsageError("config " + config_path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError("config " + config_path + ": " + e.what());
    }
    if (sections.contains("seed")) seed = sections["seed"].get<std::uint64_t>();
  }
  void finish() {
    if (seed_given) cfg.seed = seed;
    else seed = cfg.seed;
  }
  json section(const std::string& name) const {
    return sections.contains(name) ? sections.at(name) : json::object();
  }
};

int cmd_fit(const Settings& s, const std::string& input, const std::string& column, const std::string& date_column,
            const std::string& method, const std::string& output, int starts) {
  const ReturnSeries eps = read_returns_csv(input, csv_options(column, date_column));
  FitOptions fo;
  fo.seed = s.seed;
  fo.order = s.cfg.theta0.order();
  fo.presample = s.cfg.presample;
  fo.starts = starts > 0 ? starts : s.section("fit").value("starts", FitOptions{}.starts);
  FitResult fit;
  if (method == "stable") fit = fit_stable_mle(eps, s.cfg.bounds, fo, s.cfg.accuracy);
  else fit = fit_gaussian_qmle(eps, s.cfg.bounds, fo);
  emit(output, fit.to_json() + "\n");
  if (!fit.converged) {
    std::cerr << "fit did not converge: " << fit.message << " (gradient norm " << fit.grad_norm << ")\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_simulate(const Settings& s, std::int64_t n, const std::string& innovations, const std::string& k_text,
                 double jK, double beta, const std::string& output) {
  if (n < 1) throw UsageError("simulate: --n must be >= 1");
  const json sec = s.section("simulate");
  const std::int64_t burn_in = sec.value("burn_in", s.cfg.burn_in);
  Simulation sim;
  if (innovations == "stable") {
    sim = simulate(s.cfg.theta0, StableParams{s.cfg.alpha, beta, 0.0, 1.0}, n, burn_in, s.seed);
  } else {
    SummedInnovationSpec spec{s.cfg.alpha, parse_k_list(k_text).front(), 1.0};
    if (jK > 0) {
      spec.jK = jK;
    } else if (spec.infinite()) {
      spec.jK = gclt_constants(student_gclt_spec(spec.alpha)).a;
    } else {
      spec.jK = s.cfg.calibration_cache.empty()
                    ? calibrate_jK(spec.alpha, spec.K, s.cfg.calibration_samples, s.cfg.calibration_reps, s.seed,
                                   s.cfg.accuracy)
                          .jK
                    : calibrate_jK_cached(s.cfg.calibration_cache, spec.alpha, spec.K, s.cfg.calibration_samples,
                                          s.cfg.calibration_reps, s.seed, s.cfg.accuracy)
                          .jK;
    }
    sim = simulate(s.cfg.theta0, summed_innovation_source(spec), n, burn_in, s.seed);
  }
  Eigen::VectorXd sigma = sim.sigma2.sigma2.cwiseSqrt();
  if (output.empty() || output == "-") throw UsageError("simulate: --output file is required");
  write_returns_csv(output, sim.eps, {{"sigma", sigma}, {"eta", sim.eta}});
  return kExitOk;
}

int cmd_experiment(const Settings& s, const std::string& output) {
  const ExperimentResult r = run_experiment(s.cfg, [](const std::string& line) { std::cerr << line << '\n'; });
  std::ostringstream out;
  r.write_csv(out);
  emit(output, out.str());
  return kExitOk;
}

int cmd_frontier(const Settings& s, const std::string& alpha_text, const std::string& b_text,
                 const std::string& output) {
  const json sec = s.section("frontier");
  FrontierOptions fo;
  fo.seed = s.seed;
  fo.horizon = sec.value("horizon", fo.horizon);
  fo.replications = sec.value("replications", fo.replications);
  const std::vector<double> alphas = parse_doubles(alpha_text, "--alpha");
  const std::vector<double> grid = parse_doubles(b_text, "--b-grid");
  std::ostringstream out;
  out.precision(10);
  out << "alpha,b,a_star,stderr\n";
  for (double alpha : alphas) {
    for (const FrontierPoint& pt : stationarity_frontier(alpha, grid, fo)) {
      out << pt.alpha << ',' << pt.b << ',' << pt.a_star << ',' << pt.stderr_ << '\n';
    }
  }
  emit(output, out.str());
  return kExitOk;
}

int cmd_var(const Settings& s, const std::vector<std::string>& fit_paths, const std::string& input,
            const std::string& history_path, const std::string& column, const std::string& date_column,
            const std::string& p_text, bool lagged, const std::string& output, const std::string& var_csv) {
  std::vector<FitResult> fits;
  for (const auto& path : fit_paths) {
    try {
      fits.push_back(FitResult::from_json(read_file(path)));
    } catch (const json::exception& e) {
      throw UsageError("fit file " + path + ": " + e.what());
    }
  }
  const CsvReadOptions co = csv_options(column, date_column);
  const ReturnSeries outsample = read_returns_csv(input, co);
  ReturnSeries history;
  if (!history_path.empty()) history = read_returns_csv(history_path, co);
  const std::vector<double> ps = parse_doubles(p_text, "--p");
  VarOptions vo;
  vo.index = lagged ? VolatilityIndex::Lagged : VolatilityIndex::Current;
  json reports = json::array();
  std::ofstream csv;
  if (!var_csv.empty()) {
    csv.open(var_csv);
    if (!csv) throw std::runtime_error("cannot write " + var_csv);
  }
  for (const FitResult& fit : fits) {
    for (double p : ps) {
      const Backtest bt = backtest(fit, history, outsample, p, vo, s.cfg.accuracy);
      reports.push_back(json::parse(bt.report.to_json()));
      if (csv.is_open()) {
        csv << "# method=" << to_string(fit.method) << " p=" << p << '\n';
        write_backtest_csv(csv, outsample, bt);
      }
    }
  }
  emit(output, json{{"reports", reports}}.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable-innovation GARCH estimation, simulation and VaR backtesting"};
  app.require_subcommand(1);
  Settings s;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", s.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { s.seed = v, s.seed_given = true; }, "Master seed");
  };

  std::string input, output, column, date_column, method = "stable";
  int starts = 0;
  auto* fit = app.add_subcommand("fit", "Fit a GARCH(p,q) model to a return series");
  common(fit);
  fit->add_option("--input", input, "CSV of returns")->required();
  fit->add_option("--output", output, "FitResult JSON (stdout when omitted)");
  fit->add_option("--column", column, "Return column name or index (default: last)");
  fit->add_option("--date-column", date_column, "Date column name or index");
  fit->add_option("--method", method, "stable or gaussian")->check(CLI::IsMember({"stable", "gaussian"}));
  fit->add_option("--starts", starts, "Number of optimizer starts");

  std::int64_t n = 0;
  std::string innovations = "stable", k_text = "inf";
  double jK = 0.0, beta = 0.0, alpha_flag = 0.0;
  auto* sim = app.add_subcommand("simulate", "Simulate returns from a GARCH(p,q) model");
  common(sim);
  sim->add_option("--n", n, "Number of observations")->required();
  sim->add_option("--output", output, "CSV to write")->required();
  sim->add_option("--alpha", alpha_flag, "Stable index or Student degrees of freedom");
  sim->add_option("--beta", beta, "Stable skewness (stable innovations)");
  sim->add_option("--innovations", innovations, "stable or student-sum")
      ->check(CLI::IsMember({"stable", "student-sum"}));
  sim->add_option("--k-list", k_text, "Summand count K (first entry used; inf for the limit)");
  sim->add_option("--jk", jK, "Scale divisor; calibrated when omitted");

  std::string k_list_text;
  int reps = 0;
  std::int64_t exp_n = 0;
  auto* exp = app.add_subcommand("experiment", "Monte-Carlo RMSE ratios across K");
  common(exp);
  exp->add_option("--output", output, "Table CSV (stdout when omitted)");
  exp->add_option("--alpha", alpha_flag, "Student degrees of freedom / stable index");
  exp->add_option("--k-list", k_list_text, "Comma-separated K values, inf allowed");
  exp->add_option("--reps", reps, "Replications per K");
  exp->add_option("--n", exp_n, "Sample size");

  std::string alpha_list = "2,1.6,1.2,0.8", b_grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  auto* fr = app.add_subcommand("frontier", "Strict-stationarity frontier a*(b) per alpha");
  common(fr);
  fr->add_option("--alpha", alpha_list, "Comma-separated stable indices");
  fr->add_option("--b-grid", b_grid, "Comma-separated b values");
  fr->add_option("--output", output, "CSV (stdout when omitted)");

  std::vector<std::string> fit_paths;
  std::string history_path, var_csv, p_text = "0.01,0.05";
  bool lagged = false;
  auto* var = app.add_subcommand("var", "Backtest VaR forecasts from fitted models");
  common(var);
  var->add_option("--fit", fit_paths, "FitResult JSON (repeatable)")->required();
  var->add_option("--input", input, "Out-of-sample CSV")->required();
  var->add_option("--history", history_path, "Fitting-window CSV used to start the recursion");
  var->add_option("--column", column, "Return column name or index");
  var->add_option("--date-column", date_column, "Date column name or index");
  var->add_option("--p", p_text, "Comma-separated VaR levels");
  var->add_flag("--lagged", lagged, "Use sigma~_(t-1) instead of sigma~_t");
  var->add_option("--output", output, "Report JSON (stdout when omitted)");
  var->add_option("--var-csv", var_csv, "Per-day VaR CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    s.load();
    if (alpha_flag != 0.0) s.cfg.alpha = alpha_flag;
    if (!k_list_text.empty()) s.cfg.K_list = parse_k_list(k_list_text);
    if (reps > 0) s.cfg.reps = reps;
    if (exp_n > 0) s.cfg.n = exp_n;
    s.finish();
    if (fit->parsed()) return cmd_fit(s, input, column, date_column, method, output, starts);
    if (sim->parsed()) return cmd_simulate(s, n, innovations, k_text, jK, beta, output);
    if (exp->parsed()) return cmd_experiment(s, output);
    if (fr->parsed()) return cmd_frontier(s, alpha_list, b_grid, output);
    if (var->parsed()) {
      return cmd_var(s, fit_paths, input, history_path, column, date_column, p_text, lagged, output, var_csv);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CsvError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitError;
  } catch (const Explosion& e) {
    std::cerr << "simulation exploded: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
