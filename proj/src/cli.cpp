#include "lrmr/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "lrmr/datagen.hpp"
#include "lrmr/eval.hpp"
#include "lrmr/io.hpp"
#include "lrmr/solver.hpp"
#include "lrmr/theory.hpp"

namespace lrmr {

namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ArgumentError("invalid number '" + s + "' in " + what);
}

Index parse_index(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return static_cast<Index>(v);
  } catch (const std::exception&) {
  }
  throw ArgumentError("invalid integer '" + s + "' in " + what);
}

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(text, ',')) out.push_back(parse_double(item, what));
  return out;
}

/// "m=64,q=64,r=5,s=0.05[,p=5]"
SyntheticSpec parse_synthetic(const std::string& text) {
  SyntheticSpec spec;
  for (const auto& item : split_list(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ArgumentError("--synthetic expects key=value pairs, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "m") {
      spec.m = parse_index(value, "--synthetic");
    } else if (key == "q") {
      spec.q = parse_index(value, "--synthetic");
    } else if (key == "r") {
      spec.r = parse_index(value, "--synthetic");
    } else if (key == "s") {
      spec.s = parse_double(value, "--synthetic");
    } else if (key == "p") {
      spec.gamma_star = Vector::Ones(parse_index(value, "--synthetic"));
    } else {
      throw ArgumentError("unknown --synthetic key '" + key + "' (m, q, r, s, p)");
    }
  }
  spec.validate();
  return spec;
}

LossModel make_model(const std::string& name, double alpha) {
  const LossKind kind = parse_loss_kind(name);
  if (kind == LossKind::Robust) return LossModel::robust(alpha);
  return {kind, alpha};
}

/// Flags that describe a simulated truth, noise and loss.
struct SignalOptions {
  std::string shape = "square";
  Index g = 64;
  std::string synthetic;
  std::string gamma_star;
  std::string noise = "gaussian:1";
  std::string model = "ordinary";
  double alpha = 1.345;

  void add(CLI::App* app) {
    app->add_option("--shape", shape, "square, t, cross, triangle, circle, butterfly")->capture_default_str();
    app->add_option("--g", g, "shape grid size")->capture_default_str();
    app->add_option("--synthetic", synthetic, "low-rank sparse signal: m=..,q=..,r=..,s=..[,p=..]");
    app->add_option("--gamma-star", gamma_star, "comma-separated gamma* (default all ones, length 5)");
    app->add_option("--noise", noise, "gaussian:S, contaminated:P[:S[:S_OUT]], cauchy, none")->capture_default_str();
    app->add_option("--model", model, "ordinary, robust, logistic")->capture_default_str();
    app->add_option("--alpha", alpha, "Huber threshold")->capture_default_str();
  }

  SimulationSpec build() const {
    SimulationSpec sim;
    if (!synthetic.empty()) {
      sim.signal = parse_synthetic(synthetic);
    } else {
      sim.signal = ShapeSpec{parse_shape_kind(shape), g};
    }
    if (!gamma_star.empty()) {
      const auto values = parse_real_list(gamma_star, "--gamma-star");
      sim.gamma_star = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    }
    sim.noise = parse_noise(noise);
    sim.model = make_model(model, alpha);
    return sim;
  }

  std::string signal_name() const { return synthetic.empty() ? shape : "synthetic:" + synthetic; }
};

void add_solver_options(CLI::App* app, SolverConfig& cfg) {
  app->add_option("--rank", cfg.rank, "rank constraint r")->capture_default_str();
  app->add_option("--lambda", cfg.lambda, "l1 penalty weight")->capture_default_str();
  app->add_option("--beta", cfg.beta, "line-search shrink factor")->capture_default_str();
  app->add_option("--eps", cfg.eps, "stop when |F_k - F_(k-1)| <= eps")->capture_default_str();
  app->add_option("--max-iter", cfg.max_iter, "iteration cap")->capture_default_str();
  app->add_option("--alpha-init", cfg.alpha_init, "initial trial step")->capture_default_str();
  app->add_option("--max-backtracks", cfg.max_backtracks, "line-search trials before a stall")->capture_default_str();
}

json summary_json(const Summary& s) { return {{"mean", s.mean}, {"std", s.std}, {"values", s.values}}; }

void emit(const json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::vector<double> lambda_grid_or_default(const std::string& text, Index n) {
  if (text.empty() || text == "default") return default_lambda_grid(n);
  return parse_real_list(text, "--lambda-grid");
}

/// Simulated data as produced by `generate` with the same flags and seed.
struct Simulated {
  Coefficients truth;
  Dataset data;
};

Simulated simulate(const SimulationSpec& sim, Index n, std::uint64_t seed) {
  Simulated s;
  s.truth = make_truth(sim, stream_seed(seed, 0));
  s.data = sample_dataset(s.truth.C, s.truth.gamma, n, sim.noise, sim.model, stream_seed(seed, 1));
  return s;
}

// ---------------------------------------------------------------- commands

struct GenerateCmd {
  SignalOptions signal;
  Index n = 0;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string truth_path;

  void add(CLI::App* app) {
    signal.add(app);
    app->add_option("--n", n, "sample size")->required();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--out", out_path, "dataset file")->required();
    app->add_option("--truth", truth_path, "truth sidecar (default: <out>.truth)");
  }

  int run(std::ostream& out) const {
    const SimulationSpec sim = signal.build();
    const Simulated s = simulate(sim, n, seed);
    const std::string truth_file = truth_path.empty() ? out_path + ".truth" : truth_path;
    save_dataset(out_path, s.data);
    save_coefficients(truth_file, s.truth);
    out << "wrote " << s.data.n() << " samples (" << s.data.m() << "x" << s.data.q() << ", p=" << s.data.p()
        << ", " << to_string(sim.model.kind) << ", rank " << numerical_rank(s.truth.C) << ") to " << out_path
        << ", truth to " << truth_file << "\n";
    return 0;
  }
};

struct FitCmd {
  std::string data_path;
  std::string truth_path;
  std::string test_path;
  std::string model;
  double alpha = 1.345;
  SolverConfig cfg;
  bool trace = false;
  std::string init = "zero";
  bool tune = false;
  Index folds = 5;
  std::string lambda_grid;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string coef_out;

  void add(CLI::App* app) {
    app->add_option("--data", data_path, "dataset file")->required();
    app->add_option("--truth", truth_path, "truth sidecar for rmse_C / rmse_gamma");
    app->add_option("--test", test_path, "test dataset for prediction_error (default: training data)");
    app->add_option("--model", model, "override the file's loss: ordinary, robust, logistic");
    app->add_option("--alpha", alpha, "Huber threshold")->capture_default_str();
    add_solver_options(app, cfg);
    app->add_flag("--trace", trace, "emit the full objective trace");
    app->add_option("--init", init, "zero or ls (projected unconstrained solution)")->capture_default_str();
    app->add_flag("--tune", tune, "choose lambda by k-fold cross-validation");
    app->add_option("--folds", folds, "cross-validation folds for --tune")->capture_default_str();
    app->add_option("--lambda-grid", lambda_grid, "comma-separated lambda values for --tune");
    app->add_option("--seed", seed, "seed for fold assignment")->capture_default_str();
    app->add_option("--out", out_path, "result JSON (default: standard output)");
    app->add_option("--coef-out", coef_out, "write the estimate in coefficient-file layout");
  }

  int run(std::ostream& out) const {
    Dataset data = load_dataset(data_path);
    LossModel lm = data.model();
    if (!model.empty()) lm.kind = parse_loss_kind(model);
    if (lm.kind == LossKind::Robust) lm = LossModel::robust(alpha);
    if (!(lm == data.model())) data = data.with_model(lm);

    std::optional<Coefficients> truth;
    if (!truth_path.empty()) truth = load_coefficients(truth_path);
    std::optional<Dataset> test;
    if (!test_path.empty()) test = load_dataset(test_path).with_model(lm);

    SolverConfig c = cfg;
    c.validate(data.m(), data.q());
    if (tune) {
      CvPlan plan;
      plan.inner_folds = folds;
      plan.lambda_grid = lambda_grid_or_default(lambda_grid, data.n());
      plan.seed = seed;
      c.lambda = tune_lambda(data, c, plan).lambda_best;
    }
    std::optional<Coefficients> start;
    if (init == "ls") {
      start = unconstrained_initialization(data, c.rank);
    } else if (init != "zero") {
      throw ArgumentError("--init must be 'zero' or 'ls'");
    }
    const FitResult r = fit(data, c, start);

    json j;
    if (truth) {
      const CoefficientRmse e = coefficient_rmse(r.coefficients, *truth);
      j["rmse_C"] = e.C;
      j["rmse_gamma"] = e.gamma;
    } else {
      j["rmse_C"] = nullptr;
      j["rmse_gamma"] = nullptr;
    }
    j["prediction_error"] = prediction_error(lm, r.coefficients, test ? *test : data);
    std::vector<double> tr = r.objective_trace;
    if (!trace && tr.size() > 2) tr = {tr.front(), tr.back()};
    j["objective_trace"] = tr;
    j["iterations"] = r.iterations;
    j["termination"] = std::string(to_string(r.termination));
    j["lambda"] = c.lambda;
    j["rank"] = c.rank;
    j["seed"] = seed;

    if (!coef_out.empty()) save_coefficients(coef_out, r.coefficients);
    emit(j, out_path, out);
    return 0;
  }
};

struct ExperimentCmd {
  SignalOptions signal;
  Index n = 500;
  Index n_validation = 0;
  Index n_test = 0;
  int reps = 10;
  SolverConfig cfg;
  bool fixed_lambda = false;
  std::string lambda_grid;
  std::string init = "zero";
  std::uint64_t seed = 0;
  std::string out_path;
  CLI::Option* lambda_opt = nullptr;

  void add(CLI::App* app) {
    signal.add(app);
    app->add_option("--n", n, "training sample size")->capture_default_str();
    app->add_option("--n-validation", n_validation, "validation size for lambda (default: n)");
    app->add_option("--n-test", n_test, "test size (default: n)");
    app->add_option("--reps", reps, "replications")->capture_default_str();
    add_solver_options(app, cfg);
    lambda_opt = app->get_option("--lambda");
    lambda_opt->description("fixed lambda (skips tuning)");
    app->add_option("--lambda-grid", lambda_grid, "comma-separated lambda grid (default: 20 log-spaced values)");
    app->add_option("--init", init, "zero or ls")->capture_default_str();
    app->add_option("--seed", seed, "base seed")->capture_default_str();
    app->add_option("--out", out_path, "result JSON (default: standard output)");
  }

  int run(std::ostream& out, std::ostream& err) const {
    ExperimentPlan plan;
    plan.sim = signal.build();
    plan.n = n;
    plan.n_validation = n_validation;
    plan.n_test = n_test;
    plan.reps = reps;
    plan.base = cfg;
    plan.seed = seed;
    if (init != "zero" && init != "ls") throw ArgumentError("--init must be 'zero' or 'ls'");
    plan.ls_init = init == "ls";
    if (lambda_opt->count() == 0) plan.lambda_grid = lambda_grid_or_default(lambda_grid, n);

    const Matrix c0 = make_signal(plan.sim.signal, 0);
    cfg.validate(c0.rows(), c0.cols());

    const ExperimentResult r = simulation_experiment(plan);
    for (const auto& msg : r.failures) err << "warning: " << msg << "\n";

    json j;
    j["signal"] = signal.signal_name();
    j["model"] = std::string(to_string(plan.sim.model.kind));
    j["noise"] = to_string(plan.sim.noise);
    j["n"] = n;
    j["reps"] = reps;
    j["completed"] = r.metrics.rmse_C.values.size();
    j["failures"] = r.failures.size();
    j["rmse_C"] = summary_json(r.metrics.rmse_C);
    j["rmse_gamma"] = summary_json(r.metrics.rmse_gamma);
    j["prediction_error"] = summary_json(r.metrics.prediction_error);
    j["lambda"] = r.lambdas;
    j["iterations"] = r.iterations;
    j["rank"] = cfg.rank;
    j["seed"] = seed;
    emit(j, out_path, out);

    if (5 * r.failures.size() > static_cast<std::size_t>(reps)) {
      err << "error: " << r.failures.size() << " of " << reps << " replications failed\n";
      return 1;
    }
    return 0;
  }
};

struct CvCmd {
  std::string data_path;
  SolverConfig cfg;
  CvPlan plan;
  std::string lambda_grid;
  std::string out_path;

  void add(CLI::App* app) {
    app->add_option("--data", data_path, "dataset file")->required();
    add_solver_options(app, cfg);
    app->add_option("--folds", plan.folds, "outer folds")->capture_default_str();
    app->add_flag("--loo", plan.leave_one_out, "leave-one-out outer loop");
    app->add_option("--inner-folds", plan.inner_folds, "folds used to tune lambda")->capture_default_str();
    app->add_option("--repeats", plan.repeats, "independent outer partitions")->capture_default_str();
    app->add_option("--lambda-grid", lambda_grid, "comma-separated lambda grid");
    app->add_option("--seed", plan.seed, "seed for fold assignment")->capture_default_str();
    app->add_option("--out", out_path, "result JSON (default: standard output)");
  }

  int run(std::ostream& out) const {
    const Dataset data = load_dataset(data_path);
    cfg.validate(data.m(), data.q());
    CvPlan p = plan;
    p.lambda_grid = lambda_grid_or_default(lambda_grid, data.n());
    const NestedCvResult r = nested_cv_experiment(data, cfg, p);
    json j;
    j["prediction_error"] = summary_json(r.metrics.prediction_error);
    j["fold_errors"] = r.fold_errors;
    j["selected_lambdas"] = r.selected_lambdas;
    j["folds"] = p.outer_folds(data.n());
    j["repeats"] = p.repeats;
    j["rank"] = cfg.rank;
    j["seed"] = p.seed;
    emit(j, out_path, out);
    return 0;
  }
};

/// Input of the assumption and descent checks: files, or simulated data.
struct CheckData {
  std::string data_path;
  std::string truth_path;
  SignalOptions signal;
  Index n = 0;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--data", data_path, "dataset file (otherwise data are simulated)");
    app->add_option("--truth", truth_path, "truth sidecar, required with --data");
    signal.g = 16;
    signal.add(app);
    app->add_option("--n", n, "simulated sample size (default: 20 (mq + p))");
    app->add_option("--seed", seed, "random seed")->capture_default_str();
  }

  Simulated load() const {
    if (!data_path.empty()) {
      if (truth_path.empty()) throw ArgumentError("--truth is required with --data");
      Simulated s;
      s.data = load_dataset(data_path);
      s.truth = load_coefficients(truth_path);
      return s;
    }
    const SimulationSpec sim = signal.build();
    Index size = n;
    if (size <= 0) {
      const Coefficients t = make_truth(sim, stream_seed(seed, 0));
      size = 20 * (t.C.size() + t.gamma.size());
    }
    return simulate(sim, size, seed);
  }
};

struct AssumptionsCmd {
  CheckData input;
  double c0 = 0.5;
  int probes = 8;
  std::string out_path;

  void add(CLI::App* app) {
    input.add(app);
    app->add_option("--c0", c0, "neighbourhood radius")->capture_default_str();
    app->add_option("--probes", probes, "points on the radius-c0 sphere")->capture_default_str();
    app->add_option("--out", out_path, "result JSON (default: standard output)");
  }

  int run(std::ostream& out) const {
    const Simulated s = input.load();
    const AssumptionReport r = check_assumptions(s.data, s.truth, c0, probes, input.seed);
    json j = {{"check", "assumptions"}, {"c1_hat", r.c1_hat},   {"c2_hat", r.c2_hat},   {"c3_hat", r.c3_hat},
              {"c0", r.c0},             {"points", r.points},   {"pass_c1", r.pass_c1}, {"pass_c2", r.pass_c2},
              {"pass_c3", r.pass_c3},   {"pass", r.pass}};
    emit(j, out_path, out);
    return r.pass ? 0 : 1;
  }
};

struct CurvatureCmd {
  Index m = 20;
  Index q = 15;
  Index r = 3;
  Index p = 5;
  double scale = 1.0;
  int trials = 1000;
  std::uint64_t seed = 0;
  std::string out_path;

  void add(CLI::App* app) {
    app->add_option("--m", m, "rows of C*")->capture_default_str();
    app->add_option("--q", q, "columns of C*")->capture_default_str();
    app->add_option("--r", r, "rank of C*")->capture_default_str();
    app->add_option("--p", p, "length of gamma*")->capture_default_str();
    app->add_option("--scale", scale, "multiplies C*")->capture_default_str();
    app->add_option("--trials", trials, "Monte-Carlo trials")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--out", out_path, "result JSON (default: standard output)");
  }

  int run(std::ostream& out) const {
    if (m < 1 || q < 1 || r < 1 || r > std::min(m, q) || p < 0) throw ArgumentError("check curvature: invalid m, q, r, p");
    Rng rng(stream_seed(seed, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix a(m, r);
    Matrix b(q, r);
    for (Index k = 0; k < a.size(); ++k) a.data()[k] = normal(rng);
    for (Index k = 0; k < b.size(); ++k) b.data()[k] = normal(rng);
    const Matrix cstar = scale * a * b.transpose();
    const CurvatureReport rep = check_curvature(cstar, Vector::Ones(p), r, trials, stream_seed(seed, 1));
    json j = {{"check", "curvature"}, {"max_ratio", rep.max_ratio}, {"bound", rep.bound},
              {"sigma_r", rep.sigma_r}, {"trials", rep.trials},      {"resampled", rep.resampled},
              {"pass", rep.pass}};
    emit(j, out_path, out);
    return rep.pass ? 0 : 1;
  }
};

struct DescentCmd {
  CheckData input;
  Index r = 0;
  double c0 = 0.0;
  int trials = 200;
  int probes = 8;
  std::string out_path;

  void add(CLI::App* app) {
    input.add(app);
    app->add_option("--r", r, "rank of the truth (default: its numerical rank)");
    app->add_option("--c0", c0, "radius, at most sigma_r / 2 (default: sigma_r / 4)");
    app->add_option("--trials", trials, "sampled points")->capture_default_str();
    app->add_option("--probes", probes, "probes for the curvature constant")->capture_default_str();
    app->add_option("--out", out_path, "result JSON (default: standard output)");
  }

  int run(std::ostream& out) const {
    const Simulated s = input.load();
    const Index rank = r > 0 ? r : numerical_rank(s.truth.C);
    if (rank < 1) throw ArgumentError("check descent: the truth has rank 0");
    double radius = c0;
    if (radius <= 0) radius = tangent_frame(s.truth.C, rank).sigma(rank - 1) / 4.0;
    const DescentReport rep = check_descent_lemma(s.data, s.truth, rank, radius, trials, input.seed, probes);
    json j = {{"check", "descent"},      {"worst_slack", rep.worst_slack}, {"tolerance", rep.tolerance},
              {"c_h1", rep.c_h1},        {"c0", rep.c0},                   {"rank", rank},
              {"trials", rep.trials},    {"pass", rep.pass}};
    emit(j, out_path, out);
    return rep.pass ? 0 : 1;
  }
};

struct RateCmd {
  SignalOptions signal;
  std::string n_list = "250,500,1000,2000";
  int reps = 10;
  SolverConfig cfg;
  double slope_min = -0.7;
  double slope_max = -0.3;
  std::uint64_t seed = 0;
  std::string out_path;

  void add(CLI::App* app) {
    signal.g = 32;
    signal.add(app);
    app->add_option("--n-list", n_list, "comma-separated, strictly increasing sample sizes")->capture_default_str();
    app->add_option("--reps", reps, "replications per sample size")->capture_default_str();
    add_solver_options(app, cfg);
    app->add_option("--slope-min", slope_min, "lower end of the accepted slope")->capture_default_str();
    app->add_option("--slope-max", slope_max, "upper end of the accepted slope")->capture_default_str();
    app->add_option("--seed", seed, "base seed")->capture_default_str();
    app->add_option("--out", out_path, "result JSON (default: standard output)");
  }

  int run(std::ostream& out) const {
    const SimulationSpec sim = signal.build();
    std::vector<Index> ns;
    for (const auto& item : split_list(n_list, ',')) ns.push_back(parse_index(item, "--n-list"));
    const Matrix c0 = make_signal(sim.signal, 0);
    cfg.validate(c0.rows(), c0.cols());
    const RateFit fit = rate_experiment(sim, ns, reps, cfg, seed);
    const bool pass = !fit.degenerate && fit.slope >= slope_min && fit.slope <= slope_max;
    json j = {{"check", "rate"},
              {"n_list", fit.n_list},
              {"mean_errors", fit.mean_errors},
              {"std_errors", fit.std_errors},
              {"slope", fit.slope},
              {"intercept", fit.intercept},
              {"degenerate", fit.degenerate},
              {"failures", fit.failures},
              {"slope_range", {slope_min, slope_max}},
              {"pass", pass}};
    emit(j, out_path, out);
    return pass ? 0 : 1;
  }
};

// ---------------------------------------------------------------- config

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

std::vector<ConfigEntry> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::vector<ConfigEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value' in " + path);
    ConfigEntry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
    if (e.value.size() >= 2 && (e.value.front() == '"' || e.value.front() == '\'') && e.value.back() == e.value.front()) {
      e.value = e.value.substr(1, e.value.size() - 2);
    }
    if (e.key.empty()) throw ParseError(lineno, "empty key in " + path);
    entries.push_back(std::move(e));
  }
  return entries;
}

/// Pulls `--config PATH` out of args; returns PATH or "".
std::string take_config_path(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ArgumentError("--config needs a file name");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return path;
}

constexpr const char* kUsage =
    "usage: lrmr <command> [options]\n"
    "commands:\n"
    "  generate     simulate a dataset and its truth sidecar\n"
    "  fit          fit a dataset file\n"
    "  experiment   repeated simulate/tune/fit/evaluate cycles\n"
    "  cv           nested cross-validation on a dataset file\n"
    "  check        assumptions | curvature | descent | rate\n"
    "every command accepts --config FILE with 'key = value' lines; flags override the file\n";

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-rank matrix regression with l1 regularization", "lrmr"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.footer("every command accepts --config FILE with 'key = value' lines; flags override the file");

  GenerateCmd generate;
  FitCmd fitc;
  ExperimentCmd experiment;
  CvCmd cv;
  AssumptionsCmd assumptions;
  CurvatureCmd curvature;
  DescentCmd descent;
  RateCmd rate;

  auto* gen_app = app.add_subcommand("generate", "simulate a dataset and its truth sidecar");
  generate.add(gen_app);
  auto* fit_app = app.add_subcommand("fit", "fit a dataset file");
  fitc.add(fit_app);
  auto* exp_app = app.add_subcommand("experiment", "repeated simulate/tune/fit/evaluate cycles");
  experiment.add(exp_app);
  auto* cv_app = app.add_subcommand("cv", "nested cross-validation on a dataset file");
  cv.add(cv_app);
  auto* check_app = app.add_subcommand("check", "numerical checks of the theory");
  check_app->require_subcommand(1);
  auto* ass_app = check_app->add_subcommand("assumptions", "spectral constants of the design and Hessian");
  assumptions.add(ass_app);
  auto* curv_app = check_app->add_subcommand("curvature", "curvature bound of the fixed-rank manifold");
  curvature.add(curv_app);
  auto* desc_app = check_app->add_subcommand("descent", "local lower bound of the loss on the manifold");
  descent.add(desc_app);
  auto* rate_app = check_app->add_subcommand("rate", "error decay with the sample size");
  rate.add(rate_app);

  std::vector<std::string> args = raw_args;
  try {
    const std::string config_path = take_config_path(args);
    if (!config_path.empty()) {
      // Target app: leading command words, e.g. "fit" or "check rate".
      std::size_t words = 0;
      CLI::App* target = &app;
      while (words < args.size() && words < 2 && args[words].rfind("-", 0) != 0) {
        CLI::App* sub = nullptr;
        try {
          sub = target->get_subcommand(args[words]);
        } catch (const CLI::OptionNotFound&) {
        }
        if (sub == nullptr) break;
        target = sub;
        ++words;
      }
      if (target == &app || target == check_app) throw ArgumentError("--config needs a command");
      std::vector<std::string> injected;
      for (const auto& e : read_config(config_path)) {
        if (target->get_option_no_throw("--" + e.key) == nullptr) {
          throw ParseError(e.line, "unknown config key '" + e.key + "' for command '" + target->get_name() + "'");
        }
        injected.push_back("--" + e.key + "=" + e.value);
      }
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(words), injected.begin(), injected.end());
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << kUsage;
    err << "error: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (gen_app->parsed()) return generate.run(out);
    if (fit_app->parsed()) return fitc.run(out);
    if (exp_app->parsed()) return experiment.run(out, err);
    if (cv_app->parsed()) return cv.run(out);
    if (ass_app->parsed()) return assumptions.run(out);
    if (curv_app->parsed()) return curvature.run(out);
    if (desc_app->parsed()) return descent.run(out);
    if (rate_app->parsed()) return rate.run(out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << kUsage;
  return 2;
}

}  // namespace lrmr
