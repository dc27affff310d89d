#include "lrmr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lrmr/datagen.hpp"
#include "lrmr/parallel.hpp"

namespace lrmr {

CoefficientRmse coefficient_rmse(const Coefficients& est, const Coefficients& truth) {
  if (!est.same_shape(truth)) throw DimensionError("coefficient_rmse: shape mismatch");
  CoefficientRmse out;
  out.C = (est.C - truth.C).norm() / std::sqrt(static_cast<double>(est.C.size()));
  out.gamma = est.gamma.size() == 0
                  ? 0.0
                  : (est.gamma - truth.gamma).norm() / std::sqrt(static_cast<double>(est.gamma.size()));
  return out;
}

double prediction_error(const LossModel& model, const Coefficients& coeff, const Dataset& test) {
  if (test.n() < 1) throw ArgumentError("prediction_error: empty test set");
  if (model.kind != test.model().kind) {
    throw ArgumentError("prediction_error: model kind " + std::string(to_string(model.kind)) +
                        " does not match test data (" + std::string(to_string(test.model().kind)) + ")");
  }
  const Objective obj(test, 0.0);
  const Vector theta = obj.predictor(coeff);
  const double n = static_cast<double>(test.n());
  if (model.kind == LossKind::Logistic) {
    // sigmoid(theta) > 1/2  <=>  theta > 0
    double wrong = 0.0;
    for (Index i = 0; i < test.n(); ++i) {
      const double label = theta(i) > 0.0 ? 1.0 : 0.0;
      if (label != test.y()(i)) wrong += 1.0;
    }
    return wrong / n;
  }
  return std::sqrt((test.y() - theta).squaredNorm() / n);
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.values = std::move(values);
  if (s.values.empty()) return s;
  const double k = static_cast<double>(s.values.size());
  s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / k;
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (k - 1.0));
  }
  return s;
}

std::vector<std::vector<Index>> make_folds(Index n, Index k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw ArgumentError("folds: need 2 <= k <= n, got k = " + std::to_string(k) + ", n = " + std::to_string(n));
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  const Index base = n / k;
  const Index extra = n % k;
  auto it = perm.begin();
  for (Index f = 0; f < k; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    auto& fold = folds[static_cast<std::size_t>(f)];
    fold.assign(it, it + size);
    std::sort(fold.begin(), fold.end());
    it += size;
  }
  return folds;
}

std::vector<Index> fold_complement(const std::vector<std::vector<Index>>& folds, std::size_t f) {
  std::vector<Index> out;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> default_lambda_grid(Index n) {
  std::vector<double> grid(20);
  const double scale = static_cast<double>(n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double e = -4.0 + 6.0 * static_cast<double>(i) / 19.0;
    grid[i] = std::pow(10.0, e) * scale;
  }
  return grid;
}

void CvPlan::validate(Index n) const {
  if (!leave_one_out && folds < 2) throw ArgumentError("cv: need at least 2 folds");
  if (outer_folds(n) > n) throw ArgumentError("cv: more folds than samples");
  if (inner_folds < 2) throw ArgumentError("cv: need at least 2 inner folds");
  if (lambda_grid.empty()) throw ArgumentError("cv: empty lambda grid");
  for (double l : lambda_grid) {
    if (!(l >= 0) || !std::isfinite(l)) throw ArgumentError("cv: lambda values must be finite and >= 0");
  }
  if (repeats < 1) throw ArgumentError("cv: repeats must be positive");
}

namespace {

std::vector<double> normalized_grid(std::vector<double> grid) {
  if (grid.empty()) throw ArgumentError("empty lambda grid");
  for (double l : grid) {
    if (!(l >= 0) || !std::isfinite(l)) throw ArgumentError("lambda values must be finite and >= 0");
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

struct FoldOutcome {
  double error = 0.0;
  bool stalled = false;
  bool failed = false;
};

FoldOutcome fit_and_score(const Dataset& train, const Dataset& test, SolverConfig cfg, double lambda) {
  FoldOutcome out;
  try {
    cfg.lambda = lambda;
    const FitResult r = fit(train, cfg);
    out.stalled = r.termination == Termination::LineSearchStall;
    out.error = prediction_error(train.model(), r.coefficients, test);
  } catch (const Error&) {
    out.failed = true;
  }
  return out;
}

TuneResult select(const std::vector<double>& grid, const std::vector<FoldOutcome>& outcomes,
                  std::size_t per_lambda) {
  TuneResult result;
  bool found = false;
  double best = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CvRow row;
    row.lambda = grid[g];
    double sum = 0.0;
    for (std::size_t f = 0; f < per_lambda; ++f) {
      const FoldOutcome& o = outcomes[g * per_lambda + f];
      if (o.failed) {
        ++row.failures;
      } else if (o.stalled) {
        ++row.stalls;
      } else {
        sum += o.error;
        ++row.completed;
      }
    }
    row.valid = row.completed > 0;
    row.mean_error = row.valid ? sum / row.completed : std::numeric_limits<double>::quiet_NaN();
    if (row.valid && (!found || row.mean_error < best)) {
      found = true;
      best = row.mean_error;
      result.lambda_best = row.lambda;
    }
    result.table.push_back(row);
  }
  if (!found) throw NumericError("lambda tuning: no lambda produced a completed fit");
  return result;
}

}  // namespace

TuneResult tune_lambda(const Dataset& data, const SolverConfig& base, const CvPlan& plan) {
  const std::vector<double> grid = normalized_grid(plan.lambda_grid);
  if (plan.inner_folds < 2) throw ArgumentError("cv: need at least 2 inner folds");
  const auto folds = make_folds(data.n(), plan.inner_folds, plan.seed);
  const std::size_t k = folds.size();

  std::vector<Dataset> train(k);
  std::vector<Dataset> held(k);
  for (std::size_t f = 0; f < k; ++f) {
    train[f] = data.subset(fold_complement(folds, f));
    held[f] = data.subset(folds[f]);
  }

  std::vector<FoldOutcome> outcomes(grid.size() * k);
  parallel_for(outcomes.size(), [&](std::size_t idx) {
    const std::size_t g = idx / k;
    const std::size_t f = idx % k;
    outcomes[idx] = fit_and_score(train[f], held[f], base, grid[g]);
  });
  return select(grid, outcomes, k);
}

TuneResult tune_lambda_holdout(const Dataset& train, const Dataset& validation, const SolverConfig& base,
                               std::vector<double> grid) {
  grid = normalized_grid(std::move(grid));
  std::vector<FoldOutcome> outcomes(grid.size());
  parallel_for(grid.size(), [&](std::size_t g) {
    outcomes[g] = fit_and_score(train, validation, base, grid[g]);
  });
  return select(grid, outcomes, 1);
}

NestedCvResult nested_cv_experiment(const Dataset& data, const SolverConfig& base, const CvPlan& plan) {
  plan.validate(data.n());
  const Index k = plan.outer_folds(data.n());
  const bool logistic = data.model().kind == LossKind::Logistic;

  NestedCvResult result;
  std::vector<double> pooled;
  for (int rep = 0; rep < plan.repeats; ++rep) {
    const std::uint64_t rep_seed = stream_seed(plan.seed, static_cast<std::uint64_t>(rep));
    const auto folds = make_folds(data.n(), k, rep_seed);

    std::vector<double> errors(folds.size());
    std::vector<double> lambdas(folds.size());
    // Outer folds run sequentially; the inner tuning parallelises over grid x folds.
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const Dataset train = data.subset(fold_complement(folds, f));
      const Dataset test = data.subset(folds[f]);
      CvPlan inner = plan;
      inner.seed = stream_seed(rep_seed, f);
      inner.inner_folds = std::min<Index>(plan.inner_folds, train.n());
      const TuneResult tuned = tune_lambda(train, base, inner);
      SolverConfig cfg = base;
      cfg.lambda = tuned.lambda_best;
      const FitResult r = fit(train, cfg);
      errors[f] = prediction_error(data.model(), r.coefficients, test);
      lambdas[f] = tuned.lambda_best;
    }

    // Pool over held-out samples: misclassifications add up, squared errors add up.
    double acc = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const double size = static_cast<double>(folds[f].size());
      acc += logistic ? errors[f] * size : errors[f] * errors[f] * size;
    }
    acc /= static_cast<double>(data.n());
    pooled.push_back(logistic ? acc : std::sqrt(acc));

    result.fold_errors.insert(result.fold_errors.end(), errors.begin(), errors.end());
    result.selected_lambdas.insert(result.selected_lambdas.end(), lambdas.begin(), lambdas.end());
  }
  result.metrics.prediction_error = summarize(std::move(pooled));
  return result;
}

namespace {

struct Replicate {
  bool ok = false;
  std::string message;
  CoefficientRmse rmse;
  double prediction = 0.0;
  double lambda = 0.0;
  int iterations = 0;
};

Replicate run_replicate(const ExperimentPlan& plan, std::size_t rep) {
  Replicate out;
  try {
    const std::uint64_t s = replicate_seed(plan.seed, rep);
    const Coefficients truth = make_truth(plan.sim, stream_seed(s, 0));
    auto draw = [&](Index n, std::uint64_t stream) {
      return sample_dataset(truth.C, truth.gamma, n, plan.sim.noise, plan.sim.model, stream_seed(s, stream));
    };
    const Dataset train = draw(plan.n, 1);
    const Dataset test = draw(plan.n_test > 0 ? plan.n_test : plan.n, 3);

    SolverConfig cfg = plan.base;
    std::optional<Coefficients> init;
    if (plan.ls_init) init = unconstrained_initialization(train, cfg.rank);
    if (!plan.lambda_grid.empty()) {
      const Dataset validation = draw(plan.n_validation > 0 ? plan.n_validation : plan.n, 2);
      cfg.lambda = tune_lambda_holdout(train, validation, cfg, plan.lambda_grid).lambda_best;
    }
    const FitResult r = fit(train, cfg, init);
    out.rmse = coefficient_rmse(r.coefficients, truth);
    out.prediction = prediction_error(plan.sim.model, r.coefficients, test);
    out.lambda = cfg.lambda;
    out.iterations = r.iterations;
    out.ok = true;
  } catch (const Error& e) {
    out.message = "replicate " + std::to_string(rep) + ": " + e.what();
  }
  return out;
}

}  // namespace

ExperimentResult simulation_experiment(const ExperimentPlan& plan) {
  if (plan.reps < 1) throw ArgumentError("experiment: reps must be positive");
  if (plan.n < 1 || plan.n_validation < 0 || plan.n_test < 0) throw ArgumentError("experiment: invalid sample sizes");
  std::vector<Replicate> reps(static_cast<std::size_t>(plan.reps));
  parallel_for(reps.size(), [&](std::size_t k) { reps[k] = run_replicate(plan, k); });

  ExperimentResult result;
  result.reps = plan.reps;
  std::vector<double> rc, rg, pe;
  for (const Replicate& r : reps) {
    if (!r.ok) {
      result.failures.push_back(r.message);
      continue;
    }
    rc.push_back(r.rmse.C);
    rg.push_back(r.rmse.gamma);
    pe.push_back(r.prediction);
    result.lambdas.push_back(r.lambda);
    result.iterations.push_back(r.iterations);
  }
  result.metrics.rmse_C = summarize(std::move(rc));
  result.metrics.rmse_gamma = summarize(std::move(rg));
  result.metrics.prediction_error = summarize(std::move(pe));
  return result;
}

}  // namespace lrmr
