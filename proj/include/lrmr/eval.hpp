#pragma once

#include <cstdint>
#include <vector>

#include <string>

#include "lrmr/datagen.hpp"
#include "lrmr/solver.hpp"

namespace lrmr {

struct CoefficientRmse {
  double C = 0.0;      // ||C_hat - C*||_F / sqrt(mq)
  double gamma = 0.0;  // ||g_hat - g*|| / sqrt(p)
};

CoefficientRmse coefficient_rmse(const Coefficients& est, const Coefficients& truth);

/// RMSE of responses (Ordinary, Robust) or misclassification rate with the
/// rule y_hat = 1{sigmoid(theta) > 1/2} (Logistic).
double prediction_error(const LossModel& model, const Coefficients& coeff, const Dataset& test);

/// Mean and sample standard deviation (0 for fewer than two values).
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> values;
};

Summary summarize(std::vector<double> values);

struct Metrics {
  Summary rmse_C;
  Summary rmse_gamma;
  Summary prediction_error;
};

/// Shuffled partition of [0, n) into k folds whose sizes differ by at most 1.
std::vector<std::vector<Index>> make_folds(Index n, Index k, std::uint64_t seed);

/// Complement of fold `f` in a partition.
std::vector<Index> fold_complement(const std::vector<std::vector<Index>>& folds, std::size_t f);

/// 20 points, log-spaced over [1e-4, 1e2] * n.
std::vector<double> default_lambda_grid(Index n);

struct CvPlan {
  Index folds = 5;             // outer folds of nested CV
  bool leave_one_out = false;  // outer folds = n
  std::vector<double> lambda_grid;
  Index inner_folds = 5;       // folds used to tune lambda
  std::uint64_t seed = 0;
  int repeats = 1;             // independent random partitions

  Index outer_folds(Index n) const { return leave_one_out ? n : folds; }
  void validate(Index n) const;
};

struct CvRow {
  double lambda = 0.0;
  double mean_error = 0.0;
  int completed = 0;  // fits that contributed to mean_error
  int stalls = 0;
  int failures = 0;
  bool valid = false;
};

struct TuneResult {
  double lambda_best = 0.0;
  std::vector<CvRow> table;  // ascending lambda, duplicates removed
};

/// k-fold (plan.inner_folds) cross-validation over the lambda grid. Stalled
/// or failed fits are recorded and left out of the average; a lambda with no
/// completed fit is invalid. Ties go to the smaller lambda.
TuneResult tune_lambda(const Dataset& data, const SolverConfig& base, const CvPlan& plan);

/// Lambda selection on an independent validation set.
TuneResult tune_lambda_holdout(const Dataset& train, const Dataset& validation,
                               const SolverConfig& base, std::vector<double> grid);

struct NestedCvResult {
  /// prediction_error summarises the pooled outer-CV error of each repeat;
  /// the coefficient RMSE summaries are empty (no truth).
  Metrics metrics;
  std::vector<double> fold_errors;       // every outer fold of every repeat
  std::vector<double> selected_lambdas;  // aligned with fold_errors
};

/// Outer k-fold loop; per outer fold lambda is tuned by inner CV on the
/// training part, refit on the whole training part and scored on the held-out
/// fold.
NestedCvResult nested_cv_experiment(const Dataset& data, const SolverConfig& base, const CvPlan& plan);

/// Repeated simulation: per replicate a truth, a training set, a validation
/// set for lambda and a test set, all from seeds derived from `seed`.
struct ExperimentPlan {
  SimulationSpec sim;
  Index n = 500;
  Index n_validation = 0;  // 0: same as n
  Index n_test = 0;        // 0: same as n
  int reps = 10;
  SolverConfig base;       // base.lambda is used when lambda_grid is empty
  std::vector<double> lambda_grid;
  bool ls_init = false;    // start from unconstrained_initialization
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  Metrics metrics;                    // over completed replicates
  std::vector<double> lambdas;        // selected lambda per completed replicate
  std::vector<int> iterations;
  std::vector<std::string> failures;  // one message per failed replicate
  int reps = 0;
};

/// Replicates run in parallel; results are aggregated in replicate order.
ExperimentResult simulation_experiment(const ExperimentPlan& plan);

}  // namespace lrmr
