#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "lrmr/models.hpp"

namespace lrmr {

struct SolverConfig {
  Index rank = 1;
  double lambda = 0.0;
  double beta = 0.5;          // backtracking shrink factor
  double eps = 1e-6;          // stop when |F_k - F_{k-1}| <= eps
  int max_iter = 500;
  double alpha_init = 1.0;    // first trial step of every line search
  int max_backtracks = 60;

  /// Throws ArgumentError on an invalid setting or a rank above min(m, q).
  void validate(Index m, Index q) const;
};

enum class Termination { Tolerance, IterationCap, LineSearchStall };

std::string_view to_string(Termination t);

struct FitResult {
  Coefficients coefficients;
  std::vector<double> objective_trace;  // F at iteration 0, 1, ..., iterations
  int iterations = 0;
  Termination termination = Termination::Tolerance;
};

/// Which block a line search moves.
enum class StepKind { Matrix, Vector };

struct LineSearchResult {
  double step = 0.0;
  Coefficients candidate;
  double objective = 0.0;
  int backtracks = 0;
  bool stalled = false;
};

/// Backtracking from alpha_init by factor beta until the trial point has
/// objective <= the current objective. Matrix steps are P_r(C - alpha g_C)
/// with gamma fixed; vector steps are gamma - alpha g_gamma with C fixed.
/// When max_backtracks trials all fail, returns step 0 and the current point
/// with `stalled` set.
LineSearchResult line_search(const Objective& obj, const Coefficients& current, StepKind kind,
                             const Coefficients& grad, const SolverConfig& config);

/// Alternating projected gradient descent on F under rank(C) <= r.
/// Starts from C = 0, gamma = 0 unless `init` is given.
FitResult fit(const Dataset& data, const SolverConfig& config,
              const std::optional<Coefficients>& init = std::nullopt);

/// Initial point from the unconstrained problem: the minimum-norm least
/// squares solution for Ordinary data, otherwise a full-rank (lambda = 0)
/// descent run; projected to rank r.
Coefficients unconstrained_initialization(const Dataset& data, Index rank, int max_iter = 200);

}  // namespace lrmr
