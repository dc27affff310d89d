#include "lrmr/solver.hpp"

#include <cmath>
#include <string>

namespace lrmr {

void SolverConfig::validate(Index m, Index q) const {
  if (rank < 1 || rank > std::min(m, q)) {
    throw ArgumentError("rank " + std::to_string(rank) + " outside [1, min(m, q) = " +
                        std::to_string(std::min(m, q)) + "]");
  }
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw ArgumentError("lambda must be >= 0");
  if (!(beta > 0 && beta < 1)) throw ArgumentError("beta must lie in (0, 1)");
  if (!(eps > 0)) throw ArgumentError("eps must be positive");
  if (max_iter < 1) throw ArgumentError("max_iter must be positive");
  if (!(alpha_init > 0) || !std::isfinite(alpha_init)) throw ArgumentError("alpha_init must be positive");
  if (max_backtracks < 1) throw ArgumentError("max_backtracks must be positive");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Tolerance: return "tolerance";
    case Termination::IterationCap: return "iteration_cap";
    case Termination::LineSearchStall: return "line_search_stall";
  }
  return "unknown";
}

namespace {

// Iterate with its cached predictor parts: f = matrix_part + vector_part.
struct State {
  Coefficients x;
  Vector matrix_part;
  Vector vector_part;
  double value = 0.0;
};

double evaluate(const Objective& obj, const Vector& matrix_part, const Vector& vector_part,
                const Matrix& c) {
  return obj.loss_sum(matrix_part + vector_part) + obj.penalty(c);
}

State make_state(const Objective& obj, Coefficients x) {
  obj.check_shape(x);
  State s;
  s.matrix_part = obj.matrix_part(x.C);
  s.vector_part = obj.vector_part(x.gamma);
  s.value = evaluate(obj, s.matrix_part, s.vector_part, x.C);
  s.x = std::move(x);
  return s;
}

// Returns the accepted step (0 on stall) and updates `s` in place on success.
LineSearchResult search(const Objective& obj, State& s, StepKind kind, const Coefficients& grad,
                        const SolverConfig& cfg) {
  LineSearchResult out;
  const bool zero_grad = kind == StepKind::Matrix ? grad.C.isZero(0.0) : grad.gamma.isZero(0.0);
  if (zero_grad) {
    out.step = cfg.alpha_init;
    out.candidate = s.x;
    out.objective = s.value;
    return out;
  }

  double alpha = cfg.alpha_init;
  for (int k = 0; k <= cfg.max_backtracks; ++k, alpha *= cfg.beta) {
    if (kind == StepKind::Matrix) {
      const Matrix trial = project_rank(s.x.C - alpha * grad.C, cfg.rank);
      Vector mp = obj.matrix_part(trial);
      const double v = evaluate(obj, mp, s.vector_part, trial);
      if (std::isfinite(v) && v <= s.value) {
        s.x.C = trial;
        s.matrix_part = std::move(mp);
        s.value = v;
        out.step = alpha;
        out.backtracks = k;
        break;
      }
    } else {
      const Vector trial = s.x.gamma - alpha * grad.gamma;
      Vector vp = obj.vector_part(trial);
      const double v = evaluate(obj, s.matrix_part, vp, s.x.C);
      if (std::isfinite(v) && v <= s.value) {
        s.x.gamma = trial;
        s.vector_part = std::move(vp);
        s.value = v;
        out.step = alpha;
        out.backtracks = k;
        break;
      }
    }
    out.backtracks = k + 1;
  }
  out.stalled = out.step == 0.0;
  out.candidate = s.x;
  out.objective = s.value;
  return out;
}

// Gradient with respect to gamma alone, from cached predictor parts.
Vector gamma_gradient(const Objective& obj, const State& s) {
  return obj.data().z().transpose() * obj.loss_derivs(s.matrix_part + s.vector_part);
}

Matrix matrix_gradient(const Objective& obj, const State& s) {
  const Dataset& d = obj.data();
  Vector gc = d.design().transpose() * obj.loss_derivs(s.matrix_part + s.vector_part);
  Matrix g = Eigen::Map<Matrix>(gc.data(), d.m(), d.q());
  if (obj.lambda() != 0.0) g += obj.lambda() * s.x.C.array().sign().matrix();
  return g;
}

}  // namespace

LineSearchResult line_search(const Objective& obj, const Coefficients& current, StepKind kind,
                             const Coefficients& grad, const SolverConfig& config) {
  config.validate(obj.data().m(), obj.data().q());
  State s = make_state(obj, current);
  if (!std::isfinite(s.value)) throw NumericError("line search: objective at current point is not finite");
  return search(obj, s, kind, grad, config);
}

FitResult fit(const Dataset& data, const SolverConfig& config, const std::optional<Coefficients>& init) {
  if (data.n() < 1) throw ArgumentError("fit: empty dataset");
  config.validate(data.m(), data.q());
  const Objective obj(data, config.lambda);

  State s = make_state(obj, init ? *init : Coefficients::Zero(data.m(), data.q(), data.p()));
  if (!std::isfinite(s.value)) throw NumericError("fit: objective at the initial point is not finite");

  FitResult result;
  result.objective_trace.push_back(s.value);
  result.termination = Termination::IterationCap;

  Coefficients grad = Coefficients::Zero(data.m(), data.q(), data.p());
  for (int k = 1; k <= config.max_iter; ++k) {
    const double previous = s.value;

    grad.C = matrix_gradient(obj, s);
    if (!grad.C.allFinite()) throw NumericError("fit: non-finite gradient");
    const bool c_stalled = search(obj, s, StepKind::Matrix, grad, config).stalled;

    grad.gamma = gamma_gradient(obj, s);
    if (!grad.gamma.allFinite()) throw NumericError("fit: non-finite gradient");
    const bool g_stalled = search(obj, s, StepKind::Vector, grad, config).stalled;

    // Re-projection of C (a no-op up to rounding); kept only if F does not rise.
    if (!s.x.C.isZero(0.0)) {
      Matrix reprojected = project_rank(s.x.C, config.rank);
      Vector mp = obj.matrix_part(reprojected);
      const double v = evaluate(obj, mp, s.vector_part, reprojected);
      if (v <= s.value) {
        s.x.C = std::move(reprojected);
        s.matrix_part = std::move(mp);
        s.value = v;
      }
    }

    result.objective_trace.push_back(s.value);
    result.iterations = k;
    if (c_stalled && g_stalled) {
      result.termination = Termination::LineSearchStall;
      break;
    }
    if (std::abs(s.value - previous) <= config.eps) {
      result.termination = Termination::Tolerance;
      break;
    }
  }
  result.coefficients = std::move(s.x);
  return result;
}

Coefficients unconstrained_initialization(const Dataset& data, Index rank, int max_iter) {
  if (data.n() < 1) throw ArgumentError("initialization: empty dataset");
  const Index full = std::min(data.m(), data.q());
  if (rank < 1 || rank > full) throw ArgumentError("initialization: rank out of range");

  Coefficients x;
  if (data.model().kind == LossKind::Ordinary) {
    const Matrix s = stacked_predictors(data);
    const Vector theta = s.completeOrthogonalDecomposition().solve(data.y());
    x.C = Eigen::Map<const Matrix>(theta.data(), data.m(), data.q());
    x.gamma = theta.tail(data.p());
  } else {
    SolverConfig cfg;
    cfg.rank = full;
    cfg.max_iter = max_iter;
    x = fit(data, cfg).coefficients;
  }
  if (!x.all_finite()) throw NumericError("initialization: non-finite solution");
  x.C = project_rank(x.C, rank);
  return x;
}

}  // namespace lrmr
