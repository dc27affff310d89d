#include <gtest/gtest.h>

#include <random>

#include "lrmr/datagen.hpp"
#include "lrmr/solver.hpp"

namespace lrmr {
namespace {

Matrix random_rank(Index m, Index q, Index r, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix a(m, r), b(q, r);
  for (Index k = 0; k < a.size(); ++k) a.data()[k] = normal(rng);
  for (Index k = 0; k < b.size(); ++k) b.data()[k] = normal(rng);
  return a * b.transpose();
}

Dataset noisy_instance(LossKind kind, std::uint64_t seed, Index n = 60) {
  const Matrix c = random_rank(4, 5, 1, seed);
  const LossModel lm = kind == LossKind::Robust ? LossModel::robust(1.0) : LossModel{kind, 1.345};
  const std::optional<NoiseSpec> noise =
      kind == LossKind::Logistic ? std::nullopt : std::optional<NoiseSpec>(GaussianNoise{0.5});
  return sample_dataset(c, Vector::Ones(2), n, noise, lm, seed + 1);
}

TEST(SolverConfigTest, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate(4, 5));
  c.rank = 5;
  EXPECT_THROW(c.validate(4, 5), ArgumentError);
  c = SolverConfig{};
  c.beta = 1.0;
  EXPECT_THROW(c.validate(4, 5), ArgumentError);
  c = SolverConfig{};
  c.lambda = -1.0;
  EXPECT_THROW(c.validate(4, 5), ArgumentError);
  c = SolverConfig{};
  c.eps = 0.0;
  EXPECT_THROW(c.validate(4, 5), ArgumentError);
}

TEST(LineSearchTest, ZeroGradientAcceptsInitialStep) {
  const Dataset d = noisy_instance(LossKind::Ordinary, 1);
  const Objective obj(d, 0.0);
  const Coefficients x{random_rank(4, 5, 1, 9), Vector::Zero(2)};
  const Coefficients zero = Coefficients::Zero(4, 5, 2);
  SolverConfig cfg;
  const LineSearchResult r = line_search(obj, x, StepKind::Vector, zero, cfg);
  EXPECT_EQ(r.step, cfg.alpha_init);
  EXPECT_EQ(r.backtracks, 0);
  EXPECT_FALSE(r.stalled);
  EXPECT_EQ(r.candidate.gamma, x.gamma);
}

TEST(LineSearchTest, QuadraticInOneDimension) {
  // F(gamma) = 5 (3 - gamma)^2: steps 1, 1/2 and 1/4 overshoot, 1/8 lands at 3.75.
  const Dataset d(1, 1, Matrix::Zero(5, 1), Matrix::Ones(5, 1), Vector::Constant(5, 3.0), LossModel{});
  const Objective obj(d, 0.0);
  const Coefficients x = Coefficients::Zero(1, 1, 1);
  const Coefficients g = gradient(obj, x);
  const LineSearchResult r = line_search(obj, x, StepKind::Vector, g, SolverConfig{});
  EXPECT_EQ(r.step, 0.125);
  EXPECT_EQ(r.backtracks, 3);
  EXPECT_NEAR(r.candidate.gamma(0), 3.75, 1e-12);
  EXPECT_LT(r.objective, objective_value(obj, x));
  EXPECT_DOUBLE_EQ(r.objective, objective_value(obj, r.candidate));
}

TEST(LineSearchTest, AcceptedTrialNeverIncreases) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Dataset d = noisy_instance(LossKind::Ordinary, 100 + s);
    const Objective obj(d, 0.5);
    Coefficients x{random_rank(4, 5, 1, 200 + s), Vector::Ones(2)};
    const double f0 = objective_value(obj, x);
    const Coefficients g = gradient(obj, x);
    SolverConfig cfg;
    const LineSearchResult rc = line_search(obj, x, StepKind::Matrix, g, cfg);
    EXPECT_LE(rc.objective, f0);
    EXPECT_LE(numerical_rank(rc.candidate.C, 1e-9), 1);
    const LineSearchResult rg = line_search(obj, rc.candidate, StepKind::Vector, gradient(obj, rc.candidate), cfg);
    EXPECT_LE(rg.objective, rc.objective);
  }
}

TEST(LineSearchTest, StallReturnsCurrentPoint) {
  const Dataset d = noisy_instance(LossKind::Ordinary, 3);
  const Objective obj(d, 0.0);
  const Coefficients x{random_rank(4, 5, 1, 4), Vector::Zero(2)};
  Coefficients uphill = gradient(obj, x);
  uphill.C = -uphill.C;
  uphill.gamma = -uphill.gamma;
  SolverConfig cfg;
  cfg.max_backtracks = 3;
  const LineSearchResult r = line_search(obj, x, StepKind::Vector, uphill, cfg);
  EXPECT_TRUE(r.stalled);
  EXPECT_EQ(r.step, 0.0);
  EXPECT_EQ(r.candidate.gamma, x.gamma);
}

TEST(FitTest, NoiselessRankOneRecovery) {
  const Matrix c = random_rank(4, 5, 1, 11);
  const Vector g = Vector::Ones(2);
  const Dataset d = sample_dataset(c, g, 4 * 5 + 2 + 30, std::nullopt, LossModel{}, 12);
  SolverConfig cfg;
  cfg.eps = 1e-14;
  cfg.max_iter = 5000;
  const FitResult r = fit(d, cfg);
  EXPECT_LE(param_distance(r.coefficients, Coefficients{c, g}), 1e-3);
}

TEST(FitTest, ZeroResponseStaysAtOrigin) {
  const Dataset d = noisy_instance(LossKind::Ordinary, 5);
  const Dataset zero(d.m(), d.q(), d.design(), d.z(), Vector::Zero(d.n()), LossModel{});
  const FitResult r = fit(zero, SolverConfig{});
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.coefficients.C.norm(), 0.0);
  EXPECT_EQ(r.coefficients.gamma.norm(), 0.0);
  EXPECT_EQ(r.termination, Termination::Tolerance);
  ASSERT_EQ(r.objective_trace.size(), 2u);
}

TEST(FitTest, MonotoneTraceAllLosses) {
  for (auto kind : {LossKind::Ordinary, LossKind::Robust, LossKind::Logistic}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Dataset d = noisy_instance(kind, 300 + s);
      SolverConfig cfg;
      cfg.rank = 2;
      cfg.lambda = 0.1 * static_cast<double>(s);
      const FitResult r = fit(d, cfg);
      ASSERT_EQ(r.objective_trace.size(), static_cast<std::size_t>(r.iterations) + 1);
      for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
        EXPECT_LE(r.objective_trace[k], r.objective_trace[k - 1] + 1e-12);
      }
      const Vector sv = thin_svd(r.coefficients.C).singularValues();
      if (sv(0) > 0) EXPECT_LE(sv(2), 1e-9 * sv(0));
    }
  }
}

TEST(FitTest, IterationCapAndTraceLength) {
  const Dataset d = noisy_instance(LossKind::Ordinary, 6);
  SolverConfig cfg;
  cfg.max_iter = 3;
  cfg.eps = 1e-300;
  const FitResult r = fit(d, cfg);
  EXPECT_EQ(r.termination, Termination::IterationCap);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_EQ(r.objective_trace.size(), 4u);
}

TEST(FitTest, ApproximateStationarity) {
  const Dataset d = noisy_instance(LossKind::Ordinary, 7, 80);
  SolverConfig cfg;
  cfg.eps = 1e-12;
  cfg.max_iter = 20000;
  const FitResult r = fit(d, cfg);
  ASSERT_EQ(r.termination, Termination::Tolerance);
  const Objective obj(d, 0.0);
  const Coefficients g0 = gradient(obj, Coefficients::Zero(d.m(), d.q(), d.p()));
  const Coefficients g = gradient(obj, r.coefficients);
  const TangentFrame frame = tangent_frame(r.coefficients.C, 1);
  const double tangent = tangent_project(frame, g.C, g.gamma, Subspace::Tangent).C.norm() + g.gamma.norm();
  EXPECT_LE(tangent, 1e-3 * (1.0 + norm(g0)));
}

TEST(FitTest, DeterministicTrace) {
  const Dataset d = noisy_instance(LossKind::Logistic, 8);
  SolverConfig cfg;
  cfg.lambda = 0.2;
  const FitResult a = fit(d, cfg);
  const FitResult b = fit(d, cfg);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.coefficients.C, b.coefficients.C);
}

TEST(FitTest, InitShapeChecked) {
  const Dataset d = noisy_instance(LossKind::Ordinary, 9);
  EXPECT_THROW(fit(d, SolverConfig{}, Coefficients::Zero(5, 4, 2)), DimensionError);
}

TEST(FitTest, NonFiniteInitRejected) {
  const Dataset d = noisy_instance(LossKind::Ordinary, 10);
  Coefficients init = Coefficients::Zero(4, 5, 2);
  init.gamma(0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(fit(d, SolverConfig{}, init), NumericError);
}

TEST(InitializationTest, LeastSquaresIsRankR) {
  const Dataset d = noisy_instance(LossKind::Ordinary, 13, 40);
  const Coefficients init = unconstrained_initialization(d, 1);
  EXPECT_LE(numerical_rank(init.C), 1);
  const FitResult from_init = fit(d, SolverConfig{}, init);
  EXPECT_LE(from_init.objective_trace.back(), from_init.objective_trace.front());
}

TEST(InitializationTest, RobustUsesDescent) {
  const Dataset d = noisy_instance(LossKind::Robust, 14, 40);
  const Coefficients init = unconstrained_initialization(d, 2, 50);
  EXPECT_LE(numerical_rank(init.C), 2);
  EXPECT_TRUE(init.all_finite());
}

TEST(TerminationNames, Strings) {
  EXPECT_EQ(to_string(Termination::Tolerance), "tolerance");
  EXPECT_EQ(to_string(Termination::IterationCap), "iteration_cap");
  EXPECT_EQ(to_string(Termination::LineSearchStall), "line_search_stall");
}

}  // namespace
}  // namespace lrmr
