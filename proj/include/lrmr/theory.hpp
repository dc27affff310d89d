#pragma once

// Numerical checks of the regularity conditions, the curvature of the
// fixed-rank manifold, the local lower bound of the loss on that manifold and
// the O(1/sqrt(n)) error rate.

#include <cstdint>
#include <vector>

#include "lrmr/datagen.hpp"
#include "lrmr/solver.hpp"

namespace lrmr {

struct AssumptionReport {
  double c1_hat = 0.0;  // lambda_max(sum vec vec^T) / n
  double c2_hat = 0.0;  // min over probes of lambda_min(H / n)
  double c3_hat = 0.0;  // max over probes of lambda_max(H / n)
  double c0 = 0.0;
  int points = 0;       // probes including the truth itself
  bool pass_c1 = false;
  bool pass_c2 = false;
  bool pass_c3 = false;
  bool pass = false;
};

/// Largest eigenvalue of S^T S / n (S = stacked vec(X_i, z_i)) by power
/// iteration, relative tolerance 1e-8.
double gram_operator_norm(const Dataset& data, std::uint64_t seed, int max_iter = 100000);

/// Probes the truth and n_probe points drawn uniformly on the radius-c0 sphere
/// around it (product-space distance).
AssumptionReport check_assumptions(const Dataset& data, const Coefficients& truth, double c0, int n_probe,
                                   std::uint64_t seed);

/// ||Pi_normal delta|| / ||Pi_tangent delta||^2 at the frame's base point.
double curvature_ratio(const TangentFrame& frame, const Coefficients& delta);

struct CurvatureReport {
  double max_ratio = 0.0;
  double bound = 0.0;  // 2 / sigma_r(C*)
  double sigma_r = 0.0;
  int trials = 0;
  int resampled = 0;
  bool pass = false;
};

/// Monte-Carlo check of ||Pi_N delta|| <= (2 / sigma_r) ||Pi_T delta||^2 for
/// rank-r points within sigma_r / 2 of (C*, gamma*).
CurvatureReport check_curvature(const Matrix& cstar, const Vector& gamma_star, Index r, int trials,
                                std::uint64_t seed);

/// Random rank-r point at product-space distance at most `radius` from the
/// truth: a tangent perturbation followed by the rank projection.
Coefficients sample_manifold_point(const Coefficients& truth, const TangentFrame& frame, double radius,
                                   Rng& rng);

/// Terms of the manifold lower bound at a truth point of rank r, for the
/// unpenalised loss f:
///   lhs = f(x) - f(x*)
///   rhs = b^2 C_H1 / 2 - b ||Pi_T grad f(x*)|| - C_T b^2 ||Pi_N grad f(x*)||
class DescentLemma {
 public:
  DescentLemma(const Dataset& data, const Coefficients& truth, Index r, double c_h1);

  struct Terms {
    double lhs = 0.0;
    double rhs = 0.0;
    double b = 0.0;
  };

  Terms terms(const Coefficients& point) const;

  const TangentFrame& frame() const { return frame_; }
  double f_star() const { return f_star_; }
  double c_h1() const { return c_h1_; }
  double tangent_grad_norm() const { return grad_t_; }
  double normal_grad_norm() const { return grad_n_; }

 private:
  const Dataset& data_;
  Coefficients truth_;
  TangentFrame frame_;
  double c_h1_;
  double f_star_;
  double grad_t_;
  double grad_n_;
};

struct DescentReport {
  double worst_slack = 0.0;  // min over trials of lhs - rhs
  double tolerance = 0.0;    // 1e-6 |f(x*)|
  double c_h1 = 0.0;
  double c0 = 0.0;
  int trials = 0;
  bool pass = false;
};

/// C_H1 is the empirical min eigenvalue from check_assumptions (c2_hat * n).
/// Requires c0 <= sigma_r(C*) / 2.
DescentReport check_descent_lemma(const Dataset& data, const Coefficients& truth, Index r, double c0,
                                  int trials, std::uint64_t seed, int n_probe = 8);

struct RateFit {
  std::vector<Index> n_list;
  std::vector<double> mean_errors;  // mean param_distance per n
  std::vector<double> std_errors;
  double slope = 0.0;               // of log(mean error) on log(n)
  double intercept = 0.0;
  bool degenerate = false;          // errors ~ 0, slope meaningless
  int failures = 0;
};

/// Least-squares line through (log x, log y).
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

RateFit rate_experiment(const SimulationSpec& sim, const std::vector<Index>& n_list, int reps,
                        const SolverConfig& config, std::uint64_t seed);

}  // namespace lrmr
