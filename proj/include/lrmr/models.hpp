#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "lrmr/linalg.hpp"

namespace lrmr {

enum class LossKind { Ordinary, Robust, Logistic };

/// Loss l(y, f) between a response and a linear predictor.
///   Ordinary: (y - f)^2
///   Robust:   Huber rho_alpha(|y - f|)
///   Logistic: log(1 + e^f) - y f, with y in {0, 1}
struct LossModel {
  LossKind kind = LossKind::Ordinary;
  double alpha = 1.345;  // Huber threshold; only read for Robust

  static LossModel ordinary() { return {LossKind::Ordinary, 1.345}; }
  static LossModel robust(double alpha = 1.345);
  static LossModel logistic() { return {LossKind::Logistic, 1.345}; }

  friend bool operator==(const LossModel& a, const LossModel& b) {
    return a.kind == b.kind && (a.kind != LossKind::Robust || a.alpha == b.alpha);
  }
};

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

/// Huber function rho_alpha(t) for t >= 0.
double huber(double alpha, double t);

double loss_value(const LossModel& model, double y, double f);

/// d/df of loss_value.
double loss_deriv(const LossModel& model, double y, double f);

/// Second-derivative weight w_2 entering the Gram-form Hessian:
/// 2 (Ordinary), 1{|y - f| < alpha} (Robust), e^f / (1 + e^f)^2 (Logistic).
double curvature_weight(const LossModel& model, double y, double f);

/// n samples (X_i, z_i, y_i). The matrix predictors are stored as the rows of
/// an n x (m q) design matrix; row i is the column-major vectorization of X_i,
/// so <X_i, C> = design.row(i) * vec(C).
class Dataset {
 public:
  Dataset() = default;

  /// Validates shapes, finiteness and (for Logistic) binary responses.
  Dataset(Index m, Index q, Matrix design, Matrix z, Vector y, LossModel model);

  static Dataset from_matrices(const std::vector<Matrix>& xs, Matrix z, Vector y, LossModel model);

  Index n() const { return y_.size(); }
  Index m() const { return m_; }
  Index q() const { return q_; }
  Index p() const { return z_.cols(); }

  const Matrix& design() const { return design_; }
  const Matrix& z() const { return z_; }
  const Vector& y() const { return y_; }
  const LossModel& model() const { return model_; }

  /// X_i as an m x q matrix.
  Matrix x(Index i) const;

  /// Samples at the given indices, in order.
  Dataset subset(const std::vector<Index>& indices) const;

  /// Same predictors and responses under a different loss.
  Dataset with_model(LossModel model) const;

  bool operator==(const Dataset& o) const;

 private:
  Index m_ = 0;
  Index q_ = 0;
  Matrix design_;
  Matrix z_;
  Vector y_;
  LossModel model_;
};

/// Column-major flattening of C, matching the design-matrix layout.
inline Eigen::Map<const Vector> vec(const Matrix& c) { return {c.data(), c.size()}; }

/// F(C, gamma) = sum_i l(y_i, <X_i, C> + gamma^T z_i) + lambda ||C||_1.
/// Holds a non-owning reference to the dataset.
class Objective {
 public:
  Objective(const Dataset& data, double lambda);

  const Dataset& data() const { return data_.get(); }
  double lambda() const { return lambda_; }

  /// <X_i, C> for every sample.
  Vector matrix_part(const Matrix& c) const;
  /// gamma^T z_i for every sample.
  Vector vector_part(const Vector& gamma) const;
  Vector predictor(const Coefficients& coeff) const;

  /// sum_i l(y_i, f_i) for a precomputed linear predictor f.
  double loss_sum(const Vector& f) const;
  double penalty(const Matrix& c) const;

  /// Per-sample loss derivatives l'(y_i, f_i).
  Vector loss_derivs(const Vector& f) const;

  void check_shape(const Coefficients& coeff) const;

 private:
  std::reference_wrapper<const Dataset> data_;
  double lambda_;
};

double objective_value(const Objective& obj, const Coefficients& coeff);

/// (dF/dC, dF/dgamma); the l1 subgradient is sign(C_jk), 0 at C_jk = 0.
Coefficients gradient(const Objective& obj, const Coefficients& coeff);

/// Largest mq + p for which a dense Hessian is formed.
inline constexpr Index kHessianCapacity = 4096;

/// H(C, gamma) = sum_i w_2,i vec(X_i, z_i) vec(X_i, z_i)^T, ordered as
/// [vec(C) (column-major); gamma].
Matrix hessian(const Objective& obj, const Coefficients& coeff);

/// [design | Z], the n x (mq + p) matrix of stacked vec(X_i, z_i).
Matrix stacked_predictors(const Dataset& data);

}  // namespace lrmr
