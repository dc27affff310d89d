#pragma once

// Dense primitives on the parameter space R^{m x q} x R^p: trace inner
// product, truncated-SVD rank projection, product-space distance and the
// tangent / normal projectors of the fixed-rank manifold.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

#include "lrmr/errors.hpp"

namespace lrmr {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Relative threshold below which sigma_r counts as zero.
inline constexpr double kRankDeficiencyTolerance = 1e-12;

/// A point (or displacement) of the parameter space: matrix part C and
/// vector part gamma.
template <typename Scalar>
struct BasicCoefficients {
  MatrixX<Scalar> C;
  VectorX<Scalar> gamma;

  BasicCoefficients() = default;
  BasicCoefficients(MatrixX<Scalar> c, VectorX<Scalar> g) : C(std::move(c)), gamma(std::move(g)) {}

  static BasicCoefficients Zero(Index m, Index q, Index p) {
    return {MatrixX<Scalar>::Zero(m, q), VectorX<Scalar>::Zero(p)};
  }

  Index rows() const { return C.rows(); }
  Index cols() const { return C.cols(); }
  Index dim() const { return gamma.size(); }

  bool same_shape(const BasicCoefficients& o) const {
    return C.rows() == o.C.rows() && C.cols() == o.C.cols() && gamma.size() == o.gamma.size();
  }

  bool all_finite() const { return C.allFinite() && gamma.allFinite(); }
};

using Coefficients = BasicCoefficients<double>;
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

namespace detail {

inline std::string shape_str(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <typename DA, typename DB>
void require_same_shape(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                        const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + shape_str(a.rows(), a.cols()) +
                         " vs " + shape_str(b.rows(), b.cols()));
  }
}

}  // namespace detail

/// <A, B> = trace(B^T A) = sum_ij A_ij B_ij.
template <typename DA, typename DB>
typename DA::Scalar frob_inner(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  detail::require_same_shape(a, b, "frob_inner");
  return a.cwiseProduct(b).sum();
}

/// Thin SVD with a convergence check.
template <typename Derived>
Eigen::BDCSVD<MatrixX<typename Derived::Scalar>> thin_svd(const Eigen::MatrixBase<Derived>& a) {
  Eigen::BDCSVD<MatrixX<typename Derived::Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("SVD did not converge");
  return svd;
}

/// Best rank-r approximation in Frobenius norm (Eckart-Young): keeps the r
/// leading singular triplets of A.
template <typename Derived>
MatrixX<typename Derived::Scalar> project_rank(const Eigen::MatrixBase<Derived>& a, Index r) {
  const Index k = std::min(a.rows(), a.cols());
  if (r < 1 || r > k) {
    throw ArgumentError("project_rank: rank " + std::to_string(r) + " outside [1, " +
                        std::to_string(k) + "]");
  }
  if (!a.allFinite()) throw NumericError("project_rank: non-finite input");
  const auto svd = thin_svd(a);
  const auto& U = svd.matrixU();
  const auto& V = svd.matrixV();
  return U.leftCols(r) * svd.singularValues().head(r).asDiagonal() * V.leftCols(r).transpose();
}

/// Number of singular values above rel_tol * sigma_1 (0 for the zero matrix).
template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& a, double rel_tol = 1e-10) {
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<MatrixX<typename Derived::Scalar>> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0) return 0;
  return (s.array() > rel_tol * s(0)).count();
}

/// dist((C,g),(C',g')) = sqrt(||C - C'||_F^2 + ||g - g'||^2).
template <typename Scalar>
Scalar param_distance(const BasicCoefficients<Scalar>& a, const BasicCoefficients<Scalar>& b) {
  if (!a.same_shape(b)) throw DimensionError("param_distance: shape mismatch");
  return std::sqrt((a.C - b.C).squaredNorm() + (a.gamma - b.gamma).squaredNorm());
}

/// Leading rank-r singular factors of a reference point C* = U diag(sigma) V^T.
template <typename Scalar>
struct BasicTangentFrame {
  MatrixX<Scalar> U;      // m x r, orthonormal columns
  MatrixX<Scalar> V;      // q x r, orthonormal columns
  VectorX<Scalar> sigma;  // nonincreasing, sigma(r-1) > 0

  Index rank() const { return sigma.size(); }
  Index rows() const { return U.rows(); }
  Index cols() const { return V.rows(); }

  /// Curvature scale C_T = 2 / sigma_r.
  Scalar curvature_scale() const { return Scalar(2) / sigma(sigma.size() - 1); }

  MatrixX<Scalar> reconstruct() const { return U * sigma.asDiagonal() * V.transpose(); }
};

using TangentFrame = BasicTangentFrame<double>;

template <typename Derived>
BasicTangentFrame<typename Derived::Scalar> tangent_frame(const Eigen::MatrixBase<Derived>& cstar, Index r) {
  const Index k = std::min(cstar.rows(), cstar.cols());
  if (r < 1 || r > k) {
    throw ArgumentError("tangent_frame: rank " + std::to_string(r) + " outside [1, " +
                        std::to_string(k) + "]");
  }
  const auto svd = thin_svd(cstar);
  const auto& s = svd.singularValues();
  if (!(s(r - 1) > kRankDeficiencyTolerance * s(0))) {
    throw RankDeficiencyError("tangent_frame: sigma_" + std::to_string(r) + " = " +
                              std::to_string(s(r - 1)) + " is below the rank threshold");
  }
  return {svd.matrixU().leftCols(r), svd.matrixV().leftCols(r), s.head(r)};
}

enum class Subspace { Tangent, Normal };

/// Splits a displacement (D, y) at the frame's base point.
///   Normal:  ((I - UU^T) D (I - VV^T), 0)
///   Tangent: (D - normal part, y)
/// The two parts sum to (D, y) and are Frobenius-orthogonal.
template <typename Scalar, typename DD, typename DY>
BasicCoefficients<Scalar> tangent_project(const BasicTangentFrame<Scalar>& frame,
                                          const Eigen::MatrixBase<DD>& d,
                                          const Eigen::MatrixBase<DY>& y, Subspace part) {
  if (d.rows() != frame.rows() || d.cols() != frame.cols()) {
    throw DimensionError("tangent_project: displacement is " + detail::shape_str(d.rows(), d.cols()) +
                         ", frame expects " + detail::shape_str(frame.rows(), frame.cols()));
  }
  const auto& U = frame.U;
  const auto& V = frame.V;
  MatrixX<Scalar> left = d - U * (U.transpose() * d);  // (I - UU^T) D
  MatrixX<Scalar> normal = left - (left * V) * V.transpose();
  if (part == Subspace::Normal) {
    return {std::move(normal), VectorX<Scalar>::Zero(y.size())};
  }
  return {d - normal, y};
}

template <typename Scalar>
BasicCoefficients<Scalar> tangent_project(const BasicTangentFrame<Scalar>& frame,
                                          const BasicCoefficients<Scalar>& delta, Subspace part) {
  return tangent_project(frame, delta.C, delta.gamma, part);
}

/// Euclidean norm of a product-space element.
template <typename Scalar>
Scalar norm(const BasicCoefficients<Scalar>& a) {
  return std::sqrt(a.C.squaredNorm() + a.gamma.squaredNorm());
}

}  // namespace lrmr
