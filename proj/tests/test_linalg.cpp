#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <random>

#include "lrmr/linalg.hpp"

namespace lrmr {
namespace {

Matrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix a(r, c);
  for (Index k = 0; k < a.size(); ++k) a.data()[k] = normal(rng);
  return a;
}

// Squared singular values from the symmetric eigenproblem of A^T A, an
// oracle independent of the SVD used by project_rank.
Vector squared_singular_values(const Matrix& a) {
  const Matrix g = a.rows() >= a.cols() ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  Vector ev = eig.eigenvalues().reverse();  // descending
  return ev.cwiseMax(0.0);
}

TEST(FrobInner, IdentityGivesTrace) {
  EXPECT_DOUBLE_EQ(frob_inner(Matrix::Identity(2, 2), Matrix::Identity(2, 2)), 2.0);
}

TEST(FrobInner, ZeroOperand) {
  std::mt19937_64 rng(1);
  EXPECT_DOUBLE_EQ(frob_inner(random_matrix(3, 4, rng), Matrix::Zero(3, 4)), 0.0);
}

TEST(FrobInner, HandComputedValue) {
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 5, 6, 7, 8;
  EXPECT_DOUBLE_EQ(frob_inner(a, b), 70.0);
  EXPECT_DOUBLE_EQ(frob_inner(a, b), (b.transpose() * a).trace());
}

TEST(FrobInner, ShapeMismatchThrows) {
  EXPECT_THROW(frob_inner(Matrix::Zero(2, 3), Matrix::Zero(3, 2)), DimensionError);
}

TEST(ProjectRank, DiagonalTruncation) {
  Matrix d = Vector::LinSpaced(3, 3.0, 1.0).asDiagonal();
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = 3;
  expected(1, 1) = 2;
  EXPECT_LT((project_rank(d, 2) - expected).norm(), 1e-12);
}

TEST(ProjectRank, RankRInputIsFixed) {
  std::mt19937_64 rng(2);
  const Matrix a = random_matrix(7, 2, rng) * random_matrix(2, 5, rng);
  EXPECT_LT((project_rank(a, 2) - a).norm(), 1e-10 * a.norm());
}

TEST(ProjectRank, TailSumSixByFive) {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(6, 5, rng);
  const Vector s2 = squared_singular_values(a);
  const double tail = s2(2) + s2(3) + s2(4);
  EXPECT_NEAR((a - project_rank(a, 2)).squaredNorm(), tail, 1e-10 * a.squaredNorm());
}

TEST(ProjectRank, EckartYoungEveryRank) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    std::uniform_int_distribution<int> dim(1, 12);
    const Matrix a = random_matrix(dim(rng), dim(rng), rng);
    const Vector s2 = squared_singular_values(a);
    for (Index r = 1; r <= std::min(a.rows(), a.cols()); ++r) {
      const double tail = s2.tail(s2.size() - r).sum();
      EXPECT_NEAR((a - project_rank(a, r)).squaredNorm(), tail, 1e-9 * a.squaredNorm());
    }
  }
}

TEST(ProjectRank, Idempotent) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const Matrix a = random_matrix(8, 6, rng);
    const Matrix p = project_rank(a, 3);
    EXPECT_LT((project_rank(p, 3) - p).norm(), 1e-10 * p.norm());
  }
}

TEST(ProjectRank, OutOfRangeRankThrows) {
  EXPECT_THROW(project_rank(Matrix::Ones(3, 4), 0), ArgumentError);
  EXPECT_THROW(project_rank(Matrix::Ones(3, 4), 4), ArgumentError);
}

TEST(ProjectRank, NonFiniteThrows) {
  Matrix a = Matrix::Ones(3, 3);
  a(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(project_rank(a, 1), NumericError);
}

TEST(ProjectRank, WorksInSinglePrecision) {
  Eigen::MatrixXf a = Eigen::MatrixXf::Zero(3, 3);
  a(0, 0) = 3;
  a(1, 1) = 1;
  const Eigen::MatrixXf p = project_rank(a, 1);
  EXPECT_FLOAT_EQ(p(0, 0), 3.0f);
  EXPECT_FLOAT_EQ(p(1, 1), 0.0f);
}

TEST(ParamDistance, SelfIsZero) {
  std::mt19937_64 rng(6);
  const Coefficients x{random_matrix(3, 4, rng), Vector::Ones(2)};
  EXPECT_EQ(param_distance(x, x), 0.0);
}

TEST(ParamDistance, IdentityAndUnitVector) {
  const Coefficients a = Coefficients::Zero(2, 2, 1);
  const Coefficients b{Matrix::Identity(2, 2), Vector::Ones(1)};
  EXPECT_DOUBLE_EQ(param_distance(a, b), std::sqrt(3.0));
}

TEST(ParamDistance, MatchesFlattenedNorm) {
  std::mt19937_64 rng(7);
  const Coefficients a{random_matrix(4, 3, rng), random_matrix(3, 1, rng).col(0)};
  const Coefficients b{random_matrix(4, 3, rng), random_matrix(3, 1, rng).col(0)};
  double ss = 0.0;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) ss += std::pow(a.C(i, j) - b.C(i, j), 2);
  for (Index k = 0; k < 3; ++k) ss += std::pow(a.gamma(k) - b.gamma(k), 2);
  EXPECT_NEAR(param_distance(a, b), std::sqrt(ss), 1e-13);
  EXPECT_DOUBLE_EQ(param_distance(a, b), param_distance(b, a));
}

TEST(ParamDistance, TriangleInequality) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const Coefficients a{random_matrix(3, 3, rng), random_matrix(2, 1, rng).col(0)};
    const Coefficients b{random_matrix(3, 3, rng), random_matrix(2, 1, rng).col(0)};
    const Coefficients c{random_matrix(3, 3, rng), random_matrix(2, 1, rng).col(0)};
    EXPECT_LE(param_distance(a, c), param_distance(a, b) + param_distance(b, c) + 1e-12);
  }
}

TEST(ParamDistance, ShapeMismatchThrows) {
  EXPECT_THROW(param_distance(Coefficients::Zero(2, 2, 1), Coefficients::Zero(2, 2, 2)), DimensionError);
}

TEST(TangentFrame, DiagonalSingularValues) {
  const Matrix d = Vector::LinSpaced(3, 3.0, 1.0).asDiagonal();
  const TangentFrame f = tangent_frame(d, 3);
  EXPECT_NEAR(f.sigma(0), 3.0, 1e-12);
  EXPECT_NEAR(f.sigma(1), 2.0, 1e-12);
  EXPECT_NEAR(f.sigma(2), 1.0, 1e-12);
  EXPECT_NEAR(f.curvature_scale(), 2.0, 1e-12);
}

TEST(TangentFrame, RankOneFactorsUpToSign) {
  Vector u(3), v(2);
  u << 1, 2, 2;
  v << 3, 4;
  const TangentFrame f = tangent_frame(Matrix(u * v.transpose()), 1);
  EXPECT_NEAR(std::abs(f.U.col(0).dot(u.normalized())), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(f.V.col(0).dot(v.normalized())), 1.0, 1e-12);
  EXPECT_NEAR(f.sigma(0), u.norm() * v.norm(), 1e-12);
}

TEST(TangentFrame, ReconstructionAndOrthonormality) {
  std::mt19937_64 rng(9);
  const Matrix c = random_matrix(6, 2, rng) * random_matrix(2, 5, rng);
  const TangentFrame f = tangent_frame(c, 2);
  EXPECT_LT((f.reconstruct() - c).norm(), 1e-8);
  EXPECT_LT((f.U.transpose() * f.U - Matrix::Identity(2, 2)).norm(), 1e-10);
  EXPECT_LT((f.V.transpose() * f.V - Matrix::Identity(2, 2)).norm(), 1e-10);
  EXPECT_GE(f.sigma(0), f.sigma(1));
}

TEST(TangentFrame, RankDeficientThrows) {
  Vector u = Vector::Ones(4);
  const Matrix c = u * u.transpose();
  EXPECT_THROW(tangent_frame(c, 2), RankDeficiencyError);
}

class TangentProjectTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(10);
    cstar = random_matrix(7, 3, rng) * random_matrix(3, 5, rng);
    frame = tangent_frame(cstar, 3);
    d = random_matrix(7, 5, rng);
    y = random_matrix(4, 1, rng).col(0);
  }
  Matrix cstar;
  TangentFrame frame;
  Matrix d;
  Vector y;
};

TEST_F(TangentProjectTest, PartsSumToInput) {
  const Coefficients t = tangent_project(frame, d, y, Subspace::Tangent);
  const Coefficients n = tangent_project(frame, d, y, Subspace::Normal);
  EXPECT_LT((t.C + n.C - d).norm(), 1e-12);
  EXPECT_LT((t.gamma + n.gamma - y).norm(), 1e-12);
  EXPECT_EQ(n.gamma.norm(), 0.0);
}

TEST_F(TangentProjectTest, NormalPartVanishesOnSpanUV) {
  std::mt19937_64 rng(11);
  const Matrix inside = frame.U * random_matrix(3, 3, rng) * frame.V.transpose();
  EXPECT_LT(tangent_project(frame, inside, y, Subspace::Normal).C.norm(), 1e-12);
}

TEST_F(TangentProjectTest, PartsAreOrthogonal) {
  const Coefficients t = tangent_project(frame, d, y, Subspace::Tangent);
  const Coefficients n = tangent_project(frame, d, y, Subspace::Normal);
  EXPECT_NEAR(frob_inner(t.C, n.C) + t.gamma.dot(n.gamma), 0.0, 1e-10);
}

TEST_F(TangentProjectTest, ProjectorsAreIdempotentAndComplementary) {
  const Coefficients t = tangent_project(frame, d, y, Subspace::Tangent);
  const Coefficients n = tangent_project(frame, d, y, Subspace::Normal);
  const Coefficients tt = tangent_project(frame, t, Subspace::Tangent);
  const Coefficients nn = tangent_project(frame, n, Subspace::Normal);
  EXPECT_LT((tt.C - t.C).norm() + (tt.gamma - t.gamma).norm(), 1e-10);
  EXPECT_LT((nn.C - n.C).norm(), 1e-10);
  EXPECT_LT(tangent_project(frame, t, Subspace::Normal).C.norm(), 1e-10);
  EXPECT_LT(tangent_project(frame, n, Subspace::Tangent).C.norm(), 1e-10);
}

TEST_F(TangentProjectTest, ShapeMismatchThrows) {
  EXPECT_THROW(tangent_project(frame, Matrix::Zero(5, 7), y, Subspace::Tangent), DimensionError);
}

TEST(NumericalRank, CountsAboveThreshold) {
  EXPECT_EQ(numerical_rank(Matrix::Zero(3, 3)), 0);
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 1e-12;
  EXPECT_EQ(numerical_rank(d), 1);
  d(1, 1) = 1e-3;
  EXPECT_EQ(numerical_rank(d), 2);
}

}  // namespace
}  // namespace lrmr
