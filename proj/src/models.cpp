#include "lrmr/models.hpp"

#include <cmath>

namespace lrmr {

namespace {

void require_binary(const LossModel& model, double y) {
  if (model.kind == LossKind::Logistic && y != 0.0 && y != 1.0) {
    throw ArgumentError("logistic response must be 0 or 1, got " + std::to_string(y));
  }
}

double sigmoid(double f) {
  if (f >= 0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

// log(1 + e^f) without overflow.
double softplus(double f) {
  if (f > 30.0) return f + std::log1p(std::exp(-f));
  return std::log1p(std::exp(f));
}

}  // namespace

LossModel LossModel::robust(double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw ArgumentError("Huber threshold alpha must be positive, got " + std::to_string(alpha));
  }
  return {LossKind::Robust, alpha};
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Ordinary: return "ordinary";
    case LossKind::Robust: return "robust";
    case LossKind::Logistic: return "logistic";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "ordinary") return LossKind::Ordinary;
  if (name == "robust") return LossKind::Robust;
  if (name == "logistic") return LossKind::Logistic;
  throw ArgumentError("unknown model '" + std::string(name) + "' (ordinary, robust, logistic)");
}

double huber(double alpha, double t) {
  t = std::abs(t);
  return t <= alpha ? 0.5 * t * t : alpha * (t - 0.5 * alpha);
}

double loss_value(const LossModel& model, double y, double f) {
  require_binary(model, y);
  switch (model.kind) {
    case LossKind::Ordinary: return (y - f) * (y - f);
    case LossKind::Robust: return huber(model.alpha, y - f);
    case LossKind::Logistic: return softplus(f) - y * f;
  }
  return 0.0;
}

double loss_deriv(const LossModel& model, double y, double f) {
  require_binary(model, y);
  switch (model.kind) {
    case LossKind::Ordinary: return -2.0 * (y - f);
    case LossKind::Robust: {
      const double t = y - f;
      const double psi = std::abs(t) <= model.alpha ? t : std::copysign(model.alpha, t);
      return -psi;
    }
    case LossKind::Logistic: return sigmoid(f) - y;
  }
  return 0.0;
}

double curvature_weight(const LossModel& model, double y, double f) {
  require_binary(model, y);
  switch (model.kind) {
    case LossKind::Ordinary: return 2.0;
    case LossKind::Robust: return std::abs(y - f) < model.alpha ? 1.0 : 0.0;
    case LossKind::Logistic: {
      const double s = sigmoid(f);
      return s * (1.0 - s);
    }
  }
  return 0.0;
}

Dataset::Dataset(Index m, Index q, Matrix design, Matrix z, Vector y, LossModel model)
    : m_(m), q_(q), design_(std::move(design)), z_(std::move(z)), y_(std::move(y)), model_(model) {
  if (m_ < 1 || q_ < 1) throw DimensionError("dataset: matrix predictors must be at least 1x1");
  if (design_.cols() != m_ * q_) {
    throw DimensionError("dataset: design has " + std::to_string(design_.cols()) +
                         " columns, expected m*q = " + std::to_string(m_ * q_));
  }
  if (design_.rows() != y_.size() || z_.rows() != y_.size()) {
    throw DimensionError("dataset: row counts of X, Z and y disagree");
  }
  if (!design_.allFinite() || !z_.allFinite() || !y_.allFinite()) {
    throw ArgumentError("dataset: non-finite value");
  }
  if (model_.kind == LossKind::Robust && !(model_.alpha > 0)) {
    throw ArgumentError("dataset: Huber threshold must be positive");
  }
  if (model_.kind == LossKind::Logistic) {
    for (Index i = 0; i < y_.size(); ++i) {
      if (y_(i) != 0.0 && y_(i) != 1.0) {
        throw ArgumentError("dataset: logistic response " + std::to_string(i) + " is not 0/1");
      }
    }
  }
}

Dataset Dataset::from_matrices(const std::vector<Matrix>& xs, Matrix z, Vector y, LossModel model) {
  if (xs.empty()) throw DimensionError("dataset: no samples");
  const Index m = xs.front().rows();
  const Index q = xs.front().cols();
  Matrix design(static_cast<Index>(xs.size()), m * q);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].rows() != m || xs[i].cols() != q) {
      throw DimensionError("dataset: sample " + std::to_string(i) + " has a different shape");
    }
    design.row(static_cast<Index>(i)) = vec(xs[i]).transpose();
  }
  return Dataset(m, q, std::move(design), std::move(z), std::move(y), model);
}

Matrix Dataset::x(Index i) const {
  return Eigen::Map<const Matrix>(design_.row(i).eval().data(), m_, q_);
}

Dataset Dataset::subset(const std::vector<Index>& indices) const {
  const auto k = static_cast<Index>(indices.size());
  Matrix d(k, design_.cols());
  Matrix z(k, z_.cols());
  Vector y(k);
  for (Index j = 0; j < k; ++j) {
    const Index i = indices[static_cast<std::size_t>(j)];
    if (i < 0 || i >= n()) throw ArgumentError("dataset subset: index out of range");
    d.row(j) = design_.row(i);
    z.row(j) = z_.row(i);
    y(j) = y_(i);
  }
  return Dataset(m_, q_, std::move(d), std::move(z), std::move(y), model_);
}

Dataset Dataset::with_model(LossModel model) const {
  return Dataset(m_, q_, design_, z_, y_, model);
}

bool Dataset::operator==(const Dataset& o) const {
  return m_ == o.m_ && q_ == o.q_ && model_ == o.model_ && design_.rows() == o.design_.rows() &&
         z_.cols() == o.z_.cols() && design_ == o.design_ && z_ == o.z_ && y_ == o.y_;
}

Objective::Objective(const Dataset& data, double lambda) : data_(data), lambda_(lambda) {
  if (!(lambda >= 0) || !std::isfinite(lambda)) {
    throw ArgumentError("penalty weight lambda must be finite and nonnegative");
  }
}

void Objective::check_shape(const Coefficients& coeff) const {
  const Dataset& d = data();
  if (coeff.C.rows() != d.m() || coeff.C.cols() != d.q() || coeff.gamma.size() != d.p()) {
    throw DimensionError("coefficients " + detail::shape_str(coeff.C.rows(), coeff.C.cols()) + " / " +
                         std::to_string(coeff.gamma.size()) + " do not match dataset " +
                         detail::shape_str(d.m(), d.q()) + " / " + std::to_string(d.p()));
  }
}

Vector Objective::matrix_part(const Matrix& c) const { return data().design() * vec(c); }

Vector Objective::vector_part(const Vector& gamma) const { return data().z() * gamma; }

Vector Objective::predictor(const Coefficients& coeff) const {
  check_shape(coeff);
  return matrix_part(coeff.C) + vector_part(coeff.gamma);
}

double Objective::loss_sum(const Vector& f) const {
  const Dataset& d = data();
  const Vector& y = d.y();
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) total += loss_value(d.model(), y(i), f(i));
  return total;
}

double Objective::penalty(const Matrix& c) const {
  return lambda_ == 0.0 ? 0.0 : lambda_ * c.cwiseAbs().sum();
}

Vector Objective::loss_derivs(const Vector& f) const {
  const Dataset& d = data();
  Vector w(f.size());
  for (Index i = 0; i < f.size(); ++i) w(i) = loss_deriv(d.model(), d.y()(i), f(i));
  return w;
}

double objective_value(const Objective& obj, const Coefficients& coeff) {
  const double value = obj.loss_sum(obj.predictor(coeff)) + obj.penalty(coeff.C);
  if (!std::isfinite(value)) throw NumericError("objective is not finite");
  return value;
}

Coefficients gradient(const Objective& obj, const Coefficients& coeff) {
  const Dataset& d = obj.data();
  const Vector w = obj.loss_derivs(obj.predictor(coeff));
  Vector gc = d.design().transpose() * w;
  Coefficients g{Eigen::Map<Matrix>(gc.data(), d.m(), d.q()), d.z().transpose() * w};
  if (obj.lambda() != 0.0) g.C += obj.lambda() * coeff.C.array().sign().matrix();
  if (!g.all_finite()) throw NumericError("gradient is not finite");
  return g;
}

Matrix stacked_predictors(const Dataset& data) {
  Matrix s(data.n(), data.design().cols() + data.p());
  s << data.design(), data.z();
  return s;
}

Matrix hessian(const Objective& obj, const Coefficients& coeff) {
  const Dataset& d = obj.data();
  const Index dim = d.m() * d.q() + d.p();
  if (dim > kHessianCapacity) {
    throw CapacityError("hessian: dimension mq+p = " + std::to_string(dim) + " exceeds " +
                        std::to_string(kHessianCapacity));
  }
  const Vector f = obj.predictor(coeff);
  Vector w(d.n());
  for (Index i = 0; i < d.n(); ++i) w(i) = curvature_weight(d.model(), d.y()(i), f(i));
  const Matrix s = stacked_predictors(d);
  Matrix h = Matrix::Zero(dim, dim);
  // sum_i w_i s_i s_i^T; weights are nonnegative so sqrt-scaling keeps it a Gram product.
  const Matrix scaled = w.cwiseSqrt().asDiagonal() * s;
  h.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  return h;
}

}  // namespace lrmr
