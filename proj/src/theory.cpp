#include "lrmr/theory.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lrmr/eval.hpp"
#include "lrmr/parallel.hpp"

namespace lrmr {

namespace {

Coefficients gaussian_direction(Index m, Index q, Index p, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Coefficients d = Coefficients::Zero(m, q, p);
  for (Index k = 0; k < d.C.size(); ++k) d.C.data()[k] = normal(rng);
  for (Index k = 0; k < p; ++k) d.gamma(k) = normal(rng);
  return d;
}

Coefficients scaled(const Coefficients& d, double s) { return {d.C * s, d.gamma * s}; }

Coefficients add(const Coefficients& a, const Coefficients& b) { return {a.C + b.C, a.gamma + b.gamma}; }

Coefficients sub(const Coefficients& a, const Coefficients& b) { return {a.C - b.C, a.gamma - b.gamma}; }

}  // namespace

double gram_operator_norm(const Dataset& data, std::uint64_t seed, int max_iter) {
  const Matrix s = stacked_predictors(data);
  const double n = static_cast<double>(data.n());
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(s.cols());
  for (Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
  v.normalize();

  double rayleigh = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = s.transpose() * (s * v) / n;
    const double next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (it > 0 && std::abs(next - rayleigh) <= 1e-8 * std::abs(next)) return next;
    rayleigh = next;
  }
  throw NumericError("power iteration did not converge in " + std::to_string(max_iter) + " iterations");
}

AssumptionReport check_assumptions(const Dataset& data, const Coefficients& truth, double c0, int n_probe,
                                   std::uint64_t seed) {
  if (n_probe < 1) throw ArgumentError("check_assumptions: n_probe must be positive");
  if (!(c0 > 0) || !std::isfinite(c0)) throw ArgumentError("check_assumptions: c0 must be positive");
  const Index dim = data.m() * data.q() + data.p();
  if (dim > kHessianCapacity) {
    throw CapacityError("check_assumptions: mq + p = " + std::to_string(dim) + " exceeds the Hessian capacity " +
                        std::to_string(kHessianCapacity));
  }
  const Objective obj(data, 0.0);
  obj.check_shape(truth);

  AssumptionReport rep;
  rep.c0 = c0;
  rep.c1_hat = gram_operator_norm(data, stream_seed(seed, 0));

  Rng rng(stream_seed(seed, 1));
  std::vector<Coefficients> points{truth};
  for (int k = 0; k < n_probe; ++k) {
    Coefficients d = gaussian_direction(data.m(), data.q(), data.p(), rng);
    const double len = norm(d);
    points.push_back(add(truth, scaled(d, c0 / len)));
  }

  const double n = static_cast<double>(data.n());
  std::vector<double> lo(points.size());
  std::vector<double> hi(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    const Matrix h = hessian(obj, points[k]) / n;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericError("check_assumptions: eigensolver failed");
    lo[k] = eig.eigenvalues()(0);
    hi[k] = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  });
  rep.c2_hat = *std::min_element(lo.begin(), lo.end());
  rep.c3_hat = *std::max_element(hi.begin(), hi.end());
  rep.points = static_cast<int>(points.size());
  rep.pass_c1 = std::isfinite(rep.c1_hat) && rep.c1_hat > 0;
  rep.pass_c2 = rep.c2_hat > 0;
  rep.pass_c3 = std::isfinite(rep.c3_hat) && rep.c3_hat >= rep.c2_hat;
  rep.pass = rep.pass_c1 && rep.pass_c2 && rep.pass_c3;
  return rep;
}

double curvature_ratio(const TangentFrame& frame, const Coefficients& delta) {
  const double t = norm(tangent_project(frame, delta, Subspace::Tangent));
  const double nn = norm(tangent_project(frame, delta, Subspace::Normal));
  return nn / (t * t);
}

Coefficients sample_manifold_point(const Coefficients& truth, const TangentFrame& frame, double radius,
                                   Rng& rng) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Coefficients raw = gaussian_direction(truth.rows(), truth.cols(), truth.dim(), rng);
    const Coefficients dir = tangent_project(frame, raw, Subspace::Tangent);
    const double len = norm(dir);
    if (!(len > 0)) continue;
    const Coefficients step = scaled(dir, unif(rng) * radius / len);
    Coefficients point{project_rank(truth.C + step.C, frame.rank()), truth.gamma + step.gamma};
    if (param_distance(point, truth) <= radius) return point;
  }
  throw NumericError("sample_manifold_point: no point found within the radius");
}

CurvatureReport check_curvature(const Matrix& cstar, const Vector& gamma_star, Index r, int trials,
                                std::uint64_t seed) {
  if (trials < 1) throw ArgumentError("check_curvature: trials must be positive");
  if (numerical_rank(cstar) != r) {
    throw ArgumentError("check_curvature: C* has numerical rank " + std::to_string(numerical_rank(cstar)) +
                        ", expected " + std::to_string(r));
  }
  const TangentFrame frame = tangent_frame(cstar, r);
  const Coefficients truth{cstar, gamma_star};

  CurvatureReport rep;
  rep.sigma_r = frame.sigma(r - 1);
  rep.bound = frame.curvature_scale();
  rep.trials = trials;
  const double radius = rep.sigma_r / 2.0;

  std::vector<double> ratios(static_cast<std::size_t>(trials));
  std::vector<int> resampled(static_cast<std::size_t>(trials), 0);
  parallel_for(ratios.size(), [&](std::size_t k) {
    Rng rng(replicate_seed(seed, k));
    for (;;) {
      const Coefficients point = sample_manifold_point(truth, frame, radius, rng);
      const Coefficients delta = sub(point, truth);
      if (norm(tangent_project(frame, delta, Subspace::Tangent)) < 1e-12) {
        ++resampled[k];
        continue;
      }
      ratios[k] = curvature_ratio(frame, delta);
      return;
    }
  });
  rep.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  for (int c : resampled) rep.resampled += c;
  rep.pass = rep.max_ratio <= rep.bound + 1e-9;
  return rep;
}

DescentLemma::DescentLemma(const Dataset& data, const Coefficients& truth, Index r, double c_h1)
    : data_(data), truth_(truth), frame_(tangent_frame(truth.C, r)), c_h1_(c_h1) {
  const Objective obj(data_, 0.0);
  obj.check_shape(truth_);
  f_star_ = objective_value(obj, truth_);
  const Coefficients g = gradient(obj, truth_);
  grad_t_ = norm(tangent_project(frame_, g, Subspace::Tangent));
  grad_n_ = norm(tangent_project(frame_, g, Subspace::Normal));
}

DescentLemma::Terms DescentLemma::terms(const Coefficients& point) const {
  const Objective obj(data_, 0.0);
  Terms t;
  t.b = param_distance(point, truth_);
  t.lhs = objective_value(obj, point) - f_star_;
  t.rhs = 0.5 * t.b * t.b * c_h1_ - t.b * grad_t_ - frame_.curvature_scale() * t.b * t.b * grad_n_;
  return t;
}

DescentReport check_descent_lemma(const Dataset& data, const Coefficients& truth, Index r, double c0,
                                  int trials, std::uint64_t seed, int n_probe) {
  if (trials < 1) throw ArgumentError("check_descent_lemma: trials must be positive");
  const AssumptionReport assumptions = check_assumptions(data, truth, c0, n_probe, stream_seed(seed, 0));
  DescentReport rep;
  rep.c0 = c0;
  rep.trials = trials;
  rep.c_h1 = std::max(0.0, assumptions.c2_hat) * static_cast<double>(data.n());

  const DescentLemma lemma(data, truth, r, rep.c_h1);
  const double sigma_r = lemma.frame().sigma(r - 1);
  if (c0 > sigma_r / 2.0 * (1.0 + 1e-12)) {
    throw ArgumentError("check_descent_lemma: c0 must not exceed sigma_r(C*) / 2 = " + std::to_string(sigma_r / 2.0));
  }
  rep.tolerance = 1e-6 * std::abs(lemma.f_star());

  std::vector<double> slack(static_cast<std::size_t>(trials));
  parallel_for(slack.size(), [&](std::size_t k) {
    Rng rng(stream_seed(seed, k + 1));
    const Coefficients point = sample_manifold_point(truth, lemma.frame(), c0, rng);
    const auto t = lemma.terms(point);
    slack[k] = t.lhs - t.rhs;
  });
  rep.worst_slack = *std::min_element(slack.begin(), slack.end());
  rep.pass = rep.worst_slack >= -rep.tolerance;
  return rep;
}

std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("loglog_fit: need at least two matching points");
  const Index k = static_cast<Index>(x.size());
  Matrix a(k, 2);
  Vector b(k);
  for (Index i = 0; i < k; ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw ArgumentError("loglog_fit: values must be positive");
    a(i, 0) = std::log(x[i]);
    a(i, 1) = 1.0;
    b(i) = std::log(y[i]);
  }
  const Vector sol = a.colPivHouseholderQr().solve(b);
  return {sol(0), sol(1)};
}

RateFit rate_experiment(const SimulationSpec& sim, const std::vector<Index>& n_list, int reps,
                        const SolverConfig& config, std::uint64_t seed) {
  if (n_list.size() < 3) throw ArgumentError("rate_experiment: need at least 3 sample sizes");
  if (reps < 3) throw ArgumentError("rate_experiment: need at least 3 replications");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw ArgumentError("rate_experiment: sample sizes must be positive and strictly increasing");
    }
  }

  const std::size_t cells = n_list.size() * static_cast<std::size_t>(reps);
  std::vector<double> errors(cells, std::numeric_limits<double>::quiet_NaN());
  parallel_for(cells, [&](std::size_t idx) {
    const std::size_t ni = idx / static_cast<std::size_t>(reps);
    const std::size_t rep = idx % static_cast<std::size_t>(reps);
    const std::uint64_t rep_seed = stream_seed(seed, rep);
    try {
      const Coefficients truth = make_truth(sim, rep_seed);
      const Dataset data = sample_dataset(truth.C, truth.gamma, n_list[ni], sim.noise, sim.model,
                                          stream_seed(rep_seed, ni + 1));
      const FitResult r = fit(data, config);
      errors[idx] = param_distance(r.coefficients, truth);
    } catch (const Error&) {
      // recorded as NaN
    }
  });

  RateFit out;
  out.n_list = n_list;
  std::vector<double> ns;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    std::vector<double> ok;
    for (int rep = 0; rep < reps; ++rep) {
      const double e = errors[ni * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep)];
      if (std::isfinite(e)) {
        ok.push_back(e);
      } else {
        ++out.failures;
      }
    }
    if (ok.empty()) {
      throw NumericError("rate_experiment: every replication failed at n = " + std::to_string(n_list[ni]));
    }
    const Summary s = summarize(ok);
    out.mean_errors.push_back(s.mean);
    out.std_errors.push_back(s.std);
    ns.push_back(static_cast<double>(n_list[ni]));
  }

  const double largest = *std::max_element(out.mean_errors.begin(), out.mean_errors.end());
  const double smallest = *std::min_element(out.mean_errors.begin(), out.mean_errors.end());
  if (largest < 1e-8 || smallest <= 0.0) {
    out.degenerate = true;
    return out;
  }
  std::tie(out.slope, out.intercept) = loglog_fit(ns, out.mean_errors);
  return out;
}

}  // namespace lrmr
