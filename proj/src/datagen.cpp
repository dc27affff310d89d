#include "lrmr/datagen.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>
#include <vector>

namespace lrmr {

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Square: return "square";
    case ShapeKind::T: return "t";
    case ShapeKind::Cross: return "cross";
    case ShapeKind::Triangle: return "triangle";
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Butterfly: return "butterfly";
  }
  return "unknown";
}

ShapeKind parse_shape_kind(std::string_view name) {
  for (auto k : {ShapeKind::Square, ShapeKind::T, ShapeKind::Cross, ShapeKind::Triangle,
                 ShapeKind::Circle, ShapeKind::Butterfly}) {
    if (name == to_string(k)) return k;
  }
  throw ArgumentError("unknown shape '" + std::string(name) +
                      "' (square, t, cross, triangle, circle, butterfly)");
}

Matrix make_shape(const ShapeSpec& spec) {
  const Index g = spec.g;
  if (g < 8) throw ArgumentError("shape grid must be at least 8, got " + std::to_string(g));
  const double gd = static_cast<double>(g);

  // Central band of width g/6, 1-based [band_lo, band_hi].
  const Index width = std::max<Index>(1, g / 6);
  const Index band_lo = (g - width) / 2 + 1;
  const Index band_hi = band_lo + width - 1;
  auto in_band = [&](Index k) { return k >= band_lo && k <= band_hi; };

  Matrix c = Matrix::Zero(g, g);
  for (Index i = 1; i <= g; ++i) {
    for (Index j = 1; j <= g; ++j) {
      const double di = static_cast<double>(i);
      const double dj = static_cast<double>(j);
      bool on = false;
      switch (spec.kind) {
        case ShapeKind::Square: {
          const Index lo = (g + 2) / 3;  // ceil(g/3)
          const Index hi = (2 * g) / 3;
          on = i >= lo && i <= hi && j >= lo && j <= hi;
          break;
        }
        case ShapeKind::T: {
          const Index top = std::max<Index>(1, g / 8);
          const Index bottom = (7 * g) / 8;
          const bool bar = i >= top && i < top + width;
          const bool stem = in_band(j) && i >= top && i <= bottom;
          on = bar || stem;
          break;
        }
        case ShapeKind::Cross:
          on = in_band(i) || in_band(j);
          break;
        case ShapeKind::Triangle: {
          const double top = gd / 8.0;
          const double bottom = 7.0 * gd / 8.0;
          if (di >= top && di <= bottom) {
            const double half = (di - top) / (bottom - top) * (3.0 * gd / 8.0);
            on = std::abs(dj - gd / 2.0) <= half;
          }
          break;
        }
        case ShapeKind::Circle: {
          const double r = gd / 4.0;
          on = (di - gd / 2.0) * (di - gd / 2.0) + (dj - gd / 2.0) * (dj - gd / 2.0) <= r * r;
          break;
        }
        case ShapeKind::Butterfly: {
          const double h = std::abs(dj - gd / 2.0);
          on = h <= 3.0 * gd / 8.0 && std::abs(di - gd / 2.0) <= h;
          break;
        }
      }
      if (on) c(i - 1, j - 1) = 1.0;
    }
  }
  return c;
}

void SyntheticSpec::validate() const {
  if (m < 1 || q < 1) throw ArgumentError("synthetic: m and q must be positive");
  if (r < 1 || r > std::min(m, q)) throw ArgumentError("synthetic: r must lie in [1, min(m, q)]");
  if (!(s > 0 && s < 1)) throw ArgumentError("synthetic: s must lie in (0, 1)");
  if (gamma_star.size() < 1) throw ArgumentError("synthetic: gamma* must be nonempty");
}

double SyntheticSpec::entry_probability() const {
  return std::sqrt(1.0 - std::pow(1.0 - s, 1.0 / static_cast<double>(r)));
}

Matrix make_lowrank_sparse(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::bernoulli_distribution coin(spec.entry_probability());
  Matrix c1(spec.m, spec.r);
  Matrix c2(spec.q, spec.r);
  for (Index k = 0; k < c1.size(); ++k) c1.data()[k] = coin(rng) ? 1.0 : 0.0;
  for (Index k = 0; k < c2.size(); ++k) c2.data()[k] = coin(rng) ? 1.0 : 0.0;
  return c1 * c2.transpose();
}

Matrix make_signal(const SignalSpec& spec, std::uint64_t seed) {
  if (const auto* shape = std::get_if<ShapeSpec>(&spec)) return make_shape(*shape);
  return make_lowrank_sparse(std::get<SyntheticSpec>(spec), seed);
}

void validate(const NoiseSpec& noise) {
  if (const auto* g = std::get_if<GaussianNoise>(&noise)) {
    if (!(g->sigma > 0)) throw ArgumentError("gaussian noise: sigma must be positive");
  } else if (const auto* c = std::get_if<ContaminatedNoise>(&noise)) {
    if (!(c->sigma > 0) || !(c->sigma_out > 0)) throw ArgumentError("contaminated noise: scales must be positive");
    if (!(c->p >= 0 && c->p <= 0.5)) throw ArgumentError("contaminated noise: p must lie in [0, 0.5]");
  }
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

double to_double(const std::string& s, std::string_view context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("invalid number '" + s + "' in " + std::string(context));
  }
}

}  // namespace

std::optional<NoiseSpec> parse_noise(std::string_view text) {
  const auto parts = split(text, ':');
  const std::string& kind = parts.front();
  std::optional<NoiseSpec> out;
  if (kind == "none" && parts.size() == 1) return std::nullopt;
  if (kind == "cauchy" && parts.size() == 1) {
    out = CauchyNoise{};
  } else if (kind == "gaussian" && parts.size() <= 2) {
    out = GaussianNoise{parts.size() == 2 ? to_double(parts[1], text) : 1.0};
  } else if (kind == "contaminated" && parts.size() >= 2 && parts.size() <= 4) {
    ContaminatedNoise c;
    c.p = to_double(parts[1], text);
    if (parts.size() >= 3) c.sigma = to_double(parts[2], text);
    if (parts.size() == 4) c.sigma_out = to_double(parts[3], text);
    out = c;
  } else {
    throw ArgumentError("invalid noise spec '" + std::string(text) +
                        "' (gaussian:S, contaminated:P[:S[:S_OUT]], cauchy, none)");
  }
  validate(*out);
  return out;
}

std::string to_string(const std::optional<NoiseSpec>& noise) {
  if (!noise) return "none";
  std::ostringstream os;
  os.precision(17);
  if (const auto* g = std::get_if<GaussianNoise>(&*noise)) {
    os << "gaussian:" << g->sigma;
  } else if (const auto* c = std::get_if<ContaminatedNoise>(&*noise)) {
    os << "contaminated:" << c->p << ':' << c->sigma << ':' << c->sigma_out;
  } else {
    os << "cauchy";
  }
  return os.str();
}

double sample_noise(const NoiseSpec& noise, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  if (const auto* g = std::get_if<GaussianNoise>(&noise)) return g->sigma * normal(rng);
  if (const auto* c = std::get_if<ContaminatedNoise>(&noise)) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const bool outlier = unif(rng) < c->p;
    return (outlier ? c->sigma_out : c->sigma) * normal(rng);
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return std::tan(std::numbers::pi * (unif(rng) - 0.5));
}

Dataset sample_dataset(const Matrix& cstar, const Vector& gamma_star, Index n,
                       const std::optional<NoiseSpec>& noise, const LossModel& model,
                       std::uint64_t seed) {
  if (n < 1) throw ArgumentError("sample_dataset: n must be positive");
  if (!cstar.allFinite() || !gamma_star.allFinite()) throw ArgumentError("sample_dataset: non-finite truth");
  if (noise) validate(*noise);
  if (model.kind == LossKind::Logistic && noise) {
    std::clog << "warning: logistic responses ignore the noise spec '" << to_string(noise) << "'\n";
  }

  const Index m = cstar.rows();
  const Index q = cstar.cols();
  const Index p = gamma_star.size();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Matrix design(n, m * q);
  Matrix z(n, p);
  Vector y(n);
  const Vector cvec = vec(cstar);
  Vector row(m * q);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < m * q; ++k) row(k) = normal(rng);
    for (Index k = 0; k < p; ++k) z(i, k) = normal(rng);
    design.row(i) = row.transpose();
    const double theta = row.dot(cvec) + z.row(i).dot(gamma_star);
    if (model.kind == LossKind::Logistic) {
      const double prob = 1.0 / (1.0 + std::exp(-theta));
      y(i) = unif(rng) < prob ? 1.0 : 0.0;
    } else {
      y(i) = theta + (noise ? sample_noise(*noise, rng) : 0.0);
    }
  }
  return Dataset(m, q, std::move(design), std::move(z), std::move(y), model);
}

Vector SimulationSpec::resolved_gamma_star() const {
  if (gamma_star) return *gamma_star;
  if (const auto* syn = std::get_if<SyntheticSpec>(&signal)) return syn->gamma_star;
  return Vector::Ones(5);
}

Coefficients make_truth(const SimulationSpec& spec, std::uint64_t seed) {
  return {make_signal(spec.signal, seed), spec.resolved_gamma_star()};
}

}  // namespace lrmr
