#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>

#include "lrmr/models.hpp"

namespace lrmr {

/// Pseudo-random engine used by every generator: 64-bit Mersenne twister
/// seeded with a single 64-bit integer.
using Rng = std::mt19937_64;

/// Seed of replicate `index` derived from a base seed (base XOR index).
inline std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t index) { return base ^ index; }

/// Independent sub-stream seed (splitmix64 finalizer of base + stream).
std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream);

enum class ShapeKind { Square, T, Cross, Triangle, Circle, Butterfly };

std::string_view to_string(ShapeKind kind);
ShapeKind parse_shape_kind(std::string_view name);

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Square;
  Index g = 64;  // grid side, >= 8
};

/// g x g binary image. With 1-based indices i, j:
///   Square    1 on [ceil(g/3), floor(2g/3)]^2 (g = 30 gives 10..20)
///   T         top bar rows [g/8, g/8 + g/6), full width, plus a central
///             stem of width g/6 from the bar down to row 7g/8
///   Cross     central row band and central column band, width g/6 each
///   Triangle  filled isoceles triangle, apex (g/8, g/2), base row 7g/8
///   Circle    (i - g/2)^2 + (j - g/2)^2 <= (g/4)^2
///   Butterfly two horizontally opposed triangles meeting at the centre
Matrix make_shape(const ShapeSpec& spec);

struct SyntheticSpec {
  Index m = 64;
  Index q = 64;
  Index r = 1;
  double s = 0.01;  // target fraction of nonzero entries
  Vector gamma_star = Vector::Ones(5);

  void validate() const;
  /// Bernoulli probability of each factor entry, sqrt(1 - (1 - s)^(1/r)).
  double entry_probability() const;
};

/// C* = C1 C2^T with C1 in {0,1}^{m x r}, C2 in {0,1}^{q x r}.
Matrix make_lowrank_sparse(const SyntheticSpec& spec, std::uint64_t seed);

/// A true signal: a 2D shape or a random low-rank sparse matrix.
using SignalSpec = std::variant<ShapeSpec, SyntheticSpec>;

Matrix make_signal(const SignalSpec& spec, std::uint64_t seed);

struct GaussianNoise {
  double sigma = 1.0;
};
/// With probability p the error is N(0, sigma_out^2), otherwise N(0, sigma^2).
struct ContaminatedNoise {
  double p = 0.1;
  double sigma = 1.0;
  double sigma_out = 100.0;
};
struct CauchyNoise {};

using NoiseSpec = std::variant<GaussianNoise, ContaminatedNoise, CauchyNoise>;

void validate(const NoiseSpec& noise);

/// "gaussian:SIGMA", "contaminated:P[:SIGMA[:SIGMA_OUT]]", "cauchy", or
/// "none" (returns nullopt).
std::optional<NoiseSpec> parse_noise(std::string_view text);
std::string to_string(const std::optional<NoiseSpec>& noise);

double sample_noise(const NoiseSpec& noise, Rng& rng);

/// n i.i.d. samples with standard normal X and z entries. Ordinary/Robust
/// responses are <X, C*> + gamma*^T z + eps; Logistic responses are
/// Bernoulli(sigmoid(<X, C*> + gamma*^T z)) and ignore `noise` (a warning is
/// written to std::clog when one is given).
Dataset sample_dataset(const Matrix& cstar, const Vector& gamma_star, Index n,
                       const std::optional<NoiseSpec>& noise, const LossModel& model,
                       std::uint64_t seed);

/// Everything needed to simulate one replicate: signal, gamma*, noise and loss.
struct SimulationSpec {
  SignalSpec signal = ShapeSpec{};
  /// Overrides gamma*; defaults to SyntheticSpec::gamma_star, or ones(5) for shapes.
  std::optional<Vector> gamma_star;
  std::optional<NoiseSpec> noise = GaussianNoise{1.0};
  LossModel model = LossModel::ordinary();

  Vector resolved_gamma_star() const;
};

/// (C*, gamma*) of a replicate; synthetic signals draw C* from `seed`.
Coefficients make_truth(const SimulationSpec& spec, std::uint64_t seed);

}  // namespace lrmr
