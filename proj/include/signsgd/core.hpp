#ifndef SIGNSGD_CORE_HPP
#define SIGNSGD_CORE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace signsgd {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Point or gradient in R^d.
using Vector = VectorX<double>;

/// Entries in {-1, 0, +1}. Stored as bytes; the communication layer
/// charges one bit per coordinate independently of this width.
using SignVector = VectorX<std::int8_t>;

/// Seedable generator threaded explicitly through every stochastic
/// operation. The engine is std::mt19937_64, whose output sequence is
/// fixed by the standard; the uniform and normal transforms are
/// implemented here so that sample sequences are identical across
/// standard library implementations.
class RandomSource {
public:
  explicit RandomSource(std::uint64_t seed);

  /// Independent stream for (seed, stream id), mixed with splitmix64.
  static RandomSource derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via the Box-Muller transform; the second variate of
  /// each pair is cached and returned by the next call.
  double normal();

  /// Uniform integer on the closed range [lo, hi].
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

/// Element-wise signum with sign(0) = 0.
template <typename Derived>
SignVector sign(const Eigen::MatrixBase<Derived>& v) {
  require_finite(v, "sign");
  SignVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto t = v(i);
    out(i) = static_cast<std::int8_t>((t > 0) - (t < 0));
  }
  return out;
}

/// Randomized sign: coordinate i is +1 with probability
/// 1/2 + v_i / (2 ||v||_2) and -1 otherwise. The zero vector maps to zero.
/// One uniform is drawn per coordinate for nonzero v; none for v = 0.
template <typename Derived>
SignVector stochastic_sign(const Eigen::MatrixBase<Derived>& v, RandomSource& rng) {
  require_finite(v, "stochastic_sign");
  SignVector out = SignVector::Zero(v.size());
  const double norm = static_cast<double>(v.norm());
  if (norm == 0.0) {
    return out;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double p_plus = 0.5 + 0.5 * static_cast<double>(v(i)) / norm;
    out(i) = rng.uniform() < p_plus ? std::int8_t{1} : std::int8_t{-1};
  }
  return out;
}

/// Probability that stochastic_sign(v)_i = +1, in closed form.
template <typename Derived>
Vector stochastic_sign_plus_probability(const Eigen::MatrixBase<Derived>& v) {
  const double norm = static_cast<double>(v.norm());
  if (norm == 0.0) {
    return Vector::Zero(v.size());
  }
  return (0.5 + 0.5 * v.template cast<double>().array() / norm).matrix();
}

/// Coordinate-wise sum of the votes as integers in [-M, M].
VectorX<int> sum_votes(std::span<const SignVector> signs);

/// sign of the coordinate-wise vote sum; a tied (zero) sum yields 0.
SignVector majority_vote(std::span<const SignVector> signs);

inline Vector to_dense(const SignVector& s) { return s.cast<double>(); }

}  // namespace signsgd

#endif  // SIGNSGD_CORE_HPP
