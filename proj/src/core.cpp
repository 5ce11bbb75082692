#include "signsgd/core.hpp"

#include <limits>
#include <numbers>

namespace signsgd {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : engine_(seed), seed_(seed) {}

RandomSource RandomSource::derive(std::uint64_t seed, std::uint64_t stream) {
  return RandomSource(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

double RandomSource::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomSource::normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::uint64_t RandomSource::uniform_int(std::uint64_t lo, std::uint64_t hi) {
  if (hi < lo) {
    throw std::invalid_argument("uniform_int: empty range");
  }
  const std::uint64_t span = hi - lo;
  if (span == std::numeric_limits<std::uint64_t>::max()) {
    return engine_();
  }
  const std::uint64_t range = span + 1;
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t r = engine_();
  while (r >= limit) {
    r = engine_();
  }
  return lo + r % range;
}

VectorX<int> sum_votes(std::span<const SignVector> signs) {
  if (signs.empty()) {
    throw std::invalid_argument("majority_vote: empty vote list");
  }
  const Eigen::Index dim = signs.front().size();
  VectorX<int> total = VectorX<int>::Zero(dim);
  for (const auto& s : signs) {
    if (s.size() != dim) {
      throw std::invalid_argument("majority_vote: dimension mismatch");
    }
    total += s.cast<int>();
  }
  return total;
}

SignVector majority_vote(std::span<const SignVector> signs) {
  const VectorX<int> total = sum_votes(signs);
  SignVector out(total.size());
  for (Eigen::Index i = 0; i < total.size(); ++i) {
    out(i) = static_cast<std::int8_t>((total(i) > 0) - (total(i) < 0));
  }
  return out;
}

}  // namespace signsgd
