#ifndef SIGNSGD_PROBES_HPP
#define SIGNSGD_PROBES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "signsgd/core.hpp"
#include "signsgd/optimizers.hpp"
#include "signsgd/problems.hpp"
#include "signsgd/special.hpp"

namespace signsgd {

inline constexpr double kDefaultConfidence = 3.0;

/// z sqrt(p (1 - p) / N).
double binomial_half_width(double p, std::int64_t samples, double z = kDefaultConfidence);

/// Monte-Carlo estimate of P(sign ghat_i(x) = sign g_i(x)) from N oracle
/// draws. Coordinates with g_i = 0 are marked undefined and carry NaN.
SuccessProbabilityVector estimate_success_probabilities(const StochasticOracle& oracle, const Vector& x,
                                                        std::int64_t samples, RandomSource& rng,
                                                        double z = kDefaultConfidence);

/// Per-coordinate sample mean, unbiased variance and mean absolute cubed
/// deviation E|X - mean|^3.
std::vector<MomentEstimates> estimate_moments(const StochasticOracle& oracle, const Vector& x,
                                              std::int64_t samples, RandomSource& rng);

struct BoundComparison {
  std::string bound;
  Eigen::Index coordinate = 0;
  double value = 0.0;      // lower bound on the success probability
  double empirical = 0.0;  // estimated success probability
  double margin = 0.0;     // empirical + half_width - value
  bool holds = false;
};

struct ProbeReport {
  Vector point;
  Vector gradient;
  SuccessProbabilityVector rho;
  std::vector<MomentEstimates> moments;
  std::int64_t samples = 0;
  double z = kDefaultConfidence;
  std::vector<BoundComparison> comparisons;
};

/// Estimates success probabilities and moments at x from one shared set
/// of N draws, and compares the estimates with the Gauss, improved Gauss,
/// Chebyshev and CLT lower bounds evaluated at the estimated moments
/// (mini-batch size 1 relative to the oracle). The Gauss-type bounds
/// presume unbiased unimodal symmetric noise and are reported for every
/// oracle regardless.
ProbeReport probe_point(const StochasticOracle& oracle, const Vector& x, std::int64_t samples,
                        RandomSource& rng, double z = kDefaultConfidence);

// ---------------------------------------------------------------------------
// Right-hand sides of the convergence rates. Logarithms are natural.

/// (f0 - f*) / (gamma0 sqrt K) + (3 gamma0 d Lbar / 2) log K / sqrt K.
double rate_rhs_theorem1(double f0_minus_fstar, double gamma0, double dim, double mean_smoothness,
                         std::int64_t iterations);

/// (f0 - f*) / (gamma K) + gamma d Lbar / 2.
double rate_rhs_constant_step(double f0_minus_fstar, double gamma, double dim, double mean_smoothness,
                              std::int64_t iterations);

/// (1 / sqrt K) [(f0 - f*) / gamma0 + gamma0 d Lbar].
double rate_rhs_theorem2(double f0_minus_fstar, double gamma0, double dim, double mean_smoothness,
                         std::int64_t iterations);

/// K^(-1/4) [3 delta_f + 16 sigma~ + 8 L~ sqrt d + 3 L~ d / sqrt K].
double rate_rhs_theorem4(double delta_f, double sigma_tilde, double l_tilde, double dim,
                         std::int64_t iterations);

// ---------------------------------------------------------------------------

struct RhoNormTrajectory {
  std::vector<std::int64_t> steps;
  std::vector<double> values;
  std::vector<double> running_average;
  /// Mean over checkpoints with k < K.
  double time_average = 0.0;
};

/// rho_norm(grad f(x_k), rho_hat(x_k)) at each checkpoint of the record.
RhoNormTrajectory empirical_rho_norm_trajectory(const RunRecord& record, const StochasticOracle& oracle,
                                                std::int64_t samples, RandomSource& rng);

/// Checkpoint hook filling the rho_norm_hat column. Each checkpoint k
/// draws from RandomSource::derive(seed, stream_base + k) so the
/// estimates never touch the optimizer's own streams.
CheckpointProbe make_rho_norm_probe(const StochasticOracle& oracle, std::int64_t samples,
                                    std::uint64_t seed);

inline constexpr std::uint64_t kProbeStreamBase = 1ULL << 40;

}  // namespace signsgd

#endif  // SIGNSGD_PROBES_HPP
