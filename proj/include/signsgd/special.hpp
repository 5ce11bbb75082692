#ifndef SIGNSGD_SPECIAL_HPP
#define SIGNSGD_SPECIAL_HPP

#include <cstdint>
#include <limits>

#include "signsgd/core.hpp"

namespace signsgd {

/// Per-coordinate success probabilities rho_i = P(sign ghat_i = sign g_i).
/// `defined` is false where the true gradient coordinate is zero; the
/// probability there is a placeholder and never weighs into a norm because
/// the matching |g_i| is zero.
struct SuccessProbabilityVector {
  Vector probs;
  Vector half_widths;  // empty when not estimated
  Eigen::Array<bool, Eigen::Dynamic, 1> defined;

  static SuccessProbabilityVector constant(Eigen::Index dim, double rho);
  static SuccessProbabilityVector from_probs(const Vector& probs);

  Eigen::Index dim() const noexcept { return probs.size(); }
  bool has_half_widths() const noexcept { return half_widths.size() == probs.size(); }
  /// Smallest probability among defined coordinates, or NaN if none are.
  double min_defined() const;
};

struct MomentEstimates {
  double mean = 0.0;
  double variance = 0.0;
  double third_central = 0.0;  // E|X - mu|^3; may be +inf
  std::int64_t sample_count = 0;
};

// ---------------------------------------------------------------------------
// Norms induced by success probabilities and noise levels.

/// sum_i (2 rho_i - 1) |g_i|. Negative when some rho_i < 1/2.
double rho_norm(const Vector& g, const Vector& rho);
double rho_norm(const Vector& g, const SuccessProbabilityVector& rho);

/// sum_i g_i^2 / (|g_i| + sqrt(3) sigma_i), with a zero coordinate term
/// contributing 0.
double l12_norm(const Vector& g, const Vector& sigma);

/// sum_i (1 - 1/(1 + z_i + z_i^2)) |g_i| with z_i = |g_i| / (sqrt(3) sigma_i).
/// Dominates l12_norm coordinate by coordinate.
double improved_l12_norm(const Vector& g, const Vector& sigma);

/// sum_i (2 I(rho_i; l, l) - 1) |g_i| with l = floor((M + 1) / 2).
double rho_m_norm(const Vector& g, const Vector& rho, int nodes);
double rho_m_norm(const Vector& g, const SuccessProbabilityVector& rho, int nodes);

inline int vote_half(int nodes) { return (nodes + 1) / 2; }

// ---------------------------------------------------------------------------
// Special functions.

/// Error function; std::erf, accurate to a few ulp.
double erf(double x);

/// P(Binomial(trials, p) >= at_least). Sums pmf terms over the smaller
/// tail. at_least may range over [0, trials + 1].
double binomial_tail(int trials, double p, int at_least);

/// Regularized incomplete beta I(p; l, l) for integer l >= 1, evaluated as
/// P(Binomial(2l - 1, p) >= l).
double reg_inc_beta_symmetric(double p, int l);

/// 2 I(rho; l, l) - 1: expected sign agreement of an M-node majority vote
/// whose voters are independently correct with probability rho.
double vote_agreement(double rho, int nodes);

// ---------------------------------------------------------------------------
// Success-probability lower bounds. Values are returned unclamped, so a
// vacuous bound (below 1/2) stays visible to the caller.

/// 1 - exp(-(2 rho_min - 1)^2 l), l = floor((M + 1) / 2).
double hoeffding_speedup_bound(double rho_min, int nodes);

/// 1/2 + |g| / (2 (|g| + sqrt(3) sigma)) for unimodal symmetric noise.
double gauss_spb_bound(double abs_g, double sigma);

/// 1 - 1 / (2 (1 + z + z^2)), z = |g| / (sqrt(3) sigma).
double improved_gauss_spb_bound(double abs_g, double sigma);

/// 1 - sigma^2 / (tau mu^2).
double chebyshev_spb_bound(double mu, double sigma2, int tau);

/// (1/2) (1 + erf(|mu| sqrt(tau) / (sqrt(2) sigma)) - nu^3 / (sigma^3 sqrt(tau))).
/// `nu` is the cube root of the third absolute central moment.
double clt_spb_bound(double mu, double sigma, double nu, int tau);

/// 2 min(sigma^2 / mu^2, nu^3 / (|mu| sigma^2)); any mini-batch strictly
/// larger makes the sign of the averaged estimator correct with
/// probability above 1/2.
double required_minibatch(const MomentEstimates& moments);

}  // namespace signsgd

#endif  // SIGNSGD_SPECIAL_HPP
