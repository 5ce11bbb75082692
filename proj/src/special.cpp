#include "signsgd/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace signsgd {
namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

void require_nonnegative(const Vector& sigma, const char* what) {
  if ((sigma.array() < 0.0).any()) {
    throw std::invalid_argument(std::string(what) + ": negative sigma");
  }
}

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error(std::string(what) + ": probability outside [0, 1]");
  }
}

double log_binomial_pmf(int n, int k, double log_p, double log_q) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * log_p +
         (n - k) * log_q;
}

// Sum of pmf over k in [from, to].
double binomial_range(int n, double p, int from, int to) {
  if (from > to) {
    return 0.0;
  }
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  double total = 0.0;
  for (int k = from; k <= to; ++k) {
    total += std::exp(log_binomial_pmf(n, k, log_p, log_q));
  }
  return total;
}

}  // namespace

SuccessProbabilityVector SuccessProbabilityVector::constant(Eigen::Index dim, double rho) {
  return from_probs(Vector::Constant(dim, rho));
}

SuccessProbabilityVector SuccessProbabilityVector::from_probs(const Vector& probs) {
  if ((probs.array() < 0.0).any() || (probs.array() > 1.0).any() || !probs.allFinite()) {
    throw std::invalid_argument("SuccessProbabilityVector: probability outside [0, 1]");
  }
  SuccessProbabilityVector out;
  out.probs = probs;
  out.defined = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(probs.size(), true);
  return out;
}

double SuccessProbabilityVector::min_defined() const {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (defined(i) && !(probs(i) >= best)) {
      best = probs(i);
    }
  }
  return best;
}

double rho_norm(const Vector& g, const Vector& rho) {
  require_same_dim(g.size(), rho.size(), "rho_norm");
  return ((2.0 * rho.array() - 1.0) * g.array().abs()).sum();
}

double rho_norm(const Vector& g, const SuccessProbabilityVector& rho) {
  return rho_norm(g, rho.probs);
}

double l12_norm(const Vector& g, const Vector& sigma) {
  require_same_dim(g.size(), sigma.size(), "l12_norm");
  require_nonnegative(sigma, "l12_norm");
  double total = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double a = std::abs(g(i));
    if (a == 0.0) {
      continue;
    }
    total += a * a / (a + kSqrt3 * sigma(i));
  }
  return total;
}

double improved_l12_norm(const Vector& g, const Vector& sigma) {
  require_same_dim(g.size(), sigma.size(), "improved_l12_norm");
  require_nonnegative(sigma, "improved_l12_norm");
  double total = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double a = std::abs(g(i));
    if (a == 0.0) {
      continue;
    }
    if (sigma(i) == 0.0) {
      total += a;
      continue;
    }
    const double z = a / (kSqrt3 * sigma(i));
    total += (1.0 - 1.0 / (1.0 + z + z * z)) * a;
  }
  return total;
}

double rho_m_norm(const Vector& g, const Vector& rho, int nodes) {
  require_same_dim(g.size(), rho.size(), "rho_m_norm");
  if (nodes < 1) {
    throw std::invalid_argument("rho_m_norm: node count must be positive");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g(i) == 0.0) {
      continue;
    }
    total += vote_agreement(rho(i), nodes) * std::abs(g(i));
  }
  return total;
}

double rho_m_norm(const Vector& g, const SuccessProbabilityVector& rho, int nodes) {
  return rho_m_norm(g, rho.probs, nodes);
}

double erf(double x) { return std::erf(x); }

double binomial_tail(int trials, double p, int at_least) {
  require_probability(p, "binomial_tail");
  if (trials < 0) {
    throw std::invalid_argument("binomial_tail: negative trial count");
  }
  if (at_least < 0 || at_least > trials + 1) {
    throw std::invalid_argument("binomial_tail: threshold outside [0, trials + 1]");
  }
  if (at_least == 0) {
    return 1.0;
  }
  if (at_least == trials + 1) {
    return 0.0;
  }
  if (p == 0.0) {
    return 0.0;
  }
  if (p == 1.0) {
    return 1.0;
  }
  // Sum whichever side lies away from the mode so that the summed tail is
  // the small one and no cancellation occurs.
  const double mean = trials * p;
  if (at_least > mean) {
    return std::clamp(binomial_range(trials, p, at_least, trials), 0.0, 1.0);
  }
  return std::clamp(1.0 - binomial_range(trials, p, 0, at_least - 1), 0.0, 1.0);
}

double reg_inc_beta_symmetric(double p, int l) {
  require_probability(p, "reg_inc_beta_symmetric");
  if (l < 1) {
    throw std::invalid_argument("reg_inc_beta_symmetric: l must be positive");
  }
  if (p == 0.5) {
    return 0.5;
  }
  // Evaluate on the side p < 1/2 and reflect: I(p; l, l) = 1 - I(1 - p; l, l).
  if (p > 0.5) {
    return 1.0 - binomial_tail(2 * l - 1, 1.0 - p, l);
  }
  return binomial_tail(2 * l - 1, p, l);
}

double vote_agreement(double rho, int nodes) {
  if (nodes < 1) {
    throw std::invalid_argument("vote_agreement: node count must be positive");
  }
  return 2.0 * reg_inc_beta_symmetric(rho, vote_half(nodes)) - 1.0;
}

double hoeffding_speedup_bound(double rho_min, int nodes) {
  if (!(rho_min > 0.5 && rho_min <= 1.0)) {
    throw std::domain_error("hoeffding_speedup_bound: rho_min must lie in (1/2, 1]");
  }
  if (nodes < 1) {
    throw std::invalid_argument("hoeffding_speedup_bound: node count must be positive");
  }
  const double margin = 2.0 * rho_min - 1.0;
  return 1.0 - std::exp(-margin * margin * vote_half(nodes));
}

double gauss_spb_bound(double abs_g, double sigma) {
  if (abs_g < 0.0 || sigma < 0.0) {
    throw std::domain_error("gauss_spb_bound: negative argument");
  }
  if (abs_g == 0.0 && sigma == 0.0) {
    throw std::domain_error("gauss_spb_bound: gradient and sigma both zero");
  }
  return 0.5 + 0.5 * abs_g / (abs_g + kSqrt3 * sigma);
}

double improved_gauss_spb_bound(double abs_g, double sigma) {
  if (abs_g < 0.0 || sigma < 0.0) {
    throw std::domain_error("improved_gauss_spb_bound: negative argument");
  }
  if (abs_g == 0.0 && sigma == 0.0) {
    throw std::domain_error("improved_gauss_spb_bound: gradient and sigma both zero");
  }
  if (sigma == 0.0) {
    return 1.0;
  }
  const double z = abs_g / (kSqrt3 * sigma);
  return 1.0 - 0.5 / (1.0 + z + z * z);
}

double chebyshev_spb_bound(double mu, double sigma2, int tau) {
  if (mu == 0.0) {
    throw std::domain_error("chebyshev_spb_bound: zero mean");
  }
  if (sigma2 < 0.0 || tau < 1) {
    throw std::domain_error("chebyshev_spb_bound: negative variance or empty mini-batch");
  }
  return 1.0 - sigma2 / (tau * mu * mu);
}

double clt_spb_bound(double mu, double sigma, double nu, int tau) {
  if (mu == 0.0) {
    throw std::domain_error("clt_spb_bound: zero mean");
  }
  if (!(sigma > 0.0)) {
    throw std::domain_error("clt_spb_bound: sigma must be positive");
  }
  if (nu < 0.0 || tau < 1) {
    throw std::domain_error("clt_spb_bound: negative nu or empty mini-batch");
  }
  const double root_tau = std::sqrt(static_cast<double>(tau));
  const double ratio = nu / sigma;
  return 0.5 * (1.0 + erf(std::abs(mu) * root_tau / (std::numbers::sqrt2 * sigma)) -
                ratio * ratio * ratio / root_tau);
}

double required_minibatch(const MomentEstimates& moments) {
  const double mu = moments.mean;
  const double var = moments.variance;
  if (mu == 0.0) {
    throw std::domain_error("required_minibatch: zero mean");
  }
  if (var < 0.0) {
    throw std::domain_error("required_minibatch: negative variance");
  }
  if (var == 0.0) {
    return 0.0;
  }
  const double chebyshev_term = var / (mu * mu);
  if (std::isinf(moments.third_central)) {
    return 2.0 * chebyshev_term;
  }
  const double clt_term = moments.third_central / (std::abs(mu) * var);
  return 2.0 * std::min(chebyshev_term, clt_term);
}

}  // namespace signsgd
