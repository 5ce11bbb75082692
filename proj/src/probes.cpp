#include "signsgd/probes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace signsgd {

double binomial_half_width(double p, std::int64_t samples, double z) {
  if (samples < 1) {
    throw std::invalid_argument("binomial_half_width: need at least one sample");
  }
  return z * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
}

namespace {

SuccessProbabilityVector tally(const Vector& gradient, const VectorX<std::int64_t>& matches,
                               std::int64_t samples, double z) {
  const Eigen::Index dim = gradient.size();
  SuccessProbabilityVector rho;
  rho.probs = Vector::Constant(dim, std::numeric_limits<double>::quiet_NaN());
  rho.half_widths = Vector::Constant(dim, std::numeric_limits<double>::quiet_NaN());
  rho.defined = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(dim, false);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (gradient(i) == 0.0) {
      continue;
    }
    const double p = static_cast<double>(matches(i)) / static_cast<double>(samples);
    rho.probs(i) = p;
    rho.half_widths(i) = binomial_half_width(p, samples, z);
    rho.defined(i) = true;
  }
  return rho;
}

void count_matches(const SignVector& truth, const Vector& sample, VectorX<std::int64_t>& matches) {
  const SignVector s = sign(sample);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    matches(i) += (s(i) == truth(i)) ? 1 : 0;
  }
}

std::vector<MomentEstimates> moments_from(const std::vector<Vector>& draws) {
  const Eigen::Index dim = draws.front().size();
  const auto n = static_cast<double>(draws.size());
  Vector mean = Vector::Zero(dim);
  for (const auto& v : draws) {
    mean += v;
  }
  mean /= n;
  Vector second = Vector::Zero(dim);
  Vector third = Vector::Zero(dim);
  for (const auto& v : draws) {
    const Eigen::ArrayXd dev = (v - mean).array().abs();
    second += dev.square().matrix();
    third += dev.cube().matrix();
  }
  std::vector<MomentEstimates> out(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    auto& m = out[static_cast<std::size_t>(i)];
    m.mean = mean(i);
    m.variance = second(i) / (n - 1.0);
    m.third_central = third(i) / n;
    m.sample_count = static_cast<std::int64_t>(draws.size());
  }
  return out;
}

}  // namespace

SuccessProbabilityVector estimate_success_probabilities(const StochasticOracle& oracle, const Vector& x,
                                                        std::int64_t samples, RandomSource& rng,
                                                        double z) {
  if (samples < 1) {
    throw std::invalid_argument("estimate_success_probabilities: need at least one sample");
  }
  const Vector gradient = oracle.objective().gradient(x);
  const SignVector truth = sign(gradient);
  VectorX<std::int64_t> matches = VectorX<std::int64_t>::Zero(gradient.size());
  for (std::int64_t s = 0; s < samples; ++s) {
    count_matches(truth, oracle.sample(x, rng), matches);
  }
  return tally(gradient, matches, samples, z);
}

std::vector<MomentEstimates> estimate_moments(const StochasticOracle& oracle, const Vector& x,
                                              std::int64_t samples, RandomSource& rng) {
  if (samples < 2) {
    throw std::invalid_argument("estimate_moments: need at least two samples");
  }
  std::vector<Vector> draws;
  draws.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t s = 0; s < samples; ++s) {
    draws.push_back(oracle.sample(x, rng));
  }
  return moments_from(draws);
}

ProbeReport probe_point(const StochasticOracle& oracle, const Vector& x, std::int64_t samples,
                        RandomSource& rng, double z) {
  if (samples < 2) {
    throw std::invalid_argument("probe_point: need at least two samples");
  }
  ProbeReport report;
  report.point = x;
  report.gradient = oracle.objective().gradient(x);
  report.samples = samples;
  report.z = z;

  const SignVector truth = sign(report.gradient);
  VectorX<std::int64_t> matches = VectorX<std::int64_t>::Zero(x.size());
  std::vector<Vector> draws;
  draws.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t s = 0; s < samples; ++s) {
    draws.push_back(oracle.sample(x, rng));
    count_matches(truth, draws.back(), matches);
  }
  report.rho = tally(report.gradient, matches, samples, z);
  report.moments = moments_from(draws);

  auto compare = [&](const char* name, Eigen::Index i, double value) {
    BoundComparison c;
    c.bound = name;
    c.coordinate = i;
    c.value = value;
    c.empirical = report.rho.probs(i);
    c.margin = c.empirical + report.rho.half_widths(i) - value;
    c.holds = c.margin >= 0.0;
    report.comparisons.push_back(c);
  };
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!report.rho.defined(i)) {
      continue;
    }
    const auto& m = report.moments[static_cast<std::size_t>(i)];
    const double abs_g = std::abs(report.gradient(i));
    const double sigma = std::sqrt(m.variance);
    compare("gauss", i, gauss_spb_bound(abs_g, sigma));
    compare("improved-gauss", i, improved_gauss_spb_bound(abs_g, sigma));
    if (m.mean != 0.0) {
      compare("chebyshev", i, chebyshev_spb_bound(m.mean, m.variance, 1));
      if (sigma > 0.0) {
        compare("clt", i, clt_spb_bound(m.mean, sigma, std::cbrt(m.third_central), 1));
      }
    }
  }
  return report;
}

double rate_rhs_theorem1(double f0_minus_fstar, double gamma0, double dim, double mean_smoothness,
                         std::int64_t iterations) {
  if (iterations < 1) {
    throw std::invalid_argument("rate_rhs_theorem1: iteration count must be positive");
  }
  const double k = static_cast<double>(iterations);
  const double root_k = std::sqrt(k);
  return f0_minus_fstar / (gamma0 * root_k) + 1.5 * gamma0 * dim * mean_smoothness * std::log(k) / root_k;
}

double rate_rhs_constant_step(double f0_minus_fstar, double gamma, double dim, double mean_smoothness,
                              std::int64_t iterations) {
  if (iterations < 1) {
    throw std::invalid_argument("rate_rhs_constant_step: iteration count must be positive");
  }
  return f0_minus_fstar / (gamma * static_cast<double>(iterations)) + 0.5 * gamma * dim * mean_smoothness;
}

double rate_rhs_theorem2(double f0_minus_fstar, double gamma0, double dim, double mean_smoothness,
                         std::int64_t iterations) {
  if (iterations < 1) {
    throw std::invalid_argument("rate_rhs_theorem2: iteration count must be positive");
  }
  return (f0_minus_fstar / gamma0 + gamma0 * dim * mean_smoothness) /
         std::sqrt(static_cast<double>(iterations));
}

double rate_rhs_theorem4(double delta_f, double sigma_tilde, double l_tilde, double dim,
                         std::int64_t iterations) {
  if (iterations < 1) {
    throw std::invalid_argument("rate_rhs_theorem4: iteration count must be positive");
  }
  const double k = static_cast<double>(iterations);
  return (3.0 * delta_f + 16.0 * sigma_tilde + 8.0 * l_tilde * std::sqrt(dim) +
          3.0 * l_tilde * dim / std::sqrt(k)) /
         std::pow(k, 0.25);
}

RhoNormTrajectory empirical_rho_norm_trajectory(const RunRecord& record, const StochasticOracle& oracle,
                                                std::int64_t samples, RandomSource& rng) {
  RhoNormTrajectory out;
  const auto last = static_cast<std::int64_t>(record.rows.size()) - 1;
  double total = 0.0;
  std::int64_t counted = 0;
  for (std::size_t c = 0; c < record.checkpoint_points.size(); ++c) {
    const Vector& x = record.checkpoint_points[c];
    const Vector g = oracle.objective().gradient(x);
    const auto rho = estimate_success_probabilities(oracle, x, samples, rng);
    const double value = rho_norm(g, rho.defined.select(rho.probs, Vector::Constant(g.size(), 0.5)));
    out.steps.push_back(record.checkpoint_steps[c]);
    out.values.push_back(value);
    if (record.checkpoint_steps[c] < last || last == 0) {
      total += value;
      ++counted;
    }
    out.running_average.push_back(counted > 0 ? total / static_cast<double>(counted) : value);
  }
  out.time_average = counted > 0 ? total / static_cast<double>(counted) : 0.0;
  return out;
}

CheckpointProbe make_rho_norm_probe(const StochasticOracle& oracle, std::int64_t samples,
                                    std::uint64_t seed) {
  return [oracle, samples, seed](const Vector& x, std::int64_t k) {
    RandomSource rng = RandomSource::derive(seed, kProbeStreamBase + static_cast<std::uint64_t>(k));
    const Vector g = oracle.objective().gradient(x);
    const auto rho = estimate_success_probabilities(oracle, x, samples, rng);
    return rho_norm(g, rho.defined.select(rho.probs, Vector::Constant(g.size(), 0.5)));
  };
}

}  // namespace signsgd
