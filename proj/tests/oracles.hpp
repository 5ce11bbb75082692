// Independent reference computations for the tests. Nothing here calls the
// library's special functions.

#ifndef SIGNSGD_TESTS_ORACLES_HPP
#define SIGNSGD_TESTS_ORACLES_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) {
        break;
      }
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return {nodes, weights};
}

/// Composite 20-point Gauss-Legendre over `panels` equal panels of [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64) {
  static const auto rule = gauss_legendre(20);
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < rule.first.size(); ++i) {
      total += rule.second[i] * f(mid + 0.5 * h * rule.first[i]);
    }
  }
  return 0.5 * h * total;
}

inline double erf(double x) {
  return 2.0 / std::sqrt(std::numbers::pi) * integrate([](double t) { return std::exp(-t * t); }, 0.0, x);
}

/// I(p; l, l) as the ratio of two quadratures of t^(l-1) (1-t)^(l-1).
inline double reg_inc_beta(double p, int l) {
  auto density = [l](double t) { return std::pow(t, l - 1) * std::pow(1.0 - t, l - 1); };
  return integrate(density, 0.0, p, 8) / integrate(density, 0.0, 1.0, 8);
}

/// P(at least `at_least` successes in `trials`) by enumerating all 2^trials outcomes.
inline double binomial_tail(int trials, double p, int at_least) {
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << trials); ++mask) {
    const int hits = std::popcount(mask);
    if (hits >= at_least) {
      total += std::pow(p, hits) * std::pow(1.0 - p, trials - hits);
    }
  }
  return total;
}

/// E[sign(sum of M independent +-1 votes)], each +1 with probability p, by enumeration.
inline double expected_vote_sign(int nodes, double p) {
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << nodes); ++mask) {
    const int hits = std::popcount(mask);
    const int sum = 2 * hits - nodes;
    const double weight = std::pow(p, hits) * std::pow(1.0 - p, nodes - hits);
    total += weight * ((sum > 0) - (sum < 0));
  }
  return total;
}

inline Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
    Eigen::VectorXd up = x, down = x;
    up(i) += h;
    down(i) -= h;
    g(i) = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

/// Minimizer of sum_n (w_n a_n / 2)(x - c_n)^2 per coordinate.
inline Eigen::VectorXd weighted_midpoint(const std::vector<Eigen::VectorXd>& curvature,
                                         const std::vector<Eigen::VectorXd>& centers,
                                         const std::vector<double>& weights) {
  Eigen::VectorXd num = Eigen::VectorXd::Zero(centers.front().size());
  Eigen::VectorXd den = num;
  for (std::size_t n = 0; n < centers.size(); ++n) {
    num += weights[n] * curvature[n].cwiseProduct(centers[n]);
    den += weights[n] * curvature[n];
  }
  return num.cwiseQuotient(den);
}

}  // namespace oracle

#endif  // SIGNSGD_TESTS_ORACLES_HPP
