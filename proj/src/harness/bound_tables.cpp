#include <cmath>
#include <numbers>
#include <ostream>

#include "signsgd/harness.hpp"
#include "signsgd/probes.hpp"
#include "signsgd/special.hpp"

namespace signsgd {
namespace {

// E|Z|^3 for a standard normal.
const double kNormalAbsThird = 2.0 * std::sqrt(2.0 / std::numbers::pi);

void row(std::ostream& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    out << (first ? "" : ",") << format_number(v);
    first = false;
  }
  out << "\n";
}

void spb_bounds(std::ostream& out) {
  out << "# table spb_bounds\n";
  out << "# Gaussian noise N(0, sigma^2) averaged over tau draws\n";
  out << "abs_g,sigma,tau,gauss,improved_gauss,chebyshev,clt\n";
  for (double g : {0.01, 0.1, 0.5, 1.0, 2.0, 10.0}) {
    for (double sigma : {0.1, 1.0, 10.0}) {
      for (int tau : {1, 4, 16, 64}) {
        const double batch_sigma = sigma / std::sqrt(static_cast<double>(tau));
        row(out, {g, sigma, static_cast<double>(tau), gauss_spb_bound(g, batch_sigma),
                  improved_gauss_spb_bound(g, batch_sigma), chebyshev_spb_bound(g, sigma * sigma, tau),
                  clt_spb_bound(g, sigma, sigma * std::cbrt(kNormalAbsThird), tau)});
      }
    }
  }
}

void minibatch_thresholds(std::ostream& out) {
  out << "# table minibatch\n";
  out << "# Gaussian third moment nu^3 = E|X - mu|^3\n";
  out << "mu,sigma,nu,required_minibatch\n";
  for (double mu : {0.01, 0.1, 1.0}) {
    for (double sigma : {0.1, 1.0, 10.0}) {
      MomentEstimates m;
      m.mean = mu;
      m.variance = sigma * sigma;
      m.third_central = kNormalAbsThird * sigma * sigma * sigma;
      row(out, {mu, sigma, std::cbrt(m.third_central), required_minibatch(m)});
    }
  }
}

void incomplete_beta(std::ostream& out) {
  out << "# table reg_inc_beta\n";
  out << "p,l,I,vote_agreement\n";
  for (int step = 10; step <= 19; ++step) {
    const double p = 0.05 * step;
    for (int l = 1; l <= 8; ++l) {
      row(out, {p, static_cast<double>(l), reg_inc_beta_symmetric(p, l), vote_agreement(p, 2 * l - 1)});
    }
  }
}

void rho_m_sandwich(std::ostream& out) {
  out << "# table rho_m_sandwich\n";
  out << "# all rho_i equal; ratios to ||g||_1 do not depend on g\n";
  out << "rho,M,l,hoeffding_lower,rho_m_ratio,upper\n";
  for (int step = 11; step <= 20; ++step) {
    const double rho = 0.05 * step;
    for (int m = 1; m <= 15; ++m) {
      const Vector g = Vector::Ones(4);
      const double ratio = rho_m_norm(g, Vector::Constant(4, rho), m) / g.lpNorm<1>();
      row(out, {rho, static_cast<double>(m), static_cast<double>(vote_half(m)), hoeffding_speedup_bound(rho, m),
                ratio, 1.0});
    }
  }
}

}  // namespace

void emit_bound_tables(std::ostream& out) {
  out << "# signsgd " << kVersion << "\n";
  spb_bounds(out);
  out << "\n";
  minibatch_thresholds(out);
  out << "\n";
  incomplete_beta(out);
  out << "\n";
  rho_m_sandwich(out);
}

void emit_bound_validation(std::ostream& out, std::int64_t samples, std::uint64_t seed) {
  out << "# signsgd " << kVersion << "\n";
  out << "# samples = " << samples << ", seed = " << seed << ", z = " << format_number(kDefaultConfidence) << "\n";
  out << "abs_g,sigma,rho_hat,half_width,gauss,improved_gauss,gauss_holds,improved_holds\n";
  std::uint64_t cell = 0;
  for (double g : {0.1, 1.0, 10.0}) {
    for (double sigma : {0.1, 1.0, 10.0}) {
      RandomSource rng = RandomSource::derive(seed, cell++);
      std::int64_t hits = 0;
      for (std::int64_t s = 0; s < samples; ++s) {
        hits += (g + sigma * rng.normal() > 0.0) ? 1 : 0;
      }
      const double rho = static_cast<double>(hits) / static_cast<double>(samples);
      const double hw = binomial_half_width(rho, samples);
      const double gauss = gauss_spb_bound(g, sigma);
      const double improved = improved_gauss_spb_bound(g, sigma);
      row(out, {g, sigma, rho, hw, gauss, improved, rho + hw >= gauss ? 1.0 : 0.0,
                rho + hw >= improved ? 1.0 : 0.0});
    }
  }
}

}  // namespace signsgd
