#include <doctest.h>

#include "oracles.hpp"
#include "signsgd/probes.hpp"
#include "signsgd/problems.hpp"

using namespace signsgd;

namespace {

Vector uniform_point(RandomSource& rng, Eigen::Index dim, double box) {
  Vector x(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    x(i) = box * (2.0 * rng.uniform() - 1.0);
  }
  return x;
}

void check_gradient(const SmoothObjective& f, double box, std::uint64_t seed) {
  RandomSource rng(seed);
  for (int t = 0; t < 100; ++t) {
    const Vector x = uniform_point(rng, f.dim(), box);
    const Vector fd = oracle::finite_difference([&](const Eigen::VectorXd& y) { return f.value(y); }, x);
    const Vector g = f.gradient(x);
    REQUIRE((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
  }
}

void check_descent_inequality(const SmoothObjective& f, double box, std::uint64_t seed) {
  RandomSource rng(seed);
  const Vector& l = f.coordinate_smoothness();
  for (int t = 0; t < 500; ++t) {
    const Vector x = uniform_point(rng, f.dim(), box);
    const Vector y = uniform_point(rng, f.dim(), box);
    const Vector step = y - x;
    const double upper = f.value(x) + f.gradient(x).dot(step) + 0.5 * (l.array() * step.array().square()).sum();
    REQUIRE(f.value(y) <= upper + 1e-9 * std::max(1.0, std::abs(upper)));
  }
}

std::vector<NodeQuadraticSpec> two_nodes(double c, double sigma) {
  const Vector curv = Eigen::Vector3d(1.0, 2.0, 0.5);
  return {{curv, Vector::Constant(3, c), Vector::Constant(3, sigma)},
          {curv, Vector::Constant(3, -c), Vector::Constant(3, sigma)}};
}

}  // namespace

TEST_CASE("Rosenbrock values and gradient") {
  const auto f = rosenbrock(10);
  CHECK(f->value(Vector::Ones(10)) == 0.0);
  CHECK(f->gradient(Vector::Ones(10)).norm() == 0.0);
  CHECK(f->value(Vector::Zero(10)) == doctest::Approx(9.0));
  CHECK(f->gradient(Vector::Zero(10))(0) == doctest::Approx(-2.0));
  CHECK(*f->optimum_value() == 0.0);
  check_gradient(*f, Rosenbrock::kSmoothnessBox, 1);
  check_descent_inequality(*f, Rosenbrock::kSmoothnessBox, 2);
  CHECK_THROWS_AS(rosenbrock(1), std::invalid_argument);
}

TEST_CASE("Rosenbrock components sum to the full gradient") {
  const auto f = rosenbrock(6);
  RandomSource rng(3);
  const Vector x = uniform_point(rng, 6, 2.0);
  Vector total = Vector::Zero(6);
  for (Eigen::Index c = 0; c < f->components(); ++c) {
    total += f->component_gradient(x, c);
  }
  CHECK((total - f->gradient(x)).norm() < 1e-10);
}

TEST_CASE("Rosenbrock component oracle") {
  SUBCASE("d = 2 without noise returns the single component") {
    const auto oracle = rosenbrock_component_oracle(2, 0.0);
    RandomSource rng(4);
    const Vector x = Eigen::Vector2d(0.3, -0.7);
    for (int t = 0; t < 20; ++t) {
      CHECK(oracle.sample(x, rng) == oracle.objective().gradient(x));
    }
  }
  SUBCASE("mean is the gradient scaled by 1 / (d - 1)") {
    const auto oracle = rosenbrock_component_oracle(5, 0.5);
    CHECK(oracle.bias_allowed());
    RandomSource rng(5);
    const Vector x = Vector::LinSpaced(5, -0.5, 0.5);
    const int n = 100000;
    Vector total = Vector::Zero(5);
    Vector squares = Vector::Zero(5);
    for (int s = 0; s < n; ++s) {
      const Vector v = oracle.sample(x, rng);
      total += v;
      squares += v.cwiseProduct(v);
    }
    const Vector mean = total / n;
    const Vector expected = oracle.objective().gradient(x) / 4.0;
    for (Eigen::Index i = 0; i < 5; ++i) {
      const double se = std::sqrt((squares(i) / n - mean(i) * mean(i)) / n);
      CHECK(std::abs(mean(i) - expected(i)) <= 4.0 * se);
    }
  }
}

TEST_CASE("counterexample problem") {
  auto [objective, oracle] = counterexample_problem(0.5);
  const Vector x = Eigen::Vector2d(1.0, 1.0);
  CHECK(objective->gradient(x) == Vector(Eigen::Vector2d(1.0, 1.0)));
  check_gradient(*objective, 3.0, 6);
  check_descent_inequality(*objective, 3.0, 7);

  RandomSource rng(8);
  bool seen_first = false, seen_second = false;
  for (int t = 0; t < 100; ++t) {
    const Vector s = oracle.sample(x, rng);
    if (s == Vector(Eigen::Vector2d(3.0, -1.0))) {
      seen_first = true;
      CHECK(sign(s) == SignVector(Eigen::Matrix<std::int8_t, 2, 1>(1, -1)));
    } else {
      CHECK(s == Vector(Eigen::Vector2d(-1.0, 3.0)));
      CHECK(sign(s) == SignVector(Eigen::Matrix<std::int8_t, 2, 1>(-1, 1)));
      seen_second = true;
    }
  }
  CHECK(seen_first);
  CHECK(seen_second);

  SUBCASE("signs on the trap line are always +-(1, -1)") {
    for (double t = -5.0; t <= 5.0; t += 0.37) {
      const Vector p = Eigen::Vector2d(1.0 + t, 1.0 - t);
      for (int s = 0; s < 20; ++s) {
        const SignVector sg = sign(oracle.sample(p, rng));
        CHECK(sg(0) == -sg(1));
        CHECK(sg(0) != 0);
      }
    }
  }
  SUBCASE("oracle is unbiased") {
    const Vector p = Eigen::Vector2d(0.4, -1.3);
    const auto& trap = dynamic_cast<const SignTrapObjective&>(*objective);
    const Vector branches =
        trap.direction(0).dot(p) * trap.direction(0) + trap.direction(1).dot(p) * trap.direction(1);
    CHECK((branches - objective->gradient(p)).norm() < 1e-14);
    Vector total = Vector::Zero(2);
    const int n = 40000;
    for (int s = 0; s < n; ++s) {
      total += oracle.sample(p, rng);
    }
    CHECK(((total / n) - objective->gradient(p)).norm() < 0.05);
  }
  SUBCASE("success probabilities on the trap line are at most 1/2") {
    for (double t : {-0.5, 0.0, 0.3}) {
      const Vector p = Eigen::Vector2d(1.0 + t, 1.0 - t);
      const auto rho = estimate_success_probabilities(oracle, p, 20000, rng);
      for (Eigen::Index i = 0; i < 2; ++i) {
        if (rho.defined(i)) {
          CHECK(rho.probs(i) <= 0.5 + rho.half_widths(i));
        }
      }
    }
  }
}

TEST_CASE("quadratic problem") {
  const Vector diag = Eigen::Vector3d(1.0, 4.0, 0.25);
  auto exact = quadratic_problem(diag, Vector::Zero(3));
  RandomSource rng(9);
  const Vector x = Eigen::Vector3d(0.5, -1.0, 2.0);
  CHECK(exact.oracle.sample(x, rng) == exact.objective->gradient(x));
  CHECK(*exact.objective->optimum_value() == 0.0);
  CHECK(exact.objective->value(Vector::Zero(3)) == 0.0);
  check_gradient(*exact.objective, 3.0, 10);
  check_descent_inequality(*exact.objective, 3.0, 11);

  const Vector sigma = Eigen::Vector3d(0.5, 2.0, 1.0);
  auto noisy = quadratic_problem(diag, sigma);
  const auto rho = estimate_success_probabilities(noisy.oracle, x, 20000, rng);
  const Vector g = noisy.objective->gradient(x);
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(rho.probs(i) >= gauss_spb_bound(std::abs(g(i)), sigma(i)) - rho.half_widths(i));
  }
}

TEST_CASE("partitioned quadratics") {
  SUBCASE("one node behaves like the plain quadratic") {
    const Vector diag = Eigen::Vector3d(1.0, 2.0, 3.0);
    const auto p = partitioned_quadratics({{diag, Vector::Zero(3), Vector::Zero(3)}});
    const auto q = quadratic_problem(diag, Vector::Zero(3));
    RandomSource rng(12);
    for (int t = 0; t < 20; ++t) {
      const Vector x = uniform_point(rng, 3, 2.0);
      CHECK(p.global->value(x) == doctest::Approx(q.objective->value(x)));
      CHECK((p.global->gradient(x) - q.objective->gradient(x)).norm() < 1e-14);
    }
  }
  SUBCASE("global gradient is the node mean") {
    const auto p = partitioned_quadratics(two_nodes(1.5, 0.3));
    RandomSource rng(13);
    for (int t = 0; t < 50; ++t) {
      const Vector x = uniform_point(rng, 3, 4.0);
      const Vector mean = 0.5 * (p.nodes[0].objective->gradient(x) + p.nodes[1].objective->gradient(x));
      CHECK((p.global->gradient(x) - mean).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("minimizer is the weighted midpoint") {
    auto specs = two_nodes(1.5, 0.0);
    specs[1].curvature = Eigen::Vector3d(3.0, 1.0, 0.5);
    const auto p = partitioned_quadratics(specs);
    const Vector expected =
        oracle::weighted_midpoint({specs[0].curvature, specs[1].curvature}, {specs[0].center, specs[1].center},
                                  {1.0, 1.0});
    CHECK((*p.minimizer() - expected).norm() < 1e-14);
    CHECK(p.global->gradient(expected).norm() < 1e-12);
    CHECK(*p.global->optimum_value() == doctest::Approx(p.global->value(expected)));
  }
  SUBCASE("node oracles are unbiased with variance within sigma_n^2") {
    const auto p = partitioned_quadratics(two_nodes(1.0, 0.7));
    RandomSource rng(14);
    const Vector x = Eigen::Vector3d(0.2, -0.4, 0.9);
    const int n = 20000;
    for (const auto& node : p.nodes) {
      Vector total = Vector::Zero(3);
      double sq = 0.0;
      std::vector<double> errs;
      for (int s = 0; s < n; ++s) {
        const Vector d = node.oracle.sample(x, rng) - node.objective->gradient(x);
        total += d;
        errs.push_back(d.squaredNorm());
        sq += d.squaredNorm();
      }
      const double mean_sq = sq / n;
      double var = 0.0;
      for (double e : errs) {
        var += (e - mean_sq) * (e - mean_sq);
      }
      const double se = std::sqrt(var / (n - 1) / n);
      CHECK(mean_sq <= node.sigma * node.sigma + 3.0 * se);
      CHECK((total / n).norm() < 0.05);
    }
  }
}

TEST_CASE("scale_nodes") {
  const auto p = partitioned_quadratics(two_nodes(1.0, 0.0));
  const auto same = scale_nodes(p, {1.0, 1.0});
  const auto scaled = scale_nodes(p, {10.0, 0.1});
  RandomSource rng(15);
  for (int t = 0; t < 200; ++t) {
    const Vector x = uniform_point(rng, 3, 3.0);
    CHECK(same.global->value(x) == p.global->value(x));
    CHECK(same.global->gradient(x) == p.global->gradient(x));
    for (std::size_t n = 0; n < 2; ++n) {
      CHECK(sign(scaled.nodes[n].objective->gradient(x)) == sign(p.nodes[n].objective->gradient(x)));
    }
  }
  const Vector moved = *scaled.minimizer();
  const Vector expected = oracle::weighted_midpoint({p.nodes[0].objective->coordinate_smoothness(),
                                                     p.nodes[1].objective->coordinate_smoothness()},
                                                    {Vector::Constant(3, 1.0), Vector::Constant(3, -1.0)},
                                                    {10.0, 0.1});
  CHECK((moved - expected).norm() < 1e-14);
  CHECK((moved - *p.minimizer()).norm() > 0.1);
  CHECK(scaled.nodes[0].smoothness == doctest::Approx(10.0 * p.nodes[0].smoothness));
  CHECK_THROWS_AS(scale_nodes(p, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(scale_nodes(p, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("mini-batch wrapper") {
  const auto q = quadratic_problem(Vector::Ones(2), Vector::Constant(2, 1.0));
  const auto one = minibatch(q.oracle, 1);
  const auto sixteen = minibatch(q.oracle, 16);
  CHECK(sixteen.minibatch_size() == 16);

  RandomSource a(16), b(16);
  const Vector x = Eigen::Vector2d(0.3, -0.2);
  for (int t = 0; t < 10; ++t) {
    CHECK(one.sample(x, a) == q.oracle.sample(x, b));
  }

  const auto ests1 = estimate_moments(one, x, 10000, a);
  const auto ests16 = estimate_moments(sixteen, x, 10000, a);
  for (std::size_t i = 0; i < 2; ++i) {
    const double ratio = ests1[i].variance / ests16[i].variance;
    CHECK(ratio > 16.0 * 0.7);
    CHECK(ratio < 16.0 * 1.3);
  }

  double previous = 0.0;
  for (int tau : {1, 2, 4, 8, 16}) {
    const auto rho = estimate_success_probabilities(minibatch(q.oracle, tau), x, 20000, a);
    const double current = rho.min_defined();
    CHECK(current >= previous - rho.half_widths.maxCoeff());
    previous = current;
  }
  CHECK_THROWS_AS(minibatch(q.oracle, 0), std::invalid_argument);
}

TEST_CASE("oracle rejects non-finite or mis-sized samples") {
  const auto f = std::make_shared<const Quadratic>(Vector::Ones(2), Vector::Zero(2));
  StochasticOracle bad_dim(f, [](const Vector&, RandomSource&) { return Vector(Vector::Zero(3)); });
  StochasticOracle bad_value(f, [](const Vector&, RandomSource&) { return Vector(Vector::Constant(2, NAN)); });
  RandomSource rng(17);
  CHECK_THROWS(bad_dim.sample(Vector::Zero(2), rng));
  CHECK_THROWS(bad_value.sample(Vector::Zero(2), rng));
}
