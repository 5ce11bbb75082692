#include <doctest.h>

#include <vector>

#include "signsgd/core.hpp"

using namespace signsgd;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) {
    out(i++) = x;
  }
  return out;
}

SignVector signs(std::initializer_list<int> v) {
  SignVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) {
    out(i++) = static_cast<std::int8_t>(x);
  }
  return out;
}

}  // namespace

TEST_CASE("sign maps to {-1, 0, +1} with sign(0) = 0") {
  CHECK(sign(vec({0.5, 0.0, -2.0})) == signs({1, 0, -1}));
  CHECK(sign(vec({0.0, 0.0})) == signs({0, 0}));
  CHECK(sign(vec({1e-300, -1e-300})) == signs({1, -1}));
  CHECK(sign(vec({-0.0})) == signs({0}));
}

TEST_CASE("sign is idempotent and invariant to positive scaling") {
  RandomSource rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Vector v(7);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v(i) = rng.uniform() < 0.2 ? 0.0 : rng.normal();
    }
    const SignVector s = sign(v);
    CHECK(sign(to_dense(s)) == s);
    const double c = std::exp(10.0 * (rng.uniform() - 0.5));
    CHECK(sign(Vector(c * v)) == s);
  }
}

TEST_CASE("sign rejects non-finite input") {
  CHECK_THROWS_AS(sign(vec({1.0, std::nan("")})), std::invalid_argument);
  CHECK_THROWS_AS(sign(vec({HUGE_VAL})), std::invalid_argument);
}

TEST_CASE("stochastic sign of the zero vector is zero") {
  RandomSource rng(1);
  for (int t = 0; t < 100; ++t) {
    CHECK(stochastic_sign(Vector::Zero(3), rng) == signs({0, 0, 0}));
  }
}

TEST_CASE("stochastic sign probabilities") {
  const Vector p = stochastic_sign_plus_probability(vec({3.0, -4.0}));
  CHECK(p(0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(p(1) == doctest::Approx(0.1).epsilon(1e-15));

  SUBCASE("positive scaling leaves probabilities unchanged") {
    for (double c : {1e-3, 0.5, 7.0, 1e6}) {
      const Vector q = stochastic_sign_plus_probability(Vector(c * vec({3.0, -4.0})));
      CHECK((q - p).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("equal signs, different direction give different probabilities") {
    const Vector q = stochastic_sign_plus_probability(vec({4.0, -3.0}));
    CHECK(sign(vec({4.0, -3.0})) == sign(vec({3.0, -4.0})));
    CHECK(q(0) != doctest::Approx(p(0)));
    CHECK(q(1) != doctest::Approx(p(1)));
  }
  SUBCASE("zero coordinate of a nonzero vector is a fair coin") {
    const Vector q = stochastic_sign_plus_probability(vec({0.0, 2.0}));
    CHECK(q(0) == 0.5);
    CHECK(q(1) == 1.0);
  }
}

TEST_CASE("scaled stochastic sign is unbiased") {
  const Vector v = vec({3.0, -4.0});
  RandomSource rng(11);
  const int n = 100000;
  Vector total = Vector::Zero(2);
  Vector squares = Vector::Zero(2);
  for (int s = 0; s < n; ++s) {
    const Vector draw = v.norm() * to_dense(stochastic_sign(v, rng));
    total += draw;
    squares += draw.cwiseProduct(draw);
  }
  const Vector mean = total / n;
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double se = std::sqrt((squares(i) / n - mean(i) * mean(i)) / n);
    CHECK(std::abs(mean(i) - v(i)) <= 3.0 * se);
  }
}

TEST_CASE("stochastic sign agrees with sign more often than not") {
  const Vector v = vec({0.3, -1.0, 2.0, 0.05});
  RandomSource rng(5);
  const int n = 50000;
  Eigen::VectorXi agree = Eigen::VectorXi::Zero(4);
  const SignVector truth = sign(v);
  for (int s = 0; s < n; ++s) {
    agree += (stochastic_sign(v, rng).array() == truth.array()).cast<int>().matrix();
  }
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double exact = 0.5 + std::abs(v(i)) / (2.0 * v.norm());
    const double p = static_cast<double>(agree(i)) / n;
    CHECK(exact > 0.5);
    CHECK(std::abs(p - exact) <= 3.0 * std::sqrt(exact * (1.0 - exact) / n));
  }
}

TEST_CASE("majority vote") {
  std::vector<SignVector> three = {signs({1}), signs({1}), signs({-1})};
  CHECK(majority_vote(three) == signs({1}));
  std::vector<SignVector> tie = {signs({1}), signs({-1})};
  CHECK(majority_vote(tie) == signs({0}));
  std::vector<SignVector> five = {signs({1, -1}), signs({1, 1}), signs({-1, 1}), signs({1, 1}), signs({1, -1})};
  CHECK(sum_votes(five) == Eigen::Vector2i(3, 1));
  CHECK(majority_vote(five) == signs({1, 1}));

  std::vector<SignVector> none;
  CHECK_THROWS_AS(majority_vote(none), std::invalid_argument);
  std::vector<SignVector> ragged = {signs({1}), signs({1, 1})};
  CHECK_THROWS_AS(majority_vote(ragged), std::invalid_argument);
}

TEST_CASE("odd vote over nonzero inputs is never zero") {
  RandomSource rng(9);
  for (int l = 1; l <= 5; ++l) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<SignVector> votes;
      for (int m = 0; m < 2 * l - 1; ++m) {
        SignVector s(6);
        for (Eigen::Index i = 0; i < 6; ++i) {
          s(i) = rng.uniform() < 0.5 ? 1 : -1;
        }
        votes.push_back(s);
      }
      CHECK((majority_vote(votes).array() != 0).all());
    }
  }
}

TEST_CASE("random source is deterministic and streams differ") {
  RandomSource a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(a.next_u64() == b.next_u64());
  }
  RandomSource s0 = RandomSource::derive(42, 0), s0b = RandomSource::derive(42, 0);
  RandomSource s1 = RandomSource::derive(42, 1);
  const Vector v = vec({0.1, -0.2, 0.3});
  bool differ = false;
  for (int i = 0; i < 20; ++i) {
    const SignVector x = stochastic_sign(v, s0);
    REQUIRE(x == stochastic_sign(v, s0b));
    differ = differ || x != stochastic_sign(v, s1);
  }
  CHECK(differ);
}

TEST_CASE("uniform draws stay in [0, 1) and integers in range") {
  RandomSource rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const auto k = rng.uniform_int(3, 5);
    REQUIRE(k >= 3);
    REQUIRE(k <= 5);
  }
  CHECK_THROWS_AS(rng.uniform_int(5, 3), std::invalid_argument);
}

TEST_CASE("normal draws have unit variance") {
  RandomSource rng(8);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}
