#include <doctest.h>

#include <numeric>

#include "lab/systems.hpp"
#include "oracles.hpp"

using namespace lab;

TEST_CASE("product rotation construction") {
  FiniteSystem sys = make_product_rotation(5, 2, {{1, 0}, {0, 1}});
  CHECK(sys.m == 25);
  CHECK(sys.gens() == 2);
  CHECK(perm_order(sys.maps[0]) == 5);

  FiniteSystem one = make_product_rotation(1, 1, {{0}});
  CHECK(one.m == 1);
  CHECK(one.maps[0][0] == 0);

  FiniteSystem z6 = make_product_rotation(6, 1, {{2}});
  CHECK(map_order(z6, TransformationWord::unit(1, 0)) == 3);
}

TEST_CASE("system validation rejects bad input") {
  // non-commuting transpositions on 3 points
  CHECK_THROWS_AS(FiniteSystem::make({1.0 / 3, 1.0 / 3, 1.0 / 3},
                                     {{1, 0, 2}, {0, 2, 1}}),
                  ValidationError);
  // not a bijection
  CHECK_THROWS_AS(FiniteSystem::make({0.5, 0.5}, {{0, 0}}), ValidationError);
  // weights not summing to one
  CHECK_THROWS_AS(FiniteSystem::make({0.5, 0.4}, {{0, 1}}), ValidationError);
  // non-preserved weights
  CHECK_THROWS_AS(FiniteSystem::make({0.7, 0.3}, {{1, 0}}), ValidationError);
}

TEST_CASE("word_to_map") {
  FiniteSystem z5 = make_product_rotation(5, 1, {{1}, {1}});
  TransformationWord zero;
  zero.exponents = {0, 0};
  std::vector<int> id = word_to_map(z5, zero);
  for (int x = 0; x < 5; ++x) CHECK(id[x] == x);

  TransformationWord w23;
  w23.exponents = {2, 3};  // 2 + 3 = 5 = 0 mod 5
  std::vector<int> p = word_to_map(z5, w23);
  for (int x = 0; x < 5; ++x) CHECK(p[x] == x);

  CHECK(word_to_map(z5, TransformationWord::unit(2, 0)) == z5.maps[0]);
}

TEST_CASE("word_to_map is a homomorphism") {
  FiniteSystem sys = make_product_rotation(6, 2, {{1, 0}, {2, 3}});
  Rng rng(42, 1);
  for (int trial = 0; trial < 10; ++trial) {
    TransformationWord w1, w2;
    w1.exponents = {static_cast<int>(rng.next_below(9)) - 4,
                    static_cast<int>(rng.next_below(9)) - 4};
    w2.exponents = {static_cast<int>(rng.next_below(9)) - 4,
                    static_cast<int>(rng.next_below(9)) - 4};
    CHECK(word_to_map(sys, w1 + w2) == compose(word_to_map(sys, w1), word_to_map(sys, w2)));
  }
}

TEST_CASE("map_order") {
  FiniteSystem z6 = make_product_rotation(6, 1, {{2}});
  FiniteSystem z7 = make_product_rotation(7, 1, {{1}});
  TransformationWord e1 = TransformationWord::unit(1, 0);
  TransformationWord zero;
  zero.exponents = {0};
  CHECK(map_order(z6, zero) == 1);
  CHECK(map_order(z6, e1) == 3);
  CHECK(map_order(z7, e1) == 7);
}

TEST_CASE("conditional expectation over invariant orbits") {
  FiniteSystem z6 = make_product_rotation(6, 1, {{2}});
  TransformationWord e1 = TransformationWord::unit(1, 0);
  Observable ind = Observable::indicator(6, {0});
  Observable ce = conditional_expectation_invariant(z6, ind, e1);
  for (int x : {0, 2, 4}) CHECK(ce.values[x].real() == doctest::Approx(1.0 / 3).epsilon(1e-12));
  for (int x : {1, 3, 5}) CHECK(std::abs(ce.values[x]) == doctest::Approx(0.0));

  // single orbit: constant mean
  FiniteSystem z5 = make_product_rotation(5, 1, {{1}});
  Rng rng(7, 2);
  Observable f = Observable::random_unimodular(5, rng);
  Observable cf = conditional_expectation_invariant(z5, f, TransformationWord::unit(1, 0));
  cplx mean = integrate(z5, f);
  for (int x = 0; x < 5; ++x) CHECK(std::abs(cf.values[x] - mean) < 1e-12);
}

TEST_CASE("conditional expectation is an orthogonal projection") {
  FiniteSystem sys = make_product_rotation(12, 1, {{3}});
  TransformationWord e1 = TransformationWord::unit(1, 0);
  Rng rng(99, 3);
  Observable f = Observable::random_unimodular(12, rng);
  Observable ef = conditional_expectation_invariant(sys, f, e1);
  Observable eef = conditional_expectation_invariant(sys, ef, e1);
  for (int x = 0; x < 12; ++x) CHECK(std::abs(ef.values[x] - eef.values[x]) < 1e-12);

  // <f - E f, g> = 0 for invariant g
  Observable raw = Observable::random_unimodular(12, rng);
  Observable g = conditional_expectation_invariant(sys, raw, e1);
  std::vector<cplx> diff(12);
  for (int x = 0; x < 12; ++x) diff[x] = f.values[x] - ef.values[x];
  cplx ip = inner(sys, Observable::from_values(std::move(diff)), g);
  CHECK(std::abs(ip) < 1e-10);

  // invariant functions are fixed
  Observable g2 = conditional_expectation_invariant(sys, g, e1);
  for (int x = 0; x < 12; ++x) CHECK(std::abs(g.values[x] - g2.values[x]) < 1e-12);
}

TEST_CASE("skew product closed form") {
  SkewProductSystem skew;
  skew.alpha = Frac128::parse("sqrt2m1");
  auto p0 = skew.orbit_point(0);
  CHECK(p0.first == doctest::Approx(0.0));
  CHECK(p0.second == doctest::Approx(0.0));

  SkewProductSystem quarter;
  quarter.alpha = Frac128::from_rational(1, 4);
  auto p4 = quarter.orbit_point(4);
  CHECK(p4.first == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p4.second == doctest::Approx(0.0).epsilon(1e-12));

  // closed form equals iterated single steps
  std::pair<double, double> xy{0.0, 0.0};
  for (int n = 1; n <= 1000; ++n) {
    xy = skew.step_once(xy);
    auto cf = skew.orbit_point(n);
    double dx = std::abs(cf.first - xy.first);
    double dy = std::abs(cf.second - xy.second);
    dx = std::min(dx, 1.0 - dx);
    dy = std::min(dy, 1.0 - dy);
    CHECK(dx < 1e-9);
    CHECK(dy < 1e-9);
  }

  CHECK_THROWS_AS(skew.orbit_point(20'000'000'000'000ll), PrecisionError);
}

TEST_CASE("character observables multiply under translation") {
  Observable chi = character_observable(5, 1, {2});
  CHECK(std::abs(chi.values[3] - e(6.0 / 5)) < 1e-12);
}
