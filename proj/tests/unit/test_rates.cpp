#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"

#include "pulsequota/rates.hpp"

using namespace pulsequota;

namespace {

const GrowthLaw kLogistic = GrowthLaw::logistic(1.0 / 9.0, 9000.0);

}  // namespace

TEST_CASE("eval_rate on the logistic law") {
  CHECK(eval_rate(kLogistic, 9000.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(eval_rate(kLogistic, 0.0) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(eval_rate(kLogistic, 6000.0) == doctest::Approx(0.037037037037037037).epsilon(1e-14));
  // Above K the rate is negative, also for fractional exponents.
  CHECK(eval_rate(kLogistic, 12000.0) < 0.0);
  CHECK(eval_rate(GrowthLaw::logistic(1.0, 1.0, 2.0, 1.5), 2.0) < 0.0);
}

TEST_CASE("eval_rate rejects negative abundance and out-of-table points") {
  CHECK_THROWS_AS(eval_rate(kLogistic, -1.0), std::invalid_argument);
  const GrowthLaw table = GrowthLaw::table({{0.0, 0.2}, {5000.0, 0.05}});
  CHECK(eval_rate(table, 2500.0) == doctest::Approx(0.125));
  CHECK_THROWS_AS(eval_rate(table, 5001.0), std::out_of_range);
}

TEST_CASE("growth law constructors validate parameters") {
  CHECK_THROWS_AS(GrowthLaw::logistic(0.0, 9000.0), std::invalid_argument);
  CHECK_THROWS_AS(GrowthLaw::logistic(0.1, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(GrowthLaw::logistic(0.1, 10.0, 0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GrowthLaw::logistic(0.1, 10.0, 1.0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(GrowthLaw::table({{0.0, 0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(GrowthLaw::table({{0.0, 0.1}, {0.0, 0.2}}), std::invalid_argument);
  CHECK_THROWS_AS(GrowthLaw::table({{5.0, 0.1}, {1.0, 0.2}}), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSpec(-0.1), std::invalid_argument);
}

TEST_CASE("rate_bounds examples") {
  const RateBounds lb = rate_bounds(kLogistic, 6000.0);
  CHECK(lb.alpha == doctest::Approx(1.0 / 27.0).epsilon(1e-14));
  CHECK(lb.beta == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
  CHECK(lb.b_script == doctest::Approx(1.0 / 9.0).epsilon(1e-14));

  const RateBounds cb = rate_bounds(GrowthLaw::constant(1.0 / 9.0), 6000.0);
  CHECK(cb.alpha == 1.0 / 9.0);
  CHECK(cb.beta == 1.0 / 9.0);

  const RateBounds tb = rate_bounds(GrowthLaw::table({{0.0, 0.2}, {5000.0, 0.05}}), 5000.0);
  CHECK(tb.alpha == doctest::Approx(0.05));
  CHECK(tb.beta == doctest::Approx(0.2));
}

TEST_CASE("rate_bounds finds an interior table peak between grid points") {
  // Peak at a knot that a coarse grid would step over.
  const GrowthLaw hump = GrowthLaw::table({{0.0, 0.1}, {1234.5, 0.4}, {3000.0, 0.05}});
  const RateBounds b = rate_bounds(hump, 3000.0, 16);
  CHECK(b.beta == doctest::Approx(0.4));
  CHECK(b.alpha == doctest::Approx(0.05));
}

TEST_CASE("check_h1 examples") {
  const H1Report logistic = check_h1(kLogistic);
  CHECK(logistic.holds);
  REQUIRE(logistic.k);
  CHECK(*logistic.k == doctest::Approx(9000.0));

  CHECK_FALSE(check_h1(GrowthLaw::constant(1.0 / 9.0)).holds);

  const H1Report squared = check_h1(GrowthLaw::logistic(1.0, 1.0, 2.0, 1.0));
  CHECK(squared.holds);
  CHECK(*squared.k == doctest::Approx(1.0));

  const H1Report table = check_h1(GrowthLaw::table({{0.0, 0.2}, {1000.0, 0.1}, {3000.0, -0.1}}));
  CHECK(table.holds);
  CHECK(*table.k == doctest::Approx(2000.0).epsilon(1e-9));

  // Positive again after the first root: not a single sign change.
  CHECK_FALSE(
      check_h1(GrowthLaw::table({{0.0, 0.2}, {1000.0, -0.1}, {2000.0, 0.1}, {3000.0, -0.1}}))
          .holds);
}

TEST_CASE("check_h2 examples") {
  const Policy policy(6000.0, 5000.0);
  const H2Report ok = check_h2(kLogistic, NoiseSpec(1.0 / 3.0), policy);
  CHECK(ok.holds);
  REQUIRE(ok.k0_max);
  CHECK(*ok.k0_max == doctest::Approx(4500.0).epsilon(1e-12));

  CHECK_FALSE(check_h2(kLogistic, NoiseSpec(1.0), policy).holds);

  const H2Report quiet = check_h2(kLogistic, NoiseSpec(0.0), policy);
  CHECK(quiet.holds);

  // Table law: r crosses sigma^2/2 = 1/18 between knots.
  const GrowthLaw table = GrowthLaw::table({{0.0, 1.0 / 9.0}, {9000.0, 0.0}});
  const H2Report t = check_h2(table, NoiseSpec(1.0 / 3.0), policy);
  CHECK(t.holds);
  CHECK(*t.k0_max == doctest::Approx(4500.0).epsilon(1e-3));
}

TEST_CASE("policy invariants") {
  CHECK_THROWS_AS(Policy(6000.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Policy(6000.0, 6000.0), std::invalid_argument);
  CHECK_THROWS_AS(Policy(6000.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_policy_against(kLogistic, Policy(9000.0, 1000.0)),
                  std::invalid_argument);
  CHECK_NOTHROW(check_policy_against(kLogistic, Policy(6000.0, 5000.0)));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> kp(1.0, 1e6);
  std::uniform_real_distribution<double> frac(1e-6, 1.0 - 1e-6);
  for (int i = 0; i < 1000; ++i) {
    const double k_plus = kp(rng);
    const double q = frac(rng) * k_plus;
    const Policy p(k_plus, q);
    CHECK(p.k_minus() == k_plus - q);
  }
}

TEST_CASE("property: generalized logistic with mu, nu >= 1 is non-increasing on [0, K]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> r0(0.01, 2.0);
  std::uniform_real_distribution<double> k(10.0, 1e5);
  std::uniform_real_distribution<double> expo(1.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double cap = k(rng);
    const GrowthLaw law = GrowthLaw::logistic(r0(rng), cap, expo(rng), expo(rng));
    double previous = law(0.0);
    for (int i = 1; i <= 500; ++i) {
      const double value = law(cap * i / 500.0);
      REQUIRE(value <= previous);
      previous = value;
    }
  }
}

TEST_CASE("property: rate_bounds contains every grid value on [0, k_plus]") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    GrowthLaw law = GrowthLaw::constant(0.1);
    double k_plus = 0.0;
    if (trial % 2 == 0) {
      const double cap = 100.0 + 1e4 * unit(rng);
      law = GrowthLaw::logistic(0.01 + unit(rng), cap, 1.0 + 3.0 * unit(rng),
                                1.0 + 3.0 * unit(rng));
      k_plus = cap * (0.05 + 0.9 * unit(rng));
    } else {
      std::vector<std::pair<double, double>> points;
      double x = 0.0;
      for (int j = 0; j < 6; ++j) {
        points.emplace_back(x, unit(rng) - 0.3);
        x += 10.0 + 100.0 * unit(rng);
      }
      k_plus = points.back().first * (0.1 + 0.9 * unit(rng));
      law = GrowthLaw::table(points);
    }
    const RateBounds b = rate_bounds(law, k_plus, 257);
    for (int i = 0; i <= 1000; ++i) {
      const double value = law(k_plus * i / 1000.0);
      REQUIRE(b.alpha <= value + 1e-12);
      REQUIRE(value <= b.beta + 1e-12);
    }
  }
}

TEST_CASE("property: check_h2 is monotone in sigma") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double cap = 1000.0 + 1e4 * unit(rng);
    const GrowthLaw law = GrowthLaw::logistic(0.05 + unit(rng), cap, 1.0 + 2.0 * unit(rng),
                                              1.0 + 2.0 * unit(rng));
    const double k_plus = cap * (0.2 + 0.7 * unit(rng));
    const Policy policy(k_plus, k_plus * (0.1 + 0.8 * unit(rng)));
    bool seen_failure = false;
    for (int i = 0; i <= 60; ++i) {
      const bool holds = check_h2(law, NoiseSpec(0.05 * i), policy).holds;
      if (seen_failure) {
        REQUIRE_FALSE(holds);
      }
      seen_failure = seen_failure || !holds;
    }
  }
}
