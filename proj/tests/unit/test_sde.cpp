#include <cmath>
#include <stdexcept>

#include "doctest.h"

#include "pulsequota/deterministic.hpp"
#include "pulsequota/rng.hpp"
#include "pulsequota/sde.hpp"

using namespace pulsequota;

namespace {

const GrowthLaw kLogistic = GrowthLaw::logistic(1.0 / 9.0, 9000.0);
const Policy kPolicy(6000.0, 5000.0);
const NoiseSpec kNoise(1.0 / 3.0);

constexpr double k36Ln2 = 24.9532985001580311;

SimConfig config(double dt, double t_max, std::uint64_t seed = 42) {
  SimConfig c;
  c.dt = dt;
  c.t_max = t_max;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("em_step examples") {
  const EulerStep flat = em_step(GrowthLaw::constant(0.2), NoiseSpec(0.0), 500.0, 0.01, 0.0);
  CHECK(flat.n == doctest::Approx(500.0 * (1.0 + 0.2 * 0.01)).epsilon(1e-15));
  CHECK_FALSE(flat.clamped);

  CHECK(em_step(kLogistic, NoiseSpec(0.0), 9000.0, 0.1, 0.0).n == doctest::Approx(9000.0));

  const EulerStep paper = em_step(kLogistic, kNoise, 1000.0, 0.01, 0.05);
  CHECK(paper.n == doctest::Approx(1017.65432098765432).epsilon(1e-14));

  const EulerStep clamped = em_step(kLogistic, kNoise, 1000.0, 0.01, -5.0, 1.0);
  CHECK(clamped.clamped);
  CHECK(clamped.n == 1.0);

  CHECK_THROWS_AS(em_step(kLogistic, kNoise, 0.0, 0.01, 0.0), std::invalid_argument);
}

TEST_CASE("detect_crossing examples") {
  const auto mid = detect_crossing(5999.0, 6001.0, 3.0, 0.01, 6000.0, kNoise,
                                   CrossingMode::interpolate, 0.5);
  CHECK(mid.crossed);
  CHECK(mid.t_cross == doctest::Approx(3.005).epsilon(1e-14));

  const auto grid =
      detect_crossing(5999.0, 6001.0, 3.0, 0.01, 6000.0, kNoise, CrossingMode::grid, 0.5);
  CHECK(grid.crossed);
  CHECK(grid.t_cross == doctest::Approx(3.01));

  // exp(-44991) underflows to zero: never a crossing, even for u = 0.
  CHECK(bridge_crossing_probability(1000.0, 1001.0, 0.01, 6000.0, 1.0 / 3.0) == 0.0);
  CHECK(-2.0 * 5000.0 * 4999.0 / ((1.0 / 9.0) * 1e6 * 0.01) == doctest::Approx(-44991.0));
  CHECK_FALSE(
      detect_crossing(1000.0, 1001.0, 0.0, 0.01, 6000.0, kNoise, CrossingMode::bridge, 0.0)
          .crossed);

  for (CrossingMode mode : {CrossingMode::grid, CrossingMode::interpolate, CrossingMode::bridge}) {
    const auto exact = detect_crossing(5990.0, 6000.0, 1.0, 0.01, 6000.0, kNoise, mode, 0.99);
    CHECK(exact.crossed);
    CHECK(exact.t_cross == doctest::Approx(1.01));
  }
}

TEST_CASE("bridge mode crosses inside a step near the threshold") {
  const double p = bridge_crossing_probability(5990.0, 5995.0, 0.01, 6000.0, 1.0 / 3.0);
  CHECK(p > 0.0);
  CHECK(p < 1.0);
  const auto yes =
      detect_crossing(5990.0, 5995.0, 2.0, 0.01, 6000.0, kNoise, CrossingMode::bridge, p / 2.0);
  CHECK(yes.crossed);
  CHECK(yes.t_cross == doctest::Approx(2.005));
  CHECK_FALSE(
      detect_crossing(5990.0, 5995.0, 2.0, 0.01, 6000.0, kNoise, CrossingMode::bridge, p).crossed);
  // Noiseless bridge falls back to interpolation.
  CHECK_FALSE(detect_crossing(5990.0, 5995.0, 2.0, 0.01, 6000.0, NoiseSpec(0.0),
                              CrossingMode::bridge, 0.0)
                  .crossed);
  CHECK_THROWS_AS(
      detect_crossing(6000.0, 6001.0, 0.0, 0.01, 6000.0, kNoise, CrossingMode::grid, 0.5),
      std::invalid_argument);
}

TEST_CASE("sim config validation") {
  CHECK_THROWS_AS(config(0.0, 1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(config(1.0, 0.5).validate(), std::invalid_argument);
  SimConfig c = config(1e-3, 1.0);
  c.record_stride = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.record_stride = 1;
  c.clamp_floor = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(config(1e-3, 1.0).steps() == 1000);
  CHECK(config(0.1, 0.3).steps() == 3);
}

TEST_CASE("noiseless path matches the deterministic model") {
  const SimConfig c = config(1e-3, 100.0);
  const PathResult r = simulate_path(kLogistic, kPolicy, NoiseSpec(0.0), c, 1000.0, 0);
  REQUIRE(r.closures.size() == 5);  // four pulses and the censored tail
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK_FALSE(r.closures[k].censored);
    CHECK(std::abs(r.closures[k].length - k36Ln2) / k36Ln2 < 5.0 * c.dt);
  }
  CHECK(r.closures.back().censored);
  CHECK(r.clamp_activations == 0);

  // Before the first pulse the Euler path tracks the RK4 path sample by sample.
  const DetTrajectory det = det_trajectory(kLogistic, kPolicy, 1000.0, c.dt, c.t_max);
  const double first = det.events.front();
  std::size_t compared = 0;
  for (std::size_t i = 0; i < det.samples.size() && i < r.trajectory.samples.size(); ++i) {
    const Sample& a = det.samples[i];
    const Sample& b = r.trajectory.samples[i];
    if (a.t >= first - 0.1) {
      break;
    }
    REQUIRE(a.t == doctest::Approx(b.t));
    REQUIRE(std::abs(a.n - b.n) / a.n < 5.0 * c.dt);
    ++compared;
  }
  CHECK(compared > 20000);
}

TEST_CASE("trajectory rows: pulses are K+ then K- at the same time") {
  const PathResult r = simulate_path(kLogistic, kPolicy, kNoise, config(1e-3, 200.0), 1000.0, 3);
  const auto& s = r.trajectory.samples;
  std::size_t events = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].n > 0.0);
    if (s[i].event) {
      ++events;
      CHECK(s[i].n == 6000.0);
      REQUIRE(i + 1 < s.size());
      CHECK(s[i + 1].n == 1000.0);
      CHECK(s[i + 1].t == s[i].t);
      CHECK_FALSE(s[i + 1].event);
    } else {
      CHECK(s[i].n < 6000.0);
    }
    if (i > 0) {
      CHECK(s[i].t >= s[i - 1].t);
    }
  }
  std::size_t completed = 0;
  for (const auto& c : r.closures) {
    completed += c.censored ? 0 : 1;
    CHECK(c.length > 0.0);
  }
  CHECK(events == completed);
}

TEST_CASE("starting at the threshold harvests at t = 0") {
  const PathResult r = simulate_path(kLogistic, kPolicy, kNoise, config(1e-3, 5.0), 6000.0, 0);
  REQUIRE(r.trajectory.samples.size() >= 2);
  CHECK(r.trajectory.samples[0] == Sample{0.0, 6000.0, true});
  CHECK(r.trajectory.samples[1] == Sample{0.0, 1000.0, false});
  for (const auto& c : r.closures) {
    CHECK(c.length > 0.0);
    CHECK(c.from_reset);
  }
}

TEST_CASE("a first closure from n0 != K- is flagged") {
  const PathResult r = simulate_path(kLogistic, kPolicy, kNoise, config(1e-3, 300.0), 3000.0, 1);
  REQUIRE_FALSE(r.closures.empty());
  CHECK_FALSE(r.closures.front().from_reset);
  for (std::size_t k = 1; k < r.closures.size(); ++k) {
    CHECK(r.closures[k].from_reset);
  }
}

TEST_CASE("paths are reproducible and independent of call order") {
  const SimConfig c = config(1e-3, 50.0, 1234);
  const PathResult a = simulate_path(kLogistic, kPolicy, kNoise, c, 1000.0, 7);
  (void)simulate_path(kLogistic, kPolicy, kNoise, c, 1000.0, 3);
  const PathResult b = simulate_path(kLogistic, kPolicy, kNoise, c, 1000.0, 7);
  CHECK(a.trajectory.samples == b.trajectory.samples);
  CHECK(a.closures == b.closures);
  CHECK(a.trajectory.increments_consumed == b.trajectory.increments_consumed);

  const PathResult other = simulate_path(kLogistic, kPolicy, kNoise, c, 1000.0, 8);
  CHECK_FALSE(a.trajectory.samples == other.trajectory.samples);
  CHECK(derive_seed(1234, 7) != derive_seed(1234, 8));
  CHECK(derive_seed(1234, 7) != derive_seed(1235, 7));
}

TEST_CASE("record_stride thins grid rows but keeps every pulse") {
  SimConfig c = config(1e-3, 100.0, 5);
  const PathResult full = simulate_path(kLogistic, kPolicy, kNoise, c, 1000.0, 0);
  c.record_stride = 10;
  const PathResult thin = simulate_path(kLogistic, kPolicy, kNoise, c, 1000.0, 0);
  CHECK(full.closures == thin.closures);

  std::vector<Sample> full_events;
  std::size_t full_grid = 0;
  for (const auto& s : full.trajectory.samples) {
    s.event ? full_events.push_back(s) : void(++full_grid);
  }
  std::vector<Sample> thin_events;
  std::size_t thin_grid = 0;
  for (const auto& s : thin.trajectory.samples) {
    s.event ? thin_events.push_back(s) : void(++thin_grid);
  }
  CHECK(full_events == thin_events);
  // Grid rows: t = 0 plus one per step; post-pulse rows are common to both.
  const std::size_t resets = full_events.size();
  CHECK(full_grid - resets - 1 == 100000);
  CHECK(thin_grid - resets - 1 == 10000);
}

TEST_CASE("envelope tracking with the paper's rates") {
  PathOptions options;
  options.record_samples = false;
  options.envelope = RateBounds{1.0 / 27.0, 1.0 / 9.0, 1.0 / 9.0};
  std::uint64_t steps = 0;
  std::uint64_t violations = 0;
  for (std::uint64_t id = 0; id < 20; ++id) {
    const PathResult r =
        simulate_path(kLogistic, kPolicy, kNoise, config(1e-3, 200.0), 1000.0, id, options);
    steps += r.envelope.steps;
    violations += r.envelope.violations();
    CHECK(r.trajectory.samples.empty());
  }
  CHECK(steps > 0);
  CHECK(static_cast<double>(violations) / static_cast<double>(steps) < 0.01);
}

TEST_CASE("clamp floor keeps a crashing path positive") {
  // Strongly negative growth drives N towards zero; the floor catches it.
  SimConfig c = config(0.1, 50.0, 3);
  c.clamp_floor = 1.0;
  const Policy policy(6000.0, 5000.0);
  const PathResult r =
      simulate_path(GrowthLaw::constant(-5.0), policy, NoiseSpec(2.0), c, 1000.0, 0);
  CHECK(r.clamp_activations > 0);
  for (const auto& s : r.trajectory.samples) {
    CHECK(s.n >= 1.0);
  }
}

TEST_CASE("unharvested time average") {
  SimConfig c = config(1e-2, 400.0, 9);
  const UnharvestedAverage quiet =
      time_average_unharvested(kLogistic, NoiseSpec(0.0), c, 1000.0, 0, 200.0);
  CHECK(quiet.average == doctest::Approx(9000.0).epsilon(1e-4));
  CHECK_THROWS_AS(time_average_unharvested(kLogistic, kNoise, c, 0.0, 0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("crossing mode names round-trip") {
  for (CrossingMode m : {CrossingMode::grid, CrossingMode::interpolate, CrossingMode::bridge}) {
    CHECK(parse_crossing_mode(to_string(m)) == m);
  }
  CHECK_FALSE(parse_crossing_mode("euler"));
}
