#include "pulsequota/sde.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "pulsequota/rng.hpp"

namespace pulsequota {

namespace {

// Below this the bridge probability cannot beat a 53-bit uniform, so no draw
// is spent on it.
constexpr double kBridgeDrawFloor = 1e-18;

double interpolated_time(double n_prev, double n_next, double t_prev, double dt,
                         double k_plus) noexcept {
  return t_prev + dt * (k_plus - n_prev) / (n_next - n_prev);
}

struct Stepper {
  double sigma;
  double floor;

  template <class Rate>
  EulerStep operator()(const Rate& rate, double n, double h, double db) const {
    const double next = n + rate(n) * n * h + sigma * n * db;
    if (next < floor) {
      return {floor, true};
    }
    return {next, false};
  }
};

template <class Rate>
PathResult run_path(const Rate& rate, const Policy& policy, const NoiseSpec& noise,
                    const SimConfig& config, double n0, std::uint64_t path_id,
                    const PathOptions& options) {
  Engine engine = path_engine(config.seed, path_id);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  boost::random::uniform_01<double> uniform;

  const double sigma = noise.sigma();
  const double k_plus = policy.k_plus();
  const double k_minus = policy.k_minus();
  const double dt = config.dt;
  const double sqrt_dt = std::sqrt(dt);
  const std::size_t steps = config.steps();
  const std::size_t stride = config.record_stride;
  const bool record = options.record_samples;
  CrossingMode mode = config.crossing_mode;
  if (mode == CrossingMode::bridge && sigma == 0.0) {
    mode = CrossingMode::interpolate;
  }
  const Stepper step{sigma, config.floor_for(policy)};

  PathResult result;
  result.trajectory.path_id = path_id;
  auto& samples = result.trajectory.samples;
  if (record) {
    samples.reserve(steps / stride + 16);
  }

  double n = n0;
  double open = 0.0;
  bool from_reset = (n0 == k_minus);
  std::size_t k = 0;
  std::uint64_t draws = 0;

  if (n0 >= k_plus) {
    // Threshold already reached: harvest at t = 0 without a closure record.
    if (record) {
      samples.push_back({0.0, k_plus, true});
      samples.push_back({0.0, k_minus, false});
    }
    n = k_minus;
    from_reset = true;
  } else if (record) {
    samples.push_back({0.0, n0, false});
  }

  bool envelope_active = options.envelope.has_value();
  double lower = n;
  double upper = n;
  double lower_factor = 1.0;
  double upper_factor = 1.0;
  if (envelope_active) {
    lower_factor = std::exp((options.envelope->alpha - noise.half_variance()) * dt);
    upper_factor = std::exp((options.envelope->beta - noise.half_variance()) * dt);
  }

  for (std::size_t i = 0; i < steps; ++i) {
    const double t_next = static_cast<double>(i + 1) * dt;
    double t0 = static_cast<double>(i) * dt;
    double h = dt;
    double sqrt_h = sqrt_dt;
    while (true) {
      const double db = sqrt_h * normal(engine);
      ++draws;
      const EulerStep next = step(rate, n, h, db);
      if (next.clamped) {
        ++result.clamp_activations;
      }

      bool crossed = false;
      double t_cross = t0 + h;
      if (next.n >= k_plus) {
        crossed = true;
        if (mode != CrossingMode::grid) {
          t_cross = interpolated_time(n, next.n, t0, h, k_plus);
        }
      } else if (mode == CrossingMode::bridge) {
        const double p = bridge_crossing_probability(n, next.n, h, k_plus, sigma);
        if (p > kBridgeDrawFloor && uniform(engine) < p) {
          crossed = true;
          t_cross = t0 + 0.5 * h;
        }
      }

      if (envelope_active && h == dt) {
        if (crossed) {
          envelope_active = false;
        } else {
          const double shock = std::exp(sigma * db);
          lower *= lower_factor * shock;
          upper *= upper_factor * shock;
          ++result.envelope.steps;
          if (next.n < lower) {
            ++result.envelope.lower_violations;
          } else if (next.n > upper) {
            ++result.envelope.upper_violations;
          }
        }
      }

      if (!crossed) {
        n = next.n;
        break;
      }

      if (record) {
        samples.push_back({t_cross, k_plus, true});
        samples.push_back({t_cross, k_minus, false});
      }
      result.closures.push_back({k++, t_cross, t_cross - open, false, from_reset});
      open = t_cross;
      from_reset = true;
      envelope_active = false;
      n = k_minus;

      // Finish the remainder of the step from the reset level.
      const double remaining = t_next - t_cross;
      if (!(remaining > 1e-12 * dt)) {
        break;
      }
      t0 = t_cross;
      h = remaining;
      sqrt_h = std::sqrt(h);
    }
    if (record && (i + 1) % stride == 0) {
      samples.push_back({t_next, n, false});
    }
  }

  const double horizon = config.horizon();
  if (horizon > open) {
    result.closures.push_back({k, horizon, horizon - open, true, from_reset});
  }
  result.trajectory.increments_consumed = draws;
  result.final_abundance = n;
  return result;
}

template <class Rate>
UnharvestedAverage run_unharvested(const Rate& rate, const NoiseSpec& noise,
                                   const SimConfig& config, double n0, std::uint64_t path_id,
                                   double from_time) {
  Engine engine = path_engine(config.seed, path_id);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const double dt = config.dt;
  const double sqrt_dt = std::sqrt(dt);
  const Stepper step{noise.sigma(), config.clamp_floor.value_or(1e-9 * n0)};

  UnharvestedAverage out;
  double n = n0;
  // Neumaier-compensated running sum.
  double sum = 0.0;
  double carry = 0.0;
  std::size_t count = 0;
  auto accumulate = [&](double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
    ++count;
  };
  if (from_time <= 0.0) {
    accumulate(n);
  }
  const std::size_t steps = config.steps();
  for (std::size_t i = 0; i < steps; ++i) {
    const EulerStep next = step(rate, n, dt, sqrt_dt * normal(engine));
    if (next.clamped) {
      ++out.clamp_activations;
    }
    n = next.n;
    if (static_cast<double>(i + 1) * dt >= from_time) {
      accumulate(n);
    }
  }
  out.average = count == 0 ? 0.0 : (sum + carry) / static_cast<double>(count);
  return out;
}

}  // namespace

std::string_view to_string(CrossingMode mode) noexcept {
  switch (mode) {
    case CrossingMode::grid:
      return "grid";
    case CrossingMode::interpolate:
      return "interpolate";
    case CrossingMode::bridge:
      return "bridge";
  }
  return "interpolate";
}

std::optional<CrossingMode> parse_crossing_mode(std::string_view text) noexcept {
  if (text == "grid") {
    return CrossingMode::grid;
  }
  if (text == "interpolate") {
    return CrossingMode::interpolate;
  }
  if (text == "bridge") {
    return CrossingMode::bridge;
  }
  return std::nullopt;
}

void SimConfig::validate() const {
  if (!std::isfinite(dt) || !(dt > 0.0)) {
    throw std::invalid_argument("sim: dt must be > 0");
  }
  if (!std::isfinite(t_max) || !(t_max > 0.0)) {
    throw std::invalid_argument("sim: t_max must be > 0");
  }
  if (!(dt < t_max)) {
    throw std::invalid_argument("sim: dt must be smaller than t_max");
  }
  if (record_stride < 1) {
    throw std::invalid_argument("sim: record_stride must be >= 1");
  }
  if (clamp_floor && (!std::isfinite(*clamp_floor) || *clamp_floor < 0.0)) {
    throw std::invalid_argument("sim: clamp_floor must be >= 0");
  }
}

std::size_t SimConfig::steps() const noexcept {
  return static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
}

double SimConfig::horizon() const noexcept { return static_cast<double>(steps()) * dt; }

double SimConfig::floor_for(const Policy& policy) const noexcept {
  return clamp_floor.value_or(1e-9 * policy.k_minus());
}

EulerStep em_step(const GrowthLaw& law, const NoiseSpec& noise, double n, double dt, double db,
                  double clamp_floor) {
  if (!(n > 0.0)) {
    throw std::invalid_argument("em_step: abundance must be > 0");
  }
  return Stepper{noise.sigma(), clamp_floor}([&law](double x) { return law.eval(x); }, n, dt, db);
}

double bridge_crossing_probability(double n_prev, double n_next, double dt, double k_plus,
                                   double sigma) noexcept {
  const double spread = sigma * n_prev;
  return std::exp(-2.0 * (k_plus - n_prev) * (k_plus - n_next) / (spread * spread * dt));
}

CrossingDecision detect_crossing(double n_prev, double n_next, double t_prev, double dt,
                                 double k_plus, const NoiseSpec& noise, CrossingMode mode,
                                 double u) {
  if (!(n_prev < k_plus)) {
    throw std::invalid_argument("detect_crossing: the step must start below k_plus");
  }
  if (n_next >= k_plus) {
    if (mode == CrossingMode::grid) {
      return {true, t_prev + dt};
    }
    return {true, interpolated_time(n_prev, n_next, t_prev, dt, k_plus)};
  }
  if (mode == CrossingMode::bridge && noise.sigma() > 0.0) {
    const double p = bridge_crossing_probability(n_prev, n_next, dt, k_plus, noise.sigma());
    if (u < p) {
      return {true, t_prev + 0.5 * dt};
    }
  }
  return {false, t_prev + dt};
}

PathResult simulate_path(const GrowthLaw& law, const Policy& policy, const NoiseSpec& noise,
                         const SimConfig& config, double n0, std::uint64_t path_id,
                         const PathOptions& options) {
  config.validate();
  if (!(n0 > 0.0) || n0 > policy.k_plus()) {
    throw std::invalid_argument("simulate_path: n0 must lie in (0, k_plus]");
  }
  return std::visit(
      [&](const auto& rate) {
        return run_path(rate, policy, noise, config, n0, path_id, options);
      },
      law.variant());
}

UnharvestedAverage time_average_unharvested(const GrowthLaw& law, const NoiseSpec& noise,
                                            const SimConfig& config, double n0,
                                            std::uint64_t path_id, double from_time) {
  config.validate();
  if (!(n0 > 0.0)) {
    throw std::invalid_argument("time_average_unharvested: n0 must be > 0");
  }
  return std::visit(
      [&](const auto& rate) {
        return run_unharvested(rate, noise, config, n0, path_id, from_time);
      },
      law.variant());
}

}  // namespace pulsequota
