#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "pulsequota/rates.hpp"
#include "pulsequota/trajectory.hpp"

namespace pulsequota {

/// How a threshold crossing inside one step is detected and timed.
///   grid:        crossing iff the step ends at or above K+, timed at the step end.
///   interpolate: same trigger, time by linear interpolation to K+.
///   bridge:      as interpolate, plus a Brownian-bridge probability of an
///                unobserved excursion above K+ for steps ending below it.
enum class CrossingMode { grid, interpolate, bridge };

std::string_view to_string(CrossingMode mode) noexcept;
std::optional<CrossingMode> parse_crossing_mode(std::string_view text) noexcept;

struct SimConfig {
  double dt = 1e-3;
  double t_max = 100.0;
  std::uint64_t seed = 42;
  CrossingMode crossing_mode = CrossingMode::interpolate;
  std::optional<double> clamp_floor;  // default: 1e-9 * K-
  std::size_t record_stride = 1;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
  std::size_t steps() const noexcept;
  /// Simulated horizon steps() * dt (t_max rounded down to the grid).
  double horizon() const noexcept;
  double floor_for(const Policy& policy) const noexcept;
};

struct ClosureRecord {
  std::size_t k = 0;
  double open_time = 0.0;  // pulse time ending this closure (horizon if censored)
  double length = 0.0;
  bool censored = false;
  bool from_reset = true;  // closure started at K- rather than at an arbitrary n0

  friend bool operator==(const ClosureRecord&, const ClosureRecord&) = default;
};

struct EulerStep {
  double n = 0.0;
  bool clamped = false;
};

/// n + r(n) n dt + sigma n db, floored at clamp_floor.
EulerStep em_step(const GrowthLaw& law, const NoiseSpec& noise, double n, double dt, double db,
                  double clamp_floor = 0.0);

struct CrossingDecision {
  bool crossed = false;
  double t_cross = 0.0;
};

/// Probability that a Brownian bridge in N with frozen diffusion sigma n_prev
/// touches K+ inside a step whose ends both lie below it.
double bridge_crossing_probability(double n_prev, double n_next, double dt, double k_plus,
                                   double sigma) noexcept;

CrossingDecision detect_crossing(double n_prev, double n_next, double t_prev, double dt,
                                 double k_plus, const NoiseSpec& noise, CrossingMode mode,
                                 double u);

/// Counts of grid steps before the first crossing at which the path left the
/// sandwich between the shared-increment GBMs with rates alpha and beta.
struct EnvelopeStats {
  std::uint64_t steps = 0;
  std::uint64_t lower_violations = 0;
  std::uint64_t upper_violations = 0;

  std::uint64_t violations() const noexcept { return lower_violations + upper_violations; }
  double fraction() const noexcept {
    return steps == 0 ? 0.0 : static_cast<double>(violations()) / static_cast<double>(steps);
  }
};

struct PathOptions {
  bool record_samples = true;
  /// When set, the GBM envelope with these rates is tracked until the first crossing.
  std::optional<RateBounds> envelope;
};

struct PathResult {
  StochTrajectory trajectory;
  std::vector<ClosureRecord> closures;
  std::uint64_t clamp_activations = 0;
  EnvelopeStats envelope;
  double final_abundance = 0.0;
};

/// One realization of the impulsive SDE from n0 over the configured horizon.
/// The random stream depends only on (config.seed, path_id).
PathResult simulate_path(const GrowthLaw& law, const Policy& policy, const NoiseSpec& noise,
                         const SimConfig& config, double n0, std::uint64_t path_id,
                         const PathOptions& options = {});

struct UnharvestedAverage {
  double average = 0.0;
  std::uint64_t clamp_activations = 0;
};

/// Time average of an unharvested path over grid points with t >= from_time.
UnharvestedAverage time_average_unharvested(const GrowthLaw& law, const NoiseSpec& noise,
                                            const SimConfig& config, double n0,
                                            std::uint64_t path_id, double from_time);

}  // namespace pulsequota
