#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pulsequota/analytics.hpp"
#include "pulsequota/rates.hpp"
#include "pulsequota/sde.hpp"

namespace pulsequota {

/// A closure length that either ended with a pulse or was cut off by the
/// simulation horizon (censored: the true length is at least `length`).
struct DurationObservation {
  double length = 0.0;
  bool censored = false;
};

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t events = 0;
  std::size_t censored = 0;
};

/// Product-limit (Kaplan-Meier) estimate of the mean duration, integrated up
/// to the largest observation, with its Greenwood-type standard error. With
/// no censoring this is the sample mean.
MeanEstimate restricted_mean(std::vector<DurationObservation> observations);

/// Hand-entered replacement for the computed expectation bounds.
struct BoundsOverride {
  double lo = 0.0;
  std::optional<double> hi;
};

struct EnsembleOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  std::size_t resolution = kDefaultResolution;
  std::optional<BoundsOverride> bounds;
};

struct EnsembleSummary {
  std::uint64_t paths = 0;
  std::uint64_t closures_observed = 0;  // completed closures on all paths
  std::uint64_t censored = 0;           // closures cut off by the horizon
  std::uint64_t excluded_initial = 0;   // first closures that started at n0 != K-
  double mean_length = 0.0;
  double std_error = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  std::optional<double> bound_lo;
  std::optional<double> bound_hi;  // absent: unbounded
  std::optional<bool> lo_satisfied;
  std::optional<bool> hi_satisfied;  // absent: not applicable
  double envelope_violation_rate = 0.0;
  std::uint64_t envelope_steps = 0;
  std::uint64_t clamp_activations = 0;
  double yield_rate = 0.0;
  bool h2_holds = false;
  bool inconclusive = false;

  /// True when a finite bound is statistically violated.
  bool bound_violated() const noexcept {
    return (lo_satisfied && !*lo_satisfied) || (hi_satisfied && !*hi_satisfied);
  }
};

/// Runs `paths` independent realizations and pools every closure that
/// started at K-. Aggregation is in path order, so the summary does not
/// depend on the thread count.
EnsembleSummary run_ensemble(const GrowthLaw& law, const Policy& policy, const NoiseSpec& noise,
                             const SimConfig& config, double n0, std::size_t paths,
                             const EnsembleOptions& options = {});

struct LongRunAverage {
  double average = 0.0;
  double target = 0.0;
  double std_error = 0.0;  // across replicates; 0 for a single path
  std::size_t replicates = 1;
  std::uint64_t clamp_activations = 0;
};

/// Time average of the unharvested logistic (mu = nu = 1) over
/// [burn_in_fraction * t_max, t_max], averaged over independent replicate
/// paths, against the limit K (1 - sigma^2 / (2 r0)).
LongRunAverage long_run_average_no_harvest(const GrowthLaw& law, const NoiseSpec& noise,
                                           const SimConfig& config, double n0,
                                           double burn_in_fraction = 0.1,
                                           std::size_t replicates = 1, unsigned threads = 0);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Ensemble mean of N(t)^2 at the configured horizon.
MomentEstimate terminal_second_moment(const GrowthLaw& law, const Policy& policy,
                                      const NoiseSpec& noise, const SimConfig& config, double n0,
                                      std::size_t paths, unsigned threads = 0);

enum class SweepAxis { sigma, q, k_plus, dt, paths };

std::string_view to_string(SweepAxis axis) noexcept;
std::optional<SweepAxis> parse_sweep_axis(std::string_view text) noexcept;

struct EnsembleSpec {
  GrowthLaw law;
  Policy policy;
  NoiseSpec noise;
  SimConfig sim;
  double n0 = 0.0;
  std::size_t paths = 1;
};

/// One ensemble per value along `axis`. Entry i runs with the master seed
/// folded with i (entry 0 keeps the base seed).
std::vector<EnsembleSummary> sweep(const EnsembleSpec& base, SweepAxis axis,
                                   std::span<const double> values,
                                   const EnsembleOptions& options = {});

/// Runs fn(path_id) for every path on a pool of worker threads.
void for_each_path(std::size_t paths, unsigned threads,
                   const std::function<void(std::size_t)>& fn);

}  // namespace pulsequota
