#include "pulsequota/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pulsequota/rng.hpp"

namespace pulsequota {

namespace {

constexpr double kZ95 = 1.959963984540054;

// Neumaier summation; deterministic for a fixed input order.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) {
    return requested;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

}  // namespace

void for_each_path(std::size_t paths, unsigned threads,
                   const std::function<void(std::size_t)>& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), paths));
  if (workers <= 1) {
    for (std::size_t i = 0; i < paths; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < paths; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
          next.store(paths);
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

MeanEstimate restricted_mean(std::vector<DurationObservation> observations) {
  MeanEstimate out;
  if (observations.empty()) {
    return out;
  }
  // Events sort before censorings at equal times.
  std::sort(observations.begin(), observations.end(),
            [](const DurationObservation& a, const DurationObservation& b) {
              if (a.length != b.length) {
                return a.length < b.length;
              }
              return !a.censored && b.censored;
            });

  struct EventTime {
    double area_before;  // integral of S over [0, t_j]
    double deaths;
    double at_risk;
  };
  std::vector<EventTime> event_times;

  double survival = 1.0;
  double at_risk = static_cast<double>(observations.size());
  double previous = 0.0;
  CompensatedSum area;
  for (std::size_t i = 0; i < observations.size();) {
    const double t = observations[i].length;
    area.add(survival * (t - previous));
    previous = t;
    std::size_t deaths = 0;
    std::size_t losses = 0;
    for (; i < observations.size() && observations[i].length == t; ++i) {
      if (observations[i].censored) {
        ++losses;
      } else {
        ++deaths;
      }
    }
    if (deaths > 0) {
      event_times.push_back({area.value(), static_cast<double>(deaths), at_risk});
      survival *= 1.0 - static_cast<double>(deaths) / at_risk;
    }
    out.events += deaths;
    out.censored += losses;
    at_risk -= static_cast<double>(deaths + losses);
  }

  const double total = area.value();
  CompensatedSum variance;
  for (const auto& e : event_times) {
    if (e.at_risk > e.deaths) {
      const double tail = total - e.area_before;
      variance.add(tail * tail * e.deaths / (e.at_risk * (e.at_risk - e.deaths)));
    }
  }
  out.mean = total;
  out.std_error = std::sqrt(std::max(0.0, variance.value()));
  return out;
}

EnsembleSummary run_ensemble(const GrowthLaw& law, const Policy& policy, const NoiseSpec& noise,
                             const SimConfig& config, double n0, std::size_t paths,
                             const EnsembleOptions& options) {
  config.validate();
  if (paths < 1) {
    throw std::invalid_argument("run_ensemble: need at least one path");
  }
  if (!(n0 > 0.0) || n0 > policy.k_plus()) {
    throw std::invalid_argument("run_ensemble: n0 must lie in (0, k_plus]");
  }
  const bool malthusian = std::holds_alternative<ConstantRate>(law.variant());
  if (!malthusian && !check_h1(law, options.resolution).holds) {
    throw std::domain_error("run_ensemble: growth law violates H1 (no carrying capacity)");
  }
  check_policy_against(law, policy);

  const RateBounds bounds = rate_bounds(law, policy.k_plus(), options.resolution);
  EnsembleSummary summary;
  summary.paths = paths;
  summary.h2_holds = check_h2(law, noise, policy, options.resolution).holds;

  std::vector<PathResult> results(paths);
  const PathOptions path_options{false, bounds};
  for_each_path(paths, options.threads, [&](std::size_t i) {
    results[i] = simulate_path(law, policy, noise, config, n0, i, path_options);
  });

  std::vector<DurationObservation> observations;
  std::uint64_t envelope_violations = 0;
  for (const PathResult& r : results) {
    for (const ClosureRecord& c : r.closures) {
      if (c.censored) {
        ++summary.censored;
      } else {
        ++summary.closures_observed;
      }
      if (!c.from_reset) {
        ++summary.excluded_initial;
        continue;
      }
      observations.push_back({c.length, c.censored});
    }
    summary.clamp_activations += r.clamp_activations;
    summary.envelope_steps += r.envelope.steps;
    envelope_violations += r.envelope.violations();
  }
  results.clear();

  summary.envelope_violation_rate =
      summary.envelope_steps == 0
          ? 0.0
          : static_cast<double>(envelope_violations) / static_cast<double>(summary.envelope_steps);

  const MeanEstimate estimate = restricted_mean(std::move(observations));
  summary.inconclusive = estimate.events == 0;
  if (!summary.inconclusive) {
    summary.mean_length = estimate.mean;
    summary.std_error = estimate.std_error;
    summary.ci95_lo = estimate.mean - kZ95 * estimate.std_error;
    summary.ci95_hi = estimate.mean + kZ95 * estimate.std_error;
    summary.yield_rate = policy.q() / estimate.mean;
  }

  if (options.bounds) {
    summary.bound_lo = options.bounds->lo;
    summary.bound_hi = options.bounds->hi;
  } else if (bounds.beta > noise.half_variance()) {
    const ExpectationBounds b = closure_expectation_bounds(bounds, noise, policy);
    summary.bound_lo = b.lo;
    summary.bound_hi = b.hi.value;
  }
  if (!summary.inconclusive) {
    const double margin = 2.0 * summary.std_error;
    if (summary.bound_lo) {
      summary.lo_satisfied = *summary.bound_lo <= summary.mean_length + margin;
    }
    if (summary.bound_hi) {
      summary.hi_satisfied = summary.mean_length - margin <= *summary.bound_hi;
    }
  }
  return summary;
}

LongRunAverage long_run_average_no_harvest(const GrowthLaw& law, const NoiseSpec& noise,
                                           const SimConfig& config, double n0,
                                           double burn_in_fraction, std::size_t replicates,
                                           unsigned threads) {
  const auto* logistic = std::get_if<GeneralizedLogistic>(&law.variant());
  if (logistic == nullptr || logistic->mu != 1.0 || logistic->nu != 1.0) {
    throw std::invalid_argument("long-run average: needs the logistic law with mu = nu = 1");
  }
  if (!(logistic->r0 > noise.half_variance())) {
    throw std::domain_error(
        "long-run average: r0 <= sigma^2/2, the unharvested population goes extinct");
  }
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw std::invalid_argument("long-run average: burn_in_fraction must lie in [0, 1)");
  }
  if (replicates < 1) {
    throw std::invalid_argument("long-run average: need at least one replicate");
  }
  config.validate();

  const double from_time = burn_in_fraction * config.horizon();
  std::vector<UnharvestedAverage> runs(replicates);
  for_each_path(replicates, threads, [&](std::size_t i) {
    runs[i] = time_average_unharvested(law, noise, config, n0, i, from_time);
  });

  LongRunAverage out;
  out.replicates = replicates;
  out.target = logistic->k * (1.0 - noise.half_variance() / logistic->r0);
  CompensatedSum sum;
  for (const auto& r : runs) {
    sum.add(r.average);
    out.clamp_activations += r.clamp_activations;
  }
  out.average = sum.value() / static_cast<double>(replicates);
  if (replicates > 1) {
    CompensatedSum squares;
    for (const auto& r : runs) {
      squares.add((r.average - out.average) * (r.average - out.average));
    }
    const double r = static_cast<double>(replicates);
    out.std_error = std::sqrt(squares.value() / (r - 1.0) / r);
  }
  return out;
}

MomentEstimate terminal_second_moment(const GrowthLaw& law, const Policy& policy,
                                      const NoiseSpec& noise, const SimConfig& config, double n0,
                                      std::size_t paths, unsigned threads) {
  if (paths < 2) {
    throw std::invalid_argument("terminal_second_moment: need at least two paths");
  }
  std::vector<double> squares(paths);
  const PathOptions options{false, std::nullopt};
  for_each_path(paths, threads, [&](std::size_t i) {
    const double n = simulate_path(law, policy, noise, config, n0, i, options).final_abundance;
    squares[i] = n * n;
  });
  CompensatedSum sum;
  for (double s : squares) {
    sum.add(s);
  }
  const double count = static_cast<double>(paths);
  MomentEstimate out;
  out.mean = sum.value() / count;
  CompensatedSum dev;
  for (double s : squares) {
    dev.add((s - out.mean) * (s - out.mean));
  }
  out.std_error = std::sqrt(dev.value() / (count - 1.0) / count);
  return out;
}

std::string_view to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::sigma:
      return "sigma";
    case SweepAxis::q:
      return "q";
    case SweepAxis::k_plus:
      return "k_plus";
    case SweepAxis::dt:
      return "dt";
    case SweepAxis::paths:
      return "paths";
  }
  return "sigma";
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view text) noexcept {
  for (SweepAxis axis :
       {SweepAxis::sigma, SweepAxis::q, SweepAxis::k_plus, SweepAxis::dt, SweepAxis::paths}) {
    if (text == to_string(axis)) {
      return axis;
    }
  }
  return std::nullopt;
}

std::vector<EnsembleSummary> sweep(const EnsembleSpec& base, SweepAxis axis,
                                   std::span<const double> values,
                                   const EnsembleOptions& options) {
  std::vector<EnsembleSummary> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    EnsembleSpec spec = base;
    const double v = values[i];
    switch (axis) {
      case SweepAxis::sigma:
        spec.noise = NoiseSpec(v);
        break;
      case SweepAxis::q:
        spec.policy = Policy(base.policy.k_plus(), v);
        break;
      case SweepAxis::k_plus:
        spec.policy = Policy(v, base.policy.q());
        break;
      case SweepAxis::dt:
        spec.sim.dt = v;
        break;
      case SweepAxis::paths:
        if (!(v >= 1.0) || v != std::floor(v)) {
          throw std::invalid_argument("sweep: paths values must be positive integers");
        }
        spec.paths = static_cast<std::size_t>(v);
        break;
    }
    spec.sim.seed = sweep_seed(base.sim.seed, i);
    out.push_back(run_ensemble(spec.law, spec.policy, spec.noise, spec.sim, spec.n0, spec.paths,
                               options));
  }
  return out;
}

}  // namespace pulsequota
