#pragma once

#include <optional>
#include <span>

#include "pulsequota/rates.hpp"
#include "pulsequota/trajectory.hpp"

namespace pulsequota {

/// Mean first-passage time of a geometric Brownian motion from K- to K+.
/// `value` is absent ("unbounded") when the log-drift gamma - sigma^2/2 is
/// not positive; that is a result, not an error.
struct HittingExpectation {
  std::optional<double> value;

  bool bounded() const noexcept { return value.has_value(); }
};

struct ExpectationBounds {
  double lo = 0.0;
  HittingExpectation hi;
};

/// Exact GBM n0 exp((gamma - sigma^2/2) t + sigma B(t)) on the grid t_n = n dt,
/// with B the running sum of `increments`. Returns increments.size() + 1 samples.
StochTrajectory gbm_path(double gamma, const NoiseSpec& noise, double n0,
                         std::span<const double> increments, double dt);

HittingExpectation expected_hitting_time(double gamma, const NoiseSpec& noise,
                                         const Policy& policy);

/// Bracket on the mean closure length from the GBMs with rates alpha and
/// beta. Throws std::domain_error when beta <= sigma^2/2.
ExpectationBounds closure_expectation_bounds(const RateBounds& bounds, const NoiseSpec& noise,
                                             const Policy& policy);

/// C_t = (K-^2 + B K^2 t) exp(sigma^2 t), an upper bound on E[N(t)^2].
double second_moment_bound(const Policy& policy, const RateBounds& bounds, double k,
                           const NoiseSpec& noise, double t);

}  // namespace pulsequota
