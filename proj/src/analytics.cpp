#include "pulsequota/analytics.hpp"

#include <cmath>
#include <stdexcept>

namespace pulsequota {

StochTrajectory gbm_path(double gamma, const NoiseSpec& noise, double n0,
                         std::span<const double> increments, double dt) {
  if (!(n0 > 0.0)) {
    throw std::invalid_argument("gbm_path: n0 must be > 0");
  }
  const double drift = gamma - noise.half_variance();
  StochTrajectory out;
  out.samples.reserve(increments.size() + 1);
  out.samples.push_back({0.0, n0, false});
  double brownian = 0.0;
  for (std::size_t i = 0; i < increments.size(); ++i) {
    brownian += increments[i];
    const double t = static_cast<double>(i + 1) * dt;
    out.samples.push_back({t, n0 * std::exp(drift * t + noise.sigma() * brownian), false});
  }
  out.increments_consumed = increments.size();
  return out;
}

HittingExpectation expected_hitting_time(double gamma, const NoiseSpec& noise,
                                         const Policy& policy) {
  const double drift = gamma - noise.half_variance();
  if (!(drift > 0.0)) {
    return {};
  }
  return {policy.log_ratio() / drift};
}

ExpectationBounds closure_expectation_bounds(const RateBounds& bounds, const NoiseSpec& noise,
                                             const Policy& policy) {
  const HittingExpectation lo = expected_hitting_time(bounds.beta, noise, policy);
  if (!lo.bounded()) {
    throw std::domain_error(
        "closure_expectation_bounds: beta <= sigma^2/2, noise overwhelms growth");
  }
  return {*lo.value, expected_hitting_time(bounds.alpha, noise, policy)};
}

double second_moment_bound(const Policy& policy, const RateBounds& bounds, double k,
                           const NoiseSpec& noise, double t) {
  if (!(t >= 0.0)) {
    throw std::invalid_argument("second_moment_bound: t must be >= 0");
  }
  const double km = policy.k_minus();
  return (km * km + bounds.b_script * k * k * t) * std::exp(noise.sigma() * noise.sigma() * t);
}

}  // namespace pulsequota
