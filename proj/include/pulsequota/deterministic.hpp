#pragma once

#include <optional>
#include <vector>

#include "pulsequota/rates.hpp"
#include "pulsequota/trajectory.hpp"

namespace pulsequota {

/// Noise-free pulse model: N' = r(N) N below K+, reset to K- on reaching K+.
struct DetTrajectory {
  std::vector<Sample> samples;
  std::vector<double> events;  // pulse times t_k
};

struct LengthBounds {
  double lo = 0.0;
  std::optional<double> hi;  // absent when alpha <= 0
};

/// Time for N' = r(N) N to climb from K- to K+. Closed form for the logistic
/// (mu = nu = 1) and constant laws, adaptive quadrature otherwise. Throws
/// std::domain_error when r <= 0 somewhere on [K-, K+].
double det_closure_length(const GrowthLaw& law, const Policy& policy);

/// The same integral, always by adaptive Simpson quadrature in ln N.
double closure_length_quadrature(const GrowthLaw& law, const Policy& policy,
                                 double rel_tol = 1e-10);

LengthBounds det_length_bounds(const Policy& policy, const RateBounds& bounds);

/// Fixed-step RK4 with bisection location of each threshold crossing.
DetTrajectory det_trajectory(const GrowthLaw& law, const Policy& policy, double n0, double dt,
                             double t_max);

}  // namespace pulsequota
