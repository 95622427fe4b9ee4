#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace pulsequota {

inline constexpr std::size_t kDefaultResolution = 4096;

/// r(N) = r0 (1 - (N/K)^mu)^nu, with the sign-preserving extension
/// -r0 ((N/K)^mu - 1)^nu above K.
struct GeneralizedLogistic {
  double r0 = 0.0;
  double k = 0.0;
  double mu = 1.0;
  double nu = 1.0;

  double operator()(double n) const noexcept;
};

/// Malthusian growth: r(N) = r for every N.
struct ConstantRate {
  double r = 0.0;

  double operator()(double) const noexcept { return r; }
};

/// Linearly interpolated (abundance, rate) pairs. Evaluation outside the
/// table support throws std::out_of_range.
struct RateTable {
  std::vector<std::pair<double, double>> points;

  double operator()(double n) const;
  double lo() const { return points.front().first; }
  double hi() const { return points.back().first; }
};

/// Per-capita growth rate r(.). Immutable once constructed; the constructor
/// validates the parameters of whichever variant it is given.
class GrowthLaw {
 public:
  using Variant = std::variant<GeneralizedLogistic, ConstantRate, RateTable>;

  explicit GrowthLaw(GeneralizedLogistic law);
  explicit GrowthLaw(ConstantRate law);
  explicit GrowthLaw(RateTable law);

  static GrowthLaw logistic(double r0, double k, double mu = 1.0, double nu = 1.0) {
    return GrowthLaw(GeneralizedLogistic{r0, k, mu, nu});
  }
  static GrowthLaw constant(double r) { return GrowthLaw(ConstantRate{r}); }
  static GrowthLaw table(std::vector<std::pair<double, double>> points) {
    return GrowthLaw(RateTable{std::move(points)});
  }

  const Variant& variant() const noexcept { return law_; }
  std::string_view kind() const noexcept;

  /// Closed-form carrying capacity, when the law has one by construction.
  std::optional<double> carrying_capacity() const noexcept;

  /// True when the law is known to be non-increasing on [0, inf).
  bool is_monotone_decreasing() const noexcept;

  double operator()(double n) const { return eval(n); }
  double eval(double n) const;

 private:
  Variant law_;
};

/// Environmental noise amplitude sigma (sigma = 0 is the deterministic model).
class NoiseSpec {
 public:
  NoiseSpec() = default;
  explicit NoiseSpec(double sigma);

  double sigma() const noexcept { return sigma_; }
  double half_variance() const noexcept { return 0.5 * sigma_ * sigma_; }

 private:
  double sigma_ = 0.0;
};

/// Regulation triple: harvest threshold K+, quota Q and post-harvest level
/// K- = K+ - Q.
class Policy {
 public:
  Policy(double k_plus, double q);

  double k_plus() const noexcept { return k_plus_; }
  double q() const noexcept { return q_; }
  double k_minus() const noexcept { return k_minus_; }

  /// ln(K+ / K-), the log-distance every closure has to cover.
  double log_ratio() const noexcept;

 private:
  double k_plus_;
  double q_;
  double k_minus_;
};

/// Throws std::invalid_argument when the law has a carrying capacity K and
/// the harvest threshold is not below it.
void check_policy_against(const GrowthLaw& law, const Policy& policy);

struct RateBounds {
  double alpha = 0.0;     // inf r over [0, K+]
  double beta = 0.0;      // sup r over [0, K+]
  double b_script = 0.0;  // sup r over (0, K)
};

struct Extrema {
  double min = 0.0;
  double argmin = 0.0;
  double max = 0.0;
  double argmax = 0.0;
};

struct H1Report {
  std::optional<double> k;
  bool holds = false;
};

struct H2Report {
  bool holds = false;
  std::optional<double> k0_max;
};

/// Grid scan of f over [lo, hi] with `resolution` points, a golden-section
/// refinement around every interior local extremum, plus any `extra`
/// abscissae inside the interval (kinks, knots).
template <class F>
Extrema scan_extrema(const F& f, double lo, double hi, std::size_t resolution,
                     std::span<const double> extra = {});

double eval_rate(const GrowthLaw& law, double n);

RateBounds rate_bounds(const GrowthLaw& law, double k_plus,
                       std::size_t resolution = kDefaultResolution);

H1Report check_h1(const GrowthLaw& law, std::size_t resolution = kDefaultResolution);

H2Report check_h2(const GrowthLaw& law, const NoiseSpec& noise, const Policy& policy,
                  std::size_t resolution = kDefaultResolution);

}  // namespace pulsequota

#include "pulsequota/detail/scan_extrema.ipp"
