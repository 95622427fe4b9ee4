#include "pulsequota/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pulsequota {

namespace {

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Uniform grid over [lo, hi] merged with the table knots inside it.
std::vector<double> grid_with_knots(const RateTable& table, double lo, double hi,
                                    std::size_t resolution) {
  std::vector<double> xs;
  xs.reserve(resolution + table.points.size());
  const double step = (hi - lo) / static_cast<double>(resolution - 1);
  for (std::size_t i = 0; i + 1 < resolution; ++i) {
    xs.push_back(lo + step * static_cast<double>(i));
  }
  xs.push_back(hi);
  for (const auto& [x, r] : table.points) {
    if (x > lo && x < hi) {
      xs.push_back(x);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

std::vector<double> knots_of(const RateTable& table) {
  std::vector<double> xs;
  xs.reserve(table.points.size());
  for (const auto& [x, r] : table.points) {
    xs.push_back(x);
  }
  return xs;
}

}  // namespace

double GeneralizedLogistic::operator()(double n) const noexcept {
  if (mu == 1.0 && nu == 1.0) {
    return r0 * (1.0 - n / k);
  }
  const double x = std::pow(n / k, mu);
  if (x <= 1.0) {
    return r0 * std::pow(1.0 - x, nu);
  }
  return -r0 * std::pow(x - 1.0, nu);
}

double RateTable::operator()(double n) const {
  if (n < lo() || n > hi()) {
    throw std::out_of_range("rate table: abundance " + std::to_string(n) +
                            " outside [" + std::to_string(lo()) + ", " +
                            std::to_string(hi()) + "]");
  }
  auto it = std::upper_bound(points.begin(), points.end(), n,
                             [](double v, const auto& p) { return v < p.first; });
  if (it == points.end()) {
    return points.back().second;
  }
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  const double w = (n - x0) / (x1 - x0);
  return y0 + w * (y1 - y0);
}

GrowthLaw::GrowthLaw(GeneralizedLogistic law) : law_(law) {
  if (!finite_positive(law.r0)) {
    throw std::invalid_argument("logistic law: r0 must be > 0");
  }
  if (!finite_positive(law.k)) {
    throw std::invalid_argument("logistic law: K must be > 0");
  }
  if (!std::isfinite(law.mu) || law.mu < 1.0 || !std::isfinite(law.nu) || law.nu < 1.0) {
    throw std::invalid_argument("logistic law: mu and nu must be >= 1");
  }
}

GrowthLaw::GrowthLaw(ConstantRate law) : law_(law) {
  if (!std::isfinite(law.r)) {
    throw std::invalid_argument("constant law: r must be finite");
  }
}

GrowthLaw::GrowthLaw(RateTable law) : law_(std::move(law)) {
  const auto& pts = std::get<RateTable>(law_).points;
  if (pts.size() < 2) {
    throw std::invalid_argument("rate table: need at least two points");
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].first) || !std::isfinite(pts[i].second) || pts[i].first < 0.0) {
      throw std::invalid_argument("rate table: entries must be finite, abundances >= 0");
    }
    if (i > 0 && !(pts[i].first > pts[i - 1].first)) {
      throw std::invalid_argument("rate table: abscissae must be strictly increasing");
    }
  }
}

std::string_view GrowthLaw::kind() const noexcept {
  return std::visit(overloaded{[](const GeneralizedLogistic&) { return std::string_view{"logistic"}; },
                               [](const ConstantRate&) { return std::string_view{"constant"}; },
                               [](const RateTable&) { return std::string_view{"table"}; }},
                    law_);
}

std::optional<double> GrowthLaw::carrying_capacity() const noexcept {
  if (const auto* g = std::get_if<GeneralizedLogistic>(&law_)) {
    return g->k;
  }
  return std::nullopt;
}

bool GrowthLaw::is_monotone_decreasing() const noexcept {
  return std::visit(overloaded{[](const GeneralizedLogistic&) { return true; },
                               [](const ConstantRate&) { return true; },
                               [](const RateTable& t) {
                                 for (std::size_t i = 1; i < t.points.size(); ++i) {
                                   if (t.points[i].second > t.points[i - 1].second) {
                                     return false;
                                   }
                                 }
                                 return true;
                               }},
                    law_);
}

double GrowthLaw::eval(double n) const {
  if (!(n >= 0.0)) {
    throw std::invalid_argument("growth law: abundance must be >= 0");
  }
  return std::visit([n](const auto& law) { return law(n); }, law_);
}

NoiseSpec::NoiseSpec(double sigma) : sigma_(sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw std::invalid_argument("noise: sigma must be >= 0");
  }
}

Policy::Policy(double k_plus, double q) : k_plus_(k_plus), q_(q), k_minus_(k_plus - q) {
  if (!finite_positive(k_plus)) {
    throw std::invalid_argument("policy: k_plus must be > 0");
  }
  if (!std::isfinite(q) || !(q > 0.0) || !(q < k_plus)) {
    throw std::invalid_argument("policy: quota must satisfy 0 < q < k_plus");
  }
}

double Policy::log_ratio() const noexcept { return std::log(k_plus_ / k_minus_); }

void check_policy_against(const GrowthLaw& law, const Policy& policy) {
  std::optional<double> k = law.carrying_capacity();
  if (!k && std::holds_alternative<RateTable>(law.variant())) {
    k = check_h1(law).k;
  }
  if (k && !(policy.k_plus() < *k)) {
    throw std::invalid_argument("policy: k_plus must lie below the carrying capacity " +
                                std::to_string(*k));
  }
}

double eval_rate(const GrowthLaw& law, double n) { return law.eval(n); }

RateBounds rate_bounds(const GrowthLaw& law, double k_plus, std::size_t resolution) {
  if (resolution < 2) {
    throw std::invalid_argument("rate_bounds: resolution must be >= 2");
  }
  if (!finite_positive(k_plus)) {
    throw std::invalid_argument("rate_bounds: k_plus must be > 0");
  }
  return std::visit(
      overloaded{
          [&](const GeneralizedLogistic& g) {
            // Decreasing for mu, nu >= 1: extrema sit at the interval ends.
            return RateBounds{g(k_plus), g.r0, g.r0};
          },
          [&](const ConstantRate& c) { return RateBounds{c.r, c.r, c.r}; },
          [&](const RateTable& t) {
            const auto knots = knots_of(t);
            const Extrema on_range = scan_extrema(t, t.lo(), k_plus, resolution, knots);
            const double k = check_h1(law, resolution).k.value_or(t.hi());
            const Extrema below_k = scan_extrema(t, t.lo(), k, resolution, knots);
            return RateBounds{on_range.min, on_range.max, std::max(below_k.max, on_range.max)};
          }},
      law.variant());
}

H1Report check_h1(const GrowthLaw& law, std::size_t resolution) {
  if (resolution < 2) {
    throw std::invalid_argument("check_h1: resolution must be >= 2");
  }
  return std::visit(
      overloaded{
          [](const GeneralizedLogistic& g) { return H1Report{g.k, true}; },
          [](const ConstantRate&) { return H1Report{std::nullopt, false}; },
          [&](const RateTable& t) {
            const std::vector<double> xs = grid_with_knots(t, t.lo(), t.hi(), resolution);
            std::vector<double> ys(xs.size());
            std::transform(xs.begin(), xs.end(), ys.begin(), [&t](double x) { return t(x); });
            if (!(ys.front() > 0.0)) {
              return H1Report{std::nullopt, false};
            }
            auto first = std::find_if(ys.begin(), ys.end(), [](double y) { return y <= 0.0; });
            if (first == ys.end()) {
              return H1Report{std::nullopt, false};
            }
            const auto j = static_cast<std::size_t>(first - ys.begin());
            for (std::size_t i = j + 1; i < ys.size(); ++i) {
              if (!(ys[i] < 0.0)) {
                return H1Report{std::nullopt, false};
              }
            }
            if (ys[j] == 0.0) {
              return H1Report{xs[j], true};
            }
            // Bisection on the bracketing grid cell.
            double a = xs[j - 1];
            double b = xs[j];
            for (int it = 0; it < 200 && b - a > 1e-13 * b; ++it) {
              const double m = 0.5 * (a + b);
              if (t(m) > 0.0) {
                a = m;
              } else {
                b = m;
              }
            }
            return H1Report{0.5 * (a + b), true};
          }},
      law.variant());
}

H2Report check_h2(const GrowthLaw& law, const NoiseSpec& noise, const Policy& policy,
                  std::size_t resolution) {
  if (resolution < 2) {
    throw std::invalid_argument("check_h2: resolution must be >= 2");
  }
  const double threshold = noise.half_variance();
  const double k_minus = policy.k_minus();
  const double k_plus = policy.k_plus();

  return std::visit(
      overloaded{
          [&](const ConstantRate& c) {
            if (c.r > threshold) {
              return H2Report{true, k_plus};
            }
            return H2Report{false, std::nullopt};
          },
          [&](const GeneralizedLogistic& g) {
            if (!(threshold < g.r0)) {
              return H2Report{false, std::nullopt};
            }
            // Decreasing law: min over [0, x] is r(x); solve r(x) = threshold.
            const double crossing =
                g.k * std::pow(1.0 - std::pow(threshold / g.r0, 1.0 / g.nu), 1.0 / g.mu);
            const double k0 = std::min(crossing, k_plus);
            if (k0 > k_minus) {
              return H2Report{true, k0};
            }
            return H2Report{false, std::nullopt};
          },
          [&](const RateTable& t) {
            double running_min = t(t.lo());
            std::optional<double> best;
            for (double x : grid_with_knots(t, t.lo(), k_plus, resolution)) {
              running_min = std::min(running_min, t(x));
              if (!(running_min > threshold)) {
                break;
              }
              best = x;
            }
            if (best && *best > k_minus) {
              return H2Report{true, best};
            }
            return H2Report{false, std::nullopt};
          }},
      law.variant());
}

}  // namespace pulsequota
