#include "pulsequota/deterministic.hpp"

#include <cmath>
#include <stdexcept>

namespace pulsequota {

namespace {

void require_positive_rate(const GrowthLaw& law, const Policy& policy) {
  double min_rate = 0.0;
  if (law.is_monotone_decreasing()) {
    min_rate = law.eval(policy.k_plus());
  } else {
    const auto* table = std::get_if<RateTable>(&law.variant());
    std::vector<double> knots;
    if (table != nullptr) {
      for (const auto& [x, r] : table->points) {
        knots.push_back(x);
      }
    }
    min_rate = scan_extrema([&law](double n) { return law.eval(n); }, policy.k_minus(),
                            policy.k_plus(), kDefaultResolution, knots)
                   .min;
  }
  if (!(min_rate > 0.0)) {
    throw std::domain_error(
        "deterministic closure never ends: r(N) <= 0 somewhere on [k_minus, k_plus]");
  }
}

double simpson(double fa, double fm, double fb, double h) { return h / 6.0 * (fa + 4.0 * fm + fb); }

template <class G>
double adaptive_simpson(const G& g, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = g(lm);
  const double frm = g(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double closure_length_quadrature(const GrowthLaw& law, const Policy& policy, double rel_tol) {
  require_positive_rate(law, policy);
  // T = int dN / (N r(N)) = int du / r(e^u) over [ln K-, ln K+].
  auto g = [&law](double u) { return 1.0 / law.eval(std::exp(u)); };
  const double a = std::log(policy.k_minus());
  const double b = std::log(policy.k_plus());

  constexpr int kPieces = 16;
  const double width = (b - a) / kPieces;
  // Crude first pass sets the absolute tolerance.
  double rough = 0.0;
  for (int i = 0; i < kPieces; ++i) {
    const double x0 = a + width * i;
    rough += width * g(x0 + 0.5 * width);
  }
  const double tol = rel_tol * std::abs(rough) / kPieces;

  double total = 0.0;
  for (int i = 0; i < kPieces; ++i) {
    const double x0 = a + width * i;
    const double x1 = (i + 1 == kPieces) ? b : x0 + width;
    const double f0 = g(x0);
    const double fm = g(0.5 * (x0 + x1));
    const double f1 = g(x1);
    total += adaptive_simpson(g, x0, x1, f0, fm, f1, simpson(f0, fm, f1, x1 - x0), tol, 50);
  }
  return total;
}

double det_closure_length(const GrowthLaw& law, const Policy& policy) {
  require_positive_rate(law, policy);
  if (const auto* c = std::get_if<ConstantRate>(&law.variant())) {
    return policy.log_ratio() / c->r;
  }
  if (const auto* g = std::get_if<GeneralizedLogistic>(&law.variant());
      g != nullptr && g->mu == 1.0 && g->nu == 1.0) {
    const double kp = policy.k_plus();
    const double km = policy.k_minus();
    return std::log(kp * (g->k - km) / (km * (g->k - kp))) / g->r0;
  }
  return closure_length_quadrature(law, policy);
}

LengthBounds det_length_bounds(const Policy& policy, const RateBounds& bounds) {
  if (!(bounds.beta > 0.0)) {
    throw std::domain_error("det_length_bounds: beta must be > 0");
  }
  LengthBounds out;
  out.lo = policy.log_ratio() / bounds.beta;
  if (bounds.alpha > 0.0) {
    out.hi = policy.log_ratio() / bounds.alpha;
  }
  return out;
}

DetTrajectory det_trajectory(const GrowthLaw& law, const Policy& policy, double n0, double dt,
                             double t_max) {
  if (!(n0 > 0.0) || n0 > policy.k_plus()) {
    throw std::invalid_argument("det_trajectory: n0 must lie in (0, k_plus]");
  }
  if (!(dt > 0.0) || !(t_max > 0.0)) {
    throw std::invalid_argument("det_trajectory: dt and t_max must be > 0");
  }
  const double k_plus = policy.k_plus();
  const double k_minus = policy.k_minus();
  auto f = [&law](double n) { return law.eval(n) * n; };
  auto rk4 = [&f](double n, double h) {
    const double a = f(n);
    const double b = f(n + 0.5 * h * a);
    const double c = f(n + 0.5 * h * b);
    const double d = f(n + h * c);
    return n + h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
  };

  DetTrajectory out;
  auto pulse = [&](double t) {
    out.samples.push_back({t, k_plus, true});
    out.samples.push_back({t, k_minus, false});
    out.events.push_back(t);
  };

  double n = n0;
  if (n0 >= k_plus) {
    pulse(0.0);
    n = k_minus;
  } else {
    out.samples.push_back({0.0, n0, false});
  }

  const auto steps = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  const double event_tol = dt * 1e-6;
  double s = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t_next = static_cast<double>(i + 1) * dt;
    while (true) {
      const double h = t_next - s;
      const double n_next = rk4(n, h);
      if (n_next < k_plus) {
        n = n_next;
        s = t_next;
        break;
      }
      double lo = 0.0;
      double hi = h;
      while (hi - lo > event_tol) {
        const double mid = 0.5 * (lo + hi);
        if (rk4(n, mid) >= k_plus) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      s += 0.5 * (lo + hi);
      pulse(s);
      n = k_minus;
    }
    out.samples.push_back({t_next, n, false});
  }
  return out;
}

}  // namespace pulsequota
