#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pulsequota {
namespace detail {

// Golden-section search for a minimum of g on [a, b].
template <class G>
std::pair<double, double> golden_minimize(const G& g, double a, double b) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kInvPhi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kInvPhi * (b - a);
      gd = g(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, g(x)};
}

}  // namespace detail

template <class F>
Extrema scan_extrema(const F& f, double lo, double hi, std::size_t resolution,
                     std::span<const double> extra) {
  if (resolution < 2) {
    throw std::invalid_argument("scan_extrema: resolution must be >= 2");
  }
  if (!(hi >= lo)) {
    throw std::invalid_argument("scan_extrema: empty interval");
  }
  std::vector<double> xs(resolution);
  std::vector<double> ys(resolution);
  const double step = (hi - lo) / static_cast<double>(resolution - 1);
  for (std::size_t i = 0; i < resolution; ++i) {
    xs[i] = (i + 1 == resolution) ? hi : lo + step * static_cast<double>(i);
    ys[i] = f(xs[i]);
  }

  Extrema out{ys[0], xs[0], ys[0], xs[0]};
  auto consider = [&out](double x, double y) {
    if (y < out.min) {
      out.min = y;
      out.argmin = x;
    }
    if (y > out.max) {
      out.max = y;
      out.argmax = x;
    }
  };
  for (std::size_t i = 0; i < resolution; ++i) {
    consider(xs[i], ys[i]);
  }
  for (double x : extra) {
    if (x >= lo && x <= hi) {
      consider(x, f(x));
    }
  }

  for (std::size_t i = 1; i + 1 < resolution; ++i) {
    const bool local_min = ys[i] <= ys[i - 1] && ys[i] <= ys[i + 1] &&
                           (ys[i] < ys[i - 1] || ys[i] < ys[i + 1]);
    const bool local_max = ys[i] >= ys[i - 1] && ys[i] >= ys[i + 1] &&
                           (ys[i] > ys[i - 1] || ys[i] > ys[i + 1]);
    if (local_min) {
      auto [x, y] = detail::golden_minimize(f, xs[i - 1], xs[i + 1]);
      consider(x, y);
    }
    if (local_max) {
      auto [x, y] =
          detail::golden_minimize([&f](double v) { return -f(v); }, xs[i - 1], xs[i + 1]);
      consider(x, -y);
    }
  }
  return out;
}

}  // namespace pulsequota
