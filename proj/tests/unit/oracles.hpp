#pragma once

// Test-only reference computations. Nothing here calls into the library's
// fitting or integration code.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace efalcon::testing {

/// Composite midpoint rule on (lo, hi).
inline double midpoint_integral(const std::function<double(double)>& f, double lo, double hi,
                                std::size_t cells = 1'000'000) {
  const double h = (hi - lo) / static_cast<double>(cells);
  double total = 0.0;
  for (std::size_t i = 0; i < cells; ++i) total += f(lo + (static_cast<double>(i) + 0.5) * h);
  return total * h;
}

/// Simple-regression line (intercept, slope) through points, by the
/// textbook covariance formulas.
inline std::pair<double, double> ols_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

/// Quadratic objective q(a, b) = mean over points of (a + b x - y)^2, kept
/// as sufficient statistics so grids are cheap to evaluate.
struct LineLoss {
  double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0, syy = 0;

  LineLoss(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sxx += x[i] * x[i];
      sy += y[i];
      sxy += x[i] * y[i];
      syy += y[i] * y[i];
    }
    s1 = 1.0;
    sx /= n;
    sxx /= n;
    sy /= n;
    sxy /= n;
    syy /= n;
  }

  double operator()(double a, double b) const {
    return a * a * s1 + 2 * a * b * sx + b * b * sxx - 2 * a * sy - 2 * b * sxy + syy;
  }
};

struct GridOptimum {
  double a = 0, b = 0, objective = INFINITY;
  bool found = false;
};

/// Brute force: minimize `active` over the grid [lo, hi]^2 with step `step`
/// subject to passive(a, b) <= budget.
inline GridOptimum grid_constrained_min(const LineLoss& active, const LineLoss& passive,
                                        double budget, double lo = -2.0, double hi = 2.0,
                                        double step = 1e-3) {
  GridOptimum best;
  const auto n = static_cast<long>(std::llround((hi - lo) / step));
  for (long i = 0; i <= n; ++i) {
    const double a = lo + static_cast<double>(i) * step;
    for (long j = 0; j <= n; ++j) {
      const double b = lo + static_cast<double>(j) * step;
      if (passive(a, b) > budget) continue;
      const double obj = active(a, b);
      if (obj < best.objective) best = {a, b, obj, true};
    }
  }
  return best;
}

}  // namespace efalcon::testing
