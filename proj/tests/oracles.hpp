#pragma once

// Independent reference computations for tests. Nothing here calls into the
// solver paths it is used to check.

#include <cmath>
#include <algorithm>
#include <functional>
#include <vector>

namespace omm::testing {

struct GridMax {
  double value;
  double argmax;
};

/// Exhaustive search of f on lo, lo + step, ..., up to hi.
inline GridMax grid_search_max(const std::function<double(double)>& f, double lo, double hi, double step) {
  GridMax best{f(lo), lo};
  const auto n = static_cast<long long>(std::floor((hi - lo) / step));
  for (long long k = 1; k <= n; ++k) {
    const double x = lo + static_cast<double>(k) * step;
    const double v = f(x);
    if (v > best.value) best = {v, x};
  }
  return best;
}

/// Five-point central difference.
inline double derivative5(const std::function<double(double)>& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

/// Kolmogorov-Smirnov distance between the sample and Exp(rate).
inline double ks_statistic_exponential(std::vector<double> x, double rate) {
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 1.0 - std::exp(-rate * x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic one-sample KS critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace omm::testing
