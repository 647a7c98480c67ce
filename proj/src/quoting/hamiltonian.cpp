#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "omm/quoting.hpp"

namespace omm::quoting {

namespace {

// g(d) = d - p - 1/hazard(d) is strictly increasing when the curvature ratio
// stays below 2 (g' = 2 - Lambda*Lambda''/Lambda'^2), so the first-order
// condition has a unique root.
double foc_gap(const IntensityCurve& curve, double p, double d) { return d - p - 1.0 / curve.hazard(d); }

double foc_residual(const IntensityCurve& curve, double p, double d) { return 1.0 - curve.hazard(d) * (d - p); }

double solve_foc(const IntensityCurve& curve, double p, double lo) {
  const double h_lo = curve.hazard(lo);
  double hi = lo + 1.0 / h_lo;
  for (int k = 0; foc_gap(curve, p, hi) < 0.0; ++k) {
    if (k > 200) throw HamiltonianError("could not bracket the optimal quote at p = " + std::to_string(p));
    const double width = hi - lo;
    lo = hi;
    hi = lo + 2.0 * width;
  }

  double d = std::min(std::max(p + 1.0 / curve.hazard(p), lo), hi);
  for (int it = 0; it < 200; ++it) {
    const double g = foc_gap(curve, p, d);
    if (std::abs(foc_residual(curve, p, d)) <= kFocTolerance) return d;
    if (g < 0.0) lo = d;
    else hi = d;
    const double h = curve.hazard(d);
    const double slope = 1.0 + curve.hazard_derivative(d) / (h * h);
    double next = d - g / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
      return next;  // bracket at round-off: residual is as small as double allows
    d = next;
  }
  const double r = foc_residual(curve, p, d);
  if (std::abs(r) > kFocTolerance)
    throw HamiltonianError("optimal quote solve failed at p = " + std::to_string(p) +
                           " (residual " + std::to_string(r) + ")");
  return d;
}

}  // namespace

HamiltonianPoint hamiltonian(const IntensityCurve& curve, double p, double delta_floor) {
  double d;
  bool clipped = false;
  if (foc_gap(curve, p, delta_floor) >= 0.0) {
    d = delta_floor;
    clipped = true;
  } else {
    d = solve_foc(curve, p, std::max(p, delta_floor));
  }
  return {curve(d) * (d - p), d, clipped};
}

double hamiltonian_prime(const IntensityCurve& curve, double p, double delta_floor) {
  return -curve(hamiltonian(curve, p, delta_floor).maximizer);
}

double optimal_quote(const IntensityCurve& curve, double p, double delta_floor) {
  return hamiltonian(curve, p, delta_floor).maximizer;
}

}  // namespace omm::quoting
