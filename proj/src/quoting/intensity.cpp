#include <cmath>
#include <limits>
#include <string>

#include "omm/quoting.hpp"

namespace omm::quoting {

namespace {

// 1 / (1 + exp(-x)) without overflow.
double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

IntensityCurve IntensityCurve::logistic(double lambda_max, double alpha, double slope) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) throw std::invalid_argument("lambda_max must be positive");
  if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
  if (!(slope > 0.0) || !std::isfinite(slope)) throw std::invalid_argument("logistic slope must be positive");
  IntensityCurve c(Family::Logistic, lambda_max, alpha, slope);
  const double width = 40.0 / slope;
  const double centre = -alpha / slope;
  if (!(c.curvature_ratio_sup(centre - width, centre + width) < 2.0))
    throw std::invalid_argument("logistic curve violates sup Lambda*Lambda''/Lambda'^2 < 2");
  return c;
}

IntensityCurve IntensityCurve::exponential(double scale, double decay) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("exponential scale must be positive");
  if (!(decay > 0.0) || !std::isfinite(decay)) throw std::invalid_argument("exponential decay must be positive");
  IntensityCurve c(Family::Exponential, scale, 0.0, decay);
  if (!(c.curvature_ratio_sup(-40.0 / decay, 40.0 / decay) < 2.0))
    throw std::invalid_argument("exponential curve violates sup Lambda*Lambda''/Lambda'^2 < 2");
  return c;
}

double IntensityCurve::operator()(double delta) const noexcept {
  if (family_ == Family::Exponential) return a_ * std::exp(-c_ * delta);
  return a_ * sigmoid(-(b_ + c_ * delta));
}

double IntensityCurve::hazard(double delta) const noexcept {
  if (family_ == Family::Exponential) return c_;
  return c_ * sigmoid(b_ + c_ * delta);
}

double IntensityCurve::hazard_derivative(double delta) const noexcept {
  if (family_ == Family::Exponential) return 0.0;
  const double s = sigmoid(b_ + c_ * delta);
  return c_ * c_ * s * (1.0 - s);
}

double IntensityCurve::derivative(double delta) const noexcept { return -(*this)(delta) * hazard(delta); }

double IntensityCurve::second_derivative(double delta) const noexcept {
  const double h = hazard(delta);
  return (*this)(delta) * (h * h - hazard_derivative(delta));
}

double IntensityCurve::inverse(double intensity) const {
  if (family_ == Family::Exponential) {
    if (!(intensity > 0.0)) throw std::domain_error("intensity must be positive");
    return std::log(a_ / intensity) / c_;
  }
  if (!(intensity > 0.0 && intensity < a_))
    throw std::domain_error("intensity " + std::to_string(intensity) + " outside (0, lambda_max)");
  return (std::log(a_ / intensity - 1.0) - b_) / c_;
}

double IntensityCurve::dominating_rate(double delta_floor) const noexcept {
  return family_ == Family::Logistic ? a_ : (*this)(delta_floor);
}

double IntensityCurve::curvature_ratio_sup(double lo, double hi, int n) const noexcept {
  double sup = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double d = lo + (hi - lo) * k / (n - 1);
    const double l1 = derivative(d);
    if (l1 == 0.0) continue;
    const double r = (*this)(d) * second_derivative(d) / (l1 * l1);
    if (std::isfinite(r)) sup = std::max(sup, r);
  }
  return sup;
}

}  // namespace omm::quoting
