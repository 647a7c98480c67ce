#pragma once

#include <stdexcept>

namespace omm::quoting {

/// Client request intensity as a function of the quote offset delta.
///
/// Both families satisfy the classical market-making hypotheses: positive,
/// strictly decreasing, C^2, vanishing at +inf, and sup Lambda*Lambda''/Lambda'^2 < 2.
/// The logistic slope is the already-scaled beta / vega, so delta is an
/// absolute currency offset per contract.
class IntensityCurve {
 public:
  enum class Family { Logistic, Exponential };

  /// lambda_max / (1 + exp(alpha + slope * delta)).
  static IntensityCurve logistic(double lambda_max, double alpha, double slope);
  /// scale * exp(-decay * delta).
  static IntensityCurve exponential(double scale, double decay);

  Family family() const noexcept { return family_; }
  double lambda_max() const noexcept { return a_; }
  double alpha() const noexcept { return b_; }
  double slope() const noexcept { return c_; }
  double scale() const noexcept { return a_; }
  double decay() const noexcept { return c_; }

  double operator()(double delta) const noexcept;
  double derivative(double delta) const noexcept;
  double second_derivative(double delta) const noexcept;

  /// -Lambda'/Lambda, and its derivative in delta.
  double hazard(double delta) const noexcept;
  double hazard_derivative(double delta) const noexcept;

  /// Lambda^{-1}(intensity) for intensity in (0, sup Lambda).
  double inverse(double intensity) const;

  /// Rate of a Poisson stream dominating Lambda on [delta_floor, inf).
  double dominating_rate(double delta_floor) const noexcept;

  /// max of Lambda*Lambda''/Lambda'^2 over a uniform grid on [lo, hi].
  double curvature_ratio_sup(double lo, double hi, int n = 20001) const noexcept;

 private:
  IntensityCurve(Family f, double a, double b, double c) : family_(f), a_(a), b_(b), c_(c) {}

  Family family_;
  double a_;
  double b_;
  double c_;
};

struct HamiltonianPoint {
  double value;      // H(p)
  double maximizer;  // delta*(p), clipped at the floor
  bool floor_active;
};

class HamiltonianError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relative first-order-condition tolerance: |1 - hazard(d)(d - p)| <= 1e-10,
/// i.e. |Lambda'(d)(d - p) + Lambda(d)| <= 1e-10 * Lambda(d).
inline constexpr double kFocTolerance = 1e-10;

/// H(p) = sup_{delta >= delta_floor} Lambda(delta) (delta - p).
HamiltonianPoint hamiltonian(const IntensityCurve& curve, double p, double delta_floor);

/// H'(p) = -Lambda(delta*(p)).
double hamiltonian_prime(const IntensityCurve& curve, double p, double delta_floor);

/// max(delta_floor, Lambda^{-1}(-H'(p))), i.e. the maximizer above.
double optimal_quote(const IntensityCurve& curve, double p, double delta_floor);

}  // namespace omm::quoting
