#include <algorithm>
#include <cmath>
#include <numbers>

#include "omm/model.hpp"

namespace omm::model {

double norm_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) noexcept { return std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2; }

double bs_price(OptionKind kind, double spot, double strike, double tau, double sigma) noexcept {
  const double intrinsic = kind == OptionKind::Call ? std::max(spot - strike, 0.0) : std::max(strike - spot, 0.0);
  if (strike <= 0.0) return kind == OptionKind::Call ? spot : 0.0;
  const double sd = sigma * std::sqrt(tau);
  if (sd <= 0.0) return intrinsic;
  const double d1 = std::log(spot / strike) / sd + 0.5 * sd;
  const double d2 = d1 - sd;
  if (kind == OptionKind::Call) return spot * norm_cdf(d1) - strike * norm_cdf(d2);
  return strike * norm_cdf(-d2) - spot * norm_cdf(-d1);
}

double bs_vega(double spot, double strike, double tau, double sigma) noexcept {
  if (strike <= 0.0) return 0.0;
  const double sd = sigma * std::sqrt(tau);
  if (sd <= 0.0) return 0.0;
  const double d1 = std::log(spot / strike) / sd + 0.5 * sd;
  return spot * norm_pdf(d1) * std::sqrt(tau);
}

double implied_vol(double price, const OptionSpec& option, double spot, double time) {
  option.validate();
  const double tau = option.maturity - time;
  if (!(tau > 0.0)) throw std::invalid_argument("implied_vol needs positive time to maturity");
  const double k = option.strike;
  const bool call = option.kind == OptionKind::Call;
  const double intrinsic = call ? std::max(spot - k, 0.0) : std::max(k - spot, 0.0);
  const double upper = call ? spot : k;
  if (!std::isfinite(price) || price < intrinsic || price >= upper)
    throw OutOfBandError("price " + std::to_string(price) + " outside no-arbitrage band [" +
                         std::to_string(intrinsic) + ", " + std::to_string(upper) + ")");
  if (price == intrinsic) return 0.0;

  auto f = [&](double s) { return bs_price(option.kind, spot, k, tau, s) - price; };
  double lo = 0.0;
  double hi = 1.0;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) throw OutOfBandError("implied volatility above 1e4");
  }
  // Newton from a Brenner-Subrahmanyam start, bisecting whenever the step leaves the bracket.
  double sigma = std::clamp(std::sqrt(2.0 * std::numbers::pi / tau) * price / spot, lo, hi);
  if (sigma <= lo || sigma >= hi) sigma = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fs = f(sigma);
    if (std::abs(fs) <= 1e-14 * std::max(1.0, spot)) return sigma;
    if (fs < 0.0) lo = sigma;
    else hi = sigma;
    const double v = bs_vega(spot, k, tau, sigma);
    double next = v > 0.0 ? sigma - fs / v : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-16 * std::max(1.0, hi)) return next;
    sigma = next;
  }
  return sigma;
}

}  // namespace omm::model
