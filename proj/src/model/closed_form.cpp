#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "omm/model.hpp"

namespace omm::model {

namespace {

using cplx = std::complex<double>;

// log(1 + z) without cancellation for small |z|.
cplx log1p(cplx z) {
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    return z - z2 / 2.0 + z2 * z / 3.0 - z2 * z2 / 4.0;
  }
  return std::log(1.0 + z);
}

constexpr double kPriceTolerance = 1e-6;

}  // namespace

// Little-trap form. b - d is rewritten as -xi^2 (iu + u^2) / (b + d) so the
// 1/xi^2 factors cancel analytically; this keeps the xi -> 0 limit exact.
cplx heston_char_fn(cplx u, double tau, double variance, const StochVolParams& params) {
  const double kappa = params.drift_q().kappa;
  const double theta = params.drift_q().theta;
  const double xi = params.xi();
  const double rho = params.rho();
  const cplx i(0.0, 1.0);

  const cplx b = kappa - rho * xi * i * u;
  const cplx q = i * u + u * u;
  const cplx d = std::sqrt(b * b + xi * xi * q);
  const cplx bpd = b + d;
  const cplx bmd_over_xi2 = -q / bpd;  // (b - d) / xi^2
  const cplx g = xi * xi * bmd_over_xi2 / bpd;
  const cplx e = std::exp(-d * tau);

  const cplx log_ratio = log1p(-g * e) - log1p(-g);
  // 2 * log_ratio / xi^2 without dividing a tiny number: log_ratio ~ g (1 - e) for small g.
  cplx log_term;
  if (std::abs(g) < 1e-4) {
    // log1p(-g e) - log1p(-g) = g (1 - e) + g^2 (1 - e^2) / 2 + ...
    const cplx g_over_xi2 = bmd_over_xi2 / bpd;
    log_term = 2.0 * g_over_xi2 * ((1.0 - e) + g * (1.0 - e * e) / 2.0 + g * g * (1.0 - e * e * e) / 3.0);
  } else {
    log_term = 2.0 * log_ratio / (xi * xi);
  }
  const cplx c = kappa * theta * (bmd_over_xi2 * tau - log_term);
  const cplx dd = bmd_over_xi2 * (1.0 - e) / (1.0 - g * e);
  return std::exp(c + dd * variance);
}

double heston_closed_form(const OptionSpec& option, const MarketState& state, const StochVolParams& params) {
  option.validate();
  state.validate();
  const double tau = option.maturity - state.time;
  if (!(tau > 0.0)) throw std::invalid_argument("option maturity must exceed the pricing time");

  const double s = state.spot;
  const double k = option.strike;
  double call;
  if (k == 0.0) {
    call = s;
  } else {
    const double x = std::log(s / k);
    auto integrand = [&](double u) {
      const cplx phi = heston_char_fn(cplx(u, -0.5), tau, state.variance, params);
      const cplx w = std::exp(cplx(0.0, u * x)) * phi;
      return w.real() / (u * u + 0.25);
    };
    double error = 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-9, &error);
    const double scale = std::sqrt(s * k) / std::numbers::pi;
    if (!std::isfinite(integral) || scale * error > kPriceTolerance)
      throw IntegrationError("Heston Fourier integral did not converge (error estimate " +
                             std::to_string(scale * error) + ")");
    call = s - scale * integral;
  }
  // Clamp tiny negative round-off below intrinsic-free bounds.
  call = std::max(call, std::max(s - k, 0.0));
  return option.kind == OptionKind::Call ? call : call - s + k;
}

}  // namespace omm::model
