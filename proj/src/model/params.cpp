#include "omm/model.hpp"

#include <algorithm>
#include <cmath>

namespace omm::model {

namespace {

void check_drift(const MeanReversion& a, double xi, const char* measure) {
  const std::string m(measure);
  if (!(a.kappa > 0.0)) throw std::invalid_argument("kappa_" + m + " must be positive");
  if (!(a.theta > 0.0)) throw std::invalid_argument("theta_" + m + " must be positive");
  if (!(2.0 * a.kappa * a.theta > xi * xi))
    throw std::invalid_argument("Feller condition 2*kappa*theta > xi^2 violated under " + m);
}

}  // namespace

StochVolParams::StochVolParams(const StochVolInputs& in) : in_(in) {
  if (!(in.rho > -1.0 && in.rho < 1.0)) throw std::invalid_argument("rho must lie in (-1, 1)");
  if (!(in.xi > 0.0)) throw std::invalid_argument("xi must be positive");
  if (!std::isfinite(in.mu)) throw std::invalid_argument("mu must be finite");
  check_drift(in.drift_p, in.xi, "P");
  check_drift(in.drift_q, in.xi, "Q");
}

double OptionSpec::payoff(double spot) const noexcept {
  return kind == OptionKind::Call ? std::max(spot - strike, 0.0) : std::max(strike - spot, 0.0);
}

void OptionSpec::validate() const {
  if (!(strike >= 0.0)) throw std::invalid_argument("strike must be non-negative");
  if (!(maturity > 0.0)) throw std::invalid_argument("maturity must be positive");
}

void MarketState::validate() const {
  if (!(spot > 0.0)) throw std::invalid_argument("spot must be positive");
  if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
  if (!(time >= 0.0)) throw std::invalid_argument("time must be non-negative");
}

}  // namespace omm::model
