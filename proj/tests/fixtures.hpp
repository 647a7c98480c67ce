#pragma once

#include "omm/model.hpp"

namespace omm::testing {

// Market of the reference book: S0 = 10, nu0 = 0.0225, Heston drifts under P and Q.
inline model::StochVolInputs reference_inputs() {
  return {.mu = 0.0, .xi = 0.2, .rho = -0.5, .drift_p = {2.0, 0.04}, .drift_q = {3.0, 0.0225}};
}

inline model::StochVolParams reference_params() { return model::StochVolParams(reference_inputs()); }

inline model::MarketState reference_state() { return {.spot = 10.0, .variance = 0.0225, .time = 0.0}; }

// Near-degenerate diffusion: variance frozen at nu0, so prices are Black-Scholes at sqrt(nu0).
inline model::StochVolParams frozen_variance_params(double rho = -0.5) {
  return model::StochVolParams({.mu = 0.0, .xi = 1e-6, .rho = rho, .drift_p = {1e-6, 0.0225}, .drift_q = {1e-6, 0.0225}});
}

}  // namespace omm::testing
