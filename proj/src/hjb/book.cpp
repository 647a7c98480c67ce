#include <algorithm>
#include <cmath>
#include <string>

#include "omm/hjb.hpp"

namespace omm::hjb {

void TraderConfig::validate() const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be non-negative");
  if (!(vega_limit > 0.0)) throw std::invalid_argument("vega_limit must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!std::isfinite(delta_floor)) throw std::invalid_argument("delta_floor must be finite");
}

void OptionBook::validate(const TraderConfig& trader) const {
  trader.validate();
  if (entries.empty()) throw std::invalid_argument("option book is empty");
  bool any_tradeable = false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    e.option.validate();
    const std::string tag = "option " + std::to_string(i);
    if (!(e.vega > 0.0)) throw std::invalid_argument(tag + ": vega must be positive");
    if (!(e.size > 0.0)) throw std::invalid_argument(tag + ": trade size must be positive");
    if (!(trader.horizon < e.option.maturity))
      throw std::invalid_argument(tag + ": trading horizon must end before maturity");
    any_tradeable = any_tradeable || e.vega_step() < 2.0 * trader.vega_limit;
  }
  if (!any_tradeable) throw std::invalid_argument("no option can trade inside the vega limit");
}

SolverGrid SolverGrid::reference(double vega_limit) {
  return {180, {0.0144, 0.0324, 30}, {-vega_limit, vega_limit, 40}};
}

void SolverGrid::validate() const {
  if (n_time < 1) throw std::invalid_argument("grid needs at least one time step");
  if (nu.n < 2 || vega.n < 2) throw std::invalid_argument("grid axes need at least two nodes");
  if (!(nu.lo > 0.0 && nu.hi > nu.lo)) throw std::invalid_argument("variance axis must be positive and ascending");
  if (!(vega.hi > 0.0) || vega.lo != -vega.hi) throw std::invalid_argument("vega axis must be symmetric about 0");
}

bool trade_admissible(double portfolio_vega, double vega_step, Side side, double vega_limit) noexcept {
  return std::abs(portfolio_vega - psi(side) * vega_step) <= vega_limit * (1.0 + 1e-12);
}

}  // namespace omm::hjb
