#include <algorithm>
#include <cmath>

#include "omm/hjb.hpp"

namespace omm::hjb {

ValueFunction::ValueFunction(SolverGrid grid, double horizon, std::vector<double> values)
    : grid_(grid), horizon_(horizon), values_(std::move(values)) {
  grid_.validate();
  if (!(horizon_ > 0.0)) throw std::invalid_argument("value function horizon must be positive");
  if (values_.size() != (grid_.n_time + 1) * grid_.nodes_per_slice())
    throw std::invalid_argument("value array does not match the grid");
}

double ValueFunction::value_at(double t, double nu, double vega) const noexcept {
  bool clamped = false;
  const auto bt = locate({0.0, horizon_, grid_.n_time + 1}, t, clamped);
  const auto bn = locate(grid_.nu, nu, clamped);
  const auto bv = locate(grid_.vega, vega, clamped);
  if (clamped) clamped_->fetch_add(1, std::memory_order_relaxed);

  auto plane = [&](std::size_t n) {
    const double a = at(n, bn.lo, bv.lo);
    const double b = at(n, bn.lo, bv.lo + 1);
    const double c = at(n, bn.lo + 1, bv.lo);
    const double d = at(n, bn.lo + 1, bv.lo + 1);
    const double low = (1.0 - bv.w) * a + bv.w * b;
    const double high = (1.0 - bv.w) * c + bv.w * d;
    return (1.0 - bn.w) * low + bn.w * high;
  };
  return (1.0 - bt.w) * plane(bt.lo) + bt.w * plane(bt.lo + 1);
}

}  // namespace omm::hjb
