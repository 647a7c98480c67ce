#include "omm/table.hpp"

#include <algorithm>
#include <cmath>

namespace omm {

AxisBracket locate(const Axis& axis, double x, bool& clamped) noexcept {
  double f = (x - axis.lo) / axis.step();
  const double top = static_cast<double>(axis.n - 1);
  if (f < 0.0 || f > top) {
    clamped = clamped || f < -1e-9 || f > top + 1e-9;
    f = std::clamp(f, 0.0, top);
  }
  const double r = std::round(f);
  if (std::abs(f - r) < 1e-9) f = r;
  auto lo = static_cast<std::size_t>(std::floor(f));
  if (lo + 1 >= axis.n) lo = axis.n - 2;
  return {lo, f - static_cast<double>(lo)};
}

Table3::Table3(Axis t, Axis spot, Axis nu, std::size_t n_fields)
    : t_(t), s_(spot), v_(nu), n_fields_(n_fields) {
  for (const Axis* a : {&t_, &s_, &v_})
    if (a->n < 2 || !(a->hi > a->lo)) throw std::invalid_argument("table axes need n >= 2 and hi > lo");
  if (n_fields_ == 0) throw std::invalid_argument("table needs at least one field");
  data_.assign(nodes() * n_fields_, 0.0);
}

void Table3::interpolate(double t, double spot, double nu, std::span<double> out) const noexcept {
  bool clamped = false;
  const auto bt = locate(t_, t, clamped);
  const auto bs = locate(s_, spot, clamped);
  const auto bv = locate(v_, nu, clamped);
  if (clamped) clamped_->fetch_add(1, std::memory_order_relaxed);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 2; ++c) {
        const double w = (a ? bt.w : 1.0 - bt.w) * (b ? bs.w : 1.0 - bs.w) * (c ? bv.w : 1.0 - bv.w);
        if (w == 0.0) continue;
        const auto f = node_fields(node_index(bt.lo + a, bs.lo + b, bv.lo + c));
        for (std::size_t i = 0; i < n_fields_; ++i) out[i] += w * f[i];
      }
}

}  // namespace omm
