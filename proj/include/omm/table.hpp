#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace omm {

/// Uniform axis with n >= 2 nodes on [lo, hi].
struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 2;

  double step() const noexcept { return (hi - lo) / static_cast<double>(n - 1); }
  double node(std::size_t k) const noexcept { return k + 1 == n ? hi : lo + step() * static_cast<double>(k); }
};

/// Cell index and weight of the upper node for x on an axis. Positions within
/// 1e-9 cells of a node snap to it. Out-of-range x is clamped and flagged.
struct AxisBracket {
  std::size_t lo;
  double w;
};
AxisBracket locate(const Axis& axis, double x, bool& clamped) noexcept;

/// Several fields tabulated on a (t, S, nu) grid, interpolated trilinearly.
class Table3 {
 public:
  Table3(Axis t, Axis spot, Axis nu, std::size_t n_fields);

  const Axis& t_axis() const noexcept { return t_; }
  const Axis& spot_axis() const noexcept { return s_; }
  const Axis& nu_axis() const noexcept { return v_; }
  std::size_t fields() const noexcept { return n_fields_; }
  std::size_t nodes() const noexcept { return t_.n * s_.n * v_.n; }

  /// Node (a, b, c) -> flat node index; fields of one node are contiguous.
  std::size_t node_index(std::size_t a, std::size_t b, std::size_t c) const noexcept {
    return (a * s_.n + b) * v_.n + c;
  }
  std::span<double> node_fields(std::size_t node) noexcept { return {data_.data() + node * n_fields_, n_fields_}; }
  std::span<const double> node_fields(std::size_t node) const noexcept {
    return {data_.data() + node * n_fields_, n_fields_};
  }

  void interpolate(double t, double spot, double nu, std::span<double> out) const noexcept;
  std::size_t clamped_queries() const noexcept { return clamped_->load(std::memory_order_relaxed); }

 private:
  Axis t_, s_, v_;
  std::size_t n_fields_;
  std::vector<double> data_;
  std::shared_ptr<std::atomic<std::size_t>> clamped_ = std::make_shared<std::atomic<std::size_t>>(0);
};

}  // namespace omm
