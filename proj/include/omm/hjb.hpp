#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "omm/model.hpp"
#include "omm/quoting.hpp"
#include "omm/table.hpp"

namespace omm::hjb {

using model::Execution;

enum class Side { Bid = 0, Ask = 1 };

/// +1 for ask (client buys, inventory falls), -1 for bid.
constexpr double psi(Side s) noexcept { return s == Side::Ask ? 1.0 : -1.0; }
constexpr const char* to_string(Side s) noexcept { return s == Side::Ask ? "ask" : "bid"; }

/// How the underlying is held. Optimal hedging shrinks the vega-risk penalty by (1 - rho^2).
enum class HedgeMode { Delta, Optimal };

struct TraderConfig {
  double gamma = 0.0;        // risk aversion, 1/currency
  double delta_floor = 0.0;  // lower bound on quotes, currency
  double vega_limit = 0.0;   // |sum q^i V^i| <= vega_limit
  double horizon = 0.0;      // years

  void validate() const;
};

struct BookEntry {
  model::OptionSpec option;
  double vega = 0.0;  // frozen at t = 0
  double size = 0.0;  // contracts per request (point-mass size law)
  quoting::IntensityCurve bid;
  quoting::IntensityCurve ask;

  const quoting::IntensityCurve& curve(Side s) const noexcept { return s == Side::Bid ? bid : ask; }
  double vega_step() const noexcept { return size * vega; }
};

struct OptionBook {
  std::vector<BookEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  const BookEntry& operator[](std::size_t i) const { return entries[i]; }

  /// Vegas positive, sizes positive, horizon before every maturity, and at
  /// least one option whose single trade fits inside the risk limits.
  void validate(const TraderConfig& trader) const;
};

using omm::Axis;

struct SolverGrid {
  std::size_t n_time = 180;
  Axis nu{0.0144, 0.0324, 30};
  Axis vega{-1e7, 1e7, 40};

  /// 180 x 30 x 40 over [0.0144, 0.0324] x [-vega_limit, vega_limit].
  static SolverGrid reference(double vega_limit);
  void validate() const;
  std::size_t nodes_per_slice() const noexcept { return nu.n * vega.n; }
};

/// v(t, nu, V) on the solver grid, n_time + 1 time slices (slice n_time is the
/// terminal condition). Immutable once built.
class ValueFunction {
 public:
  ValueFunction(SolverGrid grid, double horizon, std::vector<double> values);

  const SolverGrid& grid() const noexcept { return grid_; }
  double horizon() const noexcept { return horizon_; }
  double dt() const noexcept { return horizon_ / static_cast<double>(grid_.n_time); }
  double time(std::size_t n) const noexcept { return n == grid_.n_time ? horizon_ : dt() * static_cast<double>(n); }

  double at(std::size_t n, std::size_t k, std::size_t m) const noexcept {
    return values_[(n * grid_.nu.n + k) * grid_.vega.n + m];
  }
  std::span<const double> slice(std::size_t n) const noexcept {
    return {values_.data() + n * grid_.nodes_per_slice(), grid_.nodes_per_slice()};
  }
  std::span<const double> values() const noexcept { return values_; }

  /// Linear in t, bilinear in (nu, V); exact at nodes. Arguments outside the
  /// grid are clamped to it and counted in clamped_queries().
  double value_at(double t, double nu, double vega) const noexcept;
  std::size_t clamped_queries() const noexcept { return clamped_->load(std::memory_order_relaxed); }

 private:
  SolverGrid grid_;
  double horizon_;
  std::vector<double> values_;
  std::shared_ptr<std::atomic<std::size_t>> clamped_ = std::make_shared<std::atomic<std::size_t>>(0);
};

class CflViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveOptions {
  Execution exec = Execution::Parallel;
  HedgeMode hedge = HedgeMode::Delta;
  /// Raise n_time until the monotonicity bound holds instead of failing.
  bool auto_refine = false;
  /// One slice (nu-major) used as v(T); empty means the zero terminal condition.
  std::vector<double> terminal;
};

/// dt * max_k (xi^2 nu_k / dnu^2 + |a_P(nu_k)| / dnu): the monotonicity number
/// of the variance operator alone. The jump part is checked during the march.
double linear_cfl_number(const model::StochVolParams& params, const SolverGrid& grid, double horizon);

/// Backward explicit Euler march of the reduced HJB equation from v(T) = 0.
/// Throws CflViolation before iterating if the variance operator breaks the
/// monotonicity bound, or during the march if the state-dependent jump rates do.
ValueFunction solve(const model::StochVolParams& params, const OptionBook& book, const TraderConfig& trader,
                    const SolverGrid& grid, const SolveOptions& options = {});

/// Anything that answers "what offset do I quote for option i on this side in this state".
class QuoteSource {
 public:
  virtual ~QuoteSource() = default;
  /// nullopt: no quote (the trade would breach the risk limit, or the source declines).
  virtual std::optional<double> quote(std::size_t option, Side side, double t, double nu,
                                      double portfolio_vega) const = 0;
};

/// Optimal quotes read off a solved value function.
class QuotePolicy final : public QuoteSource {
 public:
  QuotePolicy(std::shared_ptr<const ValueFunction> vf, OptionBook book, TraderConfig trader);

  std::optional<double> quote(std::size_t option, Side side, double t, double nu,
                              double portfolio_vega) const override;

  /// Difference quotient (v(V) - v(V - psi z V^i)) / z fed to the Hamiltonian.
  double difference_quotient(std::size_t option, Side side, double t, double nu, double portfolio_vega) const;
  bool admissible(std::size_t option, Side side, double portfolio_vega) const noexcept;

  const ValueFunction& value_function() const noexcept { return *vf_; }
  const OptionBook& book() const noexcept { return book_; }
  const TraderConfig& trader() const noexcept { return trader_; }

 private:
  std::shared_ptr<const ValueFunction> vf_;
  OptionBook book_;
  TraderConfig trader_;
};

QuotePolicy quote_policy(std::shared_ptr<const ValueFunction> vf, const OptionBook& book,
                         const TraderConfig& trader);

/// |V - psi(side) z V^i| <= vega_limit, with a 1e-12 relative allowance so
/// targets that land on +-vega_limit by construction stay admissible.
bool trade_admissible(double portfolio_vega, double vega_step, Side side, double vega_limit) noexcept;

// ---------------------------------------------------------------------------
// Persistence. Binary layout (little-endian host order):
//   16-byte magic "OMM-VALUEFN\0\0\0\0\0", u8 version = 1,
//   u64 n_time, u64 n_nu, u64 n_vega,
//   f64 horizon, f64 nu_lo, f64 nu_hi, f64 vega_lo, f64 vega_hi,
//   then (n_time + 1) * n_nu * n_vega f64 values, row-major (t, nu, vega).

inline constexpr std::uint8_t kValueFileVersion = 1;

void write_binary(const ValueFunction& vf, const std::filesystem::path& path);
ValueFunction read_binary(const std::filesystem::path& path);

/// CSV "t_index,nu_index,vega_index,value" with %.17g values.
void write_csv(const ValueFunction& vf, const std::filesystem::path& path);
ValueFunction read_csv(const std::filesystem::path& path, const SolverGrid& grid, double horizon);

}  // namespace omm::hjb
