#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "omm/hjb.hpp"
#include "omm/model.hpp"
#include "omm/table.hpp"

namespace omm::sim {

using hjb::HedgeMode;
using hjb::OptionBook;
using hjb::QuoteSource;
using hjb::Side;
using hjb::TraderConfig;
using model::Execution;

// ---------------------------------------------------------------------------
// Option marks along simulated paths

/// Prices and spot deltas of every option in a book at (t, S, nu).
class MarkModel {
 public:
  virtual ~MarkModel() = default;
  virtual std::size_t size() const noexcept = 0;
  virtual void evaluate(double t, double spot, double nu, std::span<double> price,
                        std::span<double> delta) const = 0;
};

/// Direct closed-form evaluation (about 0.3 ms per option and state).
class ClosedFormMarks final : public MarkModel {
 public:
  ClosedFormMarks(std::vector<model::OptionSpec> options, model::StochVolParams params);
  std::size_t size() const noexcept override { return options_.size(); }
  void evaluate(double t, double spot, double nu, std::span<double> price, std::span<double> delta) const override;

 private:
  std::vector<model::OptionSpec> options_;
  model::StochVolParams params_;
};

struct MarkTableSpec {
  Axis t;
  Axis spot;
  Axis nu;
};

/// Box holding (S, nu) over [0, horizon] with overwhelming probability:
/// n_sd standard deviations of the diffusion around the start, nu kept positive.
MarkTableSpec reachable_box(const model::StochVolParams& params, const model::MarketState& initial, double horizon,
                            std::size_t t_nodes, std::size_t spot_nodes, std::size_t nu_nodes, double n_sd = 6.0);

/// Closed-form prices and deltas tabulated on a (t, S, nu) grid and
/// interpolated trilinearly. Queries outside the box are clamped and counted.
class TabulatedMarks final : public MarkModel {
 public:
  static TabulatedMarks build(const std::vector<model::OptionSpec>& options, const model::StochVolParams& params,
                              const MarkTableSpec& spec, Execution exec = Execution::Parallel);

  std::size_t size() const noexcept override { return prices_.fields(); }
  void evaluate(double t, double spot, double nu, std::span<double> price, std::span<double> delta) const override;
  std::size_t clamped_queries() const noexcept { return prices_.clamped_queries(); }
  const Table3& prices() const noexcept { return prices_; }
  const Table3& deltas() const noexcept { return deltas_; }

 private:
  TabulatedMarks(Table3 prices, Table3 deltas) : prices_(std::move(prices)), deltas_(std::move(deltas)) {}
  Table3 prices_;
  Table3 deltas_;
};

// ---------------------------------------------------------------------------
// Quote sources besides the solved policy

/// Never quotes.
class NoQuotes final : public QuoteSource {
 public:
  std::optional<double> quote(std::size_t, Side, double, double, double) const override { return std::nullopt; }
};

/// The same offset for every option, side and state.
class ConstantQuotes final : public QuoteSource {
 public:
  explicit ConstantQuotes(double delta) : delta_(delta) {}
  std::optional<double> quote(std::size_t, Side, double, double, double) const override { return delta_; }

 private:
  double delta_;
};

/// Maximises the instantaneous expected margin delta * Lambda(delta), ignoring inventory.
class MyopicQuotes final : public QuoteSource {
 public:
  MyopicQuotes(const OptionBook& book, double delta_floor);
  std::optional<double> quote(std::size_t option, Side side, double, double, double) const override {
    return quotes_[2 * option + static_cast<std::size_t>(side)];
  }

 private:
  std::vector<double> quotes_;
};

// ---------------------------------------------------------------------------
// Episodes

struct SimOptions {
  std::size_t n_steps = 1200;
  std::uint64_t seed = 7;
  HedgeMode hedge = HedgeMode::Delta;
  std::size_t sample_every = 1;  // MtM samples every k steps (0: only start and end)
  bool record_logs = true;       // trade and hedge logs
};

struct TradeRecord {
  double time;
  std::size_t option;
  Side side;
  double size;
  double quote;
  double mark;   // option price the trade was booked against
  double cash;   // after the trade
  double vega;   // portfolio vega after the trade
  double mtm;    // after the trade
};

struct HedgeRecord {
  double time;
  double position;  // underlying shares after re-hedging
  double spot;
  double cash;  // after re-hedging
};

struct MtmSample {
  double time;
  double mtm;
  double vega;   // V^pi
  double delta;  // Delta^pi = sum q^i dO^i/dS
  double spot;
  double variance;
  double cash;
  double underlying;
};

/// Running sums of the MtM increments between consecutive steps.
struct IncrementStats {
  std::size_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

struct SimReport {
  HedgeMode hedge = HedgeMode::Delta;
  double terminal_mtm = 0.0;
  double penalty_integral = 0.0;         // (gamma xi^2 / 8) int (V^pi)^2 dt
  double penalty_integral_scaled = 0.0;  // the same times (1 - rho^2)
  double initial_cash = 0.0;             // after buying the initial inventory and hedge at marks
  std::vector<double> initial_inventory;
  std::vector<double> final_inventory;
  double max_abs_vega = 0.0;
  std::size_t candidates = 0;        // dominating-stream arrivals
  std::size_t blocked_by_limit = 0;  // candidates whose trade would breach the vega limit
  std::size_t trade_count = 0;
  bool coarse_step = false;  // some stream has P(>= 2 candidates in a step) > 1%
  IncrementStats increments;
  std::vector<MtmSample> mtm_path;
  std::vector<TradeRecord> trades;
  std::vector<HedgeRecord> hedges;

  /// Penalty matching the hedge: raw under delta hedging, scaled under the optimal hedge.
  double penalty() const noexcept { return hedge == HedgeMode::Optimal ? penalty_integral_scaled : penalty_integral; }
};

struct EpisodeInputs {
  const QuoteSource* quotes;
  const MarkModel* marks;
  const model::StochVolParams* params;
  const OptionBook* book;
  TraderConfig trader;
  model::MarketState initial;
  std::vector<double> initial_inventory;  // empty: flat
};

/// One episode over [0, horizon]. Requests arrive on independent dominating
/// Poisson streams per (option, side) and are accepted with probability
/// Lambda(quote)/lambda when the trade keeps |V^pi| within the limit; the spot
/// and variance diffuse under P between steps; the underlying is re-hedged
/// every step. Deterministic in (seed, episode).
SimReport simulate_episode(const EpisodeInputs& in, const SimOptions& options, std::size_t episode = 0);

/// Independent episodes 0..n-1 run in parallel; identical to running them one by one.
std::vector<SimReport> simulate_batch(const EpisodeInputs& in, const SimOptions& options, std::size_t n_episodes,
                                      Execution exec = Execution::Parallel);

/// Probability that a rate-lambda stream produces two or more candidates in one step.
double multiple_arrival_probability(double rate, double dt) noexcept;

struct ObjectiveEstimate {
  double mean_pnl = 0.0;
  double pnl_std_error = 0.0;
  double mean_penalty = 0.0;
  double penalty_std_error = 0.0;
  double objective = 0.0;  // mean_pnl - mean_penalty
  double objective_std_error = 0.0;
  std::size_t episodes = 0;
};

/// Risk-adjusted objective E[V_T] - E[penalty] with standard errors.
ObjectiveEstimate evaluate_objective(std::span<const SimReport> reports);

/// Paired difference of per-episode objectives (a - b) for batches run on the
/// same seeds: mean and standard error.
model::Estimate objective_difference(std::span<const SimReport> a, std::span<const SimReport> b);

/// CSV with columns time,event_type,option_id,side,size,quote,cash,vega_portfolio,mtm.
/// event_type is trade, hedge or sample; fields that do not apply are empty.
void write_events_csv(const SimReport& report, const std::filesystem::path& path);

}  // namespace omm::sim
