#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "omm/hjb.hpp"
#include "omm/model.hpp"
#include "omm/table.hpp"

namespace omm::correction {

using hjb::OptionBook;
using hjb::TraderConfig;
using model::Execution;

struct TableSpec {
  Axis t;
  Axis spot;
  Axis nu;
};

/// (t, S, nu) box over [t0, t0 + horizon] whose spot and variance axes are
/// centred on the initial state (an odd node count puts it on a node) and wide
/// enough for n_sd diffusion standard deviations.
TableSpec centred_box(const model::StochVolParams& params, const model::MarketState& initial, double horizon,
                      std::size_t t_nodes, std::size_t spot_nodes, std::size_t nu_nodes, double n_sd = 4.0);

/// Deviation of every option's true vega from its frozen value,
/// D^i(t, S, nu) = dO^i/d sqrt(nu)(t, S, nu) - V^i, so that
/// eps W(t, S, nu, q) = sum q^i D^i(t, S, nu).
class VegaDeviationField {
 public:
  /// Tables from the closed-form vega; the bump (in sqrt(nu)) should be the one the book's vegas were built with.
  static VegaDeviationField build(const OptionBook& book, const model::StochVolParams& params, const TableSpec& spec,
                                  Execution exec = Execution::Parallel, double bump = model::kDefaultVegaBump);
  /// Constant vegas exactly: D identically zero.
  static VegaDeviationField zero(const OptionBook& book, const TableSpec& spec);

  /// The same field with every deviation multiplied by c.
  VegaDeviationField scaled(double c) const;

  std::size_t size() const noexcept { return frozen_.size(); }
  const Table3& deviations() const noexcept { return table_; }
  double frozen_vega(std::size_t i) const noexcept { return frozen_[i]; }

  /// True vegas V^i + D^i at (t, S, nu).
  void true_vegas(double t, double spot, double nu, std::span<double> out) const;
  double epsilon_w(double t, double spot, double nu, std::span<const double> inventory) const;
  std::size_t clamped_queries() const noexcept { return table_.clamped_queries(); }

 private:
  VegaDeviationField(Table3 table, std::vector<double> frozen, double scale)
      : table_(std::move(table)), frozen_(std::move(frozen)), scale_(scale) {}
  Table3 table_;
  std::vector<double> frozen_;
  double scale_;
};

struct PhiRequest {
  double t = 0.0;
  model::MarketState state;     // spot, variance (state.time is ignored; t is used)
  std::vector<double> inventory;
  std::size_t n_paths = 2000;
  std::size_t n_steps = 60;
  std::uint64_t seed = 11;
  double tolerance = 0.0;  // standard errors above this are flagged; 0 disables
};

struct PhiEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool flagged = false;  // std_error above the requested tolerance
  double min_intensity = 0.0;  // of -H' before clipping, over all paths
  double max_intensity = 0.0;
  std::size_t clipped = 0;  // evaluations where -H' < 0 was clipped to 0
  std::size_t jumps = 0;
};

/// First-order correction to the constant-vega value function,
/// phi = E[ int_t^T ((a_P - a_Q)/(2 sqrt nu) eps W - (gamma xi^2 / 4) eps W V^pi) ds ],
/// with (S, nu) under P and inventories jumping at rates -H'^{i,j} evaluated on
/// the constant-vega value function. No risk limit applies here. Time
/// integral: the (S, nu) state is frozen at each step's left end, the
/// inventory integrated exactly between its jumps.
PhiEstimate phi(const PhiRequest& req, const hjb::ValueFunction& vf, const VegaDeviationField& field,
                const model::StochVolParams& params, const OptionBook& book, const TraderConfig& trader,
                Execution exec = Execution::Parallel);

/// CSV with columns t,spot,variance,inventory,phi,std_error,flagged (inventory
/// is a ';'-separated list).
void write_phi_csv(std::span<const PhiRequest> requests, std::span<const PhiEstimate> estimates,
                   const std::filesystem::path& path);

}  // namespace omm::correction
