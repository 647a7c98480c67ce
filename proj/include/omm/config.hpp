#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "omm/hjb.hpp"
#include "omm/model.hpp"

namespace omm::config {

/// Book builder inputs: strikes x maturities, the lambda rule
/// lambda^i = lambda_base / (1 + lambda_decay |S0 - K^i|), logistic curves with
/// slope beta / V^i, and sizes z^i = notional_per_trade / price^i.
struct BookSpec {
  std::vector<double> strikes{8.0, 9.0, 10.0, 11.0, 12.0};
  std::vector<double> maturities{1.0, 1.5, 2.0, 3.0};
  model::OptionKind kind = model::OptionKind::Call;
  double lambda_base = 252.0 * 30.0;
  double lambda_decay = 0.7;
  double alpha = 0.7;
  double beta = 150.0;
  double notional_per_trade = 5e5;
  std::size_t pricing_paths = 100000;
  double pricing_steps_per_year = 100.0;
  std::uint64_t pricing_seed = 20190815;
  double vega_bump = model::kDefaultVegaBump;
};

struct TraderSpec {
  double gamma = 1e-3;
  double delta_floor_normalized = -50.0;  // in units of max_i V^i / beta
  double vega_limit = 1e7;
  double horizon = 0.0012;
};

struct GridSpec {
  std::size_t n_time = 180;
  double nu_min = 0.0144;
  double nu_max = 0.0324;
  std::size_t n_nu = 30;
  std::size_t n_vega = 40;
};

struct SimulationSpec {
  std::size_t episodes = 1000;
  std::size_t steps = 1200;
  hjb::HedgeMode hedge = hjb::HedgeMode::Delta;
  std::string policy = "hjb";  // hjb | myopic | none
  std::uint64_t seed = 7;
  // Marks are tabulated on (t, S, nu) from the closed-form pricer.
  std::size_t mark_spot_nodes = 41;
  std::size_t mark_nu_nodes = 21;
  std::size_t mark_time_nodes = 3;
};

struct CorrectionSpec {
  std::size_t paths = 2000;
  std::size_t steps = 60;
  std::uint64_t seed = 11;
  double tolerance = 0.0;  // 0 disables the standard-error flag
  std::size_t table_time_nodes = 6;
  std::size_t table_spot_nodes = 61;
  std::size_t table_nu_nodes = 21;
};

struct ExperimentConfig {
  model::MarketState initial{10.0, 0.0225, 0.0};
  model::StochVolInputs market{0.0, 0.2, -0.5, {2.0, 0.04}, {3.0, 0.0225}};
  BookSpec book;
  TraderSpec trader;
  GridSpec grid;
  SimulationSpec simulation;
  CorrectionSpec correction;

  /// Rejects anything the module invariants would reject later.
  void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& cfg);
ExperimentConfig parse_config(const std::string& text);

struct PricedBook {
  hjb::OptionBook book;
  std::vector<model::Estimate> prices;  // MC price at t = 0 per option
};

/// Prices (MC), vegas (closed form, frozen at t = 0), sizes and curves for every option.
PricedBook build_book(const ExperimentConfig& cfg);

/// The same construction for an explicit option list (options sharing a
/// maturity are priced from one path ensemble).
PricedBook build_book(const ExperimentConfig& cfg, std::span<const model::OptionSpec> options);

/// Same construction for explicit option specs and prices (used to build reduced books).
hjb::BookEntry make_entry(const ExperimentConfig& cfg, const model::StochVolParams& params,
                          const model::OptionSpec& option, double price);

hjb::TraderConfig trader_config(const ExperimentConfig& cfg, const hjb::OptionBook& book);
hjb::SolverGrid solver_grid(const ExperimentConfig& cfg);

}  // namespace omm::config
