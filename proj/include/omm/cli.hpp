#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "omm/config.hpp"
#include "omm/correction.hpp"
#include "omm/sim.hpp"

namespace omm::cli {

struct CommandOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;  // replaces the command's own MC seed
  std::optional<std::size_t> episodes;
  bool refine = false;           // solve: rerun with n_time and vega nodes doubled
  bool oracle = false;           // surface: append closed-form columns
  bool strike_zero_row = false;  // surface: append a K = 0 sentinel row
  std::filesystem::path value_function;  // empty: <out_dir>/value_function.bin
  std::filesystem::path states;          // correct: CSV t,spot,variance,inventory
};

std::filesystem::path value_function_path(const CommandOptions& opts);

// surface ------------------------------------------------------------------

struct SurfaceRow {
  model::OptionSpec option;
  model::Estimate price;
  std::optional<double> implied_vol;  // nullopt: price outside the no-arbitrage band
  std::optional<double> closed_form;  // filled when the oracle is requested
  std::optional<double> closed_form_iv;
};

std::vector<SurfaceRow> surface_rows(const config::ExperimentConfig& cfg, const CommandOptions& opts);
/// strike,maturity,price,stderr,implied_vol,status[,closed_form,closed_form_iv,z_score]
void write_surface_csv(std::span<const SurfaceRow> rows, const std::filesystem::path& path, bool oracle);
std::filesystem::path cmd_surface(const config::ExperimentConfig& cfg, const CommandOptions& opts);

// solve --------------------------------------------------------------------

struct SolveSummary {
  std::filesystem::path value_file;
  std::size_t n_time = 0;  // after any CFL-driven refinement
  double value_at_origin = 0.0;  // v(0, nu0, 0)
  std::optional<double> refined_value_at_origin;
  double seconds = 0.0;
};

/// Writes value_function.bin and value_t0.csv (nu,vega,value); with refine,
/// also refinement.csv comparing v(0, nu0, 0) on the doubled grid.
SolveSummary cmd_solve(const config::ExperimentConfig& cfg, const CommandOptions& opts);

/// Reads a value function and checks it was solved for this configuration.
hjb::ValueFunction load_value_function(const config::ExperimentConfig& cfg, const hjb::TraderConfig& trader,
                                       const std::filesystem::path& path);

// quotes -------------------------------------------------------------------

/// quotes.csv: option,strike,maturity,side,vega_node,portfolio_vega,quote,
/// quote_over_price,implied_vol_of_quote,implied_vol_of_price at t = 0, nu = nu0.
/// Quotes the risk limit forbids are left empty.
std::filesystem::path cmd_quotes(const config::ExperimentConfig& cfg, const CommandOptions& opts);

// simulate -----------------------------------------------------------------

struct SimulateSummary {
  sim::ObjectiveEstimate objective;
  std::size_t episodes = 0;
  std::size_t trades = 0;
  std::size_t blocked = 0;
  std::size_t clamped_mark_queries = 0;
  bool coarse_step = false;
};

/// episodes.csv (one row per episode), events_episode0.csv and summary.json.
SimulateSummary cmd_simulate(const config::ExperimentConfig& cfg, const CommandOptions& opts);

// correct ------------------------------------------------------------------

/// One request per row of a CSV with header t,spot,variance,inventory, the
/// inventory a ';'-separated list of contracts (empty: flat). MC sizes and
/// seed come from the configuration.
std::vector<correction::PhiRequest> read_states(const config::ExperimentConfig& cfg, std::size_t n_options,
                                                const std::filesystem::path& path);

/// phi.csv for the requested states (default: the initial state, flat book).
std::vector<correction::PhiEstimate> cmd_correct(const config::ExperimentConfig& cfg, const CommandOptions& opts);

}  // namespace omm::cli
