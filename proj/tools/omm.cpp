#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <exception>

#include "omm/cli.hpp"

namespace {

omm::config::ExperimentConfig load(const std::string& path) {
  return path.empty() ? omm::config::ExperimentConfig{} : omm::config::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Option market making: quote surface, HJB solve, quotes, simulation and vega correction"};
  app.require_subcommand(1);

  std::string config_path;
  omm::cli::CommandOptions opts;
  std::string out_dir = "out", value_function, states;
  std::uint64_t seed = 0;
  std::size_t episodes = 0;

  app.add_option("--config", config_path, "JSON configuration (default: built-in reference configuration)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "seed for the command's Monte Carlo (overrides the config)");

  auto* surface = app.add_subcommand("surface", "MC prices and implied vols of the book");
  surface->add_flag("--oracle", opts.oracle, "append closed-form price, its implied vol and the z-score");
  surface->add_flag("--strike-zero", opts.strike_zero_row, "append a strike-0 sentinel row");

  auto* solve = app.add_subcommand("solve", "solve the HJB equation and write the value function");
  solve->add_flag("--refine", opts.refine, "also solve on a grid with doubled time and vega nodes");

  auto* quotes = app.add_subcommand("quotes", "optimal quotes at t = 0 across the vega grid");
  auto* simulate = app.add_subcommand("simulate", "event-driven simulation of the configured policy");
  auto* episodes_opt = simulate->add_option("--episodes", episodes, "number of episodes (overrides the config)");
  auto* correct = app.add_subcommand("correct", "first-order vega correction phi at a list of states");
  correct->add_option("--states", states, "CSV t,spot,variance,inventory (default: initial state, flat book)")
      ->check(CLI::ExistingFile);
  for (auto* sub : {quotes, simulate, correct})
    sub->add_option("--value-function", value_function, "value function file (default: <out>/value_function.bin)");

  CLI11_PARSE(app, argc, argv);

  opts.out_dir = out_dir;
  opts.value_function = value_function;
  opts.states = states;
  if (*seed_opt) opts.seed = seed;
  if (*episodes_opt) opts.episodes = episodes;

  try {
    const auto cfg = load(config_path);
    if (*surface) {
      std::printf("wrote %s\n", omm::cli::cmd_surface(cfg, opts).c_str());
    } else if (*solve) {
      const auto s = omm::cli::cmd_solve(cfg, opts);
      std::printf("wrote %s (n_time %zu, %.1f s)\nv(0, nu0, 0) = %.10g\n", s.value_file.c_str(), s.n_time, s.seconds,
                  s.value_at_origin);
      if (s.refined_value_at_origin)
        std::printf("refined v(0, nu0, 0) = %.10g (relative change %.3g)\n", *s.refined_value_at_origin,
                    (*s.refined_value_at_origin - s.value_at_origin) / std::abs(s.value_at_origin));
    } else if (*quotes) {
      std::printf("wrote %s\n", omm::cli::cmd_quotes(cfg, opts).c_str());
    } else if (*simulate) {
      const auto s = omm::cli::cmd_simulate(cfg, opts);
      std::printf("%zu episodes, %zu trades, %zu blocked by the limit\n", s.episodes, s.trades, s.blocked);
      std::printf("objective %.6g +- %.3g (pnl %.6g +- %.3g, penalty %.6g +- %.3g)\n", s.objective.objective,
                  s.objective.objective_std_error, s.objective.mean_pnl, s.objective.pnl_std_error,
                  s.objective.mean_penalty, s.objective.penalty_std_error);
      if (s.coarse_step) std::fprintf(stderr, "warning: step coarse against the arrival rates\n");
      if (s.clamped_mark_queries) std::fprintf(stderr, "warning: %zu mark queries clamped\n", s.clamped_mark_queries);
    } else if (*correct) {
      const auto est = omm::cli::cmd_correct(cfg, opts);
      for (const auto& e : est) {
        std::printf("phi %.6g +- %.3g%s\n", e.value, e.std_error, e.flagged ? " (flagged)" : "");
        if (e.clipped) std::fprintf(stderr, "warning: %zu tilted intensities clipped at 0\n", e.clipped);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
