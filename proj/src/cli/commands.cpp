#include "omm/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace omm::cli {

namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  FilePtr f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

std::optional<double> try_implied_vol(double price, const model::OptionSpec& option, double spot) {
  try {
    return model::implied_vol(price, option, spot);
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

void put_optional(std::FILE* f, const std::optional<double>& x) {
  if (x) std::fprintf(f, "%.17g", *x);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::filesystem::path value_function_path(const CommandOptions& opts) {
  return opts.value_function.empty() ? opts.out_dir / "value_function.bin" : opts.value_function;
}

// surface ------------------------------------------------------------------

std::vector<SurfaceRow> surface_rows(const config::ExperimentConfig& cfg, const CommandOptions& opts) {
  cfg.validate();
  const model::StochVolParams params(cfg.market);
  std::vector<model::OptionSpec> options;
  for (double t : cfg.book.maturities)
    for (double k : cfg.book.strikes) options.push_back({k, t, cfg.book.kind});
  if (opts.strike_zero_row) options.push_back({0.0, cfg.book.maturities.front(), cfg.book.kind});

  std::vector<SurfaceRow> rows(options.size());
  std::vector<bool> done(options.size(), false);
  for (std::size_t first = 0; first < options.size(); ++first) {
    if (done[first]) continue;
    const double t = options[first].maturity;
    std::vector<std::size_t> members;
    std::vector<model::OptionSpec> group;
    for (std::size_t j = first; j < options.size(); ++j)
      if (!done[j] && options[j].maturity == t) {
        members.push_back(j);
        group.push_back(options[j]);
        done[j] = true;
      }
    const model::McSpec mc{cfg.book.pricing_paths,
                           static_cast<std::size_t>(std::ceil(cfg.book.pricing_steps_per_year * t)),
                           opts.seed.value_or(cfg.book.pricing_seed)};
    const auto prices = model::price_options(group, cfg.initial, params, mc);
    for (std::size_t k = 0; k < members.size(); ++k) rows[members[k]] = {group[k], prices[k], std::nullopt, std::nullopt, std::nullopt};
  }
  for (auto& r : rows) {
    if (r.option.strike > 0.0) r.implied_vol = try_implied_vol(r.price.value, r.option, cfg.initial.spot);
    if (!opts.oracle) continue;
    r.closed_form = model::heston_closed_form(r.option, cfg.initial, params);
    if (r.option.strike > 0.0) r.closed_form_iv = try_implied_vol(*r.closed_form, r.option, cfg.initial.spot);
  }
  return rows;
}

void write_surface_csv(std::span<const SurfaceRow> rows, const std::filesystem::path& path, bool oracle) {
  auto f = open_out(path);
  std::fputs("strike,maturity,price,stderr,implied_vol,status", f.get());
  if (oracle) std::fputs(",closed_form,closed_form_iv,z_score", f.get());
  std::fputc('\n', f.get());
  for (const auto& r : rows) {
    std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,", r.option.strike, r.option.maturity, r.price.value,
                 r.price.std_error);
    put_optional(f.get(), r.implied_vol);
    std::fputs(r.implied_vol ? ",ok" : ",out_of_band", f.get());
    if (oracle && r.closed_form) {
      std::fprintf(f.get(), ",%.17g,", *r.closed_form);
      put_optional(f.get(), r.closed_form_iv);
      std::fputc(',', f.get());
      if (r.price.std_error > 0.0) std::fprintf(f.get(), "%.6g", (r.price.value - *r.closed_form) / r.price.std_error);
    } else if (oracle) {
      std::fputs(",,,", f.get());
    }
    std::fputc('\n', f.get());
  }
}

std::filesystem::path cmd_surface(const config::ExperimentConfig& cfg, const CommandOptions& opts) {
  const auto rows = surface_rows(cfg, opts);
  const auto path = opts.out_dir / "surface.csv";
  write_surface_csv(rows, path, opts.oracle);
  return path;
}

// solve --------------------------------------------------------------------

SolveSummary cmd_solve(const config::ExperimentConfig& cfg, const CommandOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const model::StochVolParams params(cfg.market);
  const auto priced = config::build_book(cfg);
  const auto trader = config::trader_config(cfg, priced.book);
  const auto grid = config::solver_grid(cfg);
  hjb::SolveOptions so;
  so.hedge = cfg.simulation.hedge;
  so.auto_refine = true;
  const auto vf = hjb::solve(params, priced.book, trader, grid, so);

  SolveSummary out;
  out.value_file = value_function_path(opts);
  if (out.value_file.has_parent_path()) std::filesystem::create_directories(out.value_file.parent_path());
  hjb::write_binary(vf, out.value_file);
  out.n_time = vf.grid().n_time;
  const double nu0 = cfg.initial.variance;
  out.value_at_origin = vf.value_at(0.0, nu0, 0.0);

  {
    auto f = open_out(opts.out_dir / "value_t0.csv");
    std::fputs("nu,vega,value\n", f.get());
    for (std::size_t k = 0; k < grid.nu.n; ++k)
      for (std::size_t m = 0; m < grid.vega.n; ++m)
        std::fprintf(f.get(), "%.17g,%.17g,%.17g\n", grid.nu.node(k), grid.vega.node(m), vf.at(0, k, m));
  }

  if (opts.refine) {
    auto fine = grid;
    fine.n_time *= 2;
    fine.vega.n = 2 * grid.vega.n - 1;  // keeps every coarse vega node
    const auto vf_fine = hjb::solve(params, priced.book, trader, fine, so);
    out.refined_value_at_origin = vf_fine.value_at(0.0, nu0, 0.0);
    auto f = open_out(opts.out_dir / "refinement.csv");
    std::fputs("n_time,n_nu,n_vega,value_at_origin,relative_change\n", f.get());
    std::fprintf(f.get(), "%zu,%zu,%zu,%.17g,0\n", grid.n_time, grid.nu.n, grid.vega.n, out.value_at_origin);
    std::fprintf(f.get(), "%zu,%zu,%zu,%.17g,%.6g\n", vf_fine.grid().n_time, fine.nu.n, fine.vega.n,
                 *out.refined_value_at_origin,
                 (*out.refined_value_at_origin - out.value_at_origin) / std::abs(out.value_at_origin));
  }
  out.seconds = seconds_since(t0);
  return out;
}

hjb::ValueFunction load_value_function(const config::ExperimentConfig& cfg, const hjb::TraderConfig& trader,
                                       const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw std::runtime_error("value function " + path.string() + " not found; run `omm solve` first");
  auto vf = hjb::read_binary(path);
  const auto want = config::solver_grid(cfg);
  const auto& g = vf.grid();
  const bool same = g.nu.lo == want.nu.lo && g.nu.hi == want.nu.hi && g.nu.n == want.nu.n &&
                    g.vega.lo == want.vega.lo && g.vega.hi == want.vega.hi && g.vega.n == want.vega.n &&
                    vf.horizon() == trader.horizon;
  if (!same) throw std::runtime_error("value function " + path.string() + " was solved for another configuration");
  return vf;
}

// quotes -------------------------------------------------------------------

std::filesystem::path cmd_quotes(const config::ExperimentConfig& cfg, const CommandOptions& opts) {
  const auto priced = config::build_book(cfg);
  const auto trader = config::trader_config(cfg, priced.book);
  auto vf = std::make_shared<const hjb::ValueFunction>(load_value_function(cfg, trader, value_function_path(opts)));
  const auto policy = hjb::quote_policy(vf, priced.book, trader);
  const double nu0 = cfg.initial.variance, spot = cfg.initial.spot;
  const auto& vega = vf->grid().vega;

  const auto path = opts.out_dir / "quotes.csv";
  auto f = open_out(path);
  std::fputs("option,strike,maturity,side,vega_node,portfolio_vega,quote,quote_over_price,implied_vol_of_quote,"
             "implied_vol_of_price\n",
             f.get());
  for (std::size_t i = 0; i < priced.book.size(); ++i) {
    const auto& o = priced.book[i].option;
    const double price = priced.prices[i].value;
    const auto mid_iv = try_implied_vol(price, o, spot);
    for (hjb::Side side : {hjb::Side::Bid, hjb::Side::Ask})
      for (std::size_t m = 0; m < vega.n; ++m) {
        const double v = vega.node(m);
        std::fprintf(f.get(), "%zu,%.17g,%.17g,%s,%zu,%.17g,", i, o.strike, o.maturity, hjb::to_string(side), m, v);
        const auto q = policy.quote(i, side, 0.0, nu0, v);
        if (q) {
          // Quotes are offsets: the bid sits below the price, the ask above.
          const double traded = price + hjb::psi(side) * *q;
          std::fprintf(f.get(), "%.17g,%.17g,", *q, *q / price);
          put_optional(f.get(), try_implied_vol(traded, o, spot));
        } else {
          std::fputs(",,", f.get());
        }
        std::fputc(',', f.get());
        put_optional(f.get(), mid_iv);
        std::fputc('\n', f.get());
      }
  }
  return path;
}

// simulate -----------------------------------------------------------------

SimulateSummary cmd_simulate(const config::ExperimentConfig& cfg, const CommandOptions& opts) {
  const model::StochVolParams params(cfg.market);
  const auto priced = config::build_book(cfg);
  const auto trader = config::trader_config(cfg, priced.book);
  const auto& s = cfg.simulation;

  std::unique_ptr<hjb::QuoteSource> quotes;
  if (s.policy == "hjb") {
    auto vf = std::make_shared<const hjb::ValueFunction>(load_value_function(cfg, trader, value_function_path(opts)));
    quotes = std::make_unique<hjb::QuotePolicy>(hjb::quote_policy(vf, priced.book, trader));
  } else if (s.policy == "myopic") {
    quotes = std::make_unique<sim::MyopicQuotes>(priced.book, trader.delta_floor);
  } else {
    quotes = std::make_unique<sim::NoQuotes>();
  }

  std::vector<model::OptionSpec> options;
  for (const auto& e : priced.book.entries) options.push_back(e.option);
  const auto box = sim::reachable_box(params, cfg.initial, trader.horizon, s.mark_time_nodes, s.mark_spot_nodes,
                                      s.mark_nu_nodes);
  const auto marks = sim::TabulatedMarks::build(options, params, box);

  sim::SimOptions so;
  so.n_steps = s.steps;
  so.seed = opts.seed.value_or(s.seed);
  so.hedge = s.hedge;
  so.sample_every = 0;
  so.record_logs = false;
  const sim::EpisodeInputs in{quotes.get(), &marks, &params, &priced.book, trader, cfg.initial, {}};
  const std::size_t n = opts.episodes.value_or(s.episodes);
  const auto reports = sim::simulate_batch(in, so, n);

  SimulateSummary out;
  out.objective = sim::evaluate_objective(reports);
  out.episodes = n;
  {
    auto f = open_out(opts.out_dir / "episodes.csv");
    std::fputs("episode,terminal_mtm,penalty,penalty_raw,penalty_scaled,objective,trades,candidates,"
               "blocked_by_limit,max_abs_vega\n",
               f.get());
    for (std::size_t e = 0; e < reports.size(); ++e) {
      const auto& r = reports[e];
      out.trades += r.trade_count;
      out.blocked += r.blocked_by_limit;
      out.coarse_step = out.coarse_step || r.coarse_step;
      std::fprintf(f.get(), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%zu,%.17g\n", e, r.terminal_mtm, r.penalty(),
                   r.penalty_integral, r.penalty_integral_scaled, r.terminal_mtm - r.penalty(), r.trade_count,
                   r.candidates, r.blocked_by_limit, r.max_abs_vega);
    }
  }
  if (n > 0) {
    auto logged = so;
    logged.record_logs = true;
    logged.sample_every = std::max<std::size_t>(1, s.steps / 100);
    sim::write_events_csv(sim::simulate_episode(in, logged, 0), opts.out_dir / "events_episode0.csv");
  }
  out.clamped_mark_queries = marks.clamped_queries();

  nlohmann::json j;
  j["policy"] = s.policy;
  j["hedge"] = s.hedge == hjb::HedgeMode::Optimal ? "optimal" : "delta";
  j["episodes"] = n;
  j["seed"] = so.seed;
  j["mean_pnl"] = out.objective.mean_pnl;
  j["pnl_std_error"] = out.objective.pnl_std_error;
  j["mean_penalty"] = out.objective.mean_penalty;
  j["penalty_std_error"] = out.objective.penalty_std_error;
  j["objective"] = out.objective.objective;
  j["objective_std_error"] = out.objective.objective_std_error;
  j["trades"] = out.trades;
  j["blocked_by_limit"] = out.blocked;
  j["coarse_step"] = out.coarse_step;
  j["clamped_mark_queries"] = out.clamped_mark_queries;
  std::ofstream(opts.out_dir / "summary.json") << j.dump(2) << '\n';
  return out;
}

// correct ------------------------------------------------------------------

std::vector<correction::PhiRequest> read_states(const config::ExperimentConfig& cfg, std::size_t n_options,
                                                const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read states " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("t,spot,variance,inventory", 0) != 0)
    throw std::runtime_error("states file must start with the header t,spot,variance,inventory");
  std::vector<correction::PhiRequest> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < 3 || cells.size() > 4) throw std::runtime_error("bad states row: " + line);
    correction::PhiRequest r;
    r.t = std::stod(cells[0]);
    r.state = {std::stod(cells[1]), std::stod(cells[2]), r.t};
    r.inventory.assign(n_options, 0.0);
    if (cells.size() == 4 && !cells[3].empty()) {
      std::stringstream inv(cells[3]);
      std::size_t i = 0;
      while (std::getline(inv, cell, ';')) {
        if (i >= n_options) throw std::runtime_error("too many inventory entries: " + line);
        r.inventory[i++] = std::stod(cell);
      }
      if (i != n_options) throw std::runtime_error("inventory needs one entry per option: " + line);
    }
    r.n_paths = cfg.correction.paths;
    r.n_steps = cfg.correction.steps;
    r.seed = cfg.correction.seed;
    r.tolerance = cfg.correction.tolerance;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<correction::PhiEstimate> cmd_correct(const config::ExperimentConfig& cfg, const CommandOptions& opts) {
  const model::StochVolParams params(cfg.market);
  const auto priced = config::build_book(cfg);
  const auto trader = config::trader_config(cfg, priced.book);
  const auto vf = load_value_function(cfg, trader, value_function_path(opts));

  std::vector<correction::PhiRequest> requests;
  if (opts.states.empty()) {
    correction::PhiRequest r;
    r.state = cfg.initial;
    r.inventory.assign(priced.book.size(), 0.0);
    r.n_paths = cfg.correction.paths;
    r.n_steps = cfg.correction.steps;
    r.seed = cfg.correction.seed;
    r.tolerance = cfg.correction.tolerance;
    requests.push_back(std::move(r));
  } else {
    requests = read_states(cfg, priced.book.size(), opts.states);
  }
  if (opts.seed)
    for (auto& r : requests) r.seed = *opts.seed;

  const auto& c = cfg.correction;
  const auto box = correction::centred_box(params, cfg.initial, trader.horizon, c.table_time_nodes,
                                           c.table_spot_nodes, c.table_nu_nodes);
  const auto field = correction::VegaDeviationField::build(priced.book, params, box, model::Execution::Parallel,
                                                           cfg.book.vega_bump);
  std::vector<correction::PhiEstimate> out;
  for (const auto& r : requests) out.push_back(correction::phi(r, vf, field, params, priced.book, trader));
  correction::write_phi_csv(requests, out, opts.out_dir / "phi.csv");
  return out;
}

}  // namespace omm::cli
