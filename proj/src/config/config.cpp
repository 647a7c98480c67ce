#include "omm/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

namespace omm::config {

using nlohmann::json;

namespace {

const char* kind_name(model::OptionKind k) { return k == model::OptionKind::Call ? "call" : "put"; }

model::OptionKind kind_from(const std::string& s) {
  if (s == "call") return model::OptionKind::Call;
  if (s == "put") return model::OptionKind::Put;
  throw std::invalid_argument("option kind must be call or put, got " + s);
}

const char* hedge_name(hjb::HedgeMode h) { return h == hjb::HedgeMode::Delta ? "delta" : "optimal"; }

hjb::HedgeMode hedge_from(const std::string& s) {
  if (s == "delta") return hjb::HedgeMode::Delta;
  if (s == "optimal") return hjb::HedgeMode::Optimal;
  throw std::invalid_argument("hedge must be delta or optimal, got " + s);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["market"] = {{"spot", c.initial.spot},           {"variance", c.initial.variance},
                 {"mu", c.market.mu},                {"xi", c.market.xi},
                 {"rho", c.market.rho},              {"kappa_p", c.market.drift_p.kappa},
                 {"theta_p", c.market.drift_p.theta}, {"kappa_q", c.market.drift_q.kappa},
                 {"theta_q", c.market.drift_q.theta}};
  const auto& b = c.book;
  j["book"] = {{"strikes", b.strikes},
               {"maturities", b.maturities},
               {"kind", kind_name(b.kind)},
               {"lambda_base", b.lambda_base},
               {"lambda_decay", b.lambda_decay},
               {"alpha", b.alpha},
               {"beta", b.beta},
               {"notional_per_trade", b.notional_per_trade},
               {"pricing_paths", b.pricing_paths},
               {"pricing_steps_per_year", b.pricing_steps_per_year},
               {"pricing_seed", b.pricing_seed},
               {"vega_bump", b.vega_bump}};
  j["trader"] = {{"gamma", c.trader.gamma},
                 {"delta_floor_normalized", c.trader.delta_floor_normalized},
                 {"vega_limit", c.trader.vega_limit},
                 {"horizon", c.trader.horizon}};
  j["grid"] = {{"n_time", c.grid.n_time}, {"nu_min", c.grid.nu_min}, {"nu_max", c.grid.nu_max},
               {"n_nu", c.grid.n_nu},     {"n_vega", c.grid.n_vega}};
  const auto& s = c.simulation;
  j["simulation"] = {{"episodes", s.episodes},
                     {"steps", s.steps},
                     {"hedge", hedge_name(s.hedge)},
                     {"policy", s.policy},
                     {"seed", s.seed},
                     {"mark_spot_nodes", s.mark_spot_nodes},
                     {"mark_nu_nodes", s.mark_nu_nodes},
                     {"mark_time_nodes", s.mark_time_nodes}};
  const auto& r = c.correction;
  j["correction"] = {{"paths", r.paths},
                     {"steps", r.steps},
                     {"seed", r.seed},
                     {"tolerance", r.tolerance},
                     {"table_time_nodes", r.table_time_nodes},
                     {"table_spot_nodes", r.table_spot_nodes},
                     {"table_nu_nodes", r.table_nu_nodes}};
  return j;
}

// Missing keys keep their defaults so partial config files are valid.
template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  // Unknown sections or keys are typos, not extensions: reject them. The
  // reference is the full dump of a default configuration.
  const json known = to_json(c);
  for (const auto& [section, body] : j.items()) {
    if (!known.contains(section)) throw std::invalid_argument("unknown config section: " + section);
    if (!body.is_object()) throw std::invalid_argument("config section " + section + " must be an object");
    for (const auto& [key, _] : body.items())
      if (!known[section].contains(key)) throw std::invalid_argument("unknown config key: " + section + "." + key);
  }
  if (j.contains("market")) {
    const auto& m = j["market"];
    read(m, "spot", c.initial.spot);
    read(m, "variance", c.initial.variance);
    read(m, "mu", c.market.mu);
    read(m, "xi", c.market.xi);
    read(m, "rho", c.market.rho);
    read(m, "kappa_p", c.market.drift_p.kappa);
    read(m, "theta_p", c.market.drift_p.theta);
    read(m, "kappa_q", c.market.drift_q.kappa);
    read(m, "theta_q", c.market.drift_q.theta);
  }
  if (j.contains("book")) {
    const auto& b = j["book"];
    read(b, "strikes", c.book.strikes);
    read(b, "maturities", c.book.maturities);
    if (b.contains("kind")) c.book.kind = kind_from(b["kind"].get<std::string>());
    read(b, "lambda_base", c.book.lambda_base);
    read(b, "lambda_decay", c.book.lambda_decay);
    read(b, "alpha", c.book.alpha);
    read(b, "beta", c.book.beta);
    read(b, "notional_per_trade", c.book.notional_per_trade);
    read(b, "pricing_paths", c.book.pricing_paths);
    read(b, "pricing_steps_per_year", c.book.pricing_steps_per_year);
    read(b, "pricing_seed", c.book.pricing_seed);
    read(b, "vega_bump", c.book.vega_bump);
  }
  if (j.contains("trader")) {
    const auto& t = j["trader"];
    read(t, "gamma", c.trader.gamma);
    read(t, "delta_floor_normalized", c.trader.delta_floor_normalized);
    read(t, "vega_limit", c.trader.vega_limit);
    read(t, "horizon", c.trader.horizon);
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    read(g, "n_time", c.grid.n_time);
    read(g, "nu_min", c.grid.nu_min);
    read(g, "nu_max", c.grid.nu_max);
    read(g, "n_nu", c.grid.n_nu);
    read(g, "n_vega", c.grid.n_vega);
  }
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    read(s, "episodes", c.simulation.episodes);
    read(s, "steps", c.simulation.steps);
    if (s.contains("hedge")) c.simulation.hedge = hedge_from(s["hedge"].get<std::string>());
    read(s, "policy", c.simulation.policy);
    read(s, "seed", c.simulation.seed);
    read(s, "mark_spot_nodes", c.simulation.mark_spot_nodes);
    read(s, "mark_nu_nodes", c.simulation.mark_nu_nodes);
    read(s, "mark_time_nodes", c.simulation.mark_time_nodes);
  }
  if (j.contains("correction")) {
    const auto& r = j["correction"];
    read(r, "paths", c.correction.paths);
    read(r, "steps", c.correction.steps);
    read(r, "seed", c.correction.seed);
    read(r, "tolerance", c.correction.tolerance);
    read(r, "table_time_nodes", c.correction.table_time_nodes);
    read(r, "table_spot_nodes", c.correction.table_spot_nodes);
    read(r, "table_nu_nodes", c.correction.table_nu_nodes);
  }
  c.validate();
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  initial.validate();
  const model::StochVolParams params(market);
  if (book.strikes.empty() || book.maturities.empty()) throw std::invalid_argument("book needs strikes and maturities");
  for (double k : book.strikes)
    if (!(k >= 0.0)) throw std::invalid_argument("strikes must be non-negative");
  for (double t : book.maturities)
    if (!(t > trader.horizon)) throw std::invalid_argument("every maturity must exceed the trading horizon");
  if (!(book.lambda_base > 0.0) || !(book.lambda_decay >= 0.0)) throw std::invalid_argument("bad lambda rule");
  if (!(book.beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(book.notional_per_trade > 0.0)) throw std::invalid_argument("notional_per_trade must be positive");
  if (book.pricing_paths < 2 || !(book.pricing_steps_per_year > 0.0))
    throw std::invalid_argument("bad pricing MC settings");
  if (!(trader.gamma >= 0.0) || !(trader.vega_limit > 0.0) || !(trader.horizon > 0.0))
    throw std::invalid_argument("bad trader settings");
  if (!(trader.delta_floor_normalized < 0.0)) throw std::invalid_argument("delta_floor_normalized must be negative");
  solver_grid(*this).validate();
  if (!(grid.nu_min <= initial.variance && initial.variance <= grid.nu_max))
    throw std::invalid_argument("initial variance must lie on the solver's variance axis");
  if (simulation.steps < 1) throw std::invalid_argument("simulation needs at least one step");
  if (simulation.policy != "hjb" && simulation.policy != "myopic" && simulation.policy != "none")
    throw std::invalid_argument("simulation.policy must be hjb, myopic or none");
  if (simulation.mark_spot_nodes < 2 || simulation.mark_nu_nodes < 2 || simulation.mark_time_nodes < 2)
    throw std::invalid_argument("mark tables need at least two nodes per axis");
  if (correction.paths < 2 || correction.steps < 1) throw std::invalid_argument("bad correction MC settings");
}

std::string dump_config(const ExperimentConfig& cfg) { return to_json(cfg).dump(2); }

ExperimentConfig parse_config(const std::string& text) { return from_json(json::parse(text)); }

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write config " + path.string());
  os << dump_config(cfg) << '\n';
}

hjb::BookEntry make_entry(const ExperimentConfig& cfg, const model::StochVolParams& params,
                          const model::OptionSpec& option, double price) {
  const auto& b = cfg.book;
  const double vega = model::vega_closed_form(option, cfg.initial, params, b.vega_bump);
  const double lambda = b.lambda_base / (1.0 + b.lambda_decay * std::abs(cfg.initial.spot - option.strike));
  const auto curve = quoting::IntensityCurve::logistic(lambda, b.alpha, b.beta / vega);
  if (!(price > 0.0)) throw std::invalid_argument("option price must be positive to size trades");
  return {option, vega, b.notional_per_trade / price, curve, curve};
}

PricedBook build_book(const ExperimentConfig& cfg, std::span<const model::OptionSpec> options) {
  cfg.validate();
  const model::StochVolParams params(cfg.market);
  std::vector<std::optional<hjb::BookEntry>> entries(options.size());
  std::vector<model::Estimate> estimates(options.size());
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
                           cfg.book.pricing_seed};
    const auto prices = model::price_options(group, cfg.initial, params, mc);
    for (std::size_t k = 0; k < members.size(); ++k) {
      entries[members[k]] = make_entry(cfg, params, group[k], prices[k].value);
      estimates[members[k]] = prices[k];
    }
  }
  PricedBook out;
  for (auto& e : entries) out.book.entries.push_back(std::move(*e));
  out.prices = std::move(estimates);
  return out;
}

PricedBook build_book(const ExperimentConfig& cfg) {
  std::vector<model::OptionSpec> options;
  for (double t : cfg.book.maturities)
    for (double k : cfg.book.strikes) options.push_back({k, t, cfg.book.kind});
  return build_book(cfg, options);
}

hjb::TraderConfig trader_config(const ExperimentConfig& cfg, const hjb::OptionBook& book) {
  double widest = 0.0;
  for (const auto& e : book.entries) widest = std::max(widest, e.vega / cfg.book.beta);
  return {cfg.trader.gamma, cfg.trader.delta_floor_normalized * widest, cfg.trader.vega_limit, cfg.trader.horizon};
}

hjb::SolverGrid solver_grid(const ExperimentConfig& cfg) {
  return {cfg.grid.n_time,
          {cfg.grid.nu_min, cfg.grid.nu_max, cfg.grid.n_nu},
          {-cfg.trader.vega_limit, cfg.trader.vega_limit, cfg.grid.n_vega}};
}

}  // namespace omm::config
