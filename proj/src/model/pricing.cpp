#include <algorithm>
#include <cmath>

#include "omm/model.hpp"

namespace omm::model {

namespace {

Estimate sample_mean(std::span<const double> xs) {
  const auto n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace

std::vector<Estimate> price_options(std::span<const OptionSpec> options, const MarketState& initial,
                                    const StochVolParams& params, const McSpec& mc, Execution exec) {
  if (options.empty()) return {};
  const double maturity = options.front().maturity;
  for (const auto& o : options) {
    o.validate();
    if (o.maturity != maturity) throw std::invalid_argument("price_options needs a common maturity");
  }
  const double tau = maturity - initial.time;
  if (!(tau > 0.0)) throw std::invalid_argument("option maturity must exceed the pricing time");

  const auto terminal = simulate_terminal(params, Measure::Q, initial, tau, mc, exec);
  std::vector<Estimate> out;
  out.reserve(options.size());
  std::vector<double> payoff(terminal.size());
  for (const auto& o : options) {
    for (std::size_t p = 0; p < terminal.size(); ++p) payoff[p] = o.payoff(terminal[p].spot);
    out.push_back(sample_mean(payoff));
  }
  return out;
}

Estimate price_option(const OptionSpec& option, const MarketState& initial, const StochVolParams& params,
                      const McSpec& mc, Execution exec) {
  return price_options(std::span(&option, 1), initial, params, mc, exec).front();
}

Estimate vega_mc(const OptionSpec& option, const MarketState& state, const StochVolParams& params,
                 const McSpec& mc, double bump, Execution exec) {
  option.validate();
  state.validate();
  const double vol = std::sqrt(state.variance);
  if (!(bump > 0.0) || !(vol - bump > 0.0)) throw std::invalid_argument("vega bump must lie in (0, sqrt(nu))");
  const double tau = option.maturity - state.time;
  if (!(tau > 0.0)) throw std::invalid_argument("option maturity must exceed the pricing time");

  MarketState up = state;
  MarketState down = state;
  up.variance = (vol + bump) * (vol + bump);
  down.variance = (vol - bump) * (vol - bump);
  const auto hi = simulate_terminal(params, Measure::Q, up, tau, mc, exec);
  const auto lo = simulate_terminal(params, Measure::Q, down, tau, mc, exec);
  std::vector<double> diff(hi.size());
  for (std::size_t p = 0; p < hi.size(); ++p)
    diff[p] = (option.payoff(hi[p].spot) - option.payoff(lo[p].spot)) / (2.0 * bump);
  return sample_mean(diff);
}

double vega_closed_form(const OptionSpec& option, const MarketState& state, const StochVolParams& params,
                        double bump) {
  state.validate();
  const double vol = std::sqrt(state.variance);
  if (!(bump > 0.0) || !(vol - bump > 0.0)) throw std::invalid_argument("vega bump must lie in (0, sqrt(nu))");
  MarketState up = state;
  MarketState down = state;
  up.variance = (vol + bump) * (vol + bump);
  down.variance = (vol - bump) * (vol - bump);
  return (heston_closed_form(option, up, params) - heston_closed_form(option, down, params)) / (2.0 * bump);
}

double delta_closed_form(const OptionSpec& option, const MarketState& state, const StochVolParams& params,
                         double rel_bump) {
  state.validate();
  const double h = rel_bump * state.spot;
  MarketState up = state;
  MarketState down = state;
  up.spot += h;
  down.spot -= h;
  return (heston_closed_form(option, up, params) - heston_closed_form(option, down, params)) / (2.0 * h);
}

}  // namespace omm::model
