#include <algorithm>
#include <cmath>
#include <exception>

#include "omm/sim.hpp"

namespace omm::sim {

ClosedFormMarks::ClosedFormMarks(std::vector<model::OptionSpec> options, model::StochVolParams params)
    : options_(std::move(options)), params_(params) {
  for (const auto& o : options_) o.validate();
}

void ClosedFormMarks::evaluate(double t, double spot, double nu, std::span<double> price,
                               std::span<double> delta) const {
  const model::MarketState state{spot, nu, t};
  for (std::size_t i = 0; i < options_.size(); ++i) {
    price[i] = model::heston_closed_form(options_[i], state, params_);
    delta[i] = model::delta_closed_form(options_[i], state, params_);
  }
}

MarkTableSpec reachable_box(const model::StochVolParams& params, const model::MarketState& initial, double horizon,
                            std::size_t t_nodes, std::size_t spot_nodes, std::size_t nu_nodes, double n_sd) {
  initial.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const double root_t = std::sqrt(horizon);
  // Variance band first; the spot band uses its upper end as the volatility.
  const double nu_sd = params.xi() * std::sqrt(initial.variance) * root_t;
  const double drift = std::abs(params.drift_p()(initial.variance)) * horizon;
  const double nu_lo = std::max(initial.variance - n_sd * nu_sd - drift, 0.25 * initial.variance);
  const double nu_hi = initial.variance + n_sd * nu_sd + drift;
  const double log_sd = std::sqrt(nu_hi) * root_t;
  const double log_drift = std::abs(params.mu() - 0.5 * nu_hi) * horizon;
  const double s_lo = initial.spot * std::exp(-n_sd * log_sd - log_drift);
  const double s_hi = initial.spot * std::exp(n_sd * log_sd + log_drift);
  return {{initial.time, initial.time + horizon, t_nodes}, {s_lo, s_hi, spot_nodes}, {nu_lo, nu_hi, nu_nodes}};
}

TabulatedMarks TabulatedMarks::build(const std::vector<model::OptionSpec>& options,
                                     const model::StochVolParams& params, const MarkTableSpec& spec,
                                     Execution exec) {
  if (options.empty()) throw std::invalid_argument("mark table needs at least one option");
  for (const auto& o : options) o.validate();
  if (!(spec.nu.lo > 0.0)) throw std::invalid_argument("mark table variance axis must be positive");
  Table3 prices(spec.t, spec.spot, spec.nu, options.size());
  Table3 deltas(spec.t, spec.spot, spec.nu, options.size());

  auto fill = [&](std::size_t node) {
    const std::size_t c = node % spec.nu.n;
    const std::size_t b = (node / spec.nu.n) % spec.spot.n;
    const std::size_t a = node / (spec.nu.n * spec.spot.n);
    const model::MarketState state{spec.spot.node(b), spec.nu.node(c), spec.t.node(a)};
    auto p = prices.node_fields(node);
    auto d = deltas.node_fields(node);
    for (std::size_t i = 0; i < options.size(); ++i) {
      p[i] = model::heston_closed_form(options[i], state, params);
      d[i] = model::delta_closed_form(options[i], state, params);
    }
  };
  const auto count = static_cast<std::int64_t>(prices.nodes());
  if (exec == Execution::Serial) {
    for (std::int64_t j = 0; j < count; ++j) fill(static_cast<std::size_t>(j));
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t j = 0; j < count; ++j) {
      try {
        fill(static_cast<std::size_t>(j));
      } catch (...) {
#pragma omp critical(omm_marks_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return TabulatedMarks(std::move(prices), std::move(deltas));
}

void TabulatedMarks::evaluate(double t, double spot, double nu, std::span<double> price,
                              std::span<double> delta) const {
  prices_.interpolate(t, spot, nu, price);
  deltas_.interpolate(t, spot, nu, delta);
}

MyopicQuotes::MyopicQuotes(const OptionBook& book, double delta_floor) {
  for (const auto& e : book.entries)
    for (Side s : {Side::Bid, Side::Ask}) quotes_.push_back(quoting::optimal_quote(e.curve(s), 0.0, delta_floor));
}

}  // namespace omm::sim
