#include <algorithm>
#include <cmath>
#include <exception>

#include "omm/correction.hpp"

namespace omm::correction {

TableSpec centred_box(const model::StochVolParams& params, const model::MarketState& initial, double horizon,
                      std::size_t t_nodes, std::size_t spot_nodes, std::size_t nu_nodes, double n_sd) {
  initial.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const double nu0 = initial.variance;
  const double root_t = std::sqrt(horizon);
  const double half_nu = std::min(n_sd * params.xi() * std::sqrt(nu0) * root_t + std::abs(params.drift_p()(nu0)) * horizon,
                                  0.75 * nu0);
  const double nu_hi = nu0 + half_nu;
  const double log_reach = n_sd * std::sqrt(nu_hi) * root_t + (std::abs(params.mu()) + 0.5 * nu_hi) * horizon;
  const double half_s = initial.spot * std::expm1(log_reach);
  return {{initial.time, initial.time + horizon, t_nodes},
          {initial.spot - half_s, initial.spot + half_s, spot_nodes},
          {nu0 - half_nu, nu_hi, nu_nodes}};
}

VegaDeviationField VegaDeviationField::build(const OptionBook& book, const model::StochVolParams& params,
                                             const TableSpec& spec, Execution exec, double bump) {
  Table3 table(spec.t, spec.spot, spec.nu, book.size());
  if (!(spec.nu.lo > 0.0) || !(spec.spot.lo > 0.0)) throw std::invalid_argument("vega table box must be positive");
  std::vector<double> frozen;
  for (const auto& e : book.entries) frozen.push_back(e.vega);

  auto fill = [&](std::size_t node) {
    const std::size_t c = node % spec.nu.n;
    const std::size_t b = (node / spec.nu.n) % spec.spot.n;
    const std::size_t a = node / (spec.nu.n * spec.spot.n);
    const model::MarketState state{spec.spot.node(b), spec.nu.node(c), spec.t.node(a)};
    auto f = table.node_fields(node);
    for (std::size_t i = 0; i < book.size(); ++i)
      f[i] = model::vega_closed_form(book[i].option, state, params, bump) - frozen[i];
  };
  const auto count = static_cast<std::int64_t>(table.nodes());
  if (exec == Execution::Serial) {
    for (std::int64_t j = 0; j < count; ++j) fill(static_cast<std::size_t>(j));
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t j = 0; j < count; ++j) {
      try {
        fill(static_cast<std::size_t>(j));
      } catch (...) {
#pragma omp critical(omm_vega_table_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return VegaDeviationField(std::move(table), std::move(frozen), 1.0);
}

VegaDeviationField VegaDeviationField::zero(const OptionBook& book, const TableSpec& spec) {
  std::vector<double> frozen;
  for (const auto& e : book.entries) frozen.push_back(e.vega);
  return VegaDeviationField(Table3(spec.t, spec.spot, spec.nu, book.size()), std::move(frozen), 1.0);
}

VegaDeviationField VegaDeviationField::scaled(double c) const { return VegaDeviationField(table_, frozen_, scale_ * c); }

void VegaDeviationField::true_vegas(double t, double spot, double nu, std::span<double> out) const {
  table_.interpolate(t, spot, nu, out);
  for (std::size_t i = 0; i < frozen_.size(); ++i) out[i] = frozen_[i] + scale_ * out[i];
}

double VegaDeviationField::epsilon_w(double t, double spot, double nu, std::span<const double> inventory) const {
  std::vector<double> d(frozen_.size());
  table_.interpolate(t, spot, nu, d);
  double w = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) w += inventory[i] * scale_ * d[i];
  return w;
}

}  // namespace omm::correction
