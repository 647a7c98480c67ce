#include <algorithm>
#include <cmath>

#include "omm/model.hpp"
#include "omm/rng.hpp"

namespace omm::model {

PathEnsemble::PathEnsemble(std::size_t n_paths, std::size_t n_steps, double horizon)
    : n_paths_(n_paths),
      n_steps_(n_steps),
      dt_(horizon / static_cast<double>(n_steps)),
      spot_(n_paths * (n_steps + 1)),
      var_(n_paths * (n_steps + 1)) {}

EulerStep::EulerStep(const StochVolParams& params, Measure measure, double step)
    : drift_s(measure == Measure::P ? params.mu() : 0.0),
      kappa(measure == Measure::P ? params.drift_p().kappa : params.drift_q().kappa),
      theta(measure == Measure::P ? params.drift_p().theta : params.drift_q().theta),
      xi(params.xi()),
      rho(params.rho()),
      rho_bar(std::sqrt(1.0 - params.rho() * params.rho())),
      dt(step),
      sqrt_dt(std::sqrt(step)) {}

void EulerStep::advance(double& log_spot, double& nu, double z1, double z2) const noexcept {
  const double nu_plus = std::max(nu, 0.0);
  const double vol = std::sqrt(nu_plus);
  const double w_nu = rho * z1 + rho_bar * z2;
  log_spot += (drift_s - 0.5 * nu_plus) * dt + vol * sqrt_dt * z1;
  nu += kappa * (theta - nu_plus) * dt + xi * vol * sqrt_dt * w_nu;
}

namespace {

void check_run(const MarketState& initial, double horizon, std::size_t n_steps, std::size_t n_paths) {
  initial.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (n_steps < 1) throw std::invalid_argument("n_steps must be at least 1");
  if (n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
}

void fill_path(const EulerStep& step, const MarketState& initial, std::uint64_t seed, std::size_t path,
               std::span<double> spot, std::span<double> var) {
  Stream rng(seed, path);
  double x = std::log(initial.spot);
  double nu = initial.variance;
  spot[0] = initial.spot;
  var[0] = initial.variance;
  for (std::size_t n = 1; n < spot.size(); ++n) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    step.advance(x, nu, z1, z2);
    spot[n] = std::exp(x);
    var[n] = std::max(nu, 0.0);
  }
}

TerminalSample terminal_path(const EulerStep& step, const MarketState& initial, std::uint64_t seed,
                             std::size_t path, std::size_t n_steps) {
  Stream rng(seed, path);
  double x = std::log(initial.spot);
  double nu = initial.variance;
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    step.advance(x, nu, z1, z2);
  }
  return {std::exp(x), std::max(nu, 0.0)};
}

}  // namespace

PathEnsemble simulate_paths(const StochVolParams& params, Measure measure, const MarketState& initial,
                            double horizon, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                            Execution exec) {
  check_run(initial, horizon, n_steps, n_paths);
  PathEnsemble out(n_paths, n_steps, horizon);
  const EulerStep step(params, measure, out.dt());
  const auto count = static_cast<std::int64_t>(n_paths);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < count; ++p) {
      const auto i = static_cast<std::size_t>(p);
      fill_path(step, initial, seed, i, out.spot(i), out.variance(i));
    }
  } else {
    for (std::size_t i = 0; i < n_paths; ++i) fill_path(step, initial, seed, i, out.spot(i), out.variance(i));
  }
  return out;
}

std::vector<TerminalSample> simulate_terminal(const StochVolParams& params, Measure measure,
                                              const MarketState& initial, double horizon, const McSpec& mc,
                                              Execution exec) {
  check_run(initial, horizon, mc.n_steps, mc.n_paths);
  const EulerStep step(params, measure, horizon / static_cast<double>(mc.n_steps));
  std::vector<TerminalSample> out(mc.n_paths);
  const auto count = static_cast<std::int64_t>(mc.n_paths);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < count; ++p) {
      const auto i = static_cast<std::size_t>(p);
      out[i] = terminal_path(step, initial, mc.seed, i, mc.n_steps);
    }
  } else {
    for (std::size_t i = 0; i < mc.n_paths; ++i) out[i] = terminal_path(step, initial, mc.seed, i, mc.n_steps);
  }
  return out;
}

}  // namespace omm::model
