#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "omm/rng.hpp"
#include "omm/sim.hpp"

namespace omm::sim {

namespace {

// Keeps sqrt(nu) in the optimal-hedge ratio away from zero.
constexpr double kMinVariance = 1e-10;

void check_inputs(const EpisodeInputs& in, const SimOptions& o) {
  if (!in.quotes || !in.marks || !in.params || !in.book) throw std::invalid_argument("episode inputs incomplete");
  in.book->validate(in.trader);
  if (in.marks->size() != in.book->size()) throw std::invalid_argument("mark model does not match the book");
  if (o.n_steps < 1) throw std::invalid_argument("episode needs at least one step");
  in.initial.validate();
  if (!in.initial_inventory.empty() && in.initial_inventory.size() != in.book->size())
    throw std::invalid_argument("initial inventory does not match the book");
}

}  // namespace

double multiple_arrival_probability(double rate, double dt) noexcept {
  const double x = rate * dt;
  return -std::expm1(-x) - x * std::exp(-x);
}

SimReport simulate_episode(const EpisodeInputs& in, const SimOptions& o, std::size_t episode) {
  check_inputs(in, o);
  const auto& book = *in.book;
  const auto& params = *in.params;
  const auto& trader = in.trader;
  const std::size_t n_opt = book.size();
  const std::size_t n_streams = 2 * n_opt;
  const double horizon = trader.horizon;
  const double dt = horizon / static_cast<double>(o.n_steps);

  SimReport rep;
  rep.hedge = o.hedge;
  std::vector<double> q = in.initial_inventory.empty() ? std::vector<double>(n_opt, 0.0) : in.initial_inventory;
  rep.initial_inventory = q;
  double vega = 0.0;
  for (std::size_t i = 0; i < n_opt; ++i) vega += q[i] * book[i].vega;
  if (!hjb::trade_admissible(vega, 0.0, Side::Bid, trader.vega_limit))
    throw std::invalid_argument("initial inventory breaches the vega limit");

  const std::uint64_t base = static_cast<std::uint64_t>(episode) * (1 + 2 * n_streams);
  Stream diffusion(o.seed, base);
  std::vector<Stream> clocks, coins;
  std::vector<double> rate(n_streams), next(n_streams);
  for (std::size_t s = 0; s < n_streams; ++s) {
    clocks.emplace_back(o.seed, base + 1 + s);
    coins.emplace_back(o.seed, base + 1 + n_streams + s);
    rate[s] = book[s / 2].curve(static_cast<Side>(s % 2)).dominating_rate(trader.delta_floor);
    next[s] = rate[s] > 0.0 ? clocks[s].exponential(rate[s]) : std::numeric_limits<double>::infinity();
    rep.coarse_step = rep.coarse_step || multiple_arrival_probability(rate[s], dt) > 0.01;
  }

  const model::EulerStep euler(params, model::Measure::P, dt);
  const double rho = params.rho(), xi = params.xi();
  const double penalty_coef = trader.gamma * xi * xi / 8.0;

  double log_s = std::log(in.initial.spot);
  double nu_raw = in.initial.variance;
  double spot = in.initial.spot;
  double nu = in.initial.variance;
  std::vector<double> price(n_opt), delta(n_opt);
  in.marks->evaluate(0.0, spot, nu, price, delta);

  double cash = 0.0;
  for (std::size_t i = 0; i < n_opt; ++i) cash -= q[i] * price[i];
  rep.initial_cash = cash;
  double q_s = 0.0;

  auto option_value = [&] {
    double v = 0.0;
    for (std::size_t i = 0; i < n_opt; ++i) v += q[i] * price[i];
    return v;
  };
  auto mtm = [&] { return cash + q_s * spot + option_value(); };

  double prev_mtm = 0.0;
  rep.max_abs_vega = std::abs(vega);
  for (std::size_t n = 0;; ++n) {
    const double t = n == o.n_steps ? horizon : dt * static_cast<double>(n);
    double book_delta = 0.0;
    for (std::size_t i = 0; i < n_opt; ++i) book_delta += q[i] * delta[i];

    if (n < o.n_steps) {
      double target = -book_delta;
      if (o.hedge == HedgeMode::Optimal)
        target -= rho * xi * vega / (2.0 * std::sqrt(std::max(nu, kMinVariance)) * spot);
      if (target != q_s) {
        cash -= (target - q_s) * spot;
        q_s = target;
        if (o.record_logs) rep.hedges.push_back({t, q_s, spot, cash});
      }
    }

    const double v_now = mtm();
    if (n > 0) {
      const double inc = v_now - prev_mtm;
      rep.increments.count += 1;
      rep.increments.sum += inc;
      rep.increments.sum_sq += inc * inc;
    }
    prev_mtm = v_now;
    const bool sample = n == 0 || n == o.n_steps || (o.sample_every > 0 && n % o.sample_every == 0);
    if (sample) rep.mtm_path.push_back({t, v_now, vega, book_delta, spot, nu, cash, q_s});
    if (n == o.n_steps) {
      rep.terminal_mtm = v_now;
      break;
    }

    // Requests in [t, t_end), booked against the marks at t.
    const double t_end = n + 1 == o.n_steps ? horizon : dt * static_cast<double>(n + 1);
    double seg_start = t;
    double penalty = 0.0;
    for (;;) {
      std::size_t s = 0;
      for (std::size_t k = 1; k < n_streams; ++k)
        if (next[k] < next[s]) s = k;
      if (!(next[s] < t_end)) break;
      const double tau = next[s];
      next[s] += clocks[s].exponential(rate[s]);
      const double coin = coins[s].uniform_open();
      ++rep.candidates;

      const std::size_t i = s / 2;
      const auto side = static_cast<Side>(s % 2);
      const auto& e = book[i];
      if (!hjb::trade_admissible(vega, e.vega_step(), side, trader.vega_limit)) {
        ++rep.blocked_by_limit;
        continue;
      }
      const auto quote = in.quotes->quote(i, side, tau, nu, vega);
      if (!quote) continue;
      if (*quote < trader.delta_floor) throw std::logic_error("quote source answered below the quote floor");
      if (!(coin * rate[s] <= e.curve(side)(*quote))) continue;

      penalty += vega * vega * (tau - seg_start);
      seg_start = tau;
      const double dq = -hjb::psi(side) * e.size;
      cash += e.size * *quote - dq * price[i];
      q[i] += dq;
      vega += dq * e.vega;
      rep.max_abs_vega = std::max(rep.max_abs_vega, std::abs(vega));
      ++rep.trade_count;
      if (o.record_logs) rep.trades.push_back({tau, i, side, e.size, *quote, price[i], cash, vega, mtm()});
    }
    penalty += vega * vega * (t_end - seg_start);
    rep.penalty_integral += penalty_coef * penalty;

    const double z1 = diffusion.normal();
    const double z2 = diffusion.normal();
    euler.advance(log_s, nu_raw, z1, z2);
    spot = std::exp(log_s);
    nu = std::max(nu_raw, 0.0);
    in.marks->evaluate(t_end, spot, nu, price, delta);
  }
  rep.penalty_integral_scaled = (1.0 - rho * rho) * rep.penalty_integral;
  rep.final_inventory = q;
  return rep;
}

std::vector<SimReport> simulate_batch(const EpisodeInputs& in, const SimOptions& options, std::size_t n_episodes,
                                      Execution exec) {
  check_inputs(in, options);
  std::vector<SimReport> out(n_episodes);
  const auto count = static_cast<std::int64_t>(n_episodes);
  if (exec == Execution::Serial) {
    for (std::int64_t e = 0; e < count; ++e)
      out[static_cast<std::size_t>(e)] = simulate_episode(in, options, static_cast<std::size_t>(e));
    return out;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t e = 0; e < count; ++e) {
    try {
      out[static_cast<std::size_t>(e)] = simulate_episode(in, options, static_cast<std::size_t>(e));
    } catch (...) {
#pragma omp critical(omm_sim_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace omm::sim
