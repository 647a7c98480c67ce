#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "omm/hjb.hpp"

namespace omm::hjb {

namespace {

// Where a trade from vega node m lands on the vega axis.
struct JumpTarget {
  std::size_t lo = 0;
  double w = 0.0;
  bool admissible = false;
};

struct StepContext {
  const OptionBook* book;
  std::size_t n_nu;
  std::size_t n_vega;
  double dt;
  double delta_floor;
  std::vector<double> diffusion;  // 0.5 xi^2 nu_k / dnu^2 per nu node
  std::vector<double> drift;      // a_P(nu_k) / dnu per nu node
  std::vector<double> source;     // per (k, m): V (a_P - a_Q)/(2 sqrt nu) - penalty V^2
  std::vector<JumpTarget> targets;  // per (m, option, side)
};

struct NodeResult {
  double value;
  double own_weight;  // coefficient of v(k, m) in the update; must stay >= 0
};

// One explicit update at (k, m). Shared verbatim by the serial and parallel kernels.
NodeResult update_node(const StepContext& ctx, std::span<const double> next, std::size_t k, std::size_t m) {
  const std::size_t row = k * ctx.n_vega;
  const double v = next[row + m];
  const double down = k > 0 ? next[row - ctx.n_vega + m] : v;  // Neumann ghost nodes
  const double up = k + 1 < ctx.n_nu ? next[row + ctx.n_vega + m] : v;

  const double a = ctx.diffusion[k];
  const double b = ctx.drift[k];
  double generator = a * (up - 2.0 * v + down);
  generator += b >= 0.0 ? b * (up - v) : b * (v - down);
  generator += ctx.source[row + m];

  double rate = 0.0;
  const std::size_t n_opt = ctx.book->size();
  for (std::size_t i = 0; i < n_opt; ++i) {
    const auto& entry = (*ctx.book)[i];
    for (Side side : {Side::Bid, Side::Ask}) {
      const auto& tgt = ctx.targets[(m * n_opt + i) * 2 + static_cast<std::size_t>(side)];
      if (!tgt.admissible) continue;
      const double shifted = (1.0 - tgt.w) * next[row + tgt.lo] + tgt.w * next[row + tgt.lo + 1];
      const double p = (v - shifted) / entry.size;
      const auto h = quoting::hamiltonian(entry.curve(side), p, ctx.delta_floor);
      generator += entry.size * h.value;
      rate += entry.curve(side)(h.maximizer);
    }
  }
  const double own = 1.0 - ctx.dt * (2.0 * a + std::abs(b) + rate);
  return {v + ctx.dt * generator, own};
}

struct SliceOutcome {
  double min_own_weight;
  std::size_t worst_node;
};

SliceOutcome step_serial(const StepContext& ctx, std::span<const double> next, std::span<double> out) {
  SliceOutcome res{1.0, 0};
  for (std::size_t k = 0; k < ctx.n_nu; ++k)
    for (std::size_t m = 0; m < ctx.n_vega; ++m) {
      const auto r = update_node(ctx, next, k, m);
      out[k * ctx.n_vega + m] = r.value;
      if (r.own_weight < res.min_own_weight) res = {r.own_weight, k * ctx.n_vega + m};
    }
  return res;
}

SliceOutcome step_parallel(const StepContext& ctx, std::span<const double> next, std::span<double> out,
                           std::vector<double>& own) {
  const auto count = static_cast<std::int64_t>(ctx.n_nu * ctx.n_vega);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::int64_t idx = 0; idx < count; ++idx) {
    const auto j = static_cast<std::size_t>(idx);
    try {
      const auto r = update_node(ctx, next, j / ctx.n_vega, j % ctx.n_vega);
      out[j] = r.value;
      own[j] = r.own_weight;
    } catch (...) {
#pragma omp critical(omm_hjb_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  SliceOutcome res{1.0, 0};
  for (std::size_t j = 0; j < own.size(); ++j)
    if (own[j] < res.min_own_weight) res = {own[j], j};
  return res;
}

StepContext make_context(const model::StochVolParams& params, const OptionBook& book, const TraderConfig& trader,
                         const SolverGrid& grid, const SolveOptions& options) {
  StepContext ctx;
  ctx.book = &book;
  ctx.n_nu = grid.nu.n;
  ctx.n_vega = grid.vega.n;
  ctx.dt = trader.horizon / static_cast<double>(grid.n_time);
  ctx.delta_floor = trader.delta_floor;

  const double dnu = grid.nu.step();
  const double xi = params.xi();
  const double risk_share = options.hedge == HedgeMode::Optimal ? 1.0 - params.rho() * params.rho() : 1.0;
  const double penalty = trader.gamma * xi * xi / 8.0 * risk_share;
  ctx.diffusion.resize(ctx.n_nu);
  ctx.drift.resize(ctx.n_nu);
  ctx.source.resize(ctx.n_nu * ctx.n_vega);
  for (std::size_t k = 0; k < ctx.n_nu; ++k) {
    const double nu = grid.nu.node(k);
    ctx.diffusion[k] = 0.5 * xi * xi * nu / (dnu * dnu);
    ctx.drift[k] = params.drift_p()(nu) / dnu;
    const double carry = params.same_drifts() ? 0.0 : params.drift_gap(nu) / (2.0 * std::sqrt(nu));
    for (std::size_t m = 0; m < ctx.n_vega; ++m) {
      const double vega = grid.vega.node(m);
      ctx.source[k * ctx.n_vega + m] = vega * carry - penalty * vega * vega;
    }
  }

  const std::size_t n_opt = book.size();
  const double dv = grid.vega.step();
  ctx.targets.resize(ctx.n_vega * n_opt * 2);
  for (std::size_t m = 0; m < ctx.n_vega; ++m)
    for (std::size_t i = 0; i < n_opt; ++i)
      for (Side side : {Side::Bid, Side::Ask}) {
        auto& tgt = ctx.targets[(m * n_opt + i) * 2 + static_cast<std::size_t>(side)];
        const double from = grid.vega.node(m);
        const double step = book[i].vega_step();
        tgt.admissible = trade_admissible(from, step, side, trader.vega_limit);
        if (!tgt.admissible) continue;
        double f = std::clamp((from - psi(side) * step - grid.vega.lo) / dv, 0.0,
                              static_cast<double>(ctx.n_vega - 1));
        const double r = std::round(f);
        if (std::abs(f - r) < 1e-9) f = r;
        auto lo = static_cast<std::size_t>(std::floor(f));
        if (lo + 1 >= ctx.n_vega) lo = ctx.n_vega - 2;
        tgt.lo = lo;
        tgt.w = f - static_cast<double>(lo);
      }
  return ctx;
}

ValueFunction march(const model::StochVolParams& params, const OptionBook& book, const TraderConfig& trader,
                    const SolverGrid& grid, const SolveOptions& options) {
  const auto ctx = make_context(params, book, trader, grid, options);
  const std::size_t slice = grid.nodes_per_slice();
  std::vector<double> values((grid.n_time + 1) * slice, 0.0);
  std::vector<double> own(slice);
  if (!options.terminal.empty()) {
    if (options.terminal.size() != slice) throw std::invalid_argument("terminal slice does not match the grid");
    std::copy(options.terminal.begin(), options.terminal.end(), values.begin() + grid.n_time * slice);
  }
  for (std::size_t n = grid.n_time; n-- > 0;) {
    std::span<const double> next(values.data() + (n + 1) * slice, slice);
    std::span<double> out(values.data() + n * slice, slice);
    const auto res = options.exec == Execution::Parallel ? step_parallel(ctx, next, out, own)
                                                         : step_serial(ctx, next, out);
    if (res.min_own_weight < 0.0) {
      std::ostringstream msg;
      msg << "monotonicity lost at time step " << n << ", node (nu " << res.worst_node / grid.vega.n << ", vega "
          << res.worst_node % grid.vega.n << "): CFL number " << 1.0 - res.min_own_weight << " > 1 with n_time "
          << grid.n_time;
      throw CflViolation(msg.str());
    }
  }
  return ValueFunction(grid, trader.horizon, std::move(values));
}

}  // namespace

double linear_cfl_number(const model::StochVolParams& params, const SolverGrid& grid, double horizon) {
  const double dt = horizon / static_cast<double>(grid.n_time);
  const double dnu = grid.nu.step();
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.nu.n; ++k) {
    const double nu = grid.nu.node(k);
    worst = std::max(worst, params.xi() * params.xi() * nu / (dnu * dnu) + std::abs(params.drift_p()(nu)) / dnu);
  }
  return dt * worst;
}

ValueFunction solve(const model::StochVolParams& params, const OptionBook& book, const TraderConfig& trader,
                    const SolverGrid& grid, const SolveOptions& options) {
  grid.validate();
  book.validate(trader);
  if (std::abs(grid.vega.hi - trader.vega_limit) > 1e-12 * trader.vega_limit)
    throw std::invalid_argument("vega axis must span exactly [-vega_limit, vega_limit]");

  SolverGrid g = grid;
  const double cfl = linear_cfl_number(params, g, trader.horizon);
  if (cfl > 1.0) {
    if (!options.auto_refine) {
      std::ostringstream msg;
      msg << "CFL number " << cfl << " > 1 for the variance operator with n_time " << g.n_time
          << "; need n_time >= " << static_cast<std::size_t>(std::ceil(cfl * static_cast<double>(g.n_time)));
      throw CflViolation(msg.str());
    }
    g.n_time = static_cast<std::size_t>(std::ceil(cfl * static_cast<double>(g.n_time) / 0.9));
  }
  for (int attempt = 0;; ++attempt) {
    try {
      return march(params, book, trader, g, options);
    } catch (const CflViolation&) {
      if (!options.auto_refine || attempt >= 6) throw;
      g.n_time *= 2;
    }
  }
}

}  // namespace omm::hjb
