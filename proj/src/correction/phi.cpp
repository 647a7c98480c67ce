#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <memory>

#include "omm/correction.hpp"
#include "omm/rng.hpp"

namespace omm::correction {

namespace {

constexpr double kMinVariance = 1e-10;

struct PathResult {
  double integral = 0.0;
  double min_intensity = std::numeric_limits<double>::infinity();
  double max_intensity = -std::numeric_limits<double>::infinity();
  std::size_t clipped = 0;
  std::size_t jumps = 0;
};

struct PhiContext {
  const PhiRequest* req;
  const hjb::ValueFunction* vf;
  const VegaDeviationField* field;
  const model::StochVolParams* params;
  const OptionBook* book;
  const TraderConfig* trader;
  std::vector<double> rate;  // dominating rate per (option, side) stream
};

PathResult run_path(const PhiContext& ctx, std::size_t path) {
  const auto& req = *ctx.req;
  const auto& book = *ctx.book;
  const auto& params = *ctx.params;
  const auto& trader = *ctx.trader;
  const std::size_t n_opt = book.size();
  const std::size_t n_streams = 2 * n_opt;
  const double horizon = trader.horizon;
  const double dt = (horizon - req.t) / static_cast<double>(req.n_steps);

  const std::uint64_t base = static_cast<std::uint64_t>(path) * (1 + 2 * n_streams);
  Stream diffusion(req.seed, base);
  std::vector<Stream> clocks, coins;
  std::vector<double> next(n_streams);
  for (std::size_t s = 0; s < n_streams; ++s) {
    clocks.emplace_back(req.seed, base + 1 + s);
    coins.emplace_back(req.seed, base + 1 + n_streams + s);
    next[s] = ctx.rate[s] > 0.0 ? req.t + clocks[s].exponential(ctx.rate[s]) : std::numeric_limits<double>::infinity();
  }

  const model::EulerStep euler(params, model::Measure::P, dt);
  const double penalty = trader.gamma * params.xi() * params.xi() / 4.0;
  std::vector<double> q = req.inventory;
  double vega = 0.0;
  for (std::size_t i = 0; i < n_opt; ++i) vega += q[i] * book[i].vega;
  std::vector<double> dev(n_opt);
  double log_s = std::log(req.state.spot);
  double nu_raw = req.state.variance;

  PathResult res;
  for (std::size_t n = 0; n < req.n_steps; ++n) {
    const double t_n = req.t + dt * static_cast<double>(n);
    const double t_end = n + 1 == req.n_steps ? horizon : req.t + dt * static_cast<double>(n + 1);
    const double nu = std::max(nu_raw, 0.0);
    const double spot = std::exp(log_s);
    ctx.field->true_vegas(t_n, spot, nu, dev);
    for (std::size_t i = 0; i < n_opt; ++i) dev[i] -= ctx.field->frozen_vega(i);
    const double carry = params.same_drifts() ? 0.0 : params.drift_gap(nu) / (2.0 * std::sqrt(std::max(nu, kMinVariance)));

    auto integrand = [&] {
      double eps_w = 0.0;
      for (std::size_t i = 0; i < n_opt; ++i) eps_w += q[i] * dev[i];
      return eps_w * carry - penalty * eps_w * vega;
    };

    double seg = t_n;
    for (;;) {
      std::size_t s = 0;
      for (std::size_t k = 1; k < n_streams; ++k)
        if (next[k] < next[s]) s = k;
      if (!(next[s] < t_end)) break;
      const double tau = next[s];
      next[s] += clocks[s].exponential(ctx.rate[s]);
      const double coin = coins[s].uniform_open();
      res.integral += integrand() * (tau - seg);
      seg = tau;

      const std::size_t i = s / 2;
      const auto side = static_cast<hjb::Side>(s % 2);
      const auto& e = book[i];
      const double target = vega - hjb::psi(side) * e.vega_step();
      const double p = (ctx.vf->value_at(tau, nu, vega) - ctx.vf->value_at(tau, nu, target)) / e.size;
      double intensity = -quoting::hamiltonian_prime(e.curve(side), p, trader.delta_floor);
      res.min_intensity = std::min(res.min_intensity, intensity);
      res.max_intensity = std::max(res.max_intensity, intensity);
      if (intensity < 0.0) {
        intensity = 0.0;
        ++res.clipped;
      }
      if (coin * ctx.rate[s] <= intensity) {
        const double dq = -hjb::psi(side) * e.size;
        q[i] += dq;
        vega += dq * e.vega;
        ++res.jumps;
      }
    }
    res.integral += integrand() * (t_end - seg);

    const double z1 = diffusion.normal();
    const double z2 = diffusion.normal();
    euler.advance(log_s, nu_raw, z1, z2);
  }
  return res;
}

}  // namespace

PhiEstimate phi(const PhiRequest& req, const hjb::ValueFunction& vf, const VegaDeviationField& field,
                const model::StochVolParams& params, const OptionBook& book, const TraderConfig& trader,
                Execution exec) {
  book.validate(trader);
  if (field.size() != book.size()) throw std::invalid_argument("vega field does not match the book");
  for (std::size_t i = 0; i < book.size(); ++i)
    if (field.frozen_vega(i) != book[i].vega) throw std::invalid_argument("vega field built for another book");
  if (req.inventory.size() != book.size()) throw std::invalid_argument("inventory does not match the book");
  if (!(req.t >= 0.0 && req.t < trader.horizon)) throw std::invalid_argument("phi time must lie in [0, horizon)");
  if (req.n_paths < 2 || req.n_steps < 1) throw std::invalid_argument("phi needs >= 2 paths and >= 1 step");
  if (std::abs(vf.horizon() - trader.horizon) > 1e-12 * trader.horizon)
    throw std::invalid_argument("value function horizon does not match the trader");
  model::MarketState s = req.state;
  s.time = req.t;
  s.validate();

  PhiContext ctx{&req, &vf, &field, &params, &book, &trader, {}};
  for (std::size_t i = 0; i < book.size(); ++i)
    for (hjb::Side side : {hjb::Side::Bid, hjb::Side::Ask})
      ctx.rate.push_back(book[i].curve(side).dominating_rate(trader.delta_floor));

  std::vector<PathResult> results(req.n_paths);
  const auto count = static_cast<std::int64_t>(req.n_paths);
  if (exec == Execution::Serial) {
    for (std::int64_t p = 0; p < count; ++p) results[static_cast<std::size_t>(p)] = run_path(ctx, static_cast<std::size_t>(p));
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t p = 0; p < count; ++p) {
      try {
        results[static_cast<std::size_t>(p)] = run_path(ctx, static_cast<std::size_t>(p));
      } catch (...) {
#pragma omp critical(omm_phi_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  PhiEstimate out;
  out.min_intensity = std::numeric_limits<double>::infinity();
  out.max_intensity = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& r : results) {
    sum += r.integral;
    out.min_intensity = std::min(out.min_intensity, r.min_intensity);
    out.max_intensity = std::max(out.max_intensity, r.max_intensity);
    out.clipped += r.clipped;
    out.jumps += r.jumps;
  }
  const auto n = static_cast<double>(req.n_paths);
  out.value = sum / n;
  double ss = 0.0;
  for (const auto& r : results) ss += (r.integral - out.value) * (r.integral - out.value);
  out.std_error = std::sqrt(ss / (n - 1.0) / n);
  out.flagged = req.tolerance > 0.0 && out.std_error > req.tolerance;
  return out;
}

void write_phi_csv(std::span<const PhiRequest> requests, std::span<const PhiEstimate> estimates,
                   const std::filesystem::path& path) {
  if (requests.size() != estimates.size()) throw std::invalid_argument("one estimate per request");
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  std::fputs("t,spot,variance,inventory,phi,std_error,flagged\n", f.get());
  for (std::size_t k = 0; k < requests.size(); ++k) {
    const auto& r = requests[k];
    std::fprintf(f.get(), "%.17g,%.17g,%.17g,", r.t, r.state.spot, r.state.variance);
    for (std::size_t i = 0; i < r.inventory.size(); ++i)
      std::fprintf(f.get(), i ? ";%.17g" : "%.17g", r.inventory[i]);
    std::fprintf(f.get(), ",%.17g,%.17g,%d\n", estimates[k].value, estimates[k].std_error,
                 estimates[k].flagged ? 1 : 0);
  }
}

}  // namespace omm::correction
