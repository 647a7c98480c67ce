// Runs the eight acceptance checks and prints one PASS/FAIL line for each.
// Exit status is nonzero if any check fails.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "hjb_fixtures.hpp"
#include "hjb_oracles.hpp"
#include "omm/config.hpp"
#include "oracles.hpp"
#include "phi_oracle.hpp"
#include "sim_fixtures.hpp"

using namespace omm;
using hjb::Side;
namespace fx = omm::testing;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string format(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

void note(const char* label, bool ok, const std::string& what) {
  std::printf("  %s [%s] %s\n", label, ok ? "ok" : "not met", what.c_str());
  std::fflush(stdout);
}

// 1 ----------------------------------------------------------------------------

Outcome intensity_anchors() {
  const auto params = fx::reference_params();
  const auto entry = fx::reference_entry(10.0, 1.0, params);
  const auto& c = entry.bid;
  const double lambda = c.lambda_max();
  const double offsets[] = {0.0, -0.01, 0.01};
  const double anchors[] = {1.0 / (1.0 + std::exp(0.7)), 1.0 / (1.0 + std::exp(-0.8)), 1.0 / (1.0 + std::exp(2.2))};
  double worst = 0.0;
  for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(c(offsets[j] * entry.vega) / lambda - anchors[j]));
  const bool analytic = worst <= 1e-12;
  note("analytic", analytic,
       format("fractions %.4f %.4f %.4f, worst error %.2e", anchors[0], anchors[1], anchors[2], worst));

  const hjb::OptionBook book{{entry}};
  const hjb::TraderConfig trader{0.0, -1.0, 1e15, 0.02};
  const fx::FlatMarks marks(1);
  bool empirical = true;
  for (int j = 0; j < 3; ++j) {
    const sim::ConstantQuotes quotes(offsets[j] * entry.vega);
    const sim::EpisodeInputs in{&quotes, &marks, &params, &book, trader, fx::reference_state(), {}};
    auto opt = fx::quiet(11);
    opt.n_steps = 200;
    double cand = 0, acc = 0;
    for (const auto& r : sim::simulate_batch(in, opt, 80)) {
      cand += static_cast<double>(r.candidates);
      acc += static_cast<double>(r.trade_count);
    }
    const double p = c(offsets[j] * entry.vega) / c.dominating_rate(trader.delta_floor);
    const double z = (acc / cand - p) / std::sqrt(p * (1 - p) / cand);
    const bool ok = cand >= 1e4 && std::abs(z) < 3.0;
    empirical = empirical && ok;
    note("empirical", ok, format("offset %+.2f vega: %.0f candidates, accepted %.4f vs %.4f, z = %+.2f", offsets[j],
                                 cand, acc / cand, p, z));
  }
  return {analytic && empirical, format("anchors to %.1e, empirical fractions within 3 sd", worst)};
}

// 2 ----------------------------------------------------------------------------

Outcome hamiltonian_oracles() {
  std::mt19937_64 rng(2024);
  const auto e = quoting::IntensityCurve::exponential(800.0, 25.0);
  std::uniform_real_distribution<double> pick_e(-0.1, 0.5);
  double worst_e = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double p = pick_e(rng);
    const double k = e.decay(), a = e.scale();
    const auto h = quoting::hamiltonian(e, p, -10.0);
    const double expected = a / k * std::exp(-k * p - 1.0);
    worst_e = std::max({worst_e, std::abs(h.value / expected - 1.0),
                        std::abs(quoting::hamiltonian_prime(e, p, -10.0) / (-a * std::exp(-k * p - 1.0)) - 1.0),
                        std::abs(quoting::optimal_quote(e, p, -10.0) - (p + 1.0 / k))});
  }
  note("exponential", worst_e <= 1e-9, format("100 values of p, worst error %.2e", worst_e));

  const auto entry = fx::reference_entry(10.0, 1.0, fx::reference_params());
  const auto& c = entry.bid;
  const double floor = -50.0 * entry.vega / 150.0;
  std::uniform_real_distribution<double> pick_l(-0.2, 0.2);
  double worst_l = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double p = pick_l(rng);
    const auto oracle = fx::grid_search_max([&](double d) { return c(d) * (d - p); }, floor, 1.0, 1e-6);
    worst_l = std::max(worst_l, std::abs(quoting::hamiltonian(c, p, floor).value / oracle.value - 1.0));
  }
  note("logistic", worst_l <= 1e-8, format("100 values of p, worst relative gap to grid search %.2e", worst_l));
  return {worst_e <= 1e-9 && worst_l <= 1e-8, format("exponential %.1e, logistic %.1e", worst_e, worst_l)};
}

// 3 ----------------------------------------------------------------------------

Outcome ode_equivalence() {
  const auto params = fx::equal_drift_params();
  const auto entry = fx::reference_entry(10.0, 1.0, params);
  constexpr int kHalf = 9;
  constexpr std::size_t kTime = 5760;
  const auto trader = fx::small_trader(entry.vega_step() * kHalf);
  const auto grid = fx::aligned_grid(entry.vega_step(), kHalf, kTime);
  const auto vf = hjb::solve(params, hjb::OptionBook{{entry}}, trader, grid);
  const auto ode = fx::inventory_ode_rk4(entry, trader, params.xi(), kHalf, 10 * kTime);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.nu.n; ++k)
    for (std::size_t m = 0; m < grid.vega.n; ++m)
      worst = std::max(worst, std::abs(vf.at(0, k, m) - ode[m]) / std::abs(ode[m]));
  return {worst < 1e-3, format("%zu vega nodes x %zu nu nodes, %zu time steps, worst relative error %.2e",
                               grid.vega.n, grid.nu.n, kTime, worst)};
}

// 4 ----------------------------------------------------------------------------

Outcome qualitative_properties() {
  const auto& ref = fx::reference_solve();
  const auto& book = ref.priced.book;

  const auto flat = hjb::solve(fx::equal_drift_params(), book, ref.trader, config::solver_grid(ref.cfg));
  const auto& fg = flat.grid();
  double spread = 0.0;
  for (std::size_t n = 0; n <= fg.n_time; ++n)
    for (std::size_t m = 0; m < fg.vega.n; ++m) {
      double lo = flat.at(n, 0, m), hi = lo;
      for (std::size_t k = 1; k < fg.nu.n; ++k) {
        lo = std::min(lo, flat.at(n, k, m));
        hi = std::max(hi, flat.at(n, k, m));
      }
      spread = std::max(spread, hi - lo);
    }
  const bool a = spread <= 1e-10;
  note("(a)", a, format("spread of v across nu nodes with equal drifts %.2e", spread));

  const auto policy = hjb::quote_policy(ref.vf, book, ref.trader);
  const auto& g = ref.vf->grid();
  std::size_t checked = 0, decreases = 0, first_bad = g.n_time + 1, bad_at_start = 0;
  for (std::size_t i = 0; i < book.size(); ++i)
    for (std::size_t n = 0; n <= g.n_time; ++n)
      for (std::size_t k = 0; k < g.nu.n; ++k) {
        double prev = -INFINITY;
        for (std::size_t m = 0; m < g.vega.n; ++m) {
          const auto q = policy.quote(i, Side::Bid, ref.vf->time(n), g.nu.node(k), g.vega.node(m));
          if (!q) continue;
          ++checked;
          if (*q < prev) {
            ++decreases;
            first_bad = std::min(first_bad, n);
            if (n == 0) ++bad_at_start;
          }
          prev = *q;
        }
      }
  const bool b = decreases == 0 && checked > 0;
  note("(b)", b, format("%zu bid quotes on every (t, nu, vega) node of %zu options, %zu decreases", checked,
                        book.size(), decreases));
  if (decreases > 0)
    std::printf("      decreases start at t = %.4f T (step %zu of %zu); %zu at t = 0\n",
                ref.vf->time(first_bad) / ref.trader.horizon, first_bad, g.n_time, bad_at_start);

  std::size_t iv_checked = 0, iv_increases = 0, out_of_band = 0;
  for (std::size_t i = 0; i < book.size(); ++i) {
    const double price = ref.priced.prices[i].value;
    for (std::size_t k = 0; k < g.nu.n; ++k) {
      double prev = INFINITY;
      for (std::size_t m = 0; m < g.vega.n; ++m) {
        const auto q = policy.quote(i, Side::Bid, 0.0, g.nu.node(k), g.vega.node(m));
        if (!q) continue;
        double iv;
        try {
          iv = model::implied_vol(price + hjb::psi(Side::Bid) * *q, book[i].option, ref.cfg.initial.spot);
        } catch (const std::exception&) {
          ++out_of_band;
          continue;
        }
        ++iv_checked;
        if (iv > prev) ++iv_increases;
        prev = iv;
      }
    }
  }
  const bool c = iv_increases == 0 && iv_checked > 0;
  note("(c)", c, format("%zu bid implied vols at t = 0, %zu increases, %zu bids below the no-arbitrage band",
                        iv_checked, iv_increases, out_of_band));

  double worst = 0.0;
  const double half = ref.trader.horizon / 2;
  for (std::size_t i = 0; i < book.size(); ++i) {
    const double scale = book[i].vega / ref.cfg.book.beta;
    for (Side s : {Side::Bid, Side::Ask})
      for (std::size_t m = 0; m < g.vega.n; ++m) {
        const auto q0 = policy.quote(i, s, 0.0, ref.cfg.initial.variance, g.vega.node(m));
        const auto q1 = policy.quote(i, s, half, ref.cfg.initial.variance, g.vega.node(m));
        if (!q0 || !q1) continue;
        worst = std::max(worst, std::abs(*q0 - *q1) / std::max(std::abs(*q0), scale));
      }
  }
  const bool d = worst < 1e-3;
  note("(d)", d, format("largest relative quote change between t = 0 and t = T/2: %.4g (limit 1e-3)", worst));
  return {a && b && c && d, format("(a) %s, (b) %s, (c) %s, (d) %s", a ? "ok" : "not met", b ? "ok" : "not met",
                                   c ? "ok" : "not met", d ? "ok" : "not met")};
}

// 5 ----------------------------------------------------------------------------

Outcome pricing_cross_validation() {
  const config::ExperimentConfig cfg;
  const model::StochVolParams params(cfg.market);
  const auto priced = config::build_book(cfg);
  double worst_z = 0.0, worst_price = 0.0, worst_sigma = 0.0;
  for (std::size_t i = 0; i < priced.book.size(); ++i) {
    const auto& o = priced.book[i].option;
    const double cf = model::heston_closed_form(o, cfg.initial, params);
    worst_z = std::max(worst_z, std::abs(priced.prices[i].value - cf) / priced.prices[i].std_error);
    const double iv = model::implied_vol(cf, o, cfg.initial.spot);
    worst_price = std::max(worst_price, std::abs(model::bs_price(o.kind, cfg.initial.spot, o.strike, o.maturity, iv) - cf));
    for (double sigma : {0.1, 0.15, 0.3}) {
      const double p = model::bs_price(o.kind, cfg.initial.spot, o.strike, o.maturity, sigma);
      worst_sigma = std::max(worst_sigma, std::abs(model::implied_vol(p, o, cfg.initial.spot) - sigma));
    }
  }
  note("mc", worst_z < 3.0, format("%zu options at %zu paths, largest |z| %.2f", priced.book.size(),
                                   cfg.book.pricing_paths, worst_z));
  const bool round_trip = worst_price <= 1e-8 && worst_sigma <= 1e-8;
  note("implied vol", round_trip, format("price round trip %.2e, vol round trip %.2e", worst_price, worst_sigma));
  return {worst_z < 3.0 && round_trip, format("largest |z| %.2f, round trips %.1e / %.1e", worst_z, worst_price,
                                              worst_sigma)};
}

// 6 ----------------------------------------------------------------------------

Outcome hedge_properties() {
  constexpr std::size_t kEpisodes = 1000;
  auto zero = fx::reference_inputs();
  zero.rho = 0.0;
  const model::StochVolParams params0(zero);
  const auto so0 = fx::single_option(params0);
  const sim::ConstantQuotes quotes(0.0);
  const sim::EpisodeInputs in0{&quotes, &so0.marks, &params0, &so0.book, so0.trader, fx::reference_state(),
                               {2e6 / so0.book[0].vega}};
  auto opt = fx::quiet();
  opt.record_logs = true;
  std::size_t mismatches = 0, hedges = 0;
  for (std::size_t e = 0; e < kEpisodes; ++e) {
    opt.hedge = hjb::HedgeMode::Delta;
    const auto a = sim::simulate_episode(in0, opt, e);
    opt.hedge = hjb::HedgeMode::Optimal;
    const auto b = sim::simulate_episode(in0, opt, e);
    if (a.hedges.size() != b.hedges.size() || a.terminal_mtm != b.terminal_mtm) {
      ++mismatches;
      continue;
    }
    for (std::size_t k = 0; k < a.hedges.size(); ++k) {
      ++hedges;
      if (a.hedges[k].position != b.hedges[k].position || a.hedges[k].time != b.hedges[k].time) {
        ++mismatches;
        break;
      }
    }
  }
  const bool same = mismatches == 0;
  note("rho = 0", same, format("%zu episodes, %zu hedge positions compared, %zu episodes differ", kEpisodes, hedges,
                               mismatches));

  const auto params = fx::reference_params();
  const auto so = fx::single_option(params);
  const sim::NoQuotes none;
  const sim::EpisodeInputs in{&none, &so.marks, &params, &so.book, so.trader, fx::reference_state(),
                              {5e6 / so.book[0].vega}};
  auto q = fx::quiet();
  const double vd = fx::pooled_increment_variance(sim::simulate_batch(in, q, kEpisodes));
  q.hedge = hjb::HedgeMode::Optimal;
  const double vo = fx::pooled_increment_variance(sim::simulate_batch(in, q, kEpisodes));
  const double target = 1.0 - params.rho() * params.rho();
  const double ratio = vo / vd;
  const bool close = std::abs(ratio - target) <= 0.1 * target;
  note("rho = -0.5", close, format("%zu episodes, variance ratio %.4f vs %.4f", kEpisodes, ratio, target));
  return {same && close, format("pathwise identical at rho = 0, ratio %.4f vs %.2f", ratio, target)};
}

// 7 ----------------------------------------------------------------------------

Outcome correction_checks() {
  const auto c = fx::small_case(fx::reference_params());
  const auto zero_field = correction::VegaDeviationField::zero(c.book, c.box);
  const auto z1 = correction::phi(fx::request_at(c, 5e6, 200), c.vf, zero_field, c.params, c.book, c.trader);
  const auto flat = fx::small_case(fx::equal_drift_params(), 0.0);
  const auto flat_field = correction::VegaDeviationField::build(flat.book, flat.params, flat.box);
  const auto z2 = correction::phi(fx::request_at(flat, 5e6, 200), flat.vf, flat_field, flat.params, flat.book,
                                  flat.trader);
  const bool zeros = z1.value == 0.0 && z1.std_error == 0.0 && z2.value == 0.0 && z2.std_error == 0.0;
  note("zero sources", zeros, format("frozen vegas exact: %g, equal drifts and gamma = 0: %g", z1.value, z2.value));

  const double v0 = 5e6;
  const auto req = fx::request_at(c, v0, 8000);
  const auto field = correction::VegaDeviationField::build(c.book, c.params, c.box);
  const auto est = correction::phi(req, c.vf, field, c.params, c.book, c.trader);
  const auto nested = fx::nested_phi(c, v0, req.n_steps, 800, 424242);
  const double combined = std::hypot(est.std_error, nested.std_error);
  const double z = (est.value - nested.value) / combined;
  const bool agree = std::abs(z) < 3.0 && std::abs(est.value) > 3.0 * est.std_error;
  note("nested mc", agree, format("phi %.1f +- %.1f, nested %.1f +- %.1f, z = %+.2f", est.value, est.std_error,
                                  nested.value, nested.std_error, z));
  return {zeros && agree, format("zero cases exact, nested agreement z = %+.2f", z)};
}

// 8 ----------------------------------------------------------------------------

Outcome policy_dominance() {
  constexpr std::size_t kEpisodes = 10000;
  config::ExperimentConfig cfg;
  const std::vector<model::OptionSpec> options{{9.0, 1.0, model::OptionKind::Call},
                                               {10.0, 1.0, model::OptionKind::Call},
                                               {11.0, 1.0, model::OptionKind::Call},
                                               {10.0, 2.0, model::OptionKind::Call}};
  const auto priced = config::build_book(cfg, options);
  const auto trader = config::trader_config(cfg, priced.book);
  const model::StochVolParams params(cfg.market);
  const auto vf = std::make_shared<const hjb::ValueFunction>(
      hjb::solve(params, priced.book, trader, config::solver_grid(cfg)));
  const auto policy = hjb::quote_policy(vf, priced.book, trader);
  const sim::MyopicQuotes myopic(priced.book, trader.delta_floor);
  const auto box = sim::reachable_box(params, cfg.initial, trader.horizon, 3, 41, 21);
  const auto marks = sim::TabulatedMarks::build(options, params, box);
  sim::EpisodeInputs in{&policy, &marks, &params, &priced.book, trader, cfg.initial, {}};
  const auto a = sim::simulate_batch(in, fx::quiet(), kEpisodes);
  in.quotes = &myopic;
  const auto b = sim::simulate_batch(in, fx::quiet(), kEpisodes);
  const auto oa = sim::evaluate_objective(a), ob = sim::evaluate_objective(b);
  const auto diff = sim::objective_difference(a, b);
  note("objective", true, format("hjb %.1f +- %.1f, myopic %.1f +- %.1f over %zu episodes each", oa.objective,
                                 oa.objective_std_error, ob.objective, ob.objective_std_error, kEpisodes));
  const bool ok = diff.value > 2.0 * diff.std_error;
  return {ok, format("paired difference %.1f +- %.1f (%.1f sd)", diff.value, diff.std_error,
                     diff.value / diff.std_error)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "intensity anchors", 60, intensity_anchors},
      {2, "hamiltonian oracles", 60, hamiltonian_oracles},
      {3, "hjb vs inventory ode", 300, ode_equivalence},
      {4, "qualitative properties", 600, qualitative_properties},
      {5, "pricing cross-validation", 300, pricing_cross_validation},
      {6, "hedge properties", 600, hedge_properties},
      {7, "correction", 600, correction_checks},
      {8, "policy dominance", 1200, policy_dominance},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    std::printf("criterion %d: %s\n", c.id, c.name);
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = out.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("CRITERION %d %s: %s; %.1f s (budget %.0f s%s)\n", c.id, pass ? "PASS" : "FAIL", out.detail.c_str(),
                secs, c.budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
