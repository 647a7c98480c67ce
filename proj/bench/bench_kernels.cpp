#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <omp.h>

#include "omm/config.hpp"
#include "omm/correction.hpp"
#include "omm/sim.hpp"

using namespace omm;
using model::Execution;

namespace {

template <typename F>
double time_best(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct Row {
  std::string kernel;
  double serial;
  double parallel;
  bool identical;
};

// Runs one kernel both ways and compares the flattened results bit for bit.
Row compare(const std::string& name, const std::function<std::vector<double>(Execution)>& kernel, int reps) {
  std::vector<double> s, p;
  const double ts = time_best([&] { s = kernel(Execution::Serial); }, reps);
  const double tp = time_best([&] { p = kernel(Execution::Parallel); }, reps);
  return {name, ts, tp, same_bits(s, p)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP timings of the numerical kernels"};
  bool quick = false;
  int reps = 3;
  app.add_flag("--quick", quick, "small problem sizes (smoke run)");
  app.add_option("--reps", reps, "repetitions per timing (best is kept)")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  if (quick) reps = 1;

  config::ExperimentConfig cfg;
  const model::StochVolParams params(cfg.market);
  const std::vector<model::OptionSpec> options{{9.0, 1.0, model::OptionKind::Call},
                                               {10.0, 1.0, model::OptionKind::Call},
                                               {11.0, 1.0, model::OptionKind::Call},
                                               {10.0, 2.0, model::OptionKind::Call}};
  auto small = cfg;
  small.book.pricing_paths = quick ? 5000 : 100000;
  const auto priced = config::build_book(small, options);
  const auto trader = config::trader_config(cfg, priced.book);
  auto grid = config::solver_grid(cfg);
  if (quick) {
    grid.n_time = 20;
    grid.nu.n = 8;
    grid.vega.n = 16;
  }

  std::vector<Row> rows;
  rows.push_back(compare(
      "mc_pricing",
      [&](Execution e) {
        const model::McSpec mc{quick ? std::size_t{5000} : std::size_t{100000}, 100, 3};
        std::vector<double> out;
        for (const auto& x : model::price_options(std::span(options).first(3), cfg.initial, params, mc, e))
          out.insert(out.end(), {x.value, x.std_error});
        return out;
      },
      reps));

  rows.push_back(compare(
      "hjb_solve",
      [&](Execution e) {
        hjb::SolveOptions so;
        so.exec = e;
        so.auto_refine = true;
        const auto vf = hjb::solve(params, priced.book, trader, grid, so);
        return std::vector<double>(vf.values().begin(), vf.values().end());
      },
      reps));

  const auto box = sim::reachable_box(params, cfg.initial, trader.horizon, 2, quick ? 9 : 41, quick ? 5 : 21);
  rows.push_back(compare(
      "mark_table",
      [&](Execution e) {
        const auto m = sim::TabulatedMarks::build(options, params, box, e);
        std::vector<double> out;
        for (std::size_t n = 0; n < m.prices().nodes(); ++n) {
          const auto f = m.prices().node_fields(n);
          out.insert(out.end(), f.begin(), f.end());
        }
        return out;
      },
      reps));

  const auto vf = std::make_shared<const hjb::ValueFunction>(hjb::solve(params, priced.book, trader, grid,
                                                                        {.auto_refine = true}));
  const auto policy = hjb::quote_policy(vf, priced.book, trader);
  const auto marks = sim::TabulatedMarks::build(options, params, box);
  rows.push_back(compare(
      "episode_batch",
      [&](Execution e) {
        sim::SimOptions so;
        so.record_logs = false;
        so.sample_every = 0;
        so.n_steps = quick ? 200 : 1200;
        const sim::EpisodeInputs in{&policy, &marks, &params, &priced.book, trader, cfg.initial, {}};
        std::vector<double> out;
        for (const auto& r : sim::simulate_batch(in, so, quick ? 16 : 1000, e))
          out.insert(out.end(), {r.terminal_mtm, r.penalty_integral});
        return out;
      },
      reps));

  const auto cbox = correction::centred_box(params, cfg.initial, trader.horizon, 2, quick ? 9 : 61, quick ? 5 : 21);
  const auto field = correction::VegaDeviationField::build(priced.book, params, cbox);
  rows.push_back(compare(
      "phi",
      [&](Execution e) {
        correction::PhiRequest r;
        r.state = cfg.initial;
        r.inventory = {1e6, 0.0, -1e6, 0.0};
        r.n_paths = quick ? 64 : 2000;
        const auto est = correction::phi(r, *vf, field, params, priced.book, trader, e);
        return std::vector<double>{est.value, est.std_error};
      },
      reps));

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-14s %12s %12s %8s %s\n", "kernel", "serial_s", "parallel_s", "speedup", "bitwise_equal");
  bool ok = true;
  for (const auto& r : rows) {
    std::printf("%-14s %12.4f %12.4f %8.2f %s\n", r.kernel.c_str(), r.serial, r.parallel, r.serial / r.parallel,
                r.identical ? "yes" : "NO");
    ok = ok && r.identical;
  }
  return ok ? 0 : 1;
}
