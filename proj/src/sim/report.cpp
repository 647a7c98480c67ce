#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "omm/sim.hpp"

namespace omm::sim {

namespace {

model::Estimate mean_and_error(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  if (x.empty()) return {};
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / n;
  if (x.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

ObjectiveEstimate evaluate_objective(std::span<const SimReport> reports) {
  std::vector<double> pnl, pen, obj;
  for (const auto& r : reports) {
    pnl.push_back(r.terminal_mtm);
    pen.push_back(r.penalty());
    obj.push_back(r.terminal_mtm - r.penalty());
  }
  const auto a = mean_and_error(pnl), b = mean_and_error(pen), c = mean_and_error(obj);
  return {a.value, a.std_error, b.value, b.std_error, a.value - b.value, c.std_error, reports.size()};
}

model::Estimate objective_difference(std::span<const SimReport> a, std::span<const SimReport> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired batches must have the same size");
  std::vector<double> d;
  for (std::size_t e = 0; e < a.size(); ++e)
    d.push_back((a[e].terminal_mtm - a[e].penalty()) - (b[e].terminal_mtm - b[e].penalty()));
  return mean_and_error(d);
}

void write_events_csv(const SimReport& report, const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  std::fputs("time,event_type,option_id,side,size,quote,cash,vega_portfolio,mtm\n", f.get());
  // Merge the three time-ordered logs; at equal times hedges precede samples precede trades.
  std::size_t h = 0, s = 0, t = 0;
  const auto& H = report.hedges;
  const auto& S = report.mtm_path;
  const auto& T = report.trades;
  constexpr double kInf = INFINITY;
  for (;;) {
    const double th = h < H.size() ? H[h].time : kInf;
    const double ts = s < S.size() ? S[s].time : kInf;
    const double tt = t < T.size() ? T[t].time : kInf;
    if (th == kInf && ts == kInf && tt == kInf) break;
    if (th <= ts && th <= tt) {
      const auto& r = H[h++];
      std::fprintf(f.get(), "%.17g,hedge,,,%.17g,,%.17g,,\n", r.time, r.position, r.cash);
    } else if (ts <= tt) {
      const auto& r = S[s++];
      std::fprintf(f.get(), "%.17g,sample,,,,,%.17g,%.17g,%.17g\n", r.time, r.cash, r.vega, r.mtm);
    } else {
      const auto& r = T[t++];
      std::fprintf(f.get(), "%.17g,trade,%zu,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.time, r.option,
                   hjb::to_string(r.side), r.size, r.quote, r.cash, r.vega, r.mtm);
    }
  }
}

}  // namespace omm::sim
