#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "omm/correction.hpp"
#include "phi_oracle.hpp"

using namespace omm;
namespace fx = omm::testing;
using fx::kHorizon;
using fx::request_at;
using fx::small_case;
using hjb::Side;

TEST(VegaField, CentredBoxPutsInitialStateOnNodes) {
  const auto params = fx::reference_params();
  const auto s0 = fx::reference_state();
  const auto box = correction::centred_box(params, s0, kHorizon, 6, 21, 11);
  EXPECT_NEAR(box.spot.node(10), s0.spot, 1e-12 * s0.spot);
  EXPECT_NEAR(box.nu.node(5), s0.variance, 1e-12 * s0.variance);
  EXPECT_GT(box.nu.lo, 0.0);
  EXPECT_LT(box.spot.lo, s0.spot);
  EXPECT_DOUBLE_EQ(box.t.hi, kHorizon);
}

TEST(VegaField, EntryAtInitialStateIsFrozenVega) {
  const auto params = fx::reference_params();
  const hjb::OptionBook book{{fx::reference_entry(10.0, 1.0, params), fx::reference_entry(9.0, 2.0, params)}};
  const auto box = correction::centred_box(params, fx::reference_state(), 0.0012, 3, 5, 5);
  const auto field = correction::VegaDeviationField::build(book, params, box);
  std::vector<double> v(2);
  field.true_vegas(0.0, 10.0, 0.0225, v);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(v[i], book[i].vega, 1e-9 * book[i].vega) << i;
  EXPECT_NEAR(field.epsilon_w(0.0, 10.0, 0.0225, std::vector<double>{3e6, -1e6}), 0.0, 1e-2);
  EXPECT_EQ(field.clamped_queries(), 0u);
}

TEST(VegaField, StrikeZeroOptionHasZeroVegaEverywhere) {
  const auto params = fx::reference_params();
  auto entry = fx::reference_entry(10.0, 1.0, params);
  entry.option.strike = 0.0;
  entry.vega = 0.0;
  const hjb::OptionBook book{{entry}};
  const auto box = correction::centred_box(params, fx::reference_state(), 0.0012, 3, 5, 5);
  const auto field = correction::VegaDeviationField::build(book, params, box);
  const auto& table = field.deviations();
  for (std::size_t n = 0; n < table.nodes(); ++n) EXPECT_NEAR(table.node_fields(n)[0], 0.0, 1e-9) << n;
}

// The default bump's own central-difference error against the analytic vega
// reaches ~2e-3 away from the money, so the analytic check uses a finer bump
// and the default-bump table is checked against the same-bump difference.
TEST(VegaField, MatchesBlackScholesVegaWhenVolOfVolVanishes) {
  const auto params = fx::frozen_variance_params();
  const hjb::OptionBook book{{fx::reference_entry(10.0, 1.0, params), fx::reference_entry(11.0, 1.5, params),
                              fx::reference_entry(8.0, 3.0, params)}};
  const correction::TableSpec spec{{0.0, 0.0012, 3}, {9.0, 11.0, 5}, {0.02, 0.025, 3}};

  auto worst_error = [&](double bump, bool analytic) {
    const auto field = correction::VegaDeviationField::build(book, params, spec, model::Execution::Parallel, bump);
    double worst = 0.0;
    for (std::size_t a = 0; a < spec.t.n; ++a)
      for (std::size_t b = 0; b < spec.spot.n; ++b)
        for (std::size_t c = 0; c < spec.nu.n; ++c) {
          const auto f = field.deviations().node_fields(field.deviations().node_index(a, b, c));
          const double spot = spec.spot.node(b), vol = std::sqrt(spec.nu.node(c));
          for (std::size_t i = 0; i < book.size(); ++i) {
            const auto& o = book[i].option;
            const double tau = o.maturity - spec.t.node(a);
            const double bs =
                analytic ? model::bs_vega(spot, o.strike, tau, vol)
                         : (model::bs_price(o.kind, spot, o.strike, tau, vol + bump) -
                            model::bs_price(o.kind, spot, o.strike, tau, vol - bump)) / (2.0 * bump);
            worst = std::max(worst, std::abs(f[i] + book[i].vega - bs) / bs);
          }
        }
    return worst;
  };
  EXPECT_LT(worst_error(1e-3, true), 1e-3);
  EXPECT_LT(worst_error(model::kDefaultVegaBump, false), 1e-4);
}

TEST(VegaField, ScaledAndZeroFields) {
  const auto params = fx::reference_params();
  const hjb::OptionBook book{{fx::reference_entry(10.0, 1.0, params)}};
  const auto box = correction::centred_box(params, fx::reference_state(), 0.0012, 3, 5, 5);
  const auto field = correction::VegaDeviationField::build(book, params, box);
  const auto twice = field.scaled(2.0);
  const std::vector<double> q{1e6};
  const double w = field.epsilon_w(0.0006, 10.1, 0.024, q);
  EXPECT_NE(w, 0.0);
  EXPECT_DOUBLE_EQ(twice.epsilon_w(0.0006, 10.1, 0.024, q), 2.0 * w);
  const auto zero = correction::VegaDeviationField::zero(book, box);
  EXPECT_EQ(zero.epsilon_w(0.0006, 10.1, 0.024, q), 0.0);
}

TEST(Phi, ZeroFieldGivesExactlyZero) {
  const auto c = small_case(fx::reference_params());
  const auto field = correction::VegaDeviationField::zero(c.book, c.box);
  const auto est = correction::phi(request_at(c, 5e6, 200), c.vf, field, c.params, c.book, c.trader);
  EXPECT_EQ(est.value, 0.0);
  EXPECT_EQ(est.std_error, 0.0);
  EXPECT_GT(est.jumps, 0u);
}

TEST(Phi, EqualDriftsAndRiskNeutralGiveExactlyZero) {
  const auto c = small_case(fx::equal_drift_params(), 0.0);
  const auto field = correction::VegaDeviationField::build(c.book, c.params, c.box);
  const auto est = correction::phi(request_at(c, 5e6, 200), c.vf, field, c.params, c.book, c.trader);
  EXPECT_EQ(est.value, 0.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(Phi, LinearInTheDeviationField) {
  const auto c = small_case(fx::reference_params());
  const auto field = correction::VegaDeviationField::build(c.book, c.params, c.box);
  const auto req = request_at(c, 5e6, 300);
  const auto one = correction::phi(req, c.vf, field, c.params, c.book, c.trader);
  ASSERT_NE(one.value, 0.0);
  for (double k : {-1.0, 0.5, 3.0}) {
    const auto scaled = correction::phi(req, c.vf, field.scaled(k), c.params, c.book, c.trader);
    EXPECT_NEAR(scaled.value, k * one.value, 1e-12 * std::abs(k * one.value)) << k;
    EXPECT_NEAR(scaled.std_error, std::abs(k) * one.std_error, 1e-9 * one.std_error) << k;
    EXPECT_EQ(scaled.jumps, one.jumps);
  }
}

TEST(Phi, TiltedIntensitiesArePositiveAndBounded) {
  const auto c = small_case(fx::reference_params());
  const auto field = correction::VegaDeviationField::build(c.book, c.params, c.box);
  for (double v0 : {-1e7, 0.0, 1e7}) {
    const auto est = correction::phi(request_at(c, v0, 500), c.vf, field, c.params, c.book, c.trader);
    double lambda_max = 0.0;
    for (Side s : {Side::Bid, Side::Ask})
      lambda_max = std::max(lambda_max, c.book[0].curve(s).dominating_rate(c.trader.delta_floor));
    EXPECT_GT(est.min_intensity, 0.0) << v0;
    EXPECT_LT(est.max_intensity, lambda_max) << v0;
    EXPECT_EQ(est.clipped, 0u) << v0;
  }
}

TEST(Phi, DeterministicAndSerialEqualsParallel) {
  const auto c = small_case(fx::reference_params());
  const auto field = correction::VegaDeviationField::build(c.book, c.params, c.box);
  auto req = request_at(c, 2e6, 300);
  const auto a = correction::phi(req, c.vf, field, c.params, c.book, c.trader, model::Execution::Parallel);
  const auto b = correction::phi(req, c.vf, field, c.params, c.book, c.trader, model::Execution::Serial);
  const auto again = correction::phi(req, c.vf, field, c.params, c.book, c.trader);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.value, again.value);
  req.seed += 1;
  EXPECT_NE(correction::phi(req, c.vf, field, c.params, c.book, c.trader).value, a.value);
}

TEST(Phi, ToleranceFlagsNoisyEstimates) {
  const auto c = small_case(fx::reference_params());
  const auto field = correction::VegaDeviationField::build(c.book, c.params, c.box);
  auto req = request_at(c, 5e6, 100);
  const auto loose = correction::phi(req, c.vf, field, c.params, c.book, c.trader);
  EXPECT_FALSE(loose.flagged);
  req.tolerance = 0.5 * loose.std_error;
  EXPECT_TRUE(correction::phi(req, c.vf, field, c.params, c.book, c.trader).flagged);
}

TEST(Phi, RejectsBadRequests) {
  const auto c = small_case(fx::reference_params());
  const auto field = correction::VegaDeviationField::build(c.book, c.params, c.box);
  auto req = request_at(c, 0.0, 10);
  req.inventory = {1.0, 2.0};
  EXPECT_THROW(correction::phi(req, c.vf, field, c.params, c.book, c.trader), std::invalid_argument);
  req = request_at(c, 0.0, 10);
  req.t = kHorizon;
  EXPECT_THROW(correction::phi(req, c.vf, field, c.params, c.book, c.trader), std::invalid_argument);
  req = request_at(c, 0.0, 1);
  EXPECT_THROW(correction::phi(req, c.vf, field, c.params, c.book, c.trader), std::invalid_argument);
  const hjb::OptionBook other{{fx::reference_entry(9.0, 1.0, c.params)}};
  EXPECT_THROW(correction::phi(request_at(c, 0.0, 10), c.vf, field, c.params, other, c.trader),
               std::invalid_argument);
}

// Brute-force two-level estimate of the first-order gap between the true-vega
// and constant-vega objectives under the constant-vega optimal quotes. Outer
// level: (S, nu) under P by its own Euler scheme, fills drawn per sub-step at
// the optimal-quote intensity. Inner level: the true vega at each coarse
// time by Monte-Carlo, differenced against the same estimator at the start.
TEST(Phi, AgreesWithNestedMonteCarlo) {
  const auto c = small_case(fx::reference_params());
  const auto field = correction::VegaDeviationField::build(c.book, c.params, c.box);
  const double v0 = 5e6;
  auto req = request_at(c, v0, 8000);
  const auto est = correction::phi(req, c.vf, field, c.params, c.book, c.trader);

  const auto nested = fx::nested_phi(c, v0, req.n_steps, 800, 424242);
  const double combined = std::hypot(nested.std_error, est.std_error);
  std::printf("phi %.6g +- %.3g, nested %.6g +- %.3g\n", est.value, est.std_error, nested.value, nested.std_error);
  EXPECT_GT(std::abs(est.value), 3.0 * est.std_error);
  EXPECT_LT(std::abs(est.value - nested.value), 3.0 * combined);
}

TEST(PhiCsv, WritesOneRowPerRequest) {
  const auto c = small_case(fx::reference_params());
  const auto field = correction::VegaDeviationField::zero(c.book, c.box);
  std::vector<correction::PhiRequest> reqs{request_at(c, 0.0, 10), request_at(c, 1e6, 10)};
  std::vector<correction::PhiEstimate> ests;
  for (const auto& r : reqs) ests.push_back(correction::phi(r, c.vf, field, c.params, c.book, c.trader));
  const auto path = std::filesystem::temp_directory_path() / "omm_phi_test.csv";
  correction::write_phi_csv(reqs, ests, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,spot,variance,inventory,phi,std_error,flagged");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
  std::filesystem::remove(path);
}
