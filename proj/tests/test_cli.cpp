#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "omm/cli.hpp"

using namespace omm;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string cell; std::getline(ss, cell, sep);) out.push_back(cell);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

config::ExperimentConfig tiny_config() {
  config::ExperimentConfig c;
  c.book.strikes = {9.5, 10.0, 10.5};
  c.book.maturities = {1.0};
  c.book.pricing_paths = 20000;
  c.grid.n_nu = 5;
  c.grid.n_vega = 11;
  c.simulation.episodes = 20;
  c.simulation.steps = 120;
  c.simulation.mark_time_nodes = 2;
  c.simulation.mark_spot_nodes = 11;
  c.simulation.mark_nu_nodes = 5;
  c.correction.paths = 100;
  c.correction.steps = 10;
  c.correction.table_time_nodes = 2;
  c.correction.table_spot_nodes = 11;
  c.correction.table_nu_nodes = 5;
  return c;
}

class CliRun : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("omm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    opts_.out_dir = dir_;
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
  cli::CommandOptions opts_;
};

}  // namespace

TEST(Config, DumpParseDumpIsIdentity) {
  auto c = tiny_config();
  c.market.rho = -0.3;
  c.simulation.hedge = hjb::HedgeMode::Optimal;
  c.simulation.policy = "myopic";
  c.book.kind = model::OptionKind::Put;
  const auto text = config::dump_config(c);
  EXPECT_EQ(config::dump_config(config::parse_config(text)), text);
  EXPECT_EQ(config::dump_config(config::parse_config(config::dump_config({}))), config::dump_config({}));
}

TEST(Config, BundledDefaultIsTheReferenceConfiguration) {
  const auto loaded = config::load_config(std::filesystem::path(OMM_SOURCE_DIR) / "configs" / "default.json");
  EXPECT_EQ(config::dump_config(loaded), config::dump_config({}));
}

TEST(Config, SaveLoadRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "omm_cfg_roundtrip.json";
  const auto c = tiny_config();
  config::save_config(c, path);
  EXPECT_EQ(config::dump_config(config::load_config(path)), config::dump_config(c));
  std::filesystem::remove(path);
}

TEST(Config, PartialFilesKeepDefaults) {
  const auto c = config::parse_config(R"({"trader": {"gamma": 0.002}, "market": {"rho": 0.0}})");
  EXPECT_EQ(c.trader.gamma, 0.002);
  EXPECT_EQ(c.market.rho, 0.0);
  EXPECT_EQ(c.trader.vega_limit, 1e7);
  EXPECT_EQ(c.book.strikes.size(), 5u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config::parse_config(R"({"markets": {}})"), std::invalid_argument);
  EXPECT_THROW(config::parse_config(R"({"trader": {"gama": 1}})"), std::invalid_argument);
  EXPECT_THROW(config::parse_config(R"({"trader": 3})"), std::invalid_argument);
  EXPECT_THROW(config::parse_config(R"({"simulation": {"policy": "greedy"}})"), std::invalid_argument);
  EXPECT_THROW(config::parse_config(R"({"simulation": {"hedge": "gamma"}})"), std::invalid_argument);
  EXPECT_THROW(config::parse_config(R"({"trader": {"horizon": 2.0}})"), std::invalid_argument);
  EXPECT_THROW(config::parse_config(R"({"market": {"variance": 0.05}})"), std::invalid_argument);
  EXPECT_THROW(config::parse_config("{"), std::exception);
}

TEST_F(CliRun, SurfaceRowsWithOracleAndSentinel) {
  auto c = tiny_config();
  opts_.oracle = true;
  opts_.strike_zero_row = true;
  const auto path = cli::cmd_surface(c, opts_);
  const auto rows = lines_of(path);
  ASSERT_EQ(rows.size(), 1u + 3u + 1u);
  EXPECT_EQ(rows[0], "strike,maturity,price,stderr,implied_vol,status,closed_form,closed_form_iv,z_score");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cells = split(rows[r]);
    ASSERT_EQ(cells.size(), 9u) << rows[r];
    EXPECT_LT(std::abs(std::stod(cells[8])), 3.0) << rows[r];
  }
  const auto sentinel = split(rows.back());
  EXPECT_EQ(sentinel[0], "0");
  EXPECT_NEAR(std::stod(sentinel[2]), 10.0, 3.0 * std::stod(sentinel[3]));
  EXPECT_EQ(sentinel[5], "out_of_band");
  EXPECT_EQ(sentinel[6], "10");
}

TEST_F(CliRun, SurfaceIsReproducibleAndSeedSensitive) {
  const auto c = tiny_config();
  const auto a = slurp(cli::cmd_surface(c, opts_));
  EXPECT_EQ(slurp(cli::cmd_surface(c, opts_)), a);
  opts_.seed = 99;
  EXPECT_NE(slurp(cli::cmd_surface(c, opts_)), a);
}

TEST_F(CliRun, SolveQuotesSimulateCorrectPipeline) {
  const auto c = tiny_config();
  opts_.refine = true;
  const auto solved = cli::cmd_solve(c, opts_);
  EXPECT_TRUE(std::filesystem::exists(solved.value_file));
  ASSERT_TRUE(solved.refined_value_at_origin);
  EXPECT_EQ(lines_of(dir_ / "value_t0.csv").size(), 1u + 5u * 11u);
  const auto refinement = lines_of(dir_ / "refinement.csv");
  ASSERT_EQ(refinement.size(), 3u);
  EXPECT_EQ(std::stod(split(refinement[1])[3]), solved.value_at_origin);
  EXPECT_EQ(std::stod(split(refinement[2])[3]), *solved.refined_value_at_origin);
  EXPECT_EQ(split(refinement[2])[2], "21");

  const auto quotes = lines_of(cli::cmd_quotes(c, opts_));
  ASSERT_EQ(quotes.size(), 1u + 3u * 2u * 11u);
  // Bid quotes along the vega grid, for every option.
  for (std::size_t i = 0; i < 3; ++i) {
    double last = -1e300;
    for (std::size_t m = 0; m < 11; ++m) {
      const auto cells = split(quotes[1 + i * 22 + m]);
      ASSERT_EQ(cells[3], "bid");
      if (cells[6].empty()) continue;
      const double q = std::stod(cells[6]);
      EXPECT_GE(q, last) << i << " " << m;
      last = q;
    }
  }

  const auto sim = cli::cmd_simulate(c, opts_);
  EXPECT_EQ(sim.episodes, 20u);
  EXPECT_EQ(lines_of(dir_ / "episodes.csv").size(), 21u);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "events_episode0.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "summary.json"));
  const auto first = slurp(dir_ / "episodes.csv");
  cli::cmd_simulate(c, opts_);
  EXPECT_EQ(slurp(dir_ / "episodes.csv"), first);

  const auto phi = cli::cmd_correct(c, opts_);
  ASSERT_EQ(phi.size(), 1u);
  EXPECT_EQ(lines_of(dir_ / "phi.csv").size(), 2u);
}

TEST_F(CliRun, ValueFunctionFromAnotherConfigIsRejected) {
  auto c = tiny_config();
  cli::cmd_solve(c, opts_);
  c.trader.vega_limit = 2e7;
  EXPECT_THROW(cli::cmd_quotes(c, opts_), std::runtime_error);
  opts_.value_function = dir_ / "missing.bin";
  EXPECT_THROW(cli::cmd_quotes(tiny_config(), opts_), std::runtime_error);
}

TEST_F(CliRun, StatesFileParsing) {
  std::filesystem::create_directories(dir_);
  const auto path = dir_ / "states.csv";
  std::ofstream(path) << "t,spot,variance,inventory\n0,10,0.0225,\n0.0006,10.5,0.03,1;-2;3\n";
  const auto c = tiny_config();
  const auto reqs = cli::read_states(c, 3, path);
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0].inventory, (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_EQ(reqs[1].inventory, (std::vector<double>{1.0, -2.0, 3.0}));
  EXPECT_EQ(reqs[1].t, 0.0006);
  EXPECT_EQ(reqs[1].state.spot, 10.5);
  EXPECT_EQ(reqs[1].n_paths, c.correction.paths);
  EXPECT_THROW(cli::read_states(c, 2, path), std::runtime_error);
  std::ofstream(path) << "spot,t\n";
  EXPECT_THROW(cli::read_states(c, 3, path), std::runtime_error);
}
