#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "levy/cli.hpp"

using namespace levy;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("levy_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int shell(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); }

}  // namespace

TEST(Config, JsonRoundTrip) {
  cli::RunConfig c;
  c.command = cli::Command::simulate;
  c.seed = 77;
  c.levels = {1, 5, 9};
  c.sim_params = {1.3, 0.0, 0.01, 0.0};
  c.n_std = 10.0;
  c.length = 1234;
  c.format = cli::SimulateFormat::ticks;
  const auto back = cli::config_from_json(cli::to_json(c));
  EXPECT_EQ(cli::to_json(back), cli::to_json(c));
  cli::RunConfig d;
  EXPECT_TRUE(std::isinf(cli::config_from_json(cli::to_json(d)).n_std));
}

TEST(Config, Validation) {
  cli::RunConfig c;
  c.command = cli::Command::fit;
  EXPECT_THROW(c.validate(), InvalidParameter);  // no input
  c.input_path = "x.csv";
  c.levels = {5, 2};
  EXPECT_THROW(c.validate(), InvalidParameter);
  EXPECT_THROW((void)cli::parse_command("plot"), InvalidParameter);
}

TEST(Run, SimulateThenIngest) {
  const auto dir = fresh_dir("ingest");
  cli::RunConfig sim;
  sim.command = cli::Command::simulate;
  sim.output_path = dir.string();
  sim.length = 2000;
  sim.sim_params = {1.5, 0, 0.001, 0};
  sim.format = cli::SimulateFormat::ticks;
  sim.seed = 3;
  std::ostringstream err;
  ASSERT_EQ(cli::run(sim, err), 0) << err.str();
  ASSERT_TRUE(fs::exists(dir / "simulated.csv"));

  cli::RunConfig ing;
  ing.command = cli::Command::ingest;
  ing.input_path = (dir / "simulated.csv").string();
  ing.output_path = (dir / "ingest").string();
  ASSERT_EQ(cli::run(ing, err), 0) << err.str();
  const auto j = nlohmann::json::parse(slurp(dir / "ingest" / "ingest.json"));
  EXPECT_NEAR(j["stats"]["mean_dt"].get<double>(), 19.3, 1e-9);
  const auto manifest = nlohmann::json::parse(slurp(dir / "ingest" / "run.json"));
  EXPECT_EQ(manifest["config"]["command"], "ingest");
}

TEST(Run, ErrorsAreOneJsonLine) {
  const auto dir = fresh_dir("errors");
  const auto bad = dir / "bad.csv";
  std::ofstream(bad) << "timestamp,value\n0,100\n1,oops\n";
  cli::RunConfig c;
  c.command = cli::Command::fit;
  c.input_path = bad.string();
  c.output_path = dir.string();
  std::ostringstream err;
  EXPECT_EQ(cli::run(c, err), 1);
  const auto j = nlohmann::json::parse(err.str());
  EXPECT_EQ(j["kind"], "parse");
  EXPECT_EQ(j["line"], 3);
}

TEST(Binary, ReplayReproducesArtifacts) {
  const auto dir = fresh_dir("replay");
  const std::string bin = LEVY_CLI_PATH;
  ASSERT_EQ(shell(bin + " simulate --alpha 1.6 --gamma 0.002 --length 3000 --seed 9 -o " +
                  (dir / "a").string()),
            0);
  ASSERT_EQ(shell(bin + " replay " + (dir / "a" / "run.json").string() + " -o " +
                  (dir / "b").string()),
            0);
  EXPECT_EQ(slurp(dir / "a" / "simulated.csv"), slurp(dir / "b" / "simulated.csv"));
  EXPECT_EQ(slurp(dir / "a" / "simulate.json"), slurp(dir / "b" / "simulate.json"));
}

TEST(Binary, UsageErrorsExitNonZero) {
  const std::string bin = LEVY_CLI_PATH;
  EXPECT_NE(shell(bin + " fit"), 0);
  EXPECT_NE(shell(bin + " simulate --alpha 2.5 -o " + fresh_dir("usage").string()), 0);
  EXPECT_NE(shell(bin + " nonsense"), 0);
}
