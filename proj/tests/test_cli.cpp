#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>
#include <sys/wait.h>

#include "gen.hpp"
#include "modwalk/cli/experiment.hpp"
#include "modwalk/cli/model_config.hpp"
#include "modwalk/cli/verify.hpp"

using namespace modwalk::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_config(const std::string& name) {
  std::ifstream in(std::string(MODWALK_CONFIG_DIR) + "/" + name);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("modwalk_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

struct Shell {
  int status;
  std::string out;
  std::string err;
};

Shell shell(const std::string& args, const fs::path& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(MODWALK_EXE) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST(Config, MissingSeedNamesSeed) {
  auto j = read_config("baseline.json");
  j.erase("seed");
  try {
    parse_config(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "seed");
  }
}

TEST(Config, ExecutableReportsMissingSeed) {
  const auto dir = scratch_dir("seed");
  auto j = read_config("baseline.json");
  j.erase("seed");
  std::ofstream(dir / "c.json") << j.dump();
  const auto r = shell("--config " + (dir / "c.json").string(), dir);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("seed"), std::string::npos) << r.err;
}

TEST(Config, RejectsBadFields) {
  auto j = read_config("baseline.json");
  j["levels"] = {5.0, 3.0};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = read_config("baseline.json");
  j["n_samples"] = 10;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = read_config("baseline.json");
  j["command"] = "nope";
  EXPECT_THROW(parse_config(j), ConfigError);
  j = read_config("baseline.json");
  j["barrier"] = "deep";
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(MODWALK_CONFIG_DIR)) {
    std::ifstream in(entry.path());
    const auto c = parse_config(json::parse(in));
    if (c.command != "diagnose") {
      EXPECT_NO_THROW(parse_model(c.model)) << entry.path();
    }
  }
}

TEST(Config, PropertyRoundTrip) {
  testgen::Gen g(51);
  const auto models = {read_config("baseline.json")["model"], read_config("two_state.json")["model"],
                       read_config("tandem.json")["model"]};
  for (int trial = 0; trial < 200; ++trial) {
    ExperimentConfig c;
    c.model = *(models.begin() + g.integer(0, 2));
    c.command = command_names()[static_cast<std::size_t>(g.integer(0, 6))];
    double y = g.uniform(0.1, 5.0);
    for (int i = 0, k = g.integer(1, 5); i < k; ++i) {
      c.levels.push_back(y);
      y += g.uniform(0.1, 50.0);
    }
    c.n_samples = g.integer(1000, 1 << 30);
    c.seed = static_cast<std::uint64_t>(g.engine()());
    c.workers = g.integer(1, 16);
    if (g.coin()) c.barrier = g.uniform(1.0, 1000.0);
    c.out_path = g.coin() ? "-" : "out_" + std::to_string(trial) + ".csv";
    c.format = g.coin() ? "csv" : "json";
    c.set = g.coin() ? json("all") : json::array({"x1"});
    c.burn_in_cycles = g.integer(1, 5000);
    c.n_cycles = g.integer(0, 100000);
    c.z = g.uniform(0.1, 10.0);
    const auto back = parse_config(json::parse(serialize(c).dump()));
    EXPECT_EQ(back, c) << serialize(c).dump();
  }
}

TEST(Distributions, JsonRoundTrip) {
  testgen::Gen g(52);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = g.coin() ? g.continuous_law() : g.discrete_law();
    const auto back = parse_distribution(distribution_json(d), "d");
    EXPECT_EQ(back, d) << d.describe();
  }
}

TEST(AtomicWrite, ReplacesWholeFileAndLeavesNoTemp) {
  const auto dir = scratch_dir("atomic");
  const auto target = dir / "out.csv";
  std::ofstream(target) << "old contents that are longer than the new ones\n";
  write_atomically(target.string(), "new\n");
  EXPECT_EQ(slurp(target), "new\n");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1);
}

TEST(AtomicWrite, FailedRunLeavesNoOutput) {
  const auto dir = scratch_dir("failed");
  auto j = read_config("baseline.json");
  j["model"]["xi"]["offset"] = 3.0;  // positive drift: the model is rejected
  j["output"]["path"] = (dir / "out.csv").string();
  const auto c = parse_config(j);
  std::ostringstream summary, diag;
  EXPECT_EQ(run(c, summary, diag), 3);
  EXPECT_FALSE(fs::exists(dir / "out.csv"));
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 0);
}

TEST(AtomicWrite, MissingDirectoryThrowsWithoutPartialFile) {
  const auto dir = scratch_dir("nodir");
  EXPECT_ANY_THROW(write_atomically((dir / "absent" / "out.csv").string(), "x"));
  EXPECT_FALSE(fs::exists(dir / "absent"));
}

TEST(Run, BaselineWritesRatioColumns) {
  const auto dir = scratch_dir("baseline");
  auto j = read_config("baseline.json");
  j["levels"] = {5.0, 13.44};
  j["n_samples"] = 20000;
  j["output"]["path"] = (dir / "b.csv").string();
  std::ostringstream summary, diag;
  ASSERT_EQ(run(parse_config(j), summary, diag), 0) << diag.str();
  const auto csv = slurp(dir / "b.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "y,p_hat,se,lo,hi,theory,ratio,bias_bound");
  EXPECT_NE(summary.str().find("series="), std::string::npos);
}

TEST(Run, OracleCheckGamblersRuin) {
  const auto dir = scratch_dir("oracle");
  auto j = read_config("gamblers_ruin.json");
  j["levels"] = {0.5};
  j["output"]["path"] = (dir / "o.csv").string();
  std::ostringstream summary, diag;
  ASSERT_EQ(run(parse_config(j), summary, diag), 0) << diag.str();
  EXPECT_NE(summary.str().find("oracle 0.5 vs MC estimate"), std::string::npos) << summary.str();
  EXPECT_NE(summary.str().find("within 3se"), std::string::npos) << summary.str();
}

TEST(Run, ExecutableOracleCheck) {
  const auto dir = scratch_dir("exe_oracle");
  const auto r = shell("--config " + std::string(MODWALK_CONFIG_DIR) +
                           "/gamblers_ruin.json --levels 0.5 --samples 20000 --out " +
                           (dir / "o.csv").string(),
                       dir);
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("oracle 0.5 vs MC estimate"), std::string::npos) << r.out;
}

TEST(Run, JsonOutputParses) {
  const auto dir = scratch_dir("json");
  auto j = read_config("two_state.json");
  j["levels"] = {5.0};
  j["n_samples"] = 5000;
  j["output"] = {{"path", (dir / "r.json").string()}, {"format", "json"}};
  std::ostringstream summary, diag;
  ASSERT_EQ(run(parse_config(j), summary, diag), 0) << diag.str();
  const auto r = json::parse(slurp(dir / "r.json"));
  EXPECT_EQ(r["levels"].size(), 1u);
}

TEST(Run, UnknownLabelIsConfigError) {
  auto j = read_config("two_state.json");
  j["set"] = {"x9"};
  j["output"]["path"] = "-";
  std::ostringstream summary, diag;
  EXPECT_EQ(run(parse_config(j), summary, diag), 2);
  EXPECT_NE(diag.str().find("x9"), std::string::npos);
}

TEST(Verify, SubsetPassesOnCorrectBuild) {
  VerifyOptions o;
  o.only = {"A2", "A7"};
  const auto r = run_verify(o);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(verify_exit_code(r), 0) << r[0].detail << " / " << r[1].detail;
  std::ostringstream os;
  print_results(r, os);
  EXPECT_EQ(os.str().rfind("A2 PASS", 0), 0u) << os.str();
}

TEST(Verify, DriftSignErrorIsCaught) {
  const auto dir = scratch_dir("inject");
  const auto r = shell("--verify quick --only A2 --inject-drift-sign-error", dir);
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("criterion A2 failed"), std::string::npos) << r.err;
  EXPECT_NE(r.out.find("A2 FAIL"), std::string::npos) << r.out;
}
