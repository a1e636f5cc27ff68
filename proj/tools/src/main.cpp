#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "modwalk/cli/experiment.hpp"
#include "modwalk/cli/model_config.hpp"
#include "modwalk/cli/verify.hpp"

namespace {

std::vector<double> parse_levels(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using modwalk::cli::ConfigError;
  using nlohmann::json;

  CLI::App app{"modwalk: tail asymptotics of modulated random walks"};
  std::string config_path, command, levels, out, format, verify, barrier;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  int workers = 0;
  std::vector<std::string> only;
  bool inject = false;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--command", command, "baseline|sup-tail|stationary-wait|ratio-report|diagnose|oracle-check|counterexample");
  app.add_option("--levels", levels, "comma-separated levels y");
  app.add_option("--samples", samples, "number of paths (or cycles)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  app.add_option("--workers", workers, "worker threads");
  app.add_option("--barrier", barrier, "barrier depth or 'auto'");
  app.add_option("--out", out, "output path ('-' for stdout)");
  app.add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--verify", verify, "run acceptance suite")->check(CLI::IsMember({"quick", "full"}));
  app.add_option("--only", only, "criterion ids to run with --verify");
  app.add_flag("--inject-drift-sign-error", inject, "fault injection for --verify");
  CLI11_PARSE(app, argc, argv);

  if (!verify.empty()) {
    modwalk::cli::VerifyOptions vo;
    vo.suite = verify == "full" ? modwalk::cli::Suite::Full : modwalk::cli::Suite::Quick;
    vo.workers = workers > 0 ? workers : 1;
    vo.inject_drift_sign_error = inject;
    vo.only = only;
    vo.log = &std::cerr;
    const auto results = modwalk::cli::run_verify(vo);
    modwalk::cli::print_results(results, std::cout);
    for (const auto& r : results) {
      if (!r.passed) std::cerr << "criterion " << r.id << " failed\n";
    }
    return modwalk::cli::verify_exit_code(results);
  }

  json j = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config " << config_path << "\n";
      return 2;
    }
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      std::cerr << "config is not valid JSON: " << e.what() << "\n";
      return 2;
    }
  }
  if (!command.empty()) j["command"] = command;
  if (!levels.empty()) {
    try {
      j["levels"] = parse_levels(levels);
    } catch (const std::exception&) {
      std::cerr << "config error at levels: expected comma-separated numbers\n";
      return 2;
    }
  }
  if (samples > 0) j["n_samples"] = samples;
  if (*seed_opt) j["seed"] = seed;
  if (workers > 0) j["workers"] = workers;
  if (!barrier.empty()) {
    if (barrier == "auto") {
      j["barrier"] = "auto";
    } else {
      j["barrier"] = std::stod(barrier);
    }
  }
  if (!out.empty()) j["output"]["path"] = out;
  if (!format.empty()) j["output"]["format"] = format;

  try {
    const auto cfg = modwalk::cli::parse_config(j);
    return modwalk::cli::run(cfg, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
