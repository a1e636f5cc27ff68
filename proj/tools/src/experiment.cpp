#include "modwalk/cli/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "modwalk/cli/model_config.hpp"
#include "modwalk/errors.hpp"
#include "modwalk/estimate.hpp"
#include "modwalk/oracle.hpp"

namespace modwalk::cli {

using nlohmann::json;

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("$", "config must be a JSON object");
  ExperimentConfig c;
  if (!j.contains("model")) throw ConfigError("model", "missing required field");
  c.model = j["model"];
  if (!j.contains("command") || !j["command"].is_string()) {
    throw ConfigError("command", "missing or not a string");
  }
  c.command = j["command"].get<std::string>();
  if (j.contains("levels")) {
    if (!j["levels"].is_array()) throw ConfigError("levels", "expected an array of numbers");
    for (std::size_t i = 0; i < j["levels"].size(); ++i) {
      if (!j["levels"][i].is_number()) {
        throw ConfigError("levels[" + std::to_string(i) + "]", "expected a number");
      }
      c.levels.push_back(j["levels"][i].get<double>());
    }
  }
  if (j.contains("n_samples")) {
    if (!j["n_samples"].is_number_integer()) throw ConfigError("n_samples", "expected an integer");
    c.n_samples = j["n_samples"].get<std::int64_t>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("workers")) {
    if (!j["workers"].is_number_integer()) throw ConfigError("workers", "expected an integer");
    c.workers = j["workers"].get<int>();
  }
  if (j.contains("barrier")) {
    const auto& b = j["barrier"];
    if (b.is_string() && b.get<std::string>() == "auto") {
      c.barrier.reset();
    } else if (b.is_number()) {
      c.barrier = b.get<double>();
    } else {
      throw ConfigError("barrier", "expected a number or \"auto\"");
    }
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    if (!o.is_object()) throw ConfigError("output", "expected {\"path\": ..., \"format\": ...}");
    if (o.contains("path")) c.out_path = o["path"].get<std::string>();
    if (o.contains("format")) c.format = o["format"].get<std::string>();
  }
  if (j.contains("set")) c.set = j["set"];
  if (j.contains("burn_in_cycles")) c.burn_in_cycles = j["burn_in_cycles"].get<std::int64_t>();
  if (j.contains("n_cycles")) c.n_cycles = j["n_cycles"].get<std::int64_t>();
  if (j.contains("z")) c.z = j["z"].get<double>();
  validate(c);
  return c;
}

json serialize(const ExperimentConfig& c) {
  json j;
  j["model"] = c.model;
  j["command"] = c.command;
  j["levels"] = c.levels;
  j["n_samples"] = c.n_samples;
  if (c.seed) j["seed"] = *c.seed;
  j["workers"] = c.workers;
  if (c.barrier) {
    j["barrier"] = *c.barrier;
  } else {
    j["barrier"] = "auto";
  }
  j["output"] = {{"path", c.out_path}, {"format", c.format}};
  j["set"] = c.set;
  j["burn_in_cycles"] = c.burn_in_cycles;
  j["n_cycles"] = c.n_cycles;
  j["z"] = c.z;
  return j;
}

void validate(const ExperimentConfig& c) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), c.command) == names.end()) {
    throw ConfigError("command", "unknown command '" + c.command + "'");
  }
  if (!c.seed) throw ConfigError("seed", "missing; an explicit seed is required");
  if (c.levels.empty()) throw ConfigError("levels", "must be a nonempty list");
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    if (!std::isfinite(c.levels[i])) {
      throw ConfigError("levels[" + std::to_string(i) + "]", "must be finite");
    }
    if (i > 0 && !(c.levels[i] > c.levels[i - 1])) {
      throw ConfigError("levels[" + std::to_string(i) + "]", "levels must be strictly increasing");
    }
  }
  if (c.command != "diagnose" && c.n_samples < 1000) {
    throw ConfigError("n_samples", "must be at least 1000");
  }
  if (c.workers < 1) throw ConfigError("workers", "must be at least 1");
  if (c.barrier && !(*c.barrier > 0.0)) throw ConfigError("barrier", "must be positive or \"auto\"");
  if (c.format != "csv" && c.format != "json") throw ConfigError("output.format", "csv or json");
  if (c.burn_in_cycles < 1) throw ConfigError("burn_in_cycles", "must be at least 1");
  if (c.n_cycles < 0) throw ConfigError("n_cycles", "must be nonnegative");
}

void write_atomically(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() /
                       (target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, target);
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string report_text(const AsymptoticReport& r, const std::string& format) {
  if (format == "json") return report_json(r) + "\n";
  std::ostringstream os;
  write_report_csv(r, os);
  return os.str();
}

std::string report_summary(const ExperimentConfig& c, const AsymptoticReport& r) {
  const std::size_t i = r.levels.size() - 1;
  return "command=" + c.command + " model=" + r.model_kind + " deepest_y=" + fmt(r.levels[i]) +
         " p_hat=" + fmt(r.empirical[i].p_hat) + " ratio=" + fmt(r.ratios[i]) + " ci=[" +
         fmt(r.ratio_lo[i]) + "," + fmt(r.ratio_hi[i]) + "]";
}

SupTailOptions sup_options(const ExperimentConfig& c) {
  SupTailOptions o;
  o.barrier = c.barrier;
  o.workers = c.workers;
  return o;
}

std::pair<std::string, std::string> run_command(const ExperimentConfig& c) {
  const auto seed = *c.seed;
  const std::string& cmd = c.command;

  if (cmd == "diagnose") {
    const auto law = c.model.contains("distribution")
                         ? parse_distribution(c.model["distribution"], "model.distribution")
                         : parse_model(c.model).reference;
    const auto d = diagnose(law, c.levels, c.z);
    std::ostringstream os;
    if (c.format == "json") {
      json j{{"levels", d.level_grid},
             {"long_tail_ratios", d.long_tail_ratios},
             {"subexp_ratios", d.subexp_ratios},
             {"subexp_lower", d.subexp_lower},
             {"subexp_upper", d.subexp_upper},
             {"verdict_long_tailed", d.verdict_long_tailed},
             {"verdict_subexp_consistent", d.verdict_subexp_consistent}};
      os << j.dump(2) << "\n";
    } else {
      os << "y,long_tail_ratio,subexp_ratio,subexp_lower,subexp_upper\n";
      for (std::size_t i = 0; i < d.level_grid.size(); ++i) {
        os << fmt(d.level_grid[i]) << "," << fmt(d.long_tail_ratios[i]) << ","
           << fmt(d.subexp_ratios[i]) << "," << fmt(d.subexp_lower[i]) << ","
           << fmt(d.subexp_upper[i]) << "\n";
      }
    }
    const auto n = d.level_grid.size() - 1;
    return {os.str(), "command=diagnose law=" + law.describe() + " deepest_y=" +
                          fmt(d.level_grid[n]) + " subexp_ratio=" + fmt(d.subexp_ratios[n]) +
                          " long_tailed=" + (d.verdict_long_tailed ? "yes" : "no") +
                          " subexp_consistent=" + (d.verdict_subexp_consistent ? "yes" : "no")};
  }

  if (cmd == "oracle-check") {
    const auto lm = parse_lattice(c.model);
    const auto model = to_modulated(lm);
    const StateSet sets[] = {all_states()};
    const auto table = estimate_sup_tail_table(model, c.levels, sets, c.n_samples, seed, sup_options(c));
    std::ostringstream os;
    os << "y,oracle,oracle_bias_bound,p_hat,se,lo,hi,within_3se\n";
    std::string last;
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
      double depth = c.barrier.value_or(std::max(32.0 * lm.h, 2.0 * c.levels[i]));
      auto exact = dp_sup_tail(lm, c.levels[i], depth);
      for (int k = 0; k < 10 && exact.truncation_bias_bound > 1e-9; ++k) {
        depth *= 2.0;
        exact = dp_sup_tail(lm, c.levels[i], depth);
      }
      const auto& e = table.estimates[0][i];
      const double mid = exact.value + 0.5 * exact.truncation_bias_bound;
      const bool ok = std::abs(e.p_hat - mid) <= 3.0 * e.std_err + 0.5 * exact.truncation_bias_bound;
      os << fmt(c.levels[i]) << "," << fmt(exact.value) << "," << fmt(exact.truncation_bias_bound)
         << "," << fmt(e.p_hat) << "," << fmt(e.std_err) << "," << fmt(e.ci_lo) << ","
         << fmt(e.ci_hi) << "," << (ok ? 1 : 0) << "\n";
      last = "command=oracle-check y=" + fmt(c.levels[i]) + " oracle " + fmt(exact.value) +
             " vs MC estimate " + fmt(e.p_hat) + " (se " + fmt(e.std_err) + ")" +
             (ok ? " within 3se" : " OUTSIDE 3se");
    }
    return {os.str(), last};
  }

  if (cmd == "baseline") {
    if (!c.model.contains("xi")) throw ConfigError("model.xi", "baseline needs an i.i.d. increment law");
    const auto xi = parse_distribution(c.model["xi"], "model.xi");
    const auto r = classical_baseline(xi, c.levels, c.n_samples, seed, sup_options(c));
    auto summary = report_summary(c, r);
    const auto& s = r.series.back();
    summary += " series=[" + fmt(s.lower) + "," + fmt(s.upper) + "]";
    return {report_text(r, c.format), summary};
  }

  const auto model = parse_model(c.model);
  if (cmd == "stationary-wait") {
    const auto cycles = c.n_cycles > 0 ? c.n_cycles : c.n_samples;
    const auto r = stationary_ratio_report(model, c.levels, c.burn_in_cycles, cycles, seed);
    return {report_text(r, c.format), report_summary(c, r)};
  }
  if (cmd == "counterexample" && !model.alternative) {
    throw ConfigError("model.model", "counterexample command needs a counterexample model");
  }
  const auto set = parse_state_set(c.set, model, "set");
  const auto r = ratio_report(model, c.levels, set, c.n_samples, seed, sup_options(c));
  auto summary = report_summary(c, r);
  if (cmd == "counterexample" && r.levels.size() > 1) {
    summary += " growth=" + fmt(r.ratios.back() / r.ratios.front());
  }
  return {report_text(r, c.format), summary};
}

}  // namespace

int run(const ExperimentConfig& c, std::ostream& summary, std::ostream& diag) {
  try {
    validate(c);
    auto [contents, line] = run_command(c);
    if (c.out_path.empty() || c.out_path == "-") {
      std::cout << contents;
    } else {
      write_atomically(c.out_path, contents);
    }
    summary << line << "\n";
    return 0;
  } catch (const ConfigError& e) {
    diag << "config error at " << e.what() << "\n";
    return 2;
  } catch (const InvalidModel& e) {
    diag << "invalid model: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    diag << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    diag << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    diag << "run failed: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace modwalk::cli
