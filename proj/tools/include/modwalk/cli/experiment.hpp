#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace modwalk::cli {

struct ExperimentConfig {
  nlohmann::json model;
  std::string command;
  std::vector<double> levels;
  std::int64_t n_samples = 0;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<double> barrier;  // nullopt: "auto"
  std::string out_path;
  std::string format = "csv";
  nlohmann::json set = "all";     // state set B
  std::int64_t burn_in_cycles = 100;  // stationary-wait
  std::int64_t n_cycles = 0;          // stationary-wait; 0 means n_samples
  double z = 1.0;                     // diagnose shift

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"baseline",   "sup-tail",    "stationary-wait",
                                              "ratio-report", "diagnose", "oracle-check",
                                              "counterexample"};
  return names;
}

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json serialize(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_atomically(const std::string& path, const std::string& contents);

/// Exit status: 0 ok, 2 invalid config, 3 invalid model, 4 numeric or run failure.
int run(const ExperimentConfig& c, std::ostream& summary, std::ostream& diag);

}  // namespace modwalk::cli
