#pragma once

// JSON records for distributions and models.

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "modwalk/distributions.hpp"
#include "modwalk/modulation.hpp"
#include "modwalk/oracle.hpp"

namespace modwalk::cli {

/// Invalid configuration; `path` locates the offending field (e.g. "model.xi.alpha").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

Distribution parse_distribution(const nlohmann::json& j, const std::string& path);
nlohmann::json distribution_json(const Distribution& d);

/// Builds the model named by j["model"]. Model-construction errors propagate
/// unchanged so their precondition text reaches the user.
ModulatedModel parse_model(const nlohmann::json& j, const std::string& path = "model");

/// Lattice view of a finite_markov or iid record whose increments are discrete
/// on h*Z (h from "lattice_h", default 1).
LatticeModel parse_lattice(const nlohmann::json& j, const std::string& path = "model");

/// Labels named in j (strings or integer indices) resolved against the model.
StateSet parse_state_set(const nlohmann::json& j, const ModulatedModel& model,
                         const std::string& path);

}  // namespace modwalk::cli
