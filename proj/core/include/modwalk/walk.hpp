#pragma once

// Path mechanics of the modulated walk S_n = xi_1^{X_1} + ... + xi_n^{X_n}.
//
// Stream layout: replica `index` under master `seed` draws its states from
// substream lane 1 and its increments from lane 0, two uniforms per step. Two
// models that share a seed therefore consume identical increment uniforms.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "modwalk/modulation.hpp"
#include "modwalk/rng.hpp"

namespace modwalk {

class Walker {
 public:
  struct Draw {
    State state;
    bool regeneration;
    double increment;
  };

  Walker(const ModulatedModel& model, std::uint64_t seed, std::uint64_t index = 0);

  Draw step() {
    const Step s = states_->next();
    const double u = inc_.uniform();
    const double v = inc_.uniform();
    return {s.state, s.regeneration, model_->increments.sample(s.state, u, v)};
  }

 private:
  const ModulatedModel* model_;
  std::unique_ptr<StateGenerator> states_;
  Rng inc_;
};

struct WalkPath {
  std::vector<State> states;               // X_1..X_n
  std::vector<double> increments;          // xi_1..xi_n
  std::vector<double> partial_sums;        // S_0..S_n, S_0 = 0
  std::vector<double> running_max;         // M_0..M_n, M_0 = 0
  std::vector<std::int64_t> regeneration_indices;  // first index n of each cycle
  std::int64_t length = 0;
};

WalkPath generate_path(const ModulatedModel& model, std::int64_t n_steps, std::uint64_t seed);

struct Crossed {
  std::int64_t n;
  State state;
};
struct RuledOut {
  double min_level_reached;
};
struct Inconclusive {
  std::int64_t steps;
};

struct FirstPassage {
  std::variant<Crossed, RuledOut, Inconclusive> outcome;
  double barrier_used = 0.0;

  bool crossed() const { return std::holds_alternative<Crossed>(outcome); }
  bool ruled_out() const { return std::holds_alternative<RuledOut>(outcome); }
  bool inconclusive() const { return std::holds_alternative<Inconclusive>(outcome); }
};

/// n_min = ceil(2 barrier / drift).
std::int64_t ruled_out_horizon(double barrier, double drift);

FirstPassage first_passage(const ModulatedModel& model, double y, double barrier,
                           std::int64_t max_steps, std::uint64_t seed);

/// One replica scanned against an increasing level grid at once.
struct LevelScan {
  std::vector<std::optional<State>> crossing;  // X_{mu(y_i)}, empty if M <= y_i
  std::vector<bool> beyond;                    // S crossed y_i + barrier
  bool inconclusive = false;
  std::int64_t steps = 0;
};

/// Runs until the deepest level plus barrier is crossed, or S <= -barrier
/// after the ruled-out horizon, or max_steps.
LevelScan scan_levels(Walker& walker, std::span<const double> levels, double barrier,
                      double drift, std::int64_t max_steps);

/// W_1..W_n with W_0 = 0; same increment stream as generate_path.
std::vector<double> lindley_path(const ModulatedModel& model, std::int64_t n_steps,
                                 std::uint64_t seed);

struct CycleMaxima {
  std::vector<double> maxima;
  std::vector<std::string> warnings;
};

/// Per complete cycle k: max over its indices n of S_n - S_{start-1}.
CycleMaxima cycle_maxima(const WalkPath& path);

/// CSV with columns n,state,increment,S_n,M_n,regen_flag.
void write_path_csv(const WalkPath& path, std::ostream& out);

}  // namespace modwalk
