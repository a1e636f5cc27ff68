#pragma once

// Modulating processes X and their paired increment families {F_x}.
//
// A ModulatedModel is an immutable descriptor. Randomness lives only in the
// StateGenerator objects it hands out: one per replica, each owning its own
// seeded stream.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modwalk/distributions.hpp"
#include "modwalk/rng.hpp"

namespace modwalk {

/// A point of the modulating state space. Finite spaces use `label`
/// (value mirrors it); real-valued spaces use `value` with label 0.
struct State {
  int label = 0;
  double value = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

inline State labeled(int label) { return State{label, static_cast<double>(label)}; }
inline State valued(double value) { return State{0, value}; }

/// One emitted element of X. `regeneration` marks the first index of a
/// cycle, i.e. n = T_{k-1} + 1.
struct Step {
  State state;
  bool regeneration = false;
};

class StateGenerator {
 public:
  virtual ~StateGenerator() = default;
  virtual Step next() = 0;
};

using GeneratorFactory = std::function<std::unique_ptr<StateGenerator>(std::uint64_t seed)>;

/// Measurable set B of states.
using StateSet = std::function<bool(const State&)>;

StateSet all_states();
StateSet no_states();
StateSet labels_in(std::vector<int> labels);
StateSet complement_of(StateSet set);

/// The state-indexed increment rule x -> F_x.
///
/// `sample` receives two uniforms per step. Families with a closed-form
/// quantile use only `u`; the difference family zeta - b^x uses `v` for b^x.
struct IncrementFamily {
  std::function<double(const State&, double u, double v)> sample;
  std::function<double(const State&, double y)> tail;
  std::function<double(const State&)> mean;
  /// The law of F_x when it is expressible as a Distribution.
  std::function<std::optional<Distribution>(const State&)> law;

  static IncrementFamily per_label(std::vector<Distribution> laws);
};

/// Cycle structure of a regenerative modulating process.
struct RegenSpec {
  Distribution tau0_law = Distribution::point(0.0);  // length of cycle 0, values in {0,1,...}
  Distribution tau_law = Distribution::point(1.0);   // cycle length, values in {1,2,...}
  /// States X_{T_{k-1}+1..T_k} of one cycle of length tau.
  std::function<std::vector<State>(std::int64_t tau, Rng& rng)> cycle_builder;
  /// Optional: cycle 0 contents, defaults to cycle_builder.
  std::function<std::vector<State>(std::int64_t tau, Rng& rng)> initial_builder;
  /// Optional: deterministic per-label visit counts of a cycle of length tau.
  /// When present (with labels), pi is computed exactly instead of by simulation.
  std::function<std::vector<double>(std::int64_t tau)> occupation;
  /// Label names; empty for real-valued state spaces.
  std::vector<std::string> labels;
};

/// Asymptotic law that replaces C/a * Fbar^s when the cycle-tail condition
/// fails: constant * integral_y^inf P(tau > t) dt.
struct AlternativeAsymptotic {
  double constant;
  Distribution reference;

  double predict(double y) const;
};

struct ModulatedModel {
  std::string kind;
  std::vector<std::string> labels;  // empty: real-valued state space
  GeneratorFactory make_generator;
  IncrementFamily increments;
  Distribution reference = Distribution::point(0.0);  // F
  std::function<double(const State&)> c_rule;
  std::vector<double> pi;        // finite spaces: exact or regenerative occupation
  std::vector<State> pi_sample;  // real-valued spaces: empirical occupation sample
  double drift = 0.0;            // a, with S_n / n -> -a
  double uniform_bound = 1.0;    // L of the uniform tail bound, inflated 10%
  std::vector<std::vector<double>> transition;  // finite Markov chains only
  std::optional<RegenSpec> regeneration;
  std::optional<AlternativeAsymptotic> alternative;
  /// Difference models: (12) must hold for some b above this value.
  std::optional<double> cycle_tail_b_min;
  std::vector<std::string> warnings;

  bool is_finite() const { return !labels.empty(); }
};

/// Throws InvalidModel unless drift > 0 and the model is otherwise usable.
void validate(const ModulatedModel& model);

/// Stationary law of an irreducible stochastic matrix; residual of pi P = pi
/// at most 1e-12. Throws NumericError (with a condition estimate) when the
/// balance system is singular.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition);

struct FiniteMarkovOptions {
  /// Law of X_1. Defaults to pi (a stationary start).
  std::optional<std::vector<double>> initial;
};

/// X a finite irreducible aperiodic chain. Regeneration flags mark visits to
/// label 0.
ModulatedModel finite_markov_model(const std::vector<std::vector<double>>& transition,
                                   std::vector<Distribution> increments, Distribution reference,
                                   FiniteMarkovOptions options = {});

/// C(B) = integral over B of c(x) pi(dx).
double limit_constant(const ModulatedModel& model, const StateSet& set);

struct CEstimate {
  std::vector<double> levels;
  std::vector<double> ratios;
  double limit = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Ratio sequence tail_x(y)/tail_F(y) with a 1/y Richardson extrapolation
/// from the last three levels.
CEstimate estimate_c(const Distribution& fx, const Distribution& reference,
                     std::span<const double> levels);
CEstimate estimate_c(const ModulatedModel& model, const State& x, std::span<const double> levels);

/// pi is the expected cycle occupation divided by E[tau].
ModulatedModel regenerative_model(RegenSpec spec, IncrementFamily increments,
                                  Distribution reference);

struct CycleTailReport {
  double b = 0.0;
  std::vector<double> levels;
  std::vector<double> ratio_tau;   // P(b tau > y) / Fbar(y)
  std::vector<double> ratio_tau0;  // P(b tau0 > y) / Fbar^s(y)
  bool consistent_with_tautail = false;
};

/// Heuristic flag: both final ratios below 0.1 and non-increasing over the
/// last three levels.
CycleTailReport cycle_tail_report(const RegenSpec& spec, const Distribution& reference, double b,
                                  std::span<const double> levels);

/// Inter-departure times of a GI/GI/1 queue feeding a second station:
/// xi_n = sigma2_n - X_n.
ModulatedModel tandem_departure_process(Distribution interarrival, Distribution service1,
                                        Distribution service2);

/// F_x = law(zeta - b^x), zeta independent of the nonnegative b^x.
ModulatedModel difference_model(Distribution zeta,
                                std::function<Distribution(const State&)> b_rule, RegenSpec spec,
                                Distribution reference);

/// Model on which the cycle-tail condition fails: X returns to state 0 after
/// tau steps, b^0 = b0_mean, b^x = 0 elsewhere, increments zeta - b^x.
ModulatedModel counterexample_model(Distribution zeta, double b0_mean, double tau_tail_power);
ModulatedModel counterexample_model(Distribution zeta, double b0_mean, Distribution tau_law);

}  // namespace modwalk
