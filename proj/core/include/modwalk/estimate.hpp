#pragma once

// Monte Carlo estimators for P(M > y, X_mu(y) in B) and for the stationary
// waiting-time tail, plus the asymptotic C(B)/a * Fbar^s(y) they are compared
// against.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modwalk/distributions.hpp"
#include "modwalk/modulation.hpp"
#include "modwalk/oracle.hpp"

namespace modwalk {

struct TailEstimate {
  double y = 0.0;
  double p_hat = 0.0;
  double std_err = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double truncation_bias_bound = 0.0;
  std::int64_t n_samples = 0;
  std::int64_t n_inconclusive = 0;
  std::uint64_t seed = 0;
  double barrier = 0.0;
  /// No hits at this level: the CI is one-sided, [0, 1 - 0.05^(1/n)].
  bool too_deep = false;
  std::vector<std::string> warnings;
};

/// Wilson 95% interval for k successes out of n.
std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n);

/// C(B)/a * Fbar^s(y). Appends a warning when Fbar^s(y) is capped at 1.
double asymptotic_prediction(const ModulatedModel& model, double y, const StateSet& set,
                             std::vector<std::string>* warnings = nullptr);

struct SupTailOptions {
  /// Fixed barrier; nullopt sizes it automatically and doubles it until the
  /// empirical P(M > y + barrier) is at most 5% of P(M > y).
  std::optional<double> barrier;
  int workers = 1;
  /// Step cap per path; 0 means 20 * ceil(2 barrier / a) + 1000.
  std::int64_t max_steps = 0;
  int max_escalations = 6;
};

/// estimates[s][l] for set s at level l, all from one set of paths.
struct SupTailTable {
  std::vector<std::vector<TailEstimate>> estimates;
  double barrier = 0.0;
  int escalations = 0;
  std::int64_t total_steps = 0;
};

SupTailTable estimate_sup_tail_table(const ModulatedModel& model, std::span<const double> levels,
                                     std::span<const StateSet> sets, std::int64_t n_samples,
                                     std::uint64_t seed, const SupTailOptions& options = {});

TailEstimate estimate_sup_tail(const ModulatedModel& model, double y, const StateSet& set,
                               std::optional<double> barrier, std::int64_t n_samples,
                               std::uint64_t seed, int workers = 1);

/// Time-average of 1{W_n > y} over complete joint cycles (X regenerates and
/// W_{n-1} = 0) after burn-in, with a cycle-block bootstrap CI.
std::vector<TailEstimate> estimate_stationary_wait_levels(const ModulatedModel& model,
                                                          std::span<const double> levels,
                                                          std::int64_t burn_in_cycles,
                                                          std::int64_t n_cycles,
                                                          std::uint64_t seed);

TailEstimate estimate_stationary_wait(const ModulatedModel& model, double y,
                                      std::int64_t burn_in_cycles, std::int64_t n_cycles,
                                      std::uint64_t seed);

struct AsymptoticReport {
  std::string model_kind;
  std::vector<double> levels;
  std::vector<TailEstimate> empirical;
  std::vector<double> theoretical;
  std::vector<double> ratios;
  std::vector<double> ratio_lo;
  std::vector<double> ratio_hi;
  /// Least-squares slope of ratio against log y.
  double trend_slope = 0.0;
  std::string trend;
  /// Classical baseline only: series bracket per level.
  std::vector<SeriesValue> series;
  /// Models carrying an alternative asymptotic: its prediction per level.
  std::vector<double> alternative;
  std::vector<std::string> warnings;
};

AsymptoticReport ratio_report(const ModulatedModel& model, std::span<const double> levels,
                              const StateSet& set, std::int64_t n_samples, std::uint64_t seed,
                              const SupTailOptions& options = {});

/// Same report for the stationary waiting time, set B = all states.
AsymptoticReport stationary_ratio_report(const ModulatedModel& model,
                                         std::span<const double> levels,
                                         std::int64_t burn_in_cycles, std::int64_t n_cycles,
                                         std::uint64_t seed);

/// Single-state walk with i.i.d. increments xi.
ModulatedModel iid_model(const Distribution& xi);

AsymptoticReport classical_baseline(const Distribution& xi, std::span<const double> levels,
                                    std::int64_t n_samples, std::uint64_t seed,
                                    const SupTailOptions& options = {});

/// Columns y,p_hat,se,lo,hi,theory,ratio,bias_bound.
void write_report_csv(const AsymptoticReport& report, std::ostream& out);
std::string report_json(const AsymptoticReport& report);

}  // namespace modwalk
