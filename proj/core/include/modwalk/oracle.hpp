#pragma once

// Exact answers on small lattice instances, used as ground truth for the
// Monte Carlo side.

#include <cstdint>
#include <utility>
#include <vector>

#include "modwalk/distributions.hpp"
#include "modwalk/modulation.hpp"

namespace modwalk {

/// Finite modulated walk with increments on the lattice hZ.
struct LatticeModel {
  double h = 1.0;
  std::vector<std::vector<double>> transition;
  /// Per state: (k, p) pairs meaning P(xi^x = k h) = p.
  std::vector<std::vector<std::pair<std::int64_t, double>>> pmf;
  /// Law of X_1; empty means the stationary law.
  std::vector<double> initial;

  static LatticeModel iid(double h, std::vector<std::pair<std::int64_t, double>> pmf);
  /// Gambler's ruin: +1 with probability p, -1 otherwise.
  static LatticeModel plus_minus_one(double p);

  std::size_t states() const { return pmf.size(); }
  std::vector<double> drifts() const;
  /// Checks pmfs, the chain and the sign of the stationary drift.
  void validate() const;
};

/// Same walk as a ModulatedModel, for Monte Carlo runs against the oracle.
ModulatedModel to_modulated(const LatticeModel& lm);

struct ExactTail {
  double value = 0.0;  // lower solution
  double upper = 0.0;  // upper solution
  double truncation_bias_bound = 0.0;
  std::int64_t grid_height = 0;
  std::int64_t iterations = 0;
  double lundberg_exponent = 0.0;
};

/// P(M > y) by Gauss-Seidel on the headroom recursion, truncated at depth
/// `depth` below the origin. Below the truncation the lower solution uses 0
/// and the upper solution a Lundberg bound.
ExactTail dp_sup_tail(const LatticeModel& lm, double y, double depth, double tol = 1e-13,
                      std::int64_t max_sweeps = 1'000'000);

struct LindleyTable {
  double h = 1.0;
  /// mass[x][k] = P(X_n = x, W_n = k h, W never above height so far).
  /// For n = 0 the state coordinate carries the law of X_1.
  std::vector<std::vector<double>> mass;
  double overflow = 0.0;

  std::vector<double> w_marginal() const;
  std::vector<double> state_marginal() const;
};

LindleyTable dp_lindley_dist(const LatticeModel& lm, std::int64_t n, double height);

struct SeriesValue {
  double partial_sum = 0.0;
  std::int64_t n_terms = 0;
  double lower = 0.0;  // partial sum + lower remainder bound
  double upper = 0.0;  // partial sum + upper remainder bound
};

/// sum_{n>=1} P(xi > y + n g). n_terms <= 0 picks N so that the remainder
/// bracket is narrower than 1e-6 of the partial sum.
SeriesValue veraverbeke_series(double g, const Distribution& law, double y,
                               std::int64_t n_terms = 0);

}  // namespace modwalk
