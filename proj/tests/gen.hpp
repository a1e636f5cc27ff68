#pragma once

// Seeded input generators for property tests. Each test draws its cases
// from a fixed seed so failures replay exactly.

#include <cstdint>
#include <random>
#include <vector>

#include "modwalk/distributions.hpp"

namespace testgen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  /// Open (0,1), away from the endpoints where quantiles blow up.
  double unit() { return uniform(1e-9, 1.0 - 1e-9); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  /// A law with a continuous heavy or light tail, possibly shifted or negated.
  modwalk::Distribution continuous_law() {
    using modwalk::Distribution;
    Distribution d = Distribution::exponential(1.0);
    switch (integer(0, 3)) {
      case 0: d = Distribution::pareto(uniform(1.2, 4.0), uniform(0.5, 3.0)); break;
      case 1: d = Distribution::lognormal(uniform(-1.0, 1.0), uniform(0.3, 1.5)); break;
      case 2: d = Distribution::heavy_weibull(uniform(0.3, 0.9), uniform(0.5, 2.0)); break;
      default: d = Distribution::exponential(uniform(0.2, 3.0)); break;
    }
    if (coin(0.4)) d = Distribution::shifted(d, uniform(-5.0, 5.0));
    return d;
  }

  modwalk::Distribution discrete_law(int max_atoms = 5) {
    std::vector<modwalk::Atom> atoms;
    const int k = integer(1, max_atoms);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      const double w = uniform(0.05, 1.0);
      atoms.push_back({static_cast<double>(integer(-6, 6)), w});
      total += w;
    }
    for (auto& a : atoms) a.prob /= total;
    return modwalk::Distribution::discrete(std::move(atoms));
  }

  /// Stochastic matrix with all entries positive (irreducible, aperiodic).
  std::vector<std::vector<double>> positive_stochastic(int n) {
    std::vector<std::vector<double>> p(static_cast<std::size_t>(n));
    for (auto& row : p) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        row.push_back(uniform(0.05, 1.0));
        s += row.back();
      }
      for (auto& v : row) v /= s;
    }
    return p;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace testgen
