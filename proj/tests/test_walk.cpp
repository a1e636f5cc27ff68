#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "gen.hpp"
#include "modwalk/estimate.hpp"
#include "modwalk/modulation.hpp"
#include "modwalk/oracle.hpp"
#include "modwalk/walk.hpp"

using namespace modwalk;

namespace {

Distribution pareto_shift() { return Distribution::shifted(Distribution::pareto(2.5, 1.0), -3.0); }

// Deterministic cycle of per-label point increments, tau = seq length.
ModulatedModel cycle_model(std::vector<double> increments) {
  RegenSpec spec;
  const auto n = increments.size();
  spec.tau_law = Distribution::point(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) spec.labels.push_back("s" + std::to_string(i));
  spec.cycle_builder = [n](std::int64_t, Rng&) {
    std::vector<State> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(labeled(static_cast<int>(i)));
    return out;
  };
  spec.occupation = [n](std::int64_t) { return std::vector<double>(n, 1.0); };
  std::vector<Distribution> laws;
  for (double v : increments) laws.push_back(Distribution::point(v));
  return regenerative_model(spec, IncrementFamily::per_label(laws), Distribution::pareto(2.0, 1.0));
}

// Single-state model with a point-mass increment. For v > 0 the drift field
// is left positive on purpose: only path mechanics are exercised.
ModulatedModel constant_model(double v) {
  auto m = iid_model(Distribution::point(-1.0));
  m.increments = IncrementFamily::per_label({Distribution::point(v)});
  m.drift = std::abs(v);
  return m;
}

}  // namespace

TEST(GeneratePath, DeterministicDescent) {
  const auto p = generate_path(constant_model(-1.0), 3, 1);
  ASSERT_EQ(p.length, 3);
  EXPECT_EQ(p.partial_sums, (std::vector<double>{0.0, -1.0, -2.0, -3.0}));
  EXPECT_EQ(p.running_max, (std::vector<double>{0.0, 0.0, 0.0, 0.0}));
}

TEST(GeneratePath, TandemDeterministicIncrements) {
  const auto m = tandem_departure_process(Distribution::point(3.0), Distribution::point(1.0),
                                          Distribution::point(1.0));
  const auto p = generate_path(m, 10, 4);
  EXPECT_NEAR(p.increments[0], -3.0, 1e-14);
  for (std::size_t i = 1; i < p.increments.size(); ++i) EXPECT_NEAR(p.increments[i], -2.0, 1e-14);
}

TEST(GeneratePath, SameSeedSamePath) {
  const auto m = finite_markov_model({{0.8, 0.2}, {0.3, 0.7}},
                                     {pareto_shift(), Distribution::shifted(Distribution::exponential(1.0), -1.0)},
                                     pareto_shift());
  const auto a = generate_path(m, 500, 42);
  const auto b = generate_path(m, 500, 42);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.increments, b.increments);
  EXPECT_EQ(a.regeneration_indices, b.regeneration_indices);
  std::ostringstream sa, sb;
  write_path_csv(a, sa);
  write_path_csv(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(generate_path(m, 500, 43).increments, a.increments);
}

TEST(GeneratePath, CsvHeader) {
  std::ostringstream os;
  write_path_csv(generate_path(constant_model(-1.0), 2, 1), os);
  EXPECT_EQ(os.str(), "n,state,increment,S_n,M_n,regen_flag\n1,0,-1,-1,0,1\n2,0,-1,-2,0,1\n");
}

TEST(FirstPassage, UpwardCrossing) {
  const auto fp = first_passage(constant_model(2.0), 3.0, 10.0, 100, 1);
  ASSERT_TRUE(fp.crossed());
  EXPECT_EQ(std::get<Crossed>(fp.outcome).n, 2);
}

TEST(FirstPassage, DescentRuledOut) {
  const auto m = constant_model(-1.0);
  const auto fp = first_passage(m, 3.0, 5.0, 1000, 1);
  ASSERT_TRUE(fp.ruled_out());
  EXPECT_EQ(ruled_out_horizon(5.0, 1.0), 10);
  EXPECT_LE(std::get<RuledOut>(fp.outcome).min_level_reached, -5.0);
  EXPECT_DOUBLE_EQ(fp.barrier_used, 5.0);
}

TEST(FirstPassage, StepCapIsInconclusive) {
  const auto fp = first_passage(constant_model(-1.0), 3.0, 5.0, 4, 1);
  EXPECT_TRUE(fp.inconclusive());
}

TEST(FirstPassage, GamblersRuinHalf) {
  const auto m = to_modulated(LatticeModel::plus_minus_one(1.0 / 3.0));
  int hits = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    hits += first_passage(m, 0.5, 40.0, 100000, substream_seed(9, static_cast<std::uint64_t>(i))).crossed();
  }
  const double p = static_cast<double>(hits) / n;
  EXPECT_NEAR(p, 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST(FirstPassage, PropertyConsistentWithPath) {
  const auto m = iid_model(pareto_shift());
  testgen::Gen g(31);
  for (int trial = 0; trial < 300; ++trial) {
    const double y = g.uniform(0.1, 20.0);
    const auto seed = static_cast<std::uint64_t>(g.integer(0, 1 << 30));
    const auto fp = first_passage(m, y, 50.0, 5000, seed);
    if (!fp.crossed()) continue;
    const auto n = std::get<Crossed>(fp.outcome).n;
    const auto path = generate_path(m, n, seed);
    for (std::int64_t i = 1; i < n; ++i) EXPECT_LE(path.partial_sums[static_cast<std::size_t>(i)], y);
    EXPECT_GT(path.partial_sums[static_cast<std::size_t>(n)], y);
  }
}

TEST(Lindley, ReflectsAtZero) {
  const auto w = lindley_path(constant_model(-1.0), 5, 1);
  for (double v : w) EXPECT_EQ(v, 0.0);
}

TEST(Lindley, HandRecursion) {
  // A trailing -10 keeps the cycle mean negative; the first three steps are +2,-1,+1.
  const auto w = lindley_path(cycle_model({2.0, -1.0, 1.0, -10.0}), 3, 1);
  EXPECT_EQ(w, (std::vector<double>{2.0, 1.0, 2.0}));
}

TEST(Lindley, PropertySameIncrementsAsPath) {
  testgen::Gen g(32);
  const auto m = iid_model(pareto_shift());
  for (int trial = 0; trial < 50; ++trial) {
    const auto seed = static_cast<std::uint64_t>(g.integer(0, 1 << 30));
    const auto n = g.integer(1, 400);
    const auto path = generate_path(m, n, seed);
    const auto w = lindley_path(m, n, seed);
    double ref = 0.0;
    for (int i = 0; i < n; ++i) {
      ref = std::max(0.0, ref + path.increments[static_cast<std::size_t>(i)]);
      EXPECT_EQ(w[static_cast<std::size_t>(i)], ref);
    }
  }
}

TEST(Lindley, DualityWithRunningMax) {
  const auto m = iid_model(pareto_shift());
  const int n = 20000;
  std::vector<double> w, mx;
  for (int i = 0; i < n; ++i) {
    w.push_back(lindley_path(m, 50, substream_seed(1, static_cast<std::uint64_t>(i))).back());
    mx.push_back(generate_path(m, 50, substream_seed(2, static_cast<std::uint64_t>(i))).running_max.back());
  }
  std::sort(w.begin(), w.end());
  std::sort(mx.begin(), mx.end());
  // Two-sample KS distance with ties handled by jumping over equal values.
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < w.size() && j < mx.size()) {
    const double v = std::min(w[i], mx[j]);
    while (i < w.size() && w[i] == v) ++i;
    while (j < mx.size() && mx[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / n));
  }
  EXPECT_LT(d, 1.628 * std::sqrt(2.0 / n));
}

TEST(CycleMaxima, HandComputed) {
  const auto path = generate_path(cycle_model({1.0, -3.0}), 10, 1);
  const auto cm = cycle_maxima(path);
  ASSERT_EQ(cm.maxima.size(), 4u);  // the fifth cycle has no observed successor
  for (double v : cm.maxima) EXPECT_EQ(v, 1.0);
}

TEST(CycleMaxima, DescendingCycles) {
  const auto path = generate_path(cycle_model({-1.0, -1.0}), 8, 1);
  const auto cm = cycle_maxima(path);
  ASSERT_FALSE(cm.maxima.empty());
  for (double v : cm.maxima) EXPECT_EQ(v, -1.0);
}

TEST(CycleMaxima, IncompleteCycleIsEmpty) {
  const auto path = generate_path(cycle_model({-1.0, -1.0, -1.0}), 2, 1);
  const auto cm = cycle_maxima(path);
  EXPECT_TRUE(cm.maxima.empty());
  EXPECT_FALSE(cm.warnings.empty());
}

TEST(PathProperty, RunningMaxAlgebra) {
  testgen::Gen g(33);
  const auto m = finite_markov_model({{0.8, 0.2}, {0.3, 0.7}},
                                     {pareto_shift(), Distribution::shifted(Distribution::exponential(1.0), -1.0)},
                                     pareto_shift());
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = generate_path(m, g.integer(1, 1000), static_cast<std::uint64_t>(g.integer(0, 1 << 30)));
    for (std::size_t i = 0; i < p.running_max.size(); ++i) {
      EXPECT_GE(p.running_max[i], 0.0);
      EXPECT_GE(p.running_max[i], p.partial_sums[i]);
      if (i > 0) {
        EXPECT_GE(p.running_max[i], p.running_max[i - 1]);
      }
    }
  }
}

TEST(PathProperty, StochasticallyLargerFamilyGivesLargerPath) {
  // Shared uniforms: Pareto with a heavier tail dominates quantile by quantile.
  testgen::Gen g(34);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = g.uniform(1.5, 3.0);
    const auto small = iid_model(Distribution::shifted(Distribution::pareto(a + 0.5, 1.0), -4.0));
    const auto big = iid_model(Distribution::shifted(Distribution::pareto(a, 1.0), -4.0));
    const auto seed = static_cast<std::uint64_t>(g.integer(0, 1 << 30));
    const auto ps = generate_path(small, 300, seed);
    const auto pb = generate_path(big, 300, seed);
    for (std::size_t i = 0; i < ps.partial_sums.size(); ++i) EXPECT_LE(ps.partial_sums[i], pb.partial_sums[i]);
  }
}

TEST(ScanLevels, AgreesWithFirstPassage) {
  const auto m = iid_model(pareto_shift());
  const double levels[] = {2.0, 8.0, 30.0};
  for (std::uint64_t s = 0; s < 300; ++s) {
    Walker w(m, s, 0);
    const auto scan = scan_levels(w, levels, 60.0, m.drift, 100000);
    for (std::size_t l = 0; l < 3; ++l) {
      const auto fp = first_passage(m, levels[l], 60.0, 100000, s);
      ASSERT_EQ(scan.crossing[l].has_value(), fp.crossed()) << s << " " << l;
    }
  }
}
