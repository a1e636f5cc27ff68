#include "modwalk/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "modwalk/errors.hpp"

namespace modwalk {

Walker::Walker(const ModulatedModel& model, std::uint64_t seed, std::uint64_t index)
    : model_(&model),
      states_(model.make_generator(substream_seed(seed, index, 1))),
      inc_(substream_seed(seed, index, 0)) {}

WalkPath generate_path(const ModulatedModel& model, std::int64_t n_steps, std::uint64_t seed) {
  if (n_steps < 1) throw DomainError("generate_path needs n_steps >= 1");
  Walker walker(model, seed);
  WalkPath p;
  const auto n = static_cast<std::size_t>(n_steps);
  p.states.reserve(n);
  p.increments.reserve(n);
  p.partial_sums.reserve(n + 1);
  p.running_max.reserve(n + 1);
  p.partial_sums.push_back(0.0);
  p.running_max.push_back(0.0);
  for (std::int64_t i = 1; i <= n_steps; ++i) {
    const auto d = walker.step();
    p.states.push_back(d.state);
    p.increments.push_back(d.increment);
    const double s = p.partial_sums.back() + d.increment;
    p.partial_sums.push_back(s);
    p.running_max.push_back(std::max(p.running_max.back(), s));
    if (d.regeneration) p.regeneration_indices.push_back(i);
  }
  p.length = n_steps;
  return p;
}

std::int64_t ruled_out_horizon(double barrier, double drift) {
  return static_cast<std::int64_t>(std::ceil(2.0 * barrier / drift));
}

LevelScan scan_levels(Walker& walker, std::span<const double> levels, double barrier,
                      double drift, std::int64_t max_steps) {
  LevelScan r;
  const std::size_t k = levels.size();
  r.crossing.assign(k, std::nullopt);
  r.beyond.assign(k, false);
  if (k == 0) return r;
  const std::int64_t horizon = ruled_out_horizon(barrier, drift);
  std::size_t next_level = 0;   // first level not yet crossed
  std::size_t next_beyond = 0;  // first level whose y + barrier is not yet crossed
  double s = 0.0;
  for (std::int64_t n = 1; n <= max_steps; ++n) {
    const auto d = walker.step();
    s += d.increment;
    while (next_level < k && s > levels[next_level]) r.crossing[next_level++] = d.state;
    while (next_beyond < k && s > levels[next_beyond] + barrier) r.beyond[next_beyond++] = true;
    if (next_beyond == k || (s <= -barrier && n >= horizon)) {
      r.steps = n;
      return r;
    }
  }
  r.steps = max_steps;
  r.inconclusive = true;
  return r;
}

FirstPassage first_passage(const ModulatedModel& model, double y, double barrier,
                           std::int64_t max_steps, std::uint64_t seed) {
  if (!(y > 0.0) || !(barrier > 0.0)) throw DomainError("first_passage needs y > 0 and barrier > 0");
  if (!(model.drift > 0.0)) throw InvalidModel("first_passage needs a positive drift");
  Walker walker(model, seed);
  const std::int64_t horizon = ruled_out_horizon(barrier, model.drift);
  double s = 0.0;
  double lowest = 0.0;
  for (std::int64_t n = 1; n <= max_steps; ++n) {
    const auto d = walker.step();
    s += d.increment;
    lowest = std::min(lowest, s);
    if (s > y) return {Crossed{n, d.state}, barrier};
    if (s <= -barrier && n >= horizon) return {RuledOut{lowest}, barrier};
  }
  return {Inconclusive{max_steps}, barrier};
}

std::vector<double> lindley_path(const ModulatedModel& model, std::int64_t n_steps,
                                 std::uint64_t seed) {
  if (n_steps < 1) throw DomainError("lindley_path needs n_steps >= 1");
  Walker walker(model, seed);
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(n_steps));
  double cur = 0.0;
  for (std::int64_t i = 0; i < n_steps; ++i) {
    cur = std::max(0.0, cur + walker.step().increment);
    w.push_back(cur);
  }
  return w;
}

CycleMaxima cycle_maxima(const WalkPath& path) {
  CycleMaxima out;
  const auto& r = path.regeneration_indices;
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    const auto start = r[k];
    const double base = path.partial_sums[static_cast<std::size_t>(start - 1)];
    double best = -std::numeric_limits<double>::infinity();
    for (auto n = start; n < r[k + 1]; ++n) {
      best = std::max(best, path.partial_sums[static_cast<std::size_t>(n)] - base);
    }
    out.maxima.push_back(best);
  }
  if (out.maxima.empty()) out.warnings.push_back("path contains no complete cycle");
  return out;
}

void write_path_csv(const WalkPath& path, std::ostream& out) {
  out << "n,state,increment,S_n,M_n,regen_flag\n";
  std::size_t next = 0;
  char buf[160];
  for (std::int64_t n = 1; n <= path.length; ++n) {
    const auto i = static_cast<std::size_t>(n);
    bool flag = false;
    if (next < path.regeneration_indices.size() && path.regeneration_indices[next] == n) {
      flag = true;
      ++next;
    }
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%d\n", static_cast<long long>(n),
                  path.states[i - 1].value, path.increments[i - 1], path.partial_sums[i],
                  path.running_max[i], flag ? 1 : 0);
    out << buf;
  }
}

}  // namespace modwalk
