#include "modwalk/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "modwalk/errors.hpp"
#include "modwalk/walk.hpp"

namespace modwalk {

namespace {

constexpr double kZ = 1.959963984540054;

void check_increasing(std::span<const double> levels) {
  if (levels.empty()) throw DomainError("level list is empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0)) throw DomainError("levels must be positive");
    if (i > 0 && !(levels[i] > levels[i - 1])) throw DomainError("levels must increase");
  }
}

double one_sided_upper(std::int64_t n) {
  return 1.0 - std::pow(0.05, 1.0 / static_cast<double>(n));
}

TailEstimate binomial_estimate(double y, std::int64_t hits, std::int64_t n) {
  TailEstimate e;
  e.y = y;
  e.n_samples = n;
  e.p_hat = static_cast<double>(hits) / static_cast<double>(n);
  e.std_err = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(n));
  if (hits == 0) {
    e.too_deep = true;
    e.ci_lo = 0.0;
    e.ci_hi = one_sided_upper(n);
    e.warnings.push_back("no paths crossed this level; too deep for crude Monte Carlo at this n");
  } else {
    std::tie(e.ci_lo, e.ci_hi) = wilson_interval(hits, n);
  }
  return e;
}

struct PathCounts {
  std::vector<std::vector<std::int64_t>> hits;  // [set][level]
  std::vector<std::int64_t> any;                // [level]
  std::vector<std::int64_t> beyond;             // [level]
  std::int64_t inconclusive = 0;
  std::int64_t steps = 0;

  PathCounts(std::size_t sets, std::size_t levels)
      : hits(sets, std::vector<std::int64_t>(levels, 0)), any(levels, 0), beyond(levels, 0) {}

  void add(const PathCounts& o) {
    for (std::size_t s = 0; s < hits.size(); ++s) {
      for (std::size_t l = 0; l < any.size(); ++l) hits[s][l] += o.hits[s][l];
    }
    for (std::size_t l = 0; l < any.size(); ++l) {
      any[l] += o.any[l];
      beyond[l] += o.beyond[l];
    }
    inconclusive += o.inconclusive;
    steps += o.steps;
  }
};

PathCounts run_paths(const ModulatedModel& model, std::span<const double> levels,
                     std::span<const StateSet> sets, double barrier, std::int64_t n,
                     std::uint64_t seed, int workers, std::int64_t max_steps) {
  const auto w = static_cast<std::int64_t>(std::max(1, workers));
  std::vector<PathCounts> partial(static_cast<std::size_t>(w), PathCounts(sets.size(), levels.size()));
  auto work = [&](std::int64_t k) {
    auto& c = partial[static_cast<std::size_t>(k)];
    const std::int64_t begin = n * k / w;
    const std::int64_t end = n * (k + 1) / w;
    for (std::int64_t i = begin; i < end; ++i) {
      Walker walker(model, seed, static_cast<std::uint64_t>(i));
      const auto r = scan_levels(walker, levels, barrier, model.drift, max_steps);
      c.steps += r.steps;
      if (r.inconclusive) ++c.inconclusive;
      for (std::size_t l = 0; l < levels.size(); ++l) {
        if (!r.crossing[l]) break;
        ++c.any[l];
        if (r.beyond[l]) ++c.beyond[l];
        for (std::size_t s = 0; s < sets.size(); ++s) {
          if (sets[s](*r.crossing[l])) ++c.hits[s][l];
        }
      }
    }
  };
  if (w == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::int64_t k = 0; k < w; ++k) pool.emplace_back(work, k);
    for (auto& t : pool) t.join();
  }
  PathCounts total(sets.size(), levels.size());
  for (const auto& c : partial) total.add(c);
  return total;
}

// Doubles from max(y, 1) until the proxy tail beyond y + barrier is at most
// 4% of the proxy at y.
double presize_barrier(const ModulatedModel& model, double y) {
  const Distribution& proxy = model.alternative ? model.alternative->reference : model.reference;
  const double base = proxy.excess_mean(y);
  double barrier = std::max(y, 1.0);
  if (!(base > 0.0)) return barrier;
  for (int i = 0; i < 40 && proxy.excess_mean(y + barrier) > 0.04 * base; ++i) barrier *= 2.0;
  return barrier;
}

std::string trend_of(double slope) {
  if (slope > 0.0) return "increasing";
  if (slope < 0.0) return "decreasing";
  return "flat";
}

double log_slope(const std::vector<double>& levels, const std::vector<double>& values) {
  std::vector<double> x;
  std::vector<double> v;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (std::isfinite(values[i])) {
      x.push_back(std::log(levels[i]));
      v.push_back(values[i]);
    }
  }
  if (x.size() < 2) return 0.0;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (v[i] - mv);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

void fill_ratios(AsymptoticReport& r) {
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    const double t = r.theoretical[i];
    const auto& e = r.empirical[i];
    auto div = [t](double p) {
      if (t > 0.0) return p / t;
      return p > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    r.ratios.push_back(div(e.p_hat));
    r.ratio_lo.push_back(div(e.ci_lo));
    r.ratio_hi.push_back(div(e.ci_hi));
  }
  r.trend_slope = log_slope(r.levels, r.ratios);
  r.trend = trend_of(r.trend_slope);
}

}  // namespace

std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n) {
  if (n <= 0) throw DomainError("wilson_interval needs n > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = kZ * kZ;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = kZ * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::clamp(std::min(center - half, p), 0.0, 1.0),
          std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

double asymptotic_prediction(const ModulatedModel& model, double y, const StateSet& set,
                             std::vector<std::string>* warnings) {
  validate(model);
  const double fs = model.reference.integrated_tail(y);
  if (fs >= 1.0 && warnings) {
    warnings->push_back("integrated tail is capped at 1 at y = " + std::to_string(y) +
                        "; level is outside the asymptotic range");
  }
  return limit_constant(model, set) / model.drift * fs;
}

SupTailTable estimate_sup_tail_table(const ModulatedModel& model, std::span<const double> levels,
                                     std::span<const StateSet> sets, std::int64_t n_samples,
                                     std::uint64_t seed, const SupTailOptions& options) {
  validate(model);
  check_increasing(levels);
  if (n_samples < 1) throw DomainError("n_samples must be at least 1");
  if (sets.empty()) throw DomainError("need at least one state set");

  SupTailTable table;
  double barrier = options.barrier ? *options.barrier : presize_barrier(model, levels.back());
  if (!(barrier > 0.0)) throw DomainError("barrier must be positive");
  const bool automatic = !options.barrier;

  PathCounts counts(sets.size(), levels.size());
  for (int round = 0;; ++round) {
    const std::int64_t cap = options.max_steps > 0
                                 ? options.max_steps
                                 : 20 * ruled_out_horizon(barrier, model.drift) + 1000;
    counts = run_paths(model, levels, sets, barrier, n_samples, seed, options.workers, cap);
    table.total_steps += counts.steps;
    bool ok = true;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (static_cast<double>(counts.beyond[l]) > 0.05 * static_cast<double>(counts.any[l])) ok = false;
    }
    if (ok || !automatic || round >= options.max_escalations) break;
    barrier *= 2.0;
    ++table.escalations;
  }
  if (static_cast<double>(counts.inconclusive) >= 1e-3 * static_cast<double>(n_samples)) {
    throw InconclusiveRun(std::to_string(counts.inconclusive) + " of " +
                          std::to_string(n_samples) +
                          " paths hit the step cap without crossing or being ruled out");
  }

  table.barrier = barrier;
  table.estimates.assign(sets.size(), {});
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      auto e = binomial_estimate(levels[l], counts.hits[s][l], n_samples);
      e.seed = seed;
      e.barrier = barrier;
      e.n_inconclusive = counts.inconclusive;
      e.truncation_bias_bound =
          counts.beyond[l] == 0 ? one_sided_upper(n_samples)
                                : wilson_interval(counts.beyond[l], n_samples).second;
      if (static_cast<double>(counts.beyond[l]) > 0.05 * static_cast<double>(counts.any[l])) {
        e.warnings.push_back("barrier rule not met: P(M > y + barrier) exceeds 5% of P(M > y)");
      }
      table.estimates[s].push_back(std::move(e));
    }
  }
  return table;
}

TailEstimate estimate_sup_tail(const ModulatedModel& model, double y, const StateSet& set,
                               std::optional<double> barrier, std::int64_t n_samples,
                               std::uint64_t seed, int workers) {
  const double levels[] = {y};
  const StateSet sets[] = {set};
  SupTailOptions opts;
  opts.barrier = barrier;
  opts.workers = workers;
  return estimate_sup_tail_table(model, levels, sets, n_samples, seed, opts).estimates[0][0];
}

std::vector<TailEstimate> estimate_stationary_wait_levels(const ModulatedModel& model,
                                                          std::span<const double> levels,
                                                          std::int64_t burn_in_cycles,
                                                          std::int64_t n_cycles,
                                                          std::uint64_t seed) {
  validate(model);
  check_increasing(levels);
  if (burn_in_cycles < 1) throw DomainError("burn_in_cycles must be at least 1");
  if (n_cycles < 30) {
    throw InsufficientData("stationary-wait estimator needs at least 30 complete cycles");
  }
  const std::size_t nl = levels.size();
  const std::int64_t block = std::max<std::int64_t>(1, (n_cycles + 999) / 1000);

  std::vector<double> block_len;
  std::vector<std::vector<double>> block_hits(nl);
  double sum_len = 0.0;
  double sum_len2 = 0.0;
  std::vector<double> sum_y(nl, 0.0);
  std::vector<double> sum_y2(nl, 0.0);
  std::vector<double> sum_yl(nl, 0.0);

  Walker walker(model, seed, 0);
  const std::int64_t cap = 20'000 * n_cycles + 10'000'000;
  double w = 0.0;
  std::int64_t cycle = 0;  // index of the joint cycle in progress
  std::int64_t recorded = 0;
  double len = 0.0;
  std::vector<double> hits(nl, 0.0);

  auto record = [&] {
    if (recorded % block == 0) {
      block_len.push_back(0.0);
      for (auto& b : block_hits) b.push_back(0.0);
    }
    block_len.back() += len;
    sum_len += len;
    sum_len2 += len * len;
    for (std::size_t l = 0; l < nl; ++l) {
      block_hits[l].back() += hits[l];
      sum_y[l] += hits[l];
      sum_y2[l] += hits[l] * hits[l];
      sum_yl[l] += hits[l] * len;
    }
    ++recorded;
  };

  for (std::int64_t n = 0; n < cap && recorded < n_cycles; ++n) {
    const auto d = walker.step();
    if (d.regeneration && w == 0.0) {
      if (cycle > burn_in_cycles) record();
      ++cycle;
      len = 0.0;
      std::fill(hits.begin(), hits.end(), 0.0);
      if (recorded == n_cycles) break;
    }
    w = std::max(0.0, w + d.increment);
    if (cycle >= 1) {
      len += 1.0;
      for (std::size_t l = 0; l < nl && w > levels[l]; ++l) hits[l] += 1.0;
    }
  }
  if (recorded < 30) {
    throw InsufficientData("only " + std::to_string(recorded) +
                           " complete regeneration cycles after burn-in; need at least 30");
  }

  // Percentile bootstrap over cycle blocks.
  const std::size_t nb = block_len.size();
  Rng boot(substream_seed(seed, 0, 2));
  std::vector<std::vector<double>> resampled(nl);
  for (int b = 0; b < 1000; ++b) {
    double bl = 0.0;
    std::vector<double> bh(nl, 0.0);
    for (std::size_t j = 0; j < nb; ++j) {
      const auto pick = std::min(nb - 1, static_cast<std::size_t>(boot.uniform() * static_cast<double>(nb)));
      bl += block_len[pick];
      for (std::size_t l = 0; l < nl; ++l) bh[l] += block_hits[l][pick];
    }
    for (std::size_t l = 0; l < nl; ++l) resampled[l].push_back(bh[l] / bl);
  }

  const double k = static_cast<double>(recorded);
  const double mean_len = sum_len / k;
  std::vector<TailEstimate> out;
  for (std::size_t l = 0; l < nl; ++l) {
    TailEstimate e;
    e.y = levels[l];
    e.seed = seed;
    e.n_samples = recorded;
    e.p_hat = sum_y[l] / sum_len;
    const double r = e.p_hat;
    const double ss = std::max(0.0, sum_y2[l] - 2.0 * r * sum_yl[l] + r * r * sum_len2);
    e.std_err = std::sqrt(ss / (k * (k - 1.0))) / mean_len;
    auto& v = resampled[l];
    std::sort(v.begin(), v.end());
    e.ci_lo = std::min(e.p_hat, v[24]);
    e.ci_hi = std::max(e.p_hat, v[974]);
    if (sum_y[l] == 0.0) {
      e.too_deep = true;
      e.ci_hi = one_sided_upper(recorded);
      e.warnings.push_back("W never exceeded this level in the sampled cycles");
    }
    if (recorded < n_cycles) {
      e.warnings.push_back("step cap reached after " + std::to_string(recorded) + " cycles");
    }
    out.push_back(std::move(e));
  }
  return out;
}

TailEstimate estimate_stationary_wait(const ModulatedModel& model, double y,
                                      std::int64_t burn_in_cycles, std::int64_t n_cycles,
                                      std::uint64_t seed) {
  const double levels[] = {y};
  return estimate_stationary_wait_levels(model, levels, burn_in_cycles, n_cycles, seed).front();
}

AsymptoticReport ratio_report(const ModulatedModel& model, std::span<const double> levels,
                              const StateSet& set, std::int64_t n_samples, std::uint64_t seed,
                              const SupTailOptions& options) {
  const StateSet sets[] = {set};
  auto table = estimate_sup_tail_table(model, levels, sets, n_samples, seed, options);
  AsymptoticReport r;
  r.model_kind = model.kind;
  r.levels.assign(levels.begin(), levels.end());
  r.empirical = std::move(table.estimates[0]);
  for (double y : levels) {
    r.theoretical.push_back(asymptotic_prediction(model, y, set, &r.warnings));
    if (model.alternative) r.alternative.push_back(model.alternative->predict(y));
  }
  fill_ratios(r);
  r.warnings.insert(r.warnings.end(), model.warnings.begin(), model.warnings.end());
  if (table.escalations > 0) {
    r.warnings.push_back("barrier escalated " + std::to_string(table.escalations) +
                         " times to " + std::to_string(table.barrier));
  }
  return r;
}

AsymptoticReport stationary_ratio_report(const ModulatedModel& model,
                                         std::span<const double> levels,
                                         std::int64_t burn_in_cycles, std::int64_t n_cycles,
                                         std::uint64_t seed) {
  AsymptoticReport r;
  r.model_kind = model.kind;
  r.levels.assign(levels.begin(), levels.end());
  r.empirical = estimate_stationary_wait_levels(model, levels, burn_in_cycles, n_cycles, seed);
  for (double y : levels) r.theoretical.push_back(asymptotic_prediction(model, y, all_states(), &r.warnings));
  fill_ratios(r);
  return r;
}

ModulatedModel iid_model(const Distribution& xi) {
  auto m = finite_markov_model({{1.0}}, {xi}, xi);
  m.kind = "iid";
  m.labels = {"x"};
  return m;
}

AsymptoticReport classical_baseline(const Distribution& xi, std::span<const double> levels,
                                    std::int64_t n_samples, std::uint64_t seed,
                                    const SupTailOptions& options) {
  const auto model = iid_model(xi);
  auto r = ratio_report(model, levels, all_states(), n_samples, seed, options);
  for (double y : levels) r.series.push_back(veraverbeke_series(model.drift, xi, y));
  return r;
}

void write_report_csv(const AsymptoticReport& report, std::ostream& out) {
  out << "y,p_hat,se,lo,hi,theory,ratio,bias_bound\n";
  char buf[320];
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& e = report.empirical[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  report.levels[i], e.p_hat, e.std_err, e.ci_lo, e.ci_hi, report.theoretical[i],
                  report.ratios[i], e.truncation_bias_bound);
    out << buf;
  }
}

std::string report_json(const AsymptoticReport& report) {
  using nlohmann::json;
  json doc;
  doc["model"] = report.model_kind;
  doc["levels"] = report.levels;
  json emp = json::array();
  for (const auto& e : report.empirical) {
    emp.push_back({{"y", e.y},
                   {"p_hat", e.p_hat},
                   {"std_err", e.std_err},
                   {"ci95", {e.ci_lo, e.ci_hi}},
                   {"truncation_bias_bound", e.truncation_bias_bound},
                   {"n_samples", e.n_samples},
                   {"n_inconclusive", e.n_inconclusive},
                   {"seed", e.seed},
                   {"barrier", e.barrier},
                   {"too_deep", e.too_deep},
                   {"warnings", e.warnings}});
  }
  doc["empirical"] = emp;
  doc["theoretical"] = report.theoretical;
  doc["ratios"] = report.ratios;
  doc["ratio_ci95"] = {report.ratio_lo, report.ratio_hi};
  doc["trend"] = {{"slope_vs_log_y", report.trend_slope}, {"direction", report.trend}};
  if (!report.series.empty()) {
    json s = json::array();
    for (const auto& v : report.series) {
      s.push_back({{"partial_sum", v.partial_sum},
                   {"n_terms", v.n_terms},
                   {"lower", v.lower},
                   {"upper", v.upper}});
    }
    doc["series"] = s;
  }
  if (!report.alternative.empty()) doc["alternative"] = report.alternative;
  doc["warnings"] = report.warnings;
  return doc.dump(2);
}

}  // namespace modwalk
