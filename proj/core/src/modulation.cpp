#include "modwalk/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "modwalk/errors.hpp"

namespace modwalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kAnalysisSeed = 0x6d6f6477616c6bULL;

int pick(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const auto idx = static_cast<int>(it - cumulative.begin());
  return std::min(idx, static_cast<int>(cumulative.size()) - 1);
}

std::vector<double> cumulate(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  return c;
}

class MarkovGenerator final : public StateGenerator {
 public:
  MarkovGenerator(std::shared_ptr<const std::vector<std::vector<double>>> rows,
                  std::shared_ptr<const std::vector<double>> initial, std::uint64_t seed)
      : rows_(std::move(rows)), initial_(std::move(initial)), rng_(seed) {}

  Step next() override {
    if (rows_->size() == 1) return {labeled(0), true};
    const double u = rng_.uniform();
    current_ = current_ < 0 ? pick(*initial_, u) : pick((*rows_)[current_], u);
    return {labeled(current_), current_ == 0};
  }

 private:
  std::shared_ptr<const std::vector<std::vector<double>>> rows_;
  std::shared_ptr<const std::vector<double>> initial_;
  Rng rng_;
  int current_ = -1;
};

std::int64_t draw_length(const Distribution& law, Rng& rng) {
  return static_cast<std::int64_t>(std::llround(law.sample(rng.uniform())));
}

class RegenerativeGenerator final : public StateGenerator {
 public:
  RegenerativeGenerator(std::shared_ptr<const RegenSpec> spec, std::uint64_t seed)
      : spec_(std::move(spec)), rng_(seed) {
    const auto tau0 = draw_length(spec_->tau0_law, rng_);
    if (tau0 > 0) {
      const auto& build = spec_->initial_builder ? spec_->initial_builder : spec_->cycle_builder;
      buffer_ = build(tau0, rng_);
      in_cycle0_ = true;
    }
  }

  Step next() override {
    if (pos_ >= buffer_.size()) {
      const auto tau = draw_length(spec_->tau_law, rng_);
      buffer_ = spec_->cycle_builder(tau, rng_);
      if (buffer_.size() != static_cast<std::size_t>(tau)) {
        throw InvalidModel("cycle builder returned " + std::to_string(buffer_.size()) +
                           " states for a cycle of length " + std::to_string(tau));
      }
      pos_ = 0;
      in_cycle0_ = false;
    }
    const bool starts_cycle = pos_ == 0 && !in_cycle0_;
    return {buffer_[pos_++], starts_cycle};
  }

 private:
  std::shared_ptr<const RegenSpec> spec_;
  Rng rng_;
  std::vector<State> buffer_;
  std::size_t pos_ = 0;
  bool in_cycle0_ = false;
};

class TandemGenerator final : public StateGenerator {
 public:
  TandemGenerator(Distribution interarrival, Distribution service1, std::uint64_t seed)
      : t_(std::move(interarrival)), s1_(std::move(service1)), rng_(seed) {}

  Step next() override {
    const double t = t_.sample(rng_.uniform());
    const double s1 = s1_.sample(rng_.uniform());
    arrival_ += t;
    wait_ = first_ ? 0.0 : std::max(0.0, wait_ + prev_service_ - t);
    first_ = false;
    const double departure = arrival_ + wait_ + s1;
    const double gap = departure - prev_departure_;
    prev_departure_ = departure;
    prev_service_ = s1;
    return {valued(gap), wait_ == 0.0};
  }

 private:
  Distribution t_;
  Distribution s1_;
  Rng rng_;
  double arrival_ = 0.0;
  double wait_ = 0.0;
  double prev_service_ = 0.0;
  double prev_departure_ = 0.0;  // D_0 = 0
  bool first_ = true;
};

void check_stochastic(const std::vector<std::vector<double>>& p) {
  if (p.empty()) throw InvalidModel("transition matrix is empty");
  for (const auto& row : p) {
    if (row.size() != p.size()) throw InvalidModel("transition matrix must be square");
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) throw InvalidModel("transition probabilities must be nonnegative");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12) throw InvalidModel("transition rows must sum to 1");
  }
}

// Period of an irreducible chain; 0 when the chain is reducible.
int chain_period(const std::vector<std::vector<double>>& p) {
  const int n = static_cast<int>(p.size());
  std::vector<int> level(n, -1);
  std::queue<int> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      if (p[u][v] > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  if (std::find(level.begin(), level.end(), -1) != level.end()) return 0;
  // Every state must also reach 0.
  std::vector<bool> back(n, false);
  back[0] = true;
  q.push(0);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int u = 0; u < n; ++u) {
      if (p[u][v] > 0.0 && !back[u]) {
        back[u] = true;
        q.push(u);
      }
    }
  }
  if (std::find(back.begin(), back.end(), false) != back.end()) return 0;
  int g = 0;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (p[u][v] > 0.0) g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    }
  }
  return g;
}

std::vector<double> default_c_levels(const Distribution& reference) {
  const double y0 = std::max(1.0, std::abs(reference.quantile(0.5)));
  std::vector<double> levels;
  for (double y = y0; levels.size() < 8; y *= 4.0) {
    if (!(reference.tail(y) > 1e-15)) break;
    levels.push_back(y);
  }
  return levels;
}

double c_for(const IncrementFamily& family, const Distribution& reference, const State& x) {
  if (family.law) {
    if (const auto law = family.law(x)) {
      if (const auto r = asymptotic_tail_ratio(*law, reference)) return *r;
    }
  }
  const auto levels = default_c_levels(reference);
  if (levels.empty()) return 0.0;
  std::vector<double> ratios;
  for (double y : levels) ratios.push_back(family.tail(x, y) / reference.tail(y));
  // Reuse the extrapolation on an explicit ratio table.
  CEstimate est;
  est.levels = levels;
  est.ratios = ratios;
  const std::size_t n = ratios.size();
  if (n >= 2) {
    const double y1 = levels[n - 2];
    const double y2 = levels[n - 1];
    est.limit = (ratios[n - 1] * y2 - ratios[n - 2] * y1) / (y2 - y1);
  } else {
    est.limit = ratios.back();
  }
  return std::max(0.0, est.limit);
}

std::vector<double> bound_grid(const Distribution& reference) {
  double top = 1.0;
  while (top < 1e15 && reference.tail(top) > 1e-15) top *= 2.0;
  std::vector<double> ys{0.0};
  for (double e = -2.0; std::pow(10.0, e) <= top; e += 0.05) ys.push_back(std::pow(10.0, e));
  return ys;
}

double uniform_bound(const IncrementFamily& family, const Distribution& reference,
                     const std::vector<State>& probes) {
  const auto ys = bound_grid(reference);
  double sup = 0.0;
  for (const auto& x : probes) {
    for (double y : ys) {
      const double tf = reference.tail(y);
      const double tx = family.tail(x, y);
      if (tf > 0.0) {
        sup = std::max(sup, tx / tf);
      } else if (tx > 1e-15) {
        std::ostringstream msg;
        msg << "increment tail of state (" << x.label << ", " << x.value
            << ") is positive where the reference tail vanishes (y=" << y
            << "); no finite uniform bound L";
        throw InvalidModel(msg.str());
      }
    }
  }
  return std::max(1.0, 1.1 * sup);
}

std::vector<State> probe_states(const ModulatedModel& m) {
  std::vector<State> probes;
  if (m.is_finite()) {
    for (int i = 0; i < static_cast<int>(m.labels.size()); ++i) probes.push_back(labeled(i));
    return probes;
  }
  auto sorted = m.pi_sample;
  std::sort(sorted.begin(), sorted.end(),
            [](const State& a, const State& b) { return a.value < b.value; });
  const std::size_t want = std::min<std::size_t>(64, sorted.size());
  for (std::size_t k = 0; k < want; ++k) {
    probes.push_back(sorted[k * (sorted.size() - 1) / std::max<std::size_t>(want - 1, 1)]);
  }
  return probes;
}

// c(x), L and the drift sign check shared by all constructors.
void finish_model(ModulatedModel& m) {
  if (m.is_finite()) {
    std::vector<double> c(m.labels.size());
    for (int i = 0; i < static_cast<int>(c.size()); ++i) {
      c[i] = c_for(m.increments, m.reference, labeled(i));
      if (!std::isfinite(c[i])) {
        throw InvalidModel("increment tail of state '" + m.labels[i] +
                           "' is heavier than the reference tail");
      }
    }
    m.c_rule = [c = std::move(c)](const State& s) { return c.at(static_cast<std::size_t>(s.label)); };
  } else if (!m.c_rule) {
    m.c_rule = [family = m.increments, reference = m.reference](const State& s) {
      return c_for(family, reference, s);
    };
  }
  m.uniform_bound = uniform_bound(m.increments, m.reference, probe_states(m));
}

std::vector<State> occupation_sample(const GeneratorFactory& make, std::size_t burn_in,
                                     std::size_t count, std::size_t thin) {
  auto gen = make(kAnalysisSeed);
  for (std::size_t i = 0; i < burn_in; ++i) gen->next();
  std::vector<State> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count * thin; ++i) {
    const auto s = gen->next().state;
    if (i % thin == 0) out.push_back(s);
  }
  return out;
}

void check_integer_law(const Distribution& d, double min_value, const char* name) {
  if (!d.is_integer_valued() || d.support_min() < min_value) {
    throw InvalidModel(std::string(name) + " must be an integer-valued law with values >= " +
                       std::to_string(static_cast<int>(min_value)));
  }
  if (!d.has_finite_mean()) throw InvalidModel(std::string(name) + " must have a finite mean");
}

// Expected per-label cycle occupation normalized to a probability vector.
std::vector<double> exact_regenerative_pi(const RegenSpec& spec) {
  const auto& tau = spec.tau_law;
  std::vector<double> acc(spec.labels.size(), 0.0);
  const auto first = static_cast<std::int64_t>(std::max(1.0, tau.support_min()));
  const double top = tau.support_max();
  for (std::int64_t n = first; n <= 2'000'000; ++n) {
    const double x = static_cast<double>(n);
    if (std::isfinite(top) && x > top) break;
    const double p = tau.tail(x - 1.0) - tau.tail(x);
    if (p > 0.0) {
      const auto occ = spec.occupation(n);
      for (std::size_t i = 0; i < acc.size() && i < occ.size(); ++i) acc[i] += p * occ[i];
    }
    if (tau.tail(x) < 1e-13) break;
  }
  const double total = std::accumulate(acc.begin(), acc.end(), 0.0);
  for (auto& v : acc) v /= total;
  return acc;
}

std::vector<double> empirical_regenerative_pi(const GeneratorFactory& make, std::size_t labels) {
  auto gen = make(kAnalysisSeed);
  std::vector<double> counts(labels, 0.0);
  std::size_t cycles = 0;
  bool started = false;
  double visits = 0.0;
  while (cycles <= 20000) {
    const auto step = gen->next();
    if (step.regeneration) {
      started = true;
      ++cycles;
    }
    if (started && cycles <= 20000) {
      counts.at(static_cast<std::size_t>(step.state.label)) += 1.0;
      visits += 1.0;
    }
  }
  for (auto& c : counts) c /= visits;
  return counts;
}

ModulatedModel regenerative_core(RegenSpec spec, IncrementFamily increments,
                                 Distribution reference) {
  check_integer_law(spec.tau0_law, 0.0, "tau0");
  check_integer_law(spec.tau_law, 1.0, "tau");
  if (!spec.cycle_builder) throw InvalidModel("regenerative spec needs a cycle builder");

  ModulatedModel m;
  m.reference = std::move(reference);
  m.kind = "regenerative";
  m.labels = spec.labels;
  m.increments = std::move(increments);
  auto shared = std::make_shared<const RegenSpec>(spec);
  m.make_generator = [shared](std::uint64_t seed) -> std::unique_ptr<StateGenerator> {
    return std::make_unique<RegenerativeGenerator>(shared, seed);
  };
  if (m.is_finite()) {
    m.pi = spec.occupation ? exact_regenerative_pi(spec)
                           : empirical_regenerative_pi(m.make_generator, m.labels.size());
    double mean = 0.0;
    for (int i = 0; i < static_cast<int>(m.pi.size()); ++i) {
      if (m.pi[i] > 0.0) mean += m.pi[i] * m.increments.mean(labeled(i));
    }
    m.drift = -mean;
  } else {
    m.pi_sample = occupation_sample(m.make_generator, 1000, 20000, 5);
    double mean = 0.0;
    for (const auto& s : m.pi_sample) mean += m.increments.mean(s);
    m.drift = -mean / static_cast<double>(m.pi_sample.size());
  }
  m.regeneration = std::move(spec);
  return m;
}

}  // namespace

StateSet all_states() {
  return [](const State&) { return true; };
}

StateSet no_states() {
  return [](const State&) { return false; };
}

StateSet labels_in(std::vector<int> labels) {
  return [labels = std::move(labels)](const State& s) {
    return std::find(labels.begin(), labels.end(), s.label) != labels.end();
  };
}

StateSet complement_of(StateSet set) {
  return [set = std::move(set)](const State& s) { return !set(s); };
}

IncrementFamily IncrementFamily::per_label(std::vector<Distribution> laws) {
  auto shared = std::make_shared<const std::vector<Distribution>>(std::move(laws));
  IncrementFamily f;
  f.sample = [shared](const State& s, double u, double) {
    return (*shared)[static_cast<std::size_t>(s.label)].sample(u);
  };
  f.tail = [shared](const State& s, double y) {
    return shared->at(static_cast<std::size_t>(s.label)).tail(y);
  };
  f.mean = [shared](const State& s) { return shared->at(static_cast<std::size_t>(s.label)).mean(); };
  f.law = [shared](const State& s) -> std::optional<Distribution> {
    return shared->at(static_cast<std::size_t>(s.label));
  };
  return f;
}

double AlternativeAsymptotic::predict(double y) const {
  return constant * reference.excess_mean(y);
}

void validate(const ModulatedModel& model) {
  if (!model.make_generator) throw InvalidModel("model has no state generator");
  if (!model.increments.sample) throw InvalidModel("model has no increment sampler");
  if (!std::isfinite(model.drift) || !(model.drift > 0.0)) {
    throw InvalidModel("nonpositive drift: S_n/n -> -a requires a > 0, got a = " +
                       std::to_string(model.drift));
  }
  if (model.is_finite()) {
    const double s = std::accumulate(model.pi.begin(), model.pi.end(), 0.0);
    if (model.pi.size() != model.labels.size() || std::abs(s - 1.0) > 1e-9) {
      throw InvalidModel("stationary law does not sum to 1");
    }
  }
}

std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition) {
  check_stochastic(transition);
  const auto n = static_cast<Eigen::Index>(transition.size());
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) p(i, j) = transition[i][j];
  }
  // (P^T - I) pi = 0 with the last balance equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  const double condition = sv(0) / sv(n - 1);
  if (!std::isfinite(condition) || condition > 1e13) {
    std::ostringstream msg;
    msg << "balance equations are singular or ill-conditioned (condition estimate " << condition
        << "); is the chain irreducible?";
    throw NumericError(msg.str());
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd pi = lu.solve(b);
  for (int sweep = 0; sweep < 3; ++sweep) pi += lu.solve(b - a * pi);

  std::vector<double> out(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = std::max(0.0, pi(i));
    total += out[i];
  }
  for (auto& v : out) v /= total;

  const Eigen::Map<const Eigen::RowVectorXd> row(out.data(), n);
  const double residual = (row * p - row).cwiseAbs().maxCoeff();
  if (residual > 1e-12) {
    throw NumericError("stationary residual " + std::to_string(residual) + " exceeds 1e-12");
  }
  return out;
}

ModulatedModel finite_markov_model(const std::vector<std::vector<double>>& transition,
                                   std::vector<Distribution> increments, Distribution reference,
                                   FiniteMarkovOptions options) {
  check_stochastic(transition);
  if (increments.size() != transition.size()) {
    throw InvalidModel("need one increment law per state");
  }
  for (const auto& d : increments) {
    if (!d.has_finite_mean()) throw InvalidModel("increment " + d.describe() + " has no finite mean");
  }
  const int period = chain_period(transition);
  if (period == 0) throw InvalidModel("transition matrix is reducible");
  if (period > 1) {
    throw InvalidModel("transition matrix is periodic (period " + std::to_string(period) + ")");
  }

  ModulatedModel m;
  m.reference = std::move(reference);
  m.kind = "finite_markov";
  for (std::size_t i = 0; i < transition.size(); ++i) m.labels.push_back("s" + std::to_string(i));
  m.transition = transition;
  m.pi = stationary_distribution(transition);

  double mean = 0.0;
  for (std::size_t i = 0; i < increments.size(); ++i) mean += m.pi[i] * increments[i].mean();
  m.drift = -mean;
  if (!(m.drift > 0.0)) {
    throw InvalidModel("nonpositive drift: sum_x pi(x) E xi^x = " + std::to_string(mean) +
                       " must be negative");
  }

  auto rows = std::make_shared<std::vector<std::vector<double>>>();
  for (const auto& r : transition) rows->push_back(cumulate(r));
  const auto& init = options.initial ? *options.initial : m.pi;
  if (init.size() != transition.size() ||
      std::abs(std::accumulate(init.begin(), init.end(), 0.0) - 1.0) > 1e-12) {
    throw InvalidModel("initial law must be a probability vector over the states");
  }
  auto initial = std::make_shared<const std::vector<double>>(cumulate(init));
  std::shared_ptr<const std::vector<std::vector<double>>> frozen = std::move(rows);
  m.make_generator = [frozen, initial](std::uint64_t seed) -> std::unique_ptr<StateGenerator> {
    return std::make_unique<MarkovGenerator>(frozen, initial, seed);
  };
  m.increments = IncrementFamily::per_label(std::move(increments));
  finish_model(m);
  return m;
}

double limit_constant(const ModulatedModel& model, const StateSet& set) {
  auto c_at = [&model](const State& s) {
    const double c = model.c_rule(s);
    if (!std::isfinite(c) || c < 0.0) {
      throw NumericError("c(x) unavailable at state (" + std::to_string(s.label) + ", " +
                         std::to_string(s.value) + ")");
    }
    return c;
  };
  if (model.is_finite()) {
    double total = 0.0;
    for (int i = 0; i < static_cast<int>(model.pi.size()); ++i) {
      const State s = labeled(i);
      if (model.pi[i] > 0.0 && set(s)) total += c_at(s) * model.pi[i];
    }
    return total;
  }
  if (model.pi_sample.empty()) throw NumericError("model carries no occupation sample");
  double total = 0.0;
  for (const auto& s : model.pi_sample) {
    if (set(s)) total += c_at(s);
  }
  return total / static_cast<double>(model.pi_sample.size());
}

namespace {

CEstimate extrapolate(std::vector<double> levels, std::vector<double> ratios) {
  CEstimate est;
  const std::size_t n = ratios.size();
  if (n >= 3) {
    // Least-squares fit r = c + k / y over the last three levels.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = n - 3; i < n; ++i) {
      const double x = 1.0 / levels[i];
      sx += x;
      sy += ratios[i];
      sxx += x * x;
      sxy += x * ratios[i];
    }
    const double k = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    est.limit = (sy - k * sx) / 3.0;
    const double d1 = std::abs(ratios[n - 2] - ratios[n - 3]);
    const double d2 = std::abs(ratios[n - 1] - ratios[n - 2]);
    est.converged = d2 < d1 || d2 < 1e-9;
  } else if (n == 2) {
    est.limit = (ratios[1] * levels[1] - ratios[0] * levels[0]) / (levels[1] - levels[0]);
  } else if (n == 1) {
    est.limit = ratios[0];
  }
  est.limit = std::max(0.0, est.limit);
  if (!est.converged) est.warnings.push_back("ratio sequence has not settled on this grid");
  est.levels = std::move(levels);
  est.ratios = std::move(ratios);
  return est;
}

void check_levels(std::span<const double> levels, const Distribution& reference) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0 && !(levels[i] > levels[i - 1])) throw DomainError("level grid must increase");
    if (!(reference.tail(levels[i]) > 0.0)) {
      throw DomainError("reference tail vanishes at level " + std::to_string(levels[i]));
    }
  }
}

}  // namespace

CEstimate estimate_c(const Distribution& fx, const Distribution& reference,
                     std::span<const double> levels) {
  check_levels(levels, reference);
  std::vector<double> ratios;
  for (double y : levels) ratios.push_back(fx.tail(y) / reference.tail(y));
  return extrapolate({levels.begin(), levels.end()}, std::move(ratios));
}

CEstimate estimate_c(const ModulatedModel& model, const State& x, std::span<const double> levels) {
  check_levels(levels, model.reference);
  std::vector<double> ratios;
  for (double y : levels) ratios.push_back(model.increments.tail(x, y) / model.reference.tail(y));
  auto est = extrapolate({levels.begin(), levels.end()}, std::move(ratios));
  const double worst = *std::max_element(est.ratios.begin(), est.ratios.end());
  if (worst > 1.01 * model.uniform_bound) {
    est.warnings.push_back("model inconsistency: tail ratio " + std::to_string(worst) +
                           " exceeds the uniform bound L = " +
                           std::to_string(model.uniform_bound));
  }
  return est;
}

ModulatedModel regenerative_model(RegenSpec spec, IncrementFamily increments,
                                  Distribution reference) {
  auto m = regenerative_core(std::move(spec), std::move(increments), std::move(reference));
  if (!(m.drift > 0.0)) {
    throw InvalidModel("nonpositive drift: integral of E xi^x pi(dx) = " +
                       std::to_string(-m.drift) + " must be negative");
  }
  finish_model(m);
  return m;
}

CycleTailReport cycle_tail_report(const RegenSpec& spec, const Distribution& reference, double b,
                                  std::span<const double> levels) {
  if (!(b > 0.0)) throw DomainError("cycle_tail_report needs b > 0");
  auto ratio = [](double num, double den) {
    if (den > 0.0) return num / den;
    return num > 0.0 ? kInf : 0.0;
  };
  CycleTailReport r;
  r.b = b;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double y = levels[i];
    if (i > 0 && !(y > levels[i - 1])) throw DomainError("cycle tail levels must increase");
    r.levels.push_back(y);
    r.ratio_tau.push_back(ratio(spec.tau_law.tail(y / b), reference.tail(y)));
    r.ratio_tau0.push_back(ratio(spec.tau0_law.tail(y / b), reference.integrated_tail(y)));
  }
  auto settles = [](const std::vector<double>& v) {
    if (v.empty() || !(v.back() < 0.1)) return false;
    for (std::size_t i = v.size() >= 3 ? v.size() - 2 : 1; i < v.size(); ++i) {
      if (v[i] > v[i - 1]) return false;
    }
    return true;
  };
  r.consistent_with_tautail = settles(r.ratio_tau) && settles(r.ratio_tau0);
  return r;
}

ModulatedModel tandem_departure_process(Distribution interarrival, Distribution service1,
                                        Distribution service2) {
  for (const auto* d : {&interarrival, &service1, &service2}) {
    if (d->support_min() < 0.0) throw InvalidModel("tandem times must be nonnegative");
    if (!d->has_finite_mean()) throw InvalidModel("tandem times need finite means");
  }
  const double et = interarrival.mean();
  if (!(et > std::max(service1.mean(), service2.mean()))) {
    throw InvalidModel("unstable tandem: E t = " + std::to_string(et) +
                       " must exceed max(E sigma1, E sigma2)");
  }

  ModulatedModel m;
  m.reference = service2;
  m.kind = "tandem";
  m.make_generator = [interarrival, service1](std::uint64_t seed) -> std::unique_ptr<StateGenerator> {
    return std::make_unique<TandemGenerator>(interarrival, service1, seed);
  };
  IncrementFamily f;
  f.sample = [service2](const State& s, double u, double) { return service2.sample(u) - s.value; };
  f.tail = [service2](const State& s, double y) { return service2.tail(y + s.value); };
  const double es2 = service2.mean();
  f.mean = [es2](const State& s) { return es2 - s.value; };
  f.law = [service2](const State& s) -> std::optional<Distribution> {
    return Distribution::shifted(service2, -s.value);
  };
  m.increments = std::move(f);
  m.c_rule = [service2](const State& s) {
    return asymptotic_tail_ratio(Distribution::shifted(service2, -s.value), service2).value_or(1.0);
  };
  m.pi_sample = occupation_sample(m.make_generator, 1000, 20000, 5);
  m.drift = et - es2;
  finish_model(m);
  return m;
}

ModulatedModel difference_model(Distribution zeta,
                                std::function<Distribution(const State&)> b_rule, RegenSpec spec,
                                Distribution reference) {
  if (!zeta.has_finite_mean()) throw InvalidModel("zeta needs a finite mean");
  if (const auto r = asymptotic_tail_ratio(zeta, reference); r && !std::isfinite(*r)) {
    throw InvalidModel("limsup P(zeta > y) / Fbar(y) is infinite");
  }
  const double ezeta = zeta.mean();

  IncrementFamily f;
  if (!spec.labels.empty()) {
    auto laws = std::make_shared<std::vector<Distribution>>();
    for (int i = 0; i < static_cast<int>(spec.labels.size()); ++i) {
      laws->push_back(b_rule(labeled(i)));
    }
    b_rule = [laws](const State& s) { return laws->at(static_cast<std::size_t>(s.label)); };
  }
  f.sample = [zeta, b_rule](const State& s, double u, double v) {
    return zeta.sample(u) - b_rule(s).sample(v);
  };
  f.tail = [zeta, b_rule](const State& s, double y) {
    const auto b = b_rule(s);
    if (b.support_min() < 0.0) throw InvalidModel("b^x must be nonnegative");
    if (const auto* atoms = std::get_if<Discrete>(&b.kind())) {
      double t = 0.0;
      for (const auto& a : atoms->atoms) t += a.prob * zeta.tail(y + a.value);
      return t;
    }
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(
        [&](double v) { return zeta.tail(y + b.quantile(v)); }, 0.0, 1.0, 10, 1e-10);
  };
  f.mean = [ezeta, b_rule](const State& s) { return ezeta - b_rule(s).mean(); };
  f.law = [zeta, b_rule](const State& s) -> std::optional<Distribution> {
    const auto b = b_rule(s);
    if (const auto* atoms = std::get_if<Discrete>(&b.kind()); atoms && atoms->atoms.size() == 1) {
      return Distribution::shifted(zeta, -atoms->atoms.front().value);
    }
    return std::nullopt;
  };

  auto m = regenerative_core(std::move(spec), std::move(f), std::move(reference));
  m.kind = "difference";
  double eb = 0.0;
  if (m.is_finite()) {
    for (int i = 0; i < static_cast<int>(m.pi.size()); ++i) {
      const auto b = b_rule(labeled(i));
      if (b.support_min() < 0.0) throw InvalidModel("b^x must be nonnegative");
      eb += m.pi[i] * b.mean();
    }
  } else {
    for (const auto& s : m.pi_sample) eb += b_rule(s).mean();
    eb /= static_cast<double>(m.pi_sample.size());
  }
  if (!(eb > ezeta)) {
    throw InvalidModel("E_pi b^X = " + std::to_string(eb) + " must exceed E zeta = " +
                       std::to_string(ezeta));
  }
  m.drift = eb - ezeta;
  m.cycle_tail_b_min = ezeta;
  finish_model(m);
  return m;
}

ModulatedModel counterexample_model(Distribution zeta, double b0_mean, double tau_tail_power) {
  if (!(tau_tail_power > 1.0)) {
    throw InvalidModel("tau tail power must exceed 1 for E tau to be finite");
  }
  return counterexample_model(std::move(zeta), b0_mean,
                              Distribution::ceiling(Distribution::pareto(tau_tail_power, 1.0)));
}

ModulatedModel counterexample_model(Distribution zeta, double b0_mean, Distribution tau_law) {
  if (zeta.support_min() < 1.0) throw InvalidModel("counterexample needs zeta >= 1 a.s.");
  check_integer_law(tau_law, 1.0, "tau");
  if (!zeta.has_finite_mean()) throw InvalidModel("zeta needs a finite mean");
  const double etau = tau_law.mean();
  const double ezeta = zeta.mean();
  if (!(b0_mean > ezeta * etau)) {
    throw InvalidModel("counterexample needs E b^0 > E zeta * E tau (" + std::to_string(b0_mean) +
                       " <= " + std::to_string(ezeta * etau) + ")");
  }

  RegenSpec spec;
  spec.tau_law = tau_law;
  spec.labels = {"zero", "away"};
  spec.cycle_builder = [](std::int64_t tau, Rng&) {
    std::vector<State> cycle(static_cast<std::size_t>(tau), labeled(1));
    cycle.back() = labeled(0);
    return cycle;
  };
  spec.occupation = [](std::int64_t tau) {
    return std::vector<double>{1.0, static_cast<double>(tau - 1)};
  };
  const auto b_zero = Distribution::point(b0_mean);
  const auto b_away = Distribution::point(0.0);
  auto m = difference_model(
      zeta, [b_zero, b_away](const State& s) { return s.label == 0 ? b_zero : b_away; },
      std::move(spec), zeta);
  m.kind = "counterexample";
  m.alternative = AlternativeAsymptotic{1.0 / (b0_mean - etau), tau_law};
  if (std::isfinite(tau_law.support_max())) {
    m.warnings.push_back(
        "tau is bounded: the cycle-tail condition holds, so this is not a counterexample");
  }
  return m;
}

}  // namespace modwalk
