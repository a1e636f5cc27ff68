#include "modwalk/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "modwalk/errors.hpp"

namespace modwalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_unit_open(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("quantile argument must lie in (0,1), got " + std::to_string(u));
  }
}

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

struct Distribution::Node {
  DistributionKind kind;
  bool finite_mean = true;
  double mean = 0.0;
  // Flattened quantile for Pareto, Exponential and one shift of either.
  enum class Fast : unsigned char { None, Pareto, Exponential } fast = Fast::None;
  double fast_scale = 0.0;
  double fast_power = 0.0;
  double fast_offset = 0.0;
  bool fast_shifted = false;
};

Distribution::Distribution(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

const DistributionKind& Distribution::kind() const { return node_->kind; }

namespace {

// Sum_{n >= n0} P(X > n) for integer n0 >= 0; Euler-Maclaurin remainder for
// unbounded X.
double integer_tail_sum(const Distribution& x, long long n0) {
  n0 = std::max(n0, 0LL);
  const double top = x.support_max();
  double sum = 0.0;
  if (std::isfinite(top)) {
    const auto last = static_cast<long long>(std::ceil(top));
    for (long long n = n0; n <= last; ++n) sum += x.tail(static_cast<double>(n));
    return sum;
  }
  const long long start = std::max<long long>(
      n0, static_cast<long long>(std::ceil(std::max(0.0, x.support_min()))));
  for (long long n = n0; n < start; ++n) sum += x.tail(static_cast<double>(n));
  const long long stop = start + 4096;
  for (long long n = start; n < stop; ++n) sum += x.tail(static_cast<double>(n));
  const double big_n = static_cast<double>(stop);
  return sum + x.excess_mean(big_n) + 0.5 * x.tail(big_n);
}

// Adaptive Gauss-Kronrod over doubling panels, with a power-law remainder
// estimated from the local tail index beyond the last panel.
double numeric_excess(const Distribution& d, double y) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&d](double t) { return d.tail(t); };
  double total = 0.0;
  double a = y;
  double width = std::max({y, d.quantile(0.5), 1e-3});
  for (int panel = 0; panel < 400; ++panel) {
    const double b = a + width;
    double err = 0.0;
    total += gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-11, &err);
    a = b;
    width *= 2.0;
    const double ta = d.tail(a);
    if (ta == 0.0) break;
    const double t2a = d.tail(2.0 * a);
    const double local_index = t2a > 0.0 ? std::log(ta / t2a) / std::log(2.0) : kInf;
    if (local_index > 1.0) {
      const double remainder = std::isfinite(local_index) ? a * ta / (local_index - 1.0) : 0.0;
      if (remainder <= 1e-12 * total) {
        total += remainder;
        break;
      }
    }
  }
  return total;
}

}  // namespace

Distribution Distribution::pareto(double alpha, double scale) {
  if (!(alpha > 0.0) || !(scale > 0.0)) {
    throw InvalidModel("pareto requires alpha > 0 and scale > 0");
  }
  Node n{Pareto{alpha, scale}};
  n.fast = Node::Fast::Pareto;
  n.fast_scale = scale;
  n.fast_power = -1.0 / alpha;
  n.finite_mean = alpha > 1.0;
  n.mean = n.finite_mean ? alpha * scale / (alpha - 1.0) : kInf;
  return Distribution(std::make_shared<const Node>(std::move(n)));
}

Distribution Distribution::lognormal(double mu, double sigma) {
  if (!std::isfinite(mu) || !(sigma > 0.0)) {
    throw InvalidModel("lognormal requires finite mu and sigma > 0");
  }
  Node n{Lognormal{mu, sigma}};
  n.mean = std::exp(mu + 0.5 * sigma * sigma);
  return Distribution(std::make_shared<const Node>(std::move(n)));
}

Distribution Distribution::heavy_weibull(double shape, double scale) {
  if (!(shape > 0.0 && shape < 1.0) || !(scale > 0.0)) {
    throw InvalidModel("heavy weibull requires shape in (0,1) and scale > 0");
  }
  Node n{HeavyWeibull{shape, scale}};
  n.mean = scale * std::tgamma(1.0 + 1.0 / shape);
  return Distribution(std::make_shared<const Node>(std::move(n)));
}

Distribution Distribution::exponential(double rate) {
  if (!(rate > 0.0)) throw InvalidModel("exponential requires rate > 0");
  Node n{Exponential{rate}};
  n.fast = Node::Fast::Exponential;
  n.fast_scale = rate;
  n.mean = 1.0 / rate;
  return Distribution(std::make_shared<const Node>(std::move(n)));
}

Distribution Distribution::discrete(std::vector<Atom> atoms) {
  if (atoms.empty()) throw InvalidModel("discrete law needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.value) || !(a.prob >= 0.0)) {
      throw InvalidModel("discrete atoms need finite values and nonnegative probabilities");
    }
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidModel("discrete atom probabilities sum to " + std::to_string(total) + ", not 1");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& l, const Atom& r) { return l.value < r.value; });
  std::vector<Atom> merged;
  for (const auto& a : atoms) {
    if (a.prob == 0.0) continue;
    if (!merged.empty() && merged.back().value == a.value) {
      merged.back().prob += a.prob;
    } else {
      merged.push_back(a);
    }
  }
  Node n{Discrete{std::move(merged)}};
  const auto& kept = std::get<Discrete>(n.kind).atoms;
  n.mean = std::accumulate(kept.begin(), kept.end(), 0.0,
                           [](double s, const Atom& a) { return s + a.value * a.prob; });
  return Distribution(std::make_shared<const Node>(std::move(n)));
}

Distribution Distribution::point(double value) { return discrete({{value, 1.0}}); }

Distribution Distribution::shifted(const Distribution& inner, double offset) {
  if (!std::isfinite(offset)) throw InvalidModel("shift offset must be finite");
  Node n{Shifted{std::make_shared<const Distribution>(inner), offset}};
  if (!inner.node_->fast_shifted && inner.node_->fast != Node::Fast::None) {
    n.fast = inner.node_->fast;
    n.fast_scale = inner.node_->fast_scale;
    n.fast_power = inner.node_->fast_power;
    n.fast_offset = offset;
    n.fast_shifted = true;
  }
  n.finite_mean = inner.has_finite_mean();
  n.mean = inner.node_->mean + offset;
  return Distribution(std::make_shared<const Node>(std::move(n)));
}

Distribution Distribution::negated(const Distribution& inner) {
  Node n{Negated{std::make_shared<const Distribution>(inner)}};
  n.finite_mean = inner.has_finite_mean();
  n.mean = -inner.node_->mean;
  return Distribution(std::make_shared<const Node>(std::move(n)));
}

Distribution Distribution::ceiling(const Distribution& inner) {
  if (inner.support_min() < 0.0) {
    throw InvalidModel("ceiling requires a nonnegative inner law");
  }
  Node n{Ceiling{std::make_shared<const Distribution>(inner)}};
  n.finite_mean = inner.has_finite_mean();
  n.mean = n.finite_mean ? integer_tail_sum(inner, 0) : kInf;
  return Distribution(std::make_shared<const Node>(std::move(n)));
}

double Distribution::tail(double y) const {
  return std::visit(
      Overloaded{
          [y](const Pareto& p) { return y < p.scale ? 1.0 : std::pow(y / p.scale, -p.alpha); },
          [y](const Lognormal& p) {
            if (y <= 0.0) return 1.0;
            return 0.5 * std::erfc((std::log(y) - p.mu) / (p.sigma * std::sqrt(2.0)));
          },
          [y](const HeavyWeibull& p) {
            return y <= 0.0 ? 1.0 : std::exp(-std::pow(y / p.scale, p.shape));
          },
          [y](const Exponential& p) { return y <= 0.0 ? 1.0 : std::exp(-p.rate * y); },
          [y](const Discrete& p) {
            double s = 0.0;
            for (auto it = p.atoms.rbegin(); it != p.atoms.rend() && it->value > y; ++it) {
              s += it->prob;
            }
            return std::min(1.0, s);
          },
          [y](const Shifted& p) { return p.inner->tail(y - p.offset); },
          [y](const Negated& p) { return p.inner->prob_below(-y); },
          [y](const Ceiling& p) { return p.inner->tail(std::floor(y)); },
      },
      node_->kind);
}

double Distribution::cdf(double y) const {
  if (const auto* d = std::get_if<Discrete>(&node_->kind)) {
    double s = 0.0;
    for (const auto& a : d->atoms) {
      if (a.value > y) break;
      s += a.prob;
    }
    return std::min(1.0, s);
  }
  return 1.0 - tail(y);
}

double Distribution::prob_below(double y) const {
  return std::visit(
      Overloaded{
          [y](const Discrete& p) {
            double s = 0.0;
            for (const auto& a : p.atoms) {
              if (a.value >= y) break;
              s += a.prob;
            }
            return std::min(1.0, s);
          },
          [y](const Shifted& p) { return p.inner->prob_below(y - p.offset); },
          [y](const Negated& p) { return p.inner->tail(-y); },
          [y](const Ceiling& p) { return p.inner->cdf(std::ceil(y) - 1.0); },
          [this, y](const auto&) { return cdf(y); },
      },
      node_->kind);
}

double Distribution::quantile(double u) const {
  require_unit_open(u);
  // Same arithmetic as the visitor below, without the indirection.
  switch (node_->fast) {
    case Node::Fast::Pareto:
      return node_->fast_scale * std::pow(1.0 - u, node_->fast_power) + node_->fast_offset;
    case Node::Fast::Exponential:
      return -std::log1p(-u) / node_->fast_scale + node_->fast_offset;
    case Node::Fast::None:
      break;
  }
  return std::visit(
      Overloaded{
          [u](const Pareto& p) { return p.scale * std::pow(1.0 - u, -1.0 / p.alpha); },
          [u](const Lognormal& p) {
            const double z = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
            return std::exp(p.mu + p.sigma * z);
          },
          [u](const HeavyWeibull& p) {
            return p.scale * std::pow(-std::log1p(-u), 1.0 / p.shape);
          },
          [u](const Exponential& p) { return -std::log1p(-u) / p.rate; },
          [u](const Discrete& p) {
            double c = 0.0;
            for (const auto& a : p.atoms) {
              c += a.prob;
              if (c > u) return a.value;
            }
            return p.atoms.back().value;
          },
          [u](const Shifted& p) { return p.inner->quantile(u) + p.offset; },
          [u](const Negated& p) { return -p.inner->lower_quantile(1.0 - u); },
          [u](const Ceiling& p) { return std::ceil(p.inner->quantile(u)); },
      },
      node_->kind);
}

double Distribution::lower_quantile(double u) const {
  require_unit_open(u);
  return std::visit(
      Overloaded{
          [u](const Discrete& p) {
            double c = 0.0;
            for (const auto& a : p.atoms) {
              c += a.prob;
              if (c >= u) return a.value;
            }
            return p.atoms.back().value;
          },
          [u](const Shifted& p) { return p.inner->lower_quantile(u) + p.offset; },
          [u](const Negated& p) { return -p.inner->quantile(1.0 - u); },
          [u](const Ceiling& p) { return std::ceil(p.inner->lower_quantile(u)); },
          [this, u](const auto&) { return quantile(u); },
      },
      node_->kind);
}

bool Distribution::has_finite_mean() const { return node_->finite_mean; }

double Distribution::mean() const {
  if (!node_->finite_mean) {
    throw InvalidModel(describe() + " has no finite mean (pareto needs alpha > 1)");
  }
  return node_->mean;
}

double Distribution::excess_mean(double y) const {
  if (!node_->finite_mean) {
    throw InvalidModel("integrated tail of " + describe() + " diverges");
  }
  return std::visit(
      Overloaded{
          [y](const Pareto& p) {
            const double s = p.scale;
            const double a = p.alpha;
            if (y >= s) return s * std::pow(y / s, 1.0 - a) / (a - 1.0);
            return (s - y) + s / (a - 1.0);
          },
          [this, y](const Lognormal&) {
            return y <= 0.0 ? node_->mean - y : numeric_excess(*this, y);
          },
          [this, y](const HeavyWeibull&) {
            return y <= 0.0 ? node_->mean - y : numeric_excess(*this, y);
          },
          [y](const Exponential& p) {
            return y >= 0.0 ? std::exp(-p.rate * y) / p.rate : 1.0 / p.rate - y;
          },
          [y](const Discrete& p) {
            double s = 0.0;
            for (const auto& a : p.atoms) s += a.prob * std::max(0.0, a.value - y);
            return s;
          },
          [y](const Shifted& p) { return p.inner->excess_mean(y - p.offset); },
          [y](const Negated& p) {
            // (c - X)^+ = (c - X) + (X - c)^+ with c = -y.
            const double c = -y;
            return std::max(0.0, c - p.inner->mean() + p.inner->excess_mean(c));
          },
          [y](const Ceiling& p) {
            const double m = std::floor(y);
            const double head = (m + 1.0 - y) * p.inner->tail(m);
            const double negative_run = std::max(0.0, -(m + 1.0));
            return head + negative_run +
                   integer_tail_sum(*p.inner, static_cast<long long>(std::max(m + 1.0, 0.0)));
          },
      },
      node_->kind);
}

double Distribution::integrated_tail(double y) const {
  const double raw = y >= 0.0 ? excess_mean(y) : -y + excess_mean(0.0);
  return std::min(1.0, raw);
}

double Distribution::support_min() const {
  return std::visit(Overloaded{
                        [](const Pareto& p) { return p.scale; },
                        [](const Discrete& p) { return p.atoms.front().value; },
                        [](const Shifted& p) { return p.inner->support_min() + p.offset; },
                        [](const Negated& p) { return -p.inner->support_max(); },
                        [](const Ceiling& p) {
                          // ceil of a continuous law has no atom at its integer floor
                          const double k = std::ceil(p.inner->support_min());
                          return p.inner->tail(k) < 1.0 ? k : k + 1.0;
                        },
                        [](const auto&) { return 0.0; },
                    },
                    node_->kind);
}

double Distribution::support_max() const {
  return std::visit(Overloaded{
                        [](const Discrete& p) { return p.atoms.back().value; },
                        [](const Shifted& p) { return p.inner->support_max() + p.offset; },
                        [](const Negated& p) { return -p.inner->support_min(); },
                        [](const Ceiling& p) { return std::ceil(p.inner->support_max()); },
                        [](const auto&) { return kInf; },
                    },
                    node_->kind);
}

bool Distribution::is_continuous() const {
  return std::visit(Overloaded{
                        [](const Discrete&) { return false; },
                        [](const Ceiling&) { return false; },
                        [](const Shifted& p) { return p.inner->is_continuous(); },
                        [](const Negated& p) { return p.inner->is_continuous(); },
                        [](const auto&) { return true; },
                    },
                    node_->kind);
}

bool Distribution::is_integer_valued() const {
  return std::visit(Overloaded{
                        [](const Discrete& p) {
                          return std::all_of(p.atoms.begin(), p.atoms.end(), [](const Atom& a) {
                            return a.value == std::floor(a.value);
                          });
                        },
                        [](const Ceiling&) { return true; },
                        [](const Shifted& p) {
                          return p.offset == std::floor(p.offset) && p.inner->is_integer_valued();
                        },
                        [](const Negated& p) { return p.inner->is_integer_valued(); },
                        [](const auto&) { return false; },
                    },
                    node_->kind);
}

std::string Distribution::describe() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const Pareto& p) {
                   out << "pareto(alpha=" << p.alpha << ", scale=" << p.scale << ")";
                 },
                 [&](const Lognormal& p) {
                   out << "lognormal(mu=" << p.mu << ", sigma=" << p.sigma << ")";
                 },
                 [&](const HeavyWeibull& p) {
                   out << "weibull(shape=" << p.shape << ", scale=" << p.scale << ")";
                 },
                 [&](const Exponential& p) { out << "exponential(rate=" << p.rate << ")"; },
                 [&](const Discrete& p) {
                   out << "discrete{";
                   for (std::size_t i = 0; i < p.atoms.size(); ++i) {
                     out << (i ? ", " : "") << "(" << p.atoms[i].value << ", " << p.atoms[i].prob
                         << ")";
                   }
                   out << "}";
                 },
                 [&](const Shifted& p) {
                   out << "shifted(" << p.inner->describe() << ", " << p.offset << ")";
                 },
                 [&](const Negated& p) { out << "negated(" << p.inner->describe() << ")"; },
                 [&](const Ceiling& p) { out << "ceiling(" << p.inner->describe() << ")"; },
             },
             node_->kind);
  return out.str();
}

bool operator==(const Distribution& a, const Distribution& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind().index() != b.kind().index()) return false;
  return std::visit(
      Overloaded{
          [&](const Pareto& p) {
            const auto& q = std::get<Pareto>(b.kind());
            return p.alpha == q.alpha && p.scale == q.scale;
          },
          [&](const Lognormal& p) {
            const auto& q = std::get<Lognormal>(b.kind());
            return p.mu == q.mu && p.sigma == q.sigma;
          },
          [&](const HeavyWeibull& p) {
            const auto& q = std::get<HeavyWeibull>(b.kind());
            return p.shape == q.shape && p.scale == q.scale;
          },
          [&](const Exponential& p) { return p.rate == std::get<Exponential>(b.kind()).rate; },
          [&](const Discrete& p) {
            const auto& q = std::get<Discrete>(b.kind());
            return std::equal(p.atoms.begin(), p.atoms.end(), q.atoms.begin(), q.atoms.end(),
                              [](const Atom& l, const Atom& r) {
                                return l.value == r.value && l.prob == r.prob;
                              });
          },
          [&](const Shifted& p) {
            const auto& q = std::get<Shifted>(b.kind());
            return p.offset == q.offset && *p.inner == *q.inner;
          },
          [&](const Negated& p) { return *p.inner == *std::get<Negated>(b.kind()).inner; },
          [&](const Ceiling& p) { return *p.inner == *std::get<Ceiling>(b.kind()).inner; },
      },
      a.kind());
}

ConvolutionTail conv_tail(const Distribution& d1, const Distribution& d2, double y,
                          double grid_step) {
  if (!(grid_step > 0.0)) throw DomainError("conv_tail needs grid_step > 0");
  constexpr double kEdgeMass = 5e-11;
  constexpr double kMaxCells = 5e7;

  double upper_extra = 0.0;
  double exact = 0.0;

  double lo = d2.support_min();
  if (!std::isfinite(lo)) lo = d2.lower_quantile(kEdgeMass);

  const double low1 = d1.support_min();
  double hi = 0.0;
  if (std::isfinite(low1)) {
    // X2 > y - low1 forces X1 + X2 > y.
    hi = y - low1;
    exact = d2.tail(hi);
  } else {
    hi = d2.quantile(1.0 - kEdgeMass);
    upper_extra += d2.tail(hi);
  }
  const double top2 = d2.support_max();
  if (std::isfinite(top2)) hi = std::min(hi, top2);

  const double start = lo - grid_step;
  upper_extra += d2.cdf(start);

  double lower = exact;
  double upper = exact + upper_extra;
  std::size_t cells = 0;
  if (hi > start) {
    const double count = std::ceil((hi - start) / grid_step);
    if (count > kMaxCells) {
      throw CoverageError("convolution window [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "] needs more than 5e7 cells at step " +
                          std::to_string(grid_step));
    }
    cells = static_cast<std::size_t>(count);
    const double median = d2.quantile(0.5);
    for (std::size_t k = 0; k < cells; ++k) {
      const double c = start + static_cast<double>(k) * grid_step;
      const double edge = std::min(c + grid_step, hi);
      const double mass =
          c >= median ? d2.tail(c) - d2.tail(edge) : d2.cdf(edge) - d2.cdf(c);
      if (mass <= 0.0) continue;
      lower += mass * d1.tail(y - c);
      upper += mass * d1.tail(y - edge);
    }
  }
  upper = std::min(1.0, upper);
  lower = std::min(lower, upper);
  return {0.5 * (lower + upper), lower, upper, grid_step, cells};
}

TailDiagnostics diagnose(const Distribution& d, std::span<const double> levels, double z,
                         double grid_step) {
  if (levels.empty()) throw DomainError("diagnose needs at least one level");
  if (!(z > 0.0)) throw DomainError("diagnose needs z > 0");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i] > levels[i - 1])) throw DomainError("diagnose levels must increase");
  }
  TailDiagnostics out;
  for (double y : levels) {
    const double t = d.tail(y);
    if (!(t > 0.0)) {
      throw DomainError("level " + std::to_string(y) + " lies beyond the support of " +
                        d.describe());
    }
    const double step = grid_step > 0.0 ? grid_step : std::max(1e-4 * std::abs(y), 1e-4);
    const auto conv = conv_tail(d, d, y, step);
    out.level_grid.push_back(y);
    out.long_tail_ratios.push_back(d.tail(y + z) / t);
    out.subexp_ratios.push_back(conv.value / t);
    out.subexp_lower.push_back(conv.lower / t);
    out.subexp_upper.push_back(conv.upper / t);
  }
  const double last_long = out.long_tail_ratios.back();
  const double last_sub = out.subexp_ratios.back();
  out.verdict_long_tailed = last_long >= 0.9 && last_long <= 1.0;
  out.verdict_subexp_consistent = last_sub >= 1.8 && last_sub <= 2.2;
  return out;
}

namespace {

// Right-tail classes in increasing heaviness.
enum class TailClass { Bounded = 0, Exponential = 1, Weibull = 2, Lognormal = 3, Power = 4 };

struct TailShape {
  TailClass cls;
  double p1 = 0.0;  // rate | shape | 1/sigma | alpha
  double p2 = 0.0;  // -    | scale | mu    | -
  double coef = 1.0;
};

std::optional<TailShape> tail_shape(const Distribution& d) {
  return std::visit(
      Overloaded{
          [](const Pareto& p) -> std::optional<TailShape> {
            return TailShape{TailClass::Power, p.alpha, 0.0, std::pow(p.scale, p.alpha)};
          },
          [](const Lognormal& p) -> std::optional<TailShape> {
            return TailShape{TailClass::Lognormal, 1.0 / p.sigma, p.mu};
          },
          [](const HeavyWeibull& p) -> std::optional<TailShape> {
            return TailShape{TailClass::Weibull, p.shape, p.scale};
          },
          [](const Exponential& p) -> std::optional<TailShape> {
            return TailShape{TailClass::Exponential, p.rate};
          },
          [](const Discrete&) -> std::optional<TailShape> {
            return TailShape{TailClass::Bounded};
          },
          [](const Shifted& p) -> std::optional<TailShape> {
            auto s = tail_shape(*p.inner);
            if (s && s->cls == TailClass::Exponential) s->coef *= std::exp(s->p1 * p.offset);
            return s;
          },
          [](const Negated& p) -> std::optional<TailShape> {
            if (std::isfinite(p.inner->support_min())) return TailShape{TailClass::Bounded};
            return std::nullopt;
          },
          [](const Ceiling& p) -> std::optional<TailShape> {
            auto s = tail_shape(*p.inner);
            if (s && s->cls == TailClass::Exponential) return std::nullopt;
            return s;
          },
      },
      d.kind());
}

// -1: a lighter, +1: a heavier, 0: equal parameters. Larger p1 means lighter
// for every class; the secondary parameter breaks ties.
int compare_params(const TailShape& a, const TailShape& b) {
  if (!nearly_equal(a.p1, b.p1)) return a.p1 > b.p1 ? -1 : 1;
  switch (a.cls) {
    case TailClass::Weibull:
    case TailClass::Lognormal:
      if (!nearly_equal(a.p2, b.p2)) return a.p2 < b.p2 ? -1 : 1;
      return 0;
    default:
      return 0;
  }
}

}  // namespace

std::optional<double> asymptotic_tail_ratio(const Distribution& a, const Distribution& b) {
  const auto sa = tail_shape(a);
  const auto sb = tail_shape(b);
  if (!sa || !sb) return std::nullopt;
  if (sa->cls == TailClass::Bounded) return 0.0;
  if (sb->cls == TailClass::Bounded) return kInf;
  if (sa->cls != sb->cls) return sa->cls < sb->cls ? 0.0 : kInf;
  const int cmp = compare_params(*sa, *sb);
  if (cmp < 0) return 0.0;
  if (cmp > 0) return kInf;
  return sa->coef / sb->coef;
}

}  // namespace modwalk
