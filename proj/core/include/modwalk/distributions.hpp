#pragma once

// One-dimensional laws used for walk increments, service and inter-arrival
// times, cycle lengths and reference tails.
//
// Every Distribution is an immutable value (a shared pointer to a const node),
// so copies are cheap and instances may be shared across threads freely.
// Sampling is by inverse transform: sample(u) == quantile(u), which lets a
// caller couple several laws through a common uniform.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace modwalk {

class Distribution;

struct Pareto {
  double alpha;
  double scale;
};

struct Lognormal {
  double mu;
  double sigma;
};

/// Weibull with shape in (0,1): subexponential, lighter than any power law.
struct HeavyWeibull {
  double shape;
  double scale;
};

struct Exponential {
  double rate;
};

struct Atom {
  double value;
  double prob;
};

/// Finite point masses, kept sorted by value with duplicates merged.
struct Discrete {
  std::vector<Atom> atoms;
};

struct Shifted {
  std::shared_ptr<const Distribution> inner;
  double offset;
};

struct Negated {
  std::shared_ptr<const Distribution> inner;
};

/// ceil(X) for X >= 0. Gives integer-valued laws with arbitrary tails, e.g.
/// Ceiling{Pareto(p,1)} has P(tau > n) = n^-p and Ceiling{Exponential(ln 2)}
/// is Geometric(1/2) on {1,2,...}.
struct Ceiling {
  std::shared_ptr<const Distribution> inner;
};

using DistributionKind =
    std::variant<Pareto, Lognormal, HeavyWeibull, Exponential, Discrete, Shifted, Negated, Ceiling>;

class Distribution {
 public:
  static Distribution pareto(double alpha, double scale);
  static Distribution lognormal(double mu, double sigma);
  static Distribution heavy_weibull(double shape, double scale);
  static Distribution exponential(double rate);
  static Distribution discrete(std::vector<Atom> atoms);
  static Distribution point(double value);
  static Distribution shifted(const Distribution& inner, double offset);
  static Distribution negated(const Distribution& inner);
  static Distribution ceiling(const Distribution& inner);

  const DistributionKind& kind() const;

  /// P(X > y).
  double tail(double y) const;
  /// P(X <= y).
  double cdf(double y) const;
  /// P(X < y).
  double prob_below(double y) const;

  /// sup{z : cdf(z) <= u}, u in (0,1). Throws DomainError otherwise.
  double quantile(double u) const;
  /// inf{z : cdf(z) >= u}, u in (0,1).
  double lower_quantile(double u) const;
  /// Inverse-transform draw; identical to quantile(u).
  double sample(double u) const { return quantile(u); }

  bool has_finite_mean() const;
  /// Throws InvalidModel when the mean is infinite (Pareto with alpha <= 1).
  double mean() const;

  /// min(1, integral_y^inf of the tail of X^+), i.e. the capped second tail
  /// of the positive part. Throws InvalidModel for infinite mean.
  double integrated_tail(double y) const;
  /// E[(X - y)^+], uncapped.
  double excess_mean(double y) const;

  double support_min() const;
  double support_max() const;

  /// True for the continuous kinds (and shifts/negations of them).
  bool is_continuous() const;
  /// True when every atom of the law sits on the integers.
  bool is_integer_valued() const;

  std::string describe() const;

  friend bool operator==(const Distribution& a, const Distribution& b);

 private:
  struct Node;
  explicit Distribution(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

/// Certified bracket for P(X1 + X2 > y) on a uniform grid.
struct ConvolutionTail {
  double value;  // bracket midpoint
  double lower;
  double upper;
  double grid_step;
  std::size_t cells;
};

/// Numeric tail of the convolution of two independent laws. Mass of d2 outside
/// the grid window (at most 1e-10 each side) is charged to the upper bound.
/// Throws CoverageError when the window needs more cells than the grid allows.
ConvolutionTail conv_tail(const Distribution& d1, const Distribution& d2, double y,
                          double grid_step);

/// Finite-level consistency checks for long-tailedness and subexponentiality.
/// The verdicts are heuristic flags computed at the largest level only.
struct TailDiagnostics {
  std::vector<double> level_grid;
  std::vector<double> long_tail_ratios;
  std::vector<double> subexp_ratios;
  std::vector<double> subexp_lower;
  std::vector<double> subexp_upper;
  bool verdict_long_tailed = false;
  bool verdict_subexp_consistent = false;
};

/// grid_step <= 0 picks max(1e-4 * y, 1e-4) per level.
TailDiagnostics diagnose(const Distribution& d, std::span<const double> levels, double z,
                         double grid_step = 0.0);

/// lim_{y->inf} tail_a(y) / tail_b(y) when it follows from the parametric
/// forms alone; nullopt when a numeric estimate is needed. May return +inf.
std::optional<double> asymptotic_tail_ratio(const Distribution& a, const Distribution& b);

}  // namespace modwalk
