#include "modwalk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "modwalk/errors.hpp"

namespace modwalk {

LatticeModel LatticeModel::iid(double h, std::vector<std::pair<std::int64_t, double>> pmf) {
  LatticeModel lm;
  lm.h = h;
  lm.transition = {{1.0}};
  lm.pmf = {std::move(pmf)};
  lm.initial = {1.0};
  return lm;
}

LatticeModel LatticeModel::plus_minus_one(double p) {
  return iid(1.0, {{1, p}, {-1, 1.0 - p}});
}

std::vector<double> LatticeModel::drifts() const {
  std::vector<double> d;
  for (const auto& row : pmf) {
    double m = 0.0;
    for (const auto& [k, p] : row) m += p * static_cast<double>(k) * h;
    d.push_back(m);
  }
  return d;
}

void LatticeModel::validate() const {
  if (!(h > 0.0)) throw InvalidModel("lattice span h must be positive");
  if (pmf.empty() || transition.size() != pmf.size()) {
    throw InvalidModel("lattice model needs one pmf per state of the chain");
  }
  for (const auto& row : pmf) {
    double s = 0.0;
    for (const auto& [k, p] : row) {
      if (!(p >= 0.0)) throw InvalidModel("lattice pmf has a negative mass");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw InvalidModel("lattice pmf does not sum to 1");
  }
  if (!initial.empty() && initial.size() != pmf.size()) {
    throw InvalidModel("initial law has the wrong number of states");
  }
  const auto pi = stationary_distribution(transition);
  const auto d = drifts();
  double mean = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) mean += pi[i] * d[i];
  if (!(mean < 0.0)) throw InvalidModel("lattice walk needs a negative stationary drift");
}

namespace {

Distribution law_of(const LatticeModel& lm, std::size_t x) {
  std::vector<Atom> atoms;
  for (const auto& [k, p] : lm.pmf[x]) atoms.push_back({static_cast<double>(k) * lm.h, p});
  return Distribution::discrete(std::move(atoms));
}

std::vector<double> initial_law(const LatticeModel& lm) {
  return lm.initial.empty() ? stationary_distribution(lm.transition) : lm.initial;
}

// Perron root of P diag(E exp(gamma xi^x)) and its right eigenvector.
std::pair<double, Eigen::VectorXd> perron(const LatticeModel& lm, double gamma) {
  const auto n = static_cast<Eigen::Index>(lm.states());
  Eigen::MatrixXd a(n, n);
  std::vector<double> mgf(lm.states(), 0.0);
  for (std::size_t x = 0; x < lm.states(); ++x) {
    for (const auto& [k, p] : lm.pmf[x]) mgf[x] += p * std::exp(gamma * static_cast<double>(k) * lm.h);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = lm.transition[i][j] * mgf[j];
  }
  if (n == 1) return {a(0, 0), Eigen::VectorXd::Ones(1)};
  const Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
  }
  Eigen::VectorXd v = es.eigenvectors().col(best).real().cwiseAbs();
  return {es.eigenvalues()(best).real(), v};
}

struct Lundberg {
  double gamma = 0.0;
  std::vector<double> weight;  // v(x) / min v
};

Lundberg lundberg(const LatticeModel& lm) {
  double hi = 0.01;
  while (perron(lm, hi).first <= 1.0) {
    hi *= 2.0;
    if (hi > 1e6) throw NumericError("no Lundberg exponent: Perron root stays below 1");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (perron(lm, mid).first < 1.0 ? lo : hi) = mid;
  }
  // lo keeps the Perron root at or below 1, so the bound stays valid.
  auto [rho, v] = perron(lm, lo);
  Lundberg out;
  out.gamma = lo;
  const double vmin = v.minCoeff();
  if (!(vmin > 0.0)) throw NumericError("Perron eigenvector is not positive");
  for (Eigen::Index i = 0; i < v.size(); ++i) out.weight.push_back(v(i) / vmin);
  return out;
}

}  // namespace

ModulatedModel to_modulated(const LatticeModel& lm) {
  lm.validate();
  std::vector<Distribution> laws;
  std::vector<Atom> mix;
  const double w = 1.0 / static_cast<double>(lm.states());
  for (std::size_t x = 0; x < lm.states(); ++x) {
    laws.push_back(law_of(lm, x));
    for (const auto& [k, p] : lm.pmf[x]) mix.push_back({static_cast<double>(k) * lm.h, p * w});
  }
  FiniteMarkovOptions opts;
  if (!lm.initial.empty()) opts.initial = lm.initial;
  auto m = finite_markov_model(lm.transition, std::move(laws), Distribution::discrete(std::move(mix)),
                               opts);
  m.kind = "lattice";
  return m;
}

ExactTail dp_sup_tail(const LatticeModel& lm, double y, double depth, double tol,
                      std::int64_t max_sweeps) {
  lm.validate();
  if (!(y > 0.0) || !(depth > 0.0)) throw DomainError("dp_sup_tail needs y > 0 and depth > 0");
  const std::size_t nx = lm.states();
  const auto init = initial_law(lm);

  std::int64_t kmax = std::numeric_limits<std::int64_t>::min();
  std::int64_t kmin = std::numeric_limits<std::int64_t>::max();
  for (const auto& row : lm.pmf) {
    for (const auto& [k, p] : row) {
      if (p > 0.0) {
        kmax = std::max(kmax, k);
        kmin = std::min(kmin, k);
      }
    }
  }
  ExactTail out;
  // S > y on the lattice iff the index exceeds floor(y/h).
  const auto top = static_cast<std::int64_t>(std::floor(y / lm.h + 1e-12));
  const auto r_max = top + static_cast<std::int64_t>(std::ceil(depth / lm.h - 1e-12));
  out.grid_height = r_max;
  if (kmax <= 0) return out;  // no upward step

  const auto lb = lundberg(lm);
  out.lundberg_exponent = lb.gamma;
  const std::int64_t reach = std::max<std::int64_t>(0, -kmin);  // headroom gained per step
  const auto cols = static_cast<std::size_t>(r_max + 1 + reach);

  // after[x][r]: crossing probability given the last state was x and the
  // headroom is r, before the next state is drawn.
  // The lower iterate starts at 0 and the upper at 1; both move monotonically,
  // so stopping on the tolerance never breaks the bracket.
  std::vector<std::vector<double>> lo_after(nx, std::vector<double>(cols, 0.0));
  std::vector<std::vector<double>> up_after(nx, std::vector<double>(cols, 1.0));
  for (std::size_t x = 0; x < nx; ++x) {
    for (auto r = r_max + 1; r < static_cast<std::int64_t>(cols); ++r) {
      up_after[x][static_cast<std::size_t>(r)] =
          std::min(1.0, lb.weight[x] * std::exp(-lb.gamma * static_cast<double>(r) * lm.h));
    }
  }
  // ahead[x][r]: same, given the state x has been drawn.
  std::vector<std::vector<double>> lo_ahead(nx, std::vector<double>(r_max + 1, 0.0));
  std::vector<std::vector<double>> up_ahead(nx, std::vector<double>(r_max + 1, 1.0));

  auto ahead_value = [&](const std::vector<std::vector<double>>& after, std::size_t x,
                         std::int64_t r) {
    double v = 0.0;
    for (const auto& [k, p] : lm.pmf[x]) {
      if (k > r) {
        v += p;
      } else {
        v += p * after[x][static_cast<std::size_t>(r - k)];
      }
    }
    return v;
  };

  std::int64_t sweep = 0;
  double change = 0.0;
  for (; sweep < max_sweeps; ++sweep) {
    change = 0.0;
    for (auto r = r_max; r >= 0; --r) {
      const auto ri = static_cast<std::size_t>(r);
      for (std::size_t x = 0; x < nx; ++x) {
        const double lo = ahead_value(lo_after, x, r);
        const double up = ahead_value(up_after, x, r);
        change = std::max({change, std::abs(lo - lo_ahead[x][ri]), std::abs(up - up_ahead[x][ri])});
        lo_ahead[x][ri] = lo;
        up_ahead[x][ri] = up;
      }
      for (std::size_t x = 0; x < nx; ++x) {
        double lo = 0.0;
        double up = 0.0;
        for (std::size_t z = 0; z < nx; ++z) {
          lo += lm.transition[x][z] * lo_ahead[z][ri];
          up += lm.transition[x][z] * up_ahead[z][ri];
        }
        lo_after[x][ri] = lo;
        up_after[x][ri] = std::min(1.0, up);
      }
    }
    if (change < tol) break;
  }
  if (!(change < tol)) {
    throw NumericError("dp_sup_tail did not converge: last sweep change " + std::to_string(change));
  }
  out.iterations = sweep + 1;
  const auto ti = static_cast<std::size_t>(top);
  for (std::size_t x = 0; x < nx; ++x) {
    out.value += init[x] * lo_ahead[x][ti];
    out.upper += init[x] * up_ahead[x][ti];
  }
  out.value = std::clamp(out.value, 0.0, 1.0);
  out.upper = std::clamp(out.upper, out.value, 1.0);
  out.truncation_bias_bound = out.upper - out.value;
  return out;
}

std::vector<double> LindleyTable::w_marginal() const {
  std::vector<double> m(mass.empty() ? 0 : mass.front().size(), 0.0);
  for (const auto& row : mass) {
    for (std::size_t k = 0; k < row.size(); ++k) m[k] += row[k];
  }
  return m;
}

std::vector<double> LindleyTable::state_marginal() const {
  std::vector<double> m;
  for (const auto& row : mass) m.push_back(std::accumulate(row.begin(), row.end(), 0.0));
  return m;
}

LindleyTable dp_lindley_dist(const LatticeModel& lm, std::int64_t n, double height) {
  lm.validate();
  if (n < 0) throw DomainError("dp_lindley_dist needs n >= 0");
  if (!(height >= 0.0)) throw DomainError("dp_lindley_dist needs height >= 0");
  const std::size_t nx = lm.states();
  const auto cells = static_cast<std::size_t>(std::floor(height / lm.h + 1e-12)) + 1;
  const auto init = initial_law(lm);

  LindleyTable t;
  t.h = lm.h;
  t.mass.assign(nx, std::vector<double>(cells, 0.0));
  for (std::size_t x = 0; x < nx; ++x) t.mass[x][0] = init[x];
  if (n == 0) return t;

  auto apply_step = [&](const std::vector<std::vector<double>>& in) {
    std::vector<std::vector<double>> out(nx, std::vector<double>(cells, 0.0));
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t w = 0; w < cells; ++w) {
        const double m = in[x][w];
        if (m == 0.0) continue;
        for (const auto& [k, p] : lm.pmf[x]) {
          const auto nw = std::max<std::int64_t>(0, static_cast<std::int64_t>(w) + k);
          if (nw >= static_cast<std::int64_t>(cells)) {
            t.overflow += m * p;
          } else {
            out[x][static_cast<std::size_t>(nw)] += m * p;
          }
        }
      }
    }
    return out;
  };
  // Step 1 uses X_1 ~ initial directly.
  t.mass = apply_step(t.mass);
  for (std::int64_t i = 2; i <= n; ++i) {
    std::vector<std::vector<double>> moved(nx, std::vector<double>(cells, 0.0));
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t z = 0; z < nx; ++z) {
        const double p = lm.transition[x][z];
        if (p == 0.0) continue;
        for (std::size_t w = 0; w < cells; ++w) moved[z][w] += p * t.mass[x][w];
      }
    }
    t.mass = apply_step(moved);
  }
  return t;
}

SeriesValue veraverbeke_series(double g, const Distribution& law, double y, std::int64_t n_terms) {
  if (!(g > 0.0)) throw DomainError("veraverbeke_series needs g > 0");
  if (!law.has_finite_mean()) throw InvalidModel("series diverges: the law has an infinite mean");
  SeriesValue s;
  auto remainder = [&](std::int64_t n) {
    // integral_n^inf P(xi > y + s g) ds, for arguments where y + n g >= 0
    return law.excess_mean(y + static_cast<double>(n) * g) / g;
  };
  std::int64_t n = 0;
  double sum = 0.0;
  auto add_to = [&](std::int64_t target) {
    for (; n < target; ++n) sum += law.tail(y + static_cast<double>(n + 1) * g);
  };
  if (n_terms > 0) {
    add_to(n_terms);
  } else {
    std::int64_t target = 64;
    add_to(target);
    while (target < 100'000'000) {
      const double width = remainder(target) - remainder(target + 1);
      if (sum == 0.0 ? law.tail(y + static_cast<double>(target) * g) == 0.0 : width <= 1e-6 * sum) {
        break;
      }
      target *= 2;
      add_to(target);
    }
  }
  // The integral bracket needs a nonnegative argument.
  while (y + static_cast<double>(n) * g < 0.0) add_to(n + 1);
  s.partial_sum = sum;
  s.n_terms = n;
  s.lower = sum + remainder(n + 1);
  s.upper = sum + remainder(n);
  return s;
}

}  // namespace modwalk
