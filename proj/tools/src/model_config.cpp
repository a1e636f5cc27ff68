#include "modwalk/cli/model_config.hpp"

#include <cmath>

#include "modwalk/errors.hpp"
#include "modwalk/estimate.hpp"

namespace modwalk::cli {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key, "missing required field");
  return *it;
}

double number(const json& j, const char* key, const std::string& path) {
  const auto& v = field(j, key, path);
  if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
  return v.get<double>();
}

std::vector<Distribution> distribution_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty array");
  std::vector<Distribution> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_distribution(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::vector<double>> matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a square matrix");
  std::vector<std::vector<double>> m;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array()) throw ConfigError(p, "expected a row array");
    std::vector<double> row;
    for (const auto& v : j[i]) {
      if (!v.is_number()) throw ConfigError(p, "expected numbers");
      row.push_back(v.get<double>());
    }
    m.push_back(std::move(row));
  }
  return m;
}

std::vector<std::string> label_names(const json& j, std::size_t n, const std::string& path) {
  std::vector<std::string> names;
  if (j.contains("labels")) {
    for (const auto& v : j["labels"]) {
      if (!v.is_string()) throw ConfigError(path + ".labels", "expected strings");
      names.push_back(v.get<std::string>());
    }
    if (names.size() != n) throw ConfigError(path + ".labels", "one label per state required");
  } else {
    for (std::size_t i = 0; i < n; ++i) names.push_back("s" + std::to_string(i));
  }
  return names;
}

int label_index(const json& v, const std::vector<std::string>& labels, const std::string& path) {
  if (v.is_number_integer()) {
    const int i = v.get<int>();
    if (i < 0 || i >= static_cast<int>(labels.size())) throw ConfigError(path, "label out of range");
    return i;
  }
  if (v.is_string()) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == v.get<std::string>()) return static_cast<int>(i);
    }
    throw ConfigError(path, "unknown label '" + v.get<std::string>() + "'");
  }
  throw ConfigError(path, "expected a label name or index");
}

// "cycle": {"repeat": label, "final": label} puts tau-1 copies of `repeat`
// and then `final`; {"sequence": [labels]} requires tau to equal its length.
RegenSpec parse_regen_spec(const json& j, const std::string& path) {
  RegenSpec spec;
  spec.tau0_law = parse_distribution(field(j, "tau0", path), path + ".tau0");
  spec.tau_law = parse_distribution(field(j, "tau", path), path + ".tau");
  const auto& cyc = field(j, "cycle", path);
  const auto cpath = path + ".cycle";
  std::size_t n_labels = 0;
  if (j.contains("labels")) n_labels = j["labels"].size();
  spec.labels = label_names(j, n_labels, path);
  if (spec.labels.empty()) throw ConfigError(path + ".labels", "regenerative records need labels");
  if (cyc.contains("sequence")) {
    std::vector<int> seq;
    for (std::size_t i = 0; i < cyc["sequence"].size(); ++i) {
      seq.push_back(label_index(cyc["sequence"][i], spec.labels,
                                cpath + ".sequence[" + std::to_string(i) + "]"));
    }
    if (seq.empty()) throw ConfigError(cpath + ".sequence", "empty cycle");
    spec.cycle_builder = [seq](std::int64_t tau, Rng&) {
      if (tau != static_cast<std::int64_t>(seq.size())) {
        throw InvalidModel("cycle sequence has length " + std::to_string(seq.size()) +
                           " but tau = " + std::to_string(tau));
      }
      std::vector<State> out;
      for (int s : seq) out.push_back(labeled(s));
      return out;
    };
    const auto n = spec.labels.size();
    spec.occupation = [seq, n](std::int64_t) {
      std::vector<double> occ(n, 0.0);
      for (int s : seq) occ[static_cast<std::size_t>(s)] += 1.0;
      return occ;
    };
  } else {
    const int rep = label_index(field(cyc, "repeat", cpath), spec.labels, cpath + ".repeat");
    const int fin = label_index(field(cyc, "final", cpath), spec.labels, cpath + ".final");
    spec.cycle_builder = [rep, fin](std::int64_t tau, Rng&) {
      std::vector<State> out(static_cast<std::size_t>(tau), labeled(rep));
      out.back() = labeled(fin);
      return out;
    };
    const auto n = spec.labels.size();
    spec.occupation = [rep, fin, n](std::int64_t tau) {
      std::vector<double> occ(n, 0.0);
      occ[static_cast<std::size_t>(rep)] += static_cast<double>(tau - 1);
      occ[static_cast<std::size_t>(fin)] += 1.0;
      return occ;
    };
  }
  return spec;
}

}  // namespace

Distribution parse_distribution(const json& j, const std::string& path) {
  const auto& kind_field = field(j, "kind", path);
  if (!kind_field.is_string()) throw ConfigError(path + ".kind", "expected a string");
  const auto kind = kind_field.get<std::string>();
  if (kind == "pareto") return Distribution::pareto(number(j, "alpha", path), number(j, "scale", path));
  if (kind == "lognormal") {
    return Distribution::lognormal(number(j, "mu", path), number(j, "sigma", path));
  }
  if (kind == "weibull") {
    return Distribution::heavy_weibull(number(j, "shape", path), number(j, "scale", path));
  }
  if (kind == "exponential") return Distribution::exponential(number(j, "rate", path));
  if (kind == "point") return Distribution::point(number(j, "value", path));
  if (kind == "discrete") {
    const auto& atoms = field(j, "atoms", path);
    if (!atoms.is_array()) throw ConfigError(path + ".atoms", "expected [[value, prob], ...]");
    std::vector<Atom> out;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto& a = atoms[i];
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
        throw ConfigError(path + ".atoms[" + std::to_string(i) + "]", "expected [value, prob]");
      }
      out.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    return Distribution::discrete(std::move(out));
  }
  if (kind == "shifted") {
    return Distribution::shifted(parse_distribution(field(j, "inner", path), path + ".inner"),
                                 number(j, "offset", path));
  }
  if (kind == "negated") {
    return Distribution::negated(parse_distribution(field(j, "inner", path), path + ".inner"));
  }
  if (kind == "ceiling") {
    return Distribution::ceiling(parse_distribution(field(j, "inner", path), path + ".inner"));
  }
  throw ConfigError(path + ".kind", "unknown distribution kind '" + kind + "'");
}

json distribution_json(const Distribution& d) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Pareto>) {
          return {{"kind", "pareto"}, {"alpha", k.alpha}, {"scale", k.scale}};
        } else if constexpr (std::is_same_v<K, Lognormal>) {
          return {{"kind", "lognormal"}, {"mu", k.mu}, {"sigma", k.sigma}};
        } else if constexpr (std::is_same_v<K, HeavyWeibull>) {
          return {{"kind", "weibull"}, {"shape", k.shape}, {"scale", k.scale}};
        } else if constexpr (std::is_same_v<K, Exponential>) {
          return {{"kind", "exponential"}, {"rate", k.rate}};
        } else if constexpr (std::is_same_v<K, Discrete>) {
          json atoms = json::array();
          for (const auto& a : k.atoms) atoms.push_back({a.value, a.prob});
          return {{"kind", "discrete"}, {"atoms", atoms}};
        } else if constexpr (std::is_same_v<K, Shifted>) {
          return {{"kind", "shifted"}, {"inner", distribution_json(*k.inner)}, {"offset", k.offset}};
        } else if constexpr (std::is_same_v<K, Negated>) {
          return {{"kind", "negated"}, {"inner", distribution_json(*k.inner)}};
        } else {
          return {{"kind", "ceiling"}, {"inner", distribution_json(*k.inner)}};
        }
      },
      d.kind());
}

ModulatedModel parse_model(const json& j, const std::string& path) {
  const auto& kind_field = field(j, "model", path);
  if (!kind_field.is_string()) throw ConfigError(path + ".model", "expected a string");
  const auto kind = kind_field.get<std::string>();

  if (kind == "iid") return iid_model(parse_distribution(field(j, "xi", path), path + ".xi"));

  if (kind == "finite_markov") {
    auto p = matrix(field(j, "transition", path), path + ".transition");
    auto inc = distribution_list(field(j, "increments", path), path + ".increments");
    auto ref = parse_distribution(field(j, "reference", path), path + ".reference");
    FiniteMarkovOptions opts;
    if (j.contains("initial")) opts.initial = j["initial"].get<std::vector<double>>();
    auto m = finite_markov_model(p, std::move(inc), std::move(ref), opts);
    m.labels = label_names(j, p.size(), path);
    return m;
  }

  if (kind == "regenerative") {
    auto spec = parse_regen_spec(j, path);
    auto inc = distribution_list(field(j, "increments", path), path + ".increments");
    if (inc.size() != spec.labels.size()) {
      throw ConfigError(path + ".increments", "one increment law per label required");
    }
    auto ref = parse_distribution(field(j, "reference", path), path + ".reference");
    return regenerative_model(std::move(spec), IncrementFamily::per_label(std::move(inc)),
                              std::move(ref));
  }

  if (kind == "tandem") {
    return tandem_departure_process(
        parse_distribution(field(j, "interarrival", path), path + ".interarrival"),
        parse_distribution(field(j, "service1", path), path + ".service1"),
        parse_distribution(field(j, "service2", path), path + ".service2"));
  }

  if (kind == "difference") {
    auto spec = parse_regen_spec(j, path);
    auto b = distribution_list(field(j, "b", path), path + ".b");
    if (b.size() != spec.labels.size()) throw ConfigError(path + ".b", "one b law per label required");
    auto ref = parse_distribution(field(j, "reference", path), path + ".reference");
    return difference_model(
        parse_distribution(field(j, "zeta", path), path + ".zeta"),
        [b](const State& s) { return b.at(static_cast<std::size_t>(s.label)); }, std::move(spec),
        std::move(ref));
  }

  if (kind == "counterexample") {
    auto zeta = parse_distribution(field(j, "zeta", path), path + ".zeta");
    const double b0 = number(j, "b0", path);
    if (j.contains("tau")) {
      return counterexample_model(std::move(zeta), b0, parse_distribution(j["tau"], path + ".tau"));
    }
    return counterexample_model(std::move(zeta), b0, number(j, "tau_tail_power", path));
  }

  throw ConfigError(path + ".model", "unknown model kind '" + kind + "'");
}

LatticeModel parse_lattice(const json& j, const std::string& path) {
  const auto kind = field(j, "model", path).get<std::string>();
  const double h = j.contains("lattice_h") ? number(j, "lattice_h", path) : 1.0;
  if (!(h > 0.0)) throw ConfigError(path + ".lattice_h", "must be positive");
  std::vector<Distribution> laws;
  LatticeModel lm;
  lm.h = h;
  if (kind == "iid") {
    laws.push_back(parse_distribution(field(j, "xi", path), path + ".xi"));
    lm.transition = {{1.0}};
    lm.initial = {1.0};
  } else if (kind == "finite_markov") {
    laws = distribution_list(field(j, "increments", path), path + ".increments");
    lm.transition = matrix(field(j, "transition", path), path + ".transition");
    if (j.contains("initial")) lm.initial = j["initial"].get<std::vector<double>>();
  } else {
    throw ConfigError(path + ".model", "oracle-check needs an iid or finite_markov lattice model");
  }
  for (std::size_t x = 0; x < laws.size(); ++x) {
    const auto* atoms = std::get_if<Discrete>(&laws[x].kind());
    const auto p = path + ".increments[" + std::to_string(x) + "]";
    if (!atoms) throw ConfigError(p, "lattice increments must be discrete");
    std::vector<std::pair<std::int64_t, double>> pmf;
    for (const auto& a : atoms->atoms) {
      const double k = a.value / h;
      if (std::abs(k - std::round(k)) > 1e-9) throw ConfigError(p, "atom off the lattice h*Z");
      pmf.emplace_back(static_cast<std::int64_t>(std::llround(k)), a.prob);
    }
    lm.pmf.push_back(std::move(pmf));
  }
  lm.validate();
  return lm;
}

StateSet parse_state_set(const json& j, const ModulatedModel& model, const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "all") return all_states();
  if (!j.is_array()) throw ConfigError(path, "expected \"all\" or a list of labels");
  if (!model.is_finite()) throw ConfigError(path, "label sets need a finite state space");
  std::vector<int> idx;
  for (std::size_t i = 0; i < j.size(); ++i) {
    idx.push_back(label_index(j[i], model.labels, path + "[" + std::to_string(i) + "]"));
  }
  return labels_in(std::move(idx));
}

}  // namespace modwalk::cli
