#pragma once

// Hand-rolled random generators for formulas and traces used by the property tests.

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "relay_mtl/mtl/formula.hpp"

namespace gen {

using relay_mtl::mtl::AtomPtr;
using relay_mtl::mtl::AtomicPredicate;
using relay_mtl::mtl::BoxRegion;
using relay_mtl::mtl::Formula;
using relay_mtl::mtl::TimeInterval;
using relay_mtl::mtl::Trace;

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Boxes over a `dim`-dimensional signal named `subject`, each covering roughly half the unit cube.
inline std::vector<AtomPtr> random_boxes(std::mt19937_64& rng, int count, int dim,
                                         const std::string& subject = "relay") {
  std::vector<AtomPtr> out;
  for (int i = 0; i < count; ++i) {
    BoxRegion box;
    box.subject = subject;
    box.lo.resize(dim);
    box.hi.resize(dim);
    for (int d = 0; d < dim; ++d) {
      const double a = uniform_real(rng, -1.0, 0.6);
      box.lo(d) = a;
      box.hi(d) = a + uniform_real(rng, 0.4, 1.4);
    }
    out.push_back(std::make_shared<AtomicPredicate>(AtomicPredicate{"p" + std::to_string(i), box}));
  }
  return out;
}

struct FormulaOptions {
  int max_depth = 3;
  int max_bound = 8;
  double unbounded_probability = 0.0;
  bool allow_negation = true;
};

inline TimeInterval random_interval(std::mt19937_64& rng, const FormulaOptions& o) {
  const int lo = uniform_int(rng, 0, o.max_bound / 2);
  if (o.unbounded_probability > 0 && uniform_real(rng, 0, 1) < o.unbounded_probability) {
    return TimeInterval(lo, std::nullopt);
  }
  return TimeInterval(lo, uniform_int(rng, lo, o.max_bound));
}

inline Formula random_formula(std::mt19937_64& rng, const std::vector<AtomPtr>& atoms,
                              const FormulaOptions& o, int depth = 0) {
  if (depth >= o.max_depth || uniform_int(rng, 0, 5) == 0) {
    const int pick = uniform_int(rng, 0, static_cast<int>(atoms.size()) + 1);
    if (pick == static_cast<int>(atoms.size())) return Formula::truth();
    if (pick == static_cast<int>(atoms.size()) + 1) return Formula::atom(atoms[0]);
    return Formula::atom(atoms[static_cast<std::size_t>(pick)]);
  }
  auto sub = [&] { return random_formula(rng, atoms, o, depth + 1); };
  switch (uniform_int(rng, 0, o.allow_negation ? 6 : 5)) {
    case 0:
      return Formula::conjunction({sub(), sub()});
    case 1:
      return Formula::disjunction({sub(), sub()});
    case 2: {
      auto iv = random_interval(rng, o);
      auto a = sub();
      return Formula::until(iv, a, sub());
    }
    case 3:
      return Formula::eventually(random_interval(rng, o), sub());
    case 4:
      return Formula::always(random_interval(rng, o), sub());
    case 5:
      return Formula::conjunction({sub(), sub(), sub()});
    default:
      return Formula::negation(sub());
  }
}

/// Trace with H+1 samples of a `dim`-dimensional "relay" signal in [-1.2, 1.8]^dim.
inline Trace random_trace(std::mt19937_64& rng, int horizon, int dim, double ts = 0.5) {
  Trace tr(ts);
  std::vector<Eigen::VectorXd> samples;
  for (int j = 0; j <= horizon; ++j) {
    Eigen::VectorXd v(dim);
    for (int d = 0; d < dim; ++d) v(d) = uniform_real(rng, -1.2, 1.8);
    samples.push_back(v);
  }
  tr.set_signal("relay", samples);
  return tr;
}

}  // namespace gen
