#include "relay_mtl/milp/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace relay_mtl::milp {

std::vector<Term> normalize_terms(std::vector<Term> terms) {
  std::vector<Term> out;
  std::unordered_map<int, std::size_t> slot;
  for (const auto& t : terms) {
    auto [it, fresh] = slot.emplace(t.var, out.size());
    if (fresh) {
      out.push_back(t);
    } else {
      out[it->second].coef += t.coef;
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const Term& t) { return t.coef == 0.0; }), out.end());
  return out;
}

int Model::add_variable(std::string name, VarKind kind, double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw ModelError("variable '" + name + "': invalid bounds");
  }
  if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0)) {
    throw ModelError("binary variable '" + name + "' must have bounds within [0, 1]");
  }
  const int id = static_cast<int>(vars_.size());
  vars_.push_back(Variable{id, std::move(name), kind, lower, upper});
  return id;
}

void Model::check_var(int id) const {
  if (id < 0 || id >= num_variables()) throw ModelError("reference to undeclared variable " + std::to_string(id));
}

void Model::add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string tag) {
  for (const auto& t : terms) {
    check_var(t.var);
    if (!std::isfinite(t.coef)) throw ModelError("constraint '" + tag + "': non-finite coefficient");
  }
  if (!std::isfinite(rhs)) throw ModelError("constraint '" + tag + "': non-finite right-hand side");
  terms = normalize_terms(std::move(terms));
  if (terms.empty()) {
    const bool ok = sense == Sense::LessEqual ? 0.0 <= rhs : sense == Sense::GreaterEqual ? 0.0 >= rhs : rhs == 0.0;
    if (!ok) throw ModelError("constraint '" + tag + "' has no terms and cannot hold");
    return;
  }
  cons_.push_back(Constraint{std::move(terms), sense, rhs, std::move(tag)});
}

void Model::set_objective(std::vector<Term> terms) {
  for (const auto& t : terms) check_var(t.var);
  objective_ = normalize_terms(std::move(terms));
}

void Model::set_bounds(int var, double lower, double upper) {
  check_var(var);
  auto& v = vars_[static_cast<std::size_t>(var)];
  if (lower > upper) throw ModelError("variable '" + v.name + "': lower bound above upper bound");
  v.lower = lower;
  v.upper = upper;
}

int Model::num_binaries() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

double Model::objective_value(const std::vector<double>& x) const {
  double s = 0.0;
  for (const auto& t : objective_) s += t.coef * x.at(static_cast<std::size_t>(t.var));
  return s;
}

double Model::max_violation(const std::vector<double>& x, bool check_integrality) const {
  if (x.size() != vars_.size()) return kInf;
  double worst = 0.0;
  for (const auto& v : vars_) {
    const double xv = x[static_cast<std::size_t>(v.id)];
    if (!std::isfinite(xv)) return kInf;
    worst = std::max({worst, v.lower - xv, xv - v.upper});
    if (check_integrality && v.kind == VarKind::Binary) worst = std::max(worst, std::abs(xv - std::round(xv)));
  }
  for (const auto& c : cons_) {
    double act = 0.0;
    for (const auto& t : c.terms) act += t.coef * x[static_cast<std::size_t>(t.var)];
    if (c.sense != Sense::GreaterEqual) worst = std::max(worst, act - c.rhs);
    if (c.sense != Sense::LessEqual) worst = std::max(worst, c.rhs - act);
  }
  return worst;
}

}  // namespace relay_mtl::milp
