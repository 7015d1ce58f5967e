#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace relay_mtl::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };
enum class Sense { LessEqual, Equal, GreaterEqual };

struct Variable {
  int id = 0;
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInf;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  std::string tag;
};

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Solver-agnostic mixed-integer linear program, minimisation sense.
class Model {
 public:
  int add_variable(std::string name, VarKind kind, double lower, double upper);
  int add_continuous(std::string name, double lower = -kInf, double upper = kInf) {
    return add_variable(std::move(name), VarKind::Continuous, lower, upper);
  }
  int add_binary(std::string name) { return add_variable(std::move(name), VarKind::Binary, 0.0, 1.0); }

  /// Adds `sum terms (sense) rhs`. Terms on the same variable are merged and zero
  /// coefficients dropped; a constraint left without terms must hold trivially.
  void add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string tag);

  void set_objective(std::vector<Term> terms);
  void set_bounds(int var, double lower, double upper);

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  const std::vector<Term>& objective() const { return objective_; }
  const Variable& variable(int id) const { return vars_.at(static_cast<std::size_t>(id)); }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(cons_.size()); }
  int num_binaries() const;

  double objective_value(const std::vector<double>& x) const;
  /// Largest violation of any bound, constraint or integrality requirement.
  double max_violation(const std::vector<double>& x, bool check_integrality = true) const;

  double big_m = 1e4;

 private:
  void check_var(int id) const;

  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  std::vector<Term> objective_;
};

/// Merges duplicate variables and drops zero coefficients; keeps first-appearance order.
std::vector<Term> normalize_terms(std::vector<Term> terms);

}  // namespace relay_mtl::milp
