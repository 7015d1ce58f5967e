#pragma once

#include <stdexcept>
#include <string>

#include "relay_mtl/milp/solver.hpp"

namespace relay_mtl::milp {

class ExternalSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs an external MILP solver as a subprocess. The command template must contain
/// `{in}` (replaced by the exported LP file) and `{out}` (where the solver writes its
/// solution, see import_solution).
///
/// Error mapping: a non-zero exit code or a missing/unreadable output file throws
/// ExternalSolverError; `status infeasible` yields Infeasible; `status` values
/// containing "limit" yield IterationLimit; anything else must be an assignment that
/// passes the 1e-6 constraint audit, otherwise ExternalSolverError.
class ExternalBackend {
 public:
  explicit ExternalBackend(std::string command_template);
  SolverResult solve(const Model& model, const SolverConfig& config) const;
  const std::string& command_template() const { return template_; }

 private:
  std::string template_;
};

}  // namespace relay_mtl::milp
