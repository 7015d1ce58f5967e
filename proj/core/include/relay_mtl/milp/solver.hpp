#pragma once

#include <string>
#include <vector>

#include "relay_mtl/milp/model.hpp"
#include "relay_mtl/milp/simplex.hpp"

namespace relay_mtl::milp {

enum class SolveStatus { Optimal, Infeasible, IterationLimit };

const char* to_string(SolveStatus s);

struct SolveStats {
  long nodes = 0;
  long simplex_iterations = 0;
  double wall_seconds = 0.0;
  double best_bound = 0.0;
  int max_depth = 0;
  long incumbents = 0;
  /// Nodes whose LP value fell below their parent's bound by more than 1e-7.
  long monotonicity_violations = 0;
};

struct SolverResult {
  SolveStatus status = SolveStatus::Infeasible;
  bool has_solution = false;
  double objective = 0.0;
  std::vector<double> assignment;  // indexed by variable id
  SolveStats stats;
  std::string message;
};

struct SolverConfig {
  /// "builtin" or "external:<command template>" (see ExternalBackend).
  std::string backend = "builtin";
  double integrality_tolerance = 1e-6;
  double relative_gap = 1e-6;
  long node_limit = 200000;
  double time_limit_seconds = 600.0;
  /// Run a rounding dive at the root to find an early incumbent.
  bool root_dive = true;
  /// Budget for warm-start snapshots kept by open nodes; beyond it nodes keep only their basis.
  std::size_t snapshot_memory_bytes = std::size_t{512} << 20;
  SimplexOptions simplex;

  /// Throws std::invalid_argument when a limit or tolerance is not positive.
  void validate() const;
};

/// LP relaxation (binaries relaxed to their bounds) solved from scratch.
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  long iterations = 0;
};
LpResult lp_relax_solve(const Model& model, const SimplexOptions& options = {});

/// Branch and bound over the simplex relaxation. Until the first incumbent the search is
/// depth-first; afterwards open nodes are ordered by (bound, deeper first, creation order).
/// Branching picks the most fractional binary,
/// lowest id on ties. Single-threaded and deterministic unless the time limit is hit.
SolverResult branch_and_bound(const Model& model, const SolverConfig& config = {});

/// Dispatches on `config.backend`.
SolverResult solve(const Model& model, const SolverConfig& config = {});

}  // namespace relay_mtl::milp
