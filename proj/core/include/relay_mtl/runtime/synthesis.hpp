#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relay_mtl/encode/encoder.hpp"
#include "relay_mtl/milp/solver.hpp"
#include "relay_mtl/mtl/eval.hpp"
#include "relay_mtl/sim/agents.hpp"

namespace relay_mtl::runtime {

using control::Vector;

/// Name of the signal carrying explorer `name`'s estimated position C x_hat.
std::string estimate_signal(const std::string& explorer);

struct ResolveRecord;

struct SynthesisProblem {
  sim::World world;
  Vector x0;
  std::vector<Vector> explorer_x;
  /// Full specification over the signals "relay", "<explorer>.hat" (and "<explorer>" for monitoring).
  mtl::Formula formula;
  int horizon = 10;  // N
  int max_steps = 2000;
  std::uint64_t seed = 1;
  encode::EncoderOptions encoder;
  milp::SolverConfig solver;
  /// Called after every solve (progress reporting); must not throw.
  std::function<void(const ResolveRecord&)> on_resolve;
};

enum class RunStatus { Completed, Infeasible, SolverLimit, Diverged, StepLimit };
std::string to_string(RunStatus s);

/// One sample of the run. Estimates are recorded before any reset at this index, which is
/// what the service decision and the formula saw.
struct StepRecord {
  int index = 0;
  Vector x0;
  Vector y0;
  Vector u0;  // applied at this index; empty at the final index
  int solve_id = -1;  // solve whose plan supplied u0
  std::vector<Vector> x;
  std::vector<Vector> x_hat;
  std::vector<Vector> y;
  std::vector<Vector> y_hat;
  std::vector<double> e1;  // ||x_hat - x||
  std::vector<double> e2;  // ||x_g - x_hat||
};

struct ServiceRecord {
  int index = 0;
  int explorer = 0;
  sim::ServiceTrigger trigger = sim::ServiceTrigger::Relay;
};

enum class ResolveReason { Initial, Service, HorizonExhausted, PlanInvalidated };
std::string to_string(ResolveReason r);

struct ResolveRecord {
  int id = 0;
  int index = 0;
  ResolveReason reason = ResolveReason::Initial;
  std::vector<int> serviced;
  int variables = 0;
  int binaries = 0;
  int constraints = 0;
  milp::SolveStatus status = milp::SolveStatus::Optimal;
  double objective = 0.0;
  milp::SolveStats stats;
  /// Exact-predicate audit of the plan: positive norm-ball literals the solution turned on
  /// and how many of them violate the exact 2-norm predicate.
  int ball_checks = 0;
  int ball_violations = 0;
  /// Observed prefix plus the planned positions weakly satisfy the formula (exact semantics).
  bool plan_weakly_satisfies = false;
};

struct AbortInfo {
  int index = 0;
  std::string specialized_formula;
  Vector x0;
  std::vector<Vector> x_hat;
  std::string message;
};

struct RunLog {
  RunStatus status = RunStatus::Completed;
  std::vector<std::string> explorer_names;
  double ts = 0.5;
  int horizon = 0;
  std::vector<StepRecord> steps;
  std::vector<ServiceRecord> services;
  std::vector<ResolveRecord> resolves;
  /// Minimal index with every explorer inside the goal region (set when completed).
  std::optional<int> termination_index;
  std::optional<AbortInfo> abort;
  /// Realized trace checked against the original formula.
  mtl::Verdict verdict;
  double wall_seconds = 0.0;
};

/// W nonempty or the plan is used up.
bool should_resolve(const std::vector<int>& w, int l, int l_star, int horizon);

/// Receding-horizon loop: solve, apply, detect services, reset, specialize, re-solve.
RunLog run_synthesis(const SynthesisProblem& problem);

/// Sum of ||u0||_2 over the inputs applied before termination. Throws std::logic_error
/// for a run that did not complete.
double cumulative_effort(const RunLog& log);

/// Relay service instants of explorer i (index 0 first), strictly increasing.
std::vector<int> service_times(const RunLog& log, int explorer);

/// Largest gap between consecutive relay services of explorer i, including the gap from the
/// last service to the final index.
int max_service_gap(const RunLog& log, int explorer);

/// Trace with "relay", "<name>.hat" and "<name>" signals over the recorded steps.
mtl::Trace realized_trace(const RunLog& log);

}  // namespace relay_mtl::runtime
