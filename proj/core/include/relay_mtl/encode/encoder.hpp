#pragma once

#include <map>
#include <string>
#include <vector>

#include "relay_mtl/milp/model.hpp"
#include "relay_mtl/mtl/formula.hpp"
#include "relay_mtl/sim/agents.hpp"

namespace relay_mtl::encode {

using control::Matrix;
using control::Vector;

class EncodingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Transition of the explorer estimate between samples when the feedback is applied
/// continuously: x_hat(t + ts) - x_g = expm((A - B B^T P) ts) (x_hat(t) - x_g).
Matrix estimate_transition(const sim::ExplorerModel& model, double ts);

/// Estimate positions C x_hat for the `count` samples following `x_hat` (no services).
std::vector<Vector> precompute_estimates(const Vector& x_hat, const Vector& x_g, const sim::ExplorerModel& model,
                                         double ts, int count);

struct EncoderOptions {
  double big_m = 1e4;
  /// Positive boxes are shrunk and negated boxes pushed out by this much so a solution
  /// within solver tolerance still satisfies the exact (closed) predicate.
  double box_margin = 1e-6;
  /// Relative shrink of the inner box used for norm balls.
  double ball_margin = 1e-7;
  /// Cap each big-M coefficient by what the reachable relay positions need.
  bool tighten_big_m = true;
};

/// What the MILP plans: the relay state is fixed at sample `start`, inputs are chosen for
/// samples start .. start+N-1 and the formula is encoded over samples start+1 .. start+N
/// (the weak horizon H = start + N). Samples up to `start` must already be frozen in
/// the formula by specialization.
struct EncodingContext {
  int start = 0;
  int horizon = 1;  // N
  std::string relay_signal = "relay";
  /// Known signals (e.g. precomputed explorer estimates), N samples each, for start+1 .. start+N.
  std::map<std::string, std::vector<Vector>> constants;

  int last() const { return start + horizon; }
};

struct LiteralInfo {
  std::string atom;
  int index = 0;
  bool negated = false;
  int var = -1;        // -1 when the literal was asserted with hard rows
  bool forced = false;
};

struct Encoding {
  milp::Model model;
  std::vector<std::vector<int>> x0;  // [q][state], q = 0..N (sample start+q)
  std::vector<std::vector<int>> u0;  // [q][channel], q = 0..N-1
  std::vector<std::vector<int>> l1;  // [q][channel] aux for |u|
  std::vector<LiteralInfo> literals;
  /// Interval hull of the reachable relay positions per planned sample (q = 0..N).
  std::vector<Vector> reach_lo;
  std::vector<Vector> reach_hi;
  bool trivially_infeasible = false;
};

/// Assembles dynamics, initial state, input bounds, the formula (converted to NNF) and
/// the L1 effort objective. `formula` is evaluated at sample 0 and must only reference
/// samples > start through atoms on the relay signal or on `ctx.constants`.
Encoding build_milp(const sim::RelayModel& relay, const control::DiscretePair& relay_d, const Vector& x0_now,
                    const EncodingContext& ctx, const mtl::Formula& formula, const EncoderOptions& options = {});

/// Relay positions C0 x0^q for q = 0..N read from a solver assignment.
std::vector<Vector> planned_positions(const Encoding& enc, const sim::RelayModel& relay,
                                      const std::vector<double>& assignment);
/// Inputs u0^q for q = 0..N-1 read from a solver assignment.
std::vector<Vector> planned_inputs(const Encoding& enc, const std::vector<double>& assignment);

}  // namespace relay_mtl::encode
