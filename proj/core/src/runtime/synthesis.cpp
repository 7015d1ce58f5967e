#include "relay_mtl/runtime/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "relay_mtl/mtl/rewrite.hpp"

namespace relay_mtl::runtime {

std::string estimate_signal(const std::string& explorer) { return explorer + ".hat"; }

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed:
      return "completed";
    case RunStatus::Infeasible:
      return "infeasible";
    case RunStatus::SolverLimit:
      return "solver_limit";
    case RunStatus::Diverged:
      return "diverged";
    case RunStatus::StepLimit:
      return "step_limit";
  }
  return "unknown";
}

std::string to_string(ResolveReason r) {
  switch (r) {
    case ResolveReason::Initial:
      return "initial";
    case ResolveReason::Service:
      return "service";
    case ResolveReason::HorizonExhausted:
      return "horizon";
    case ResolveReason::PlanInvalidated:
      return "plan_invalidated";
  }
  return "unknown";
}

bool should_resolve(const std::vector<int>& w, int l, int l_star, int horizon) {
  return !w.empty() || l >= l_star + horizon;
}

namespace {

const std::string kRelay = "relay";

void collect_atoms(const mtl::Formula& f, std::map<std::string, mtl::AtomPtr>& out) {
  if (f.kind() == mtl::Formula::Kind::Atom) out.emplace(f.predicate().id, f.predicate_ptr());
  for (const auto& c : f.children()) collect_atoms(c, out);
}

struct Plan {
  int id = -1;
  int start = -1;
  std::vector<Vector> inputs;     // start .. start+N-1
  std::vector<Vector> positions;  // start .. start+N
};

class Runner {
 public:
  explicit Runner(const SynthesisProblem& p)
      : p_(p), w_(p.world), rng_(p.seed), observed_(p.world.config().ts) {
    if (p.horizon < 1) throw std::invalid_argument("horizon N must be at least 1");
    if (p.max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
    collect_atoms(p.formula, atoms_);
    for (const auto& e : w_.explorers()) log_.explorer_names.push_back(e.name);
    log_.ts = w_.config().ts;
    log_.horizon = p.horizon;
  }

  RunLog run() {
    const auto t0 = std::chrono::steady_clock::now();
    sim::WorldState s = w_.initial_state(p_.x0, p_.explorer_x);
    for (int l = 0;; ++l) {
      StepRecord rec = record(s);
      if (w_.all_in_goal(s)) {
        log_.termination_index = l;
        log_.steps.push_back(std::move(rec));
        break;
      }
      if (l >= p_.max_steps) {
        log_.status = RunStatus::StepLimit;
        log_.steps.push_back(std::move(rec));
        break;
      }
      const std::vector<int> relay_w = w_.detect_service(s);
      std::vector<int> goal_w;
      for (int i : w_.detect_goal(s)) {
        if (std::find(relay_w.begin(), relay_w.end(), i) == relay_w.end()) goal_w.push_back(i);
      }
      for (int i : relay_w) log_.services.push_back({l, i, sim::ServiceTrigger::Relay});
      for (int i : goal_w) log_.services.push_back({l, i, sim::ServiceTrigger::GoalRegion});
      std::vector<int> all = relay_w;
      all.insert(all.end(), goal_w.begin(), goal_w.end());
      s = w_.apply_service(s, all);

      std::optional<ResolveReason> reason;
      if (plan_.id < 0) {
        reason = ResolveReason::Initial;
      } else if (should_resolve(relay_w, l, plan_.start, p_.horizon)) {
        reason = relay_w.empty() ? ResolveReason::HorizonExhausted : ResolveReason::Service;
      } else if (!goal_w.empty() && !plan_holds(s, l)) {
        reason = ResolveReason::PlanInvalidated;
      }
      if (reason && !resolve(s, l, *reason, relay_w)) {
        log_.steps.push_back(std::move(rec));
        break;
      }
      const int q = l - plan_.start;
      if (q < 0 || q >= p_.horizon) throw std::logic_error("applied input outside the current plan");
      rec.u0 = plan_.inputs[static_cast<std::size_t>(q)];
      rec.solve_id = plan_.id;
      log_.steps.push_back(rec);
      try {
        s = w_.step(s, rec.u0, rng_);
      } catch (const control::NumericalError& e) {
        log_.status = RunStatus::Diverged;
        abort(s, l, "", e.what());
        break;
      }
    }
    log_.verdict = mtl::evaluate(realized_trace(log_), p_.formula, 0);
    log_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::move(log_);
  }

 private:
  StepRecord record(const sim::WorldState& s) {
    StepRecord r;
    r.index = s.t_index;
    r.x0 = s.x0;
    r.y0 = w_.relay_position(s);
    observed_.push_sample(kRelay, r.y0);
    for (std::size_t i = 0; i < s.explorers.size(); ++i) {
      const auto& e = s.explorers[i];
      r.x.push_back(e.x);
      r.x_hat.push_back(e.x_hat);
      r.y.push_back(w_.explorer_position(s, i));
      r.y_hat.push_back(w_.estimate_position(s, i));
      r.e1.push_back((e.x_hat - e.x).norm());
      r.e2.push_back((w_.config().x_g - e.x_hat).norm());
      observed_.push_sample(estimate_signal(w_.explorers()[i].name), r.y_hat.back());
    }
    return r;
  }

  std::map<std::string, std::vector<Vector>> estimates(const sim::WorldState& s, int count) const {
    std::map<std::string, std::vector<Vector>> out;
    for (std::size_t i = 0; i < s.explorers.size(); ++i) {
      const auto& m = w_.explorers()[i];
      out[estimate_signal(m.name)] =
          encode::precompute_estimates(s.explorers[i].x_hat, w_.config().x_g, m, w_.config().ts, count);
    }
    return out;
  }

  // Observed samples 0..l followed by planned relay positions and predicted estimates.
  mtl::Trace extended(const std::vector<Vector>& relay_future,
                      const std::map<std::string, std::vector<Vector>>& est_future) const {
    mtl::Trace tr(observed_.sampling_period());
    std::vector<Vector> relay = observed_.signal(kRelay);
    relay.insert(relay.end(), relay_future.begin(), relay_future.end());
    tr.set_signal(kRelay, std::move(relay));
    for (const auto& [name, future] : est_future) {
      std::vector<Vector> v = observed_.signal(name);
      v.insert(v.end(), future.begin(), future.end());
      tr.set_signal(name, std::move(v));
    }
    return tr;
  }

  bool weakly_holds(const mtl::Trace& tr) const {
    try {
      return mtl::eval_weak(tr, p_.formula, 0);
    } catch (const mtl::UnknownSignalError&) {
      return false;
    }
  }

  // Whether the stored plan still weakly satisfies the formula after estimate resets at l.
  bool plan_holds(const sim::WorldState& s, int l) const {
    const int remaining = plan_.start + p_.horizon - l;
    std::vector<Vector> relay(plan_.positions.begin() + (l - plan_.start) + 1, plan_.positions.end());
    return weakly_holds(extended(relay, estimates(s, remaining)));
  }

  bool resolve(const sim::WorldState& s, int l, ResolveReason reason, const std::vector<int>& serviced) {
    ResolveRecord rr;
    rr.id = static_cast<int>(log_.resolves.size());
    rr.index = l;
    rr.reason = reason;
    rr.serviced = serviced;
    const mtl::Formula spec = mtl::specialize(p_.formula, observed_, l);
    encode::EncodingContext ctx;
    ctx.start = l;
    ctx.horizon = p_.horizon;
    ctx.relay_signal = kRelay;
    ctx.constants = estimates(s, p_.horizon);
    const encode::Encoding enc = encode::build_milp(w_.relay(), w_.relay_discrete(), s.x0, ctx, spec, p_.encoder);
    rr.variables = enc.model.num_variables();
    rr.binaries = enc.model.num_binaries();
    rr.constraints = enc.model.num_constraints();
    milp::SolverResult res;
    if (enc.trivially_infeasible) {
      res.status = milp::SolveStatus::Infeasible;
      res.message = "formula folds to false";
    } else {
      res = milp::solve(enc.model, p_.solver);
    }
    rr.status = res.status;
    rr.stats = res.stats;
    if (!res.has_solution) {
      log_.resolves.push_back(rr);
      if (p_.on_resolve) p_.on_resolve(rr);
      log_.status = res.status == milp::SolveStatus::Infeasible ? RunStatus::Infeasible : RunStatus::SolverLimit;
      abort(s, l, mtl::to_string(spec), res.message.empty() ? milp::to_string(res.status) : res.message);
      return false;
    }
    rr.objective = res.objective;
    plan_.id = rr.id;
    plan_.start = l;
    plan_.inputs = encode::planned_inputs(enc, res.assignment);
    plan_.positions = encode::planned_positions(enc, w_.relay(), res.assignment);
    audit(enc, ctx, res.assignment, rr);
    std::vector<Vector> relay(plan_.positions.begin() + 1, plan_.positions.end());
    rr.plan_weakly_satisfies = weakly_holds(extended(relay, ctx.constants));
    log_.resolves.push_back(rr);
    if (p_.on_resolve) p_.on_resolve(rr);
    return true;
  }

  // Every norm-ball literal the plan relies on must hold with the exact 2-norm.
  void audit(const encode::Encoding& enc, const encode::EncodingContext& ctx, const std::vector<double>& x,
             ResolveRecord& rr) const {
    auto value = [&](const std::string& signal, int q) -> const Vector& {
      if (signal == kRelay) return plan_.positions.at(static_cast<std::size_t>(q));
      return ctx.constants.at(signal).at(static_cast<std::size_t>(q - 1));
    };
    for (const auto& lit : enc.literals) {
      const bool on = lit.forced || (lit.var >= 0 && x[static_cast<std::size_t>(lit.var)] > 0.5);
      if (!on || lit.negated) continue;
      const auto it = atoms_.find(lit.atom);
      if (it == atoms_.end()) continue;
      const auto* ball = std::get_if<mtl::NormBall>(&it->second->geometry);
      if (ball == nullptr) continue;
      const int q = lit.index - ctx.start;
      const Vector& point = value(ball->subject, q);
      const bool ok = ball->center_signal.empty() ? it->second->contains(point, nullptr)
                                                  : it->second->contains(point, &value(ball->center_signal, q));
      ++rr.ball_checks;
      if (!ok) ++rr.ball_violations;
    }
  }

  void abort(const sim::WorldState& s, int l, const std::string& formula, const std::string& message) {
    AbortInfo a;
    a.index = l;
    a.specialized_formula = formula;
    a.x0 = s.x0;
    for (const auto& e : s.explorers) a.x_hat.push_back(e.x_hat);
    a.message = message;
    log_.abort = std::move(a);
  }

  const SynthesisProblem& p_;
  const sim::World& w_;
  sim::Rng rng_;
  mtl::Trace observed_;
  std::map<std::string, mtl::AtomPtr> atoms_;
  Plan plan_;
  RunLog log_;
};

}  // namespace

RunLog run_synthesis(const SynthesisProblem& problem) { return Runner(problem).run(); }

double cumulative_effort(const RunLog& log) {
  if (log.status != RunStatus::Completed || !log.termination_index) {
    throw std::logic_error("cumulative effort needs a completed run");
  }
  double sum = 0.0;
  for (const auto& s : log.steps) {
    if (s.index < *log.termination_index && s.u0.size() > 0) sum += s.u0.norm();
  }
  return sum;
}

std::vector<int> service_times(const RunLog& log, int explorer) {
  std::vector<int> out{0};
  for (const auto& s : log.services) {
    if (s.explorer == explorer && s.trigger == sim::ServiceTrigger::Relay && s.index > out.back()) {
      out.push_back(s.index);
    }
  }
  return out;
}

int max_service_gap(const RunLog& log, int explorer) {
  const auto t = service_times(log, explorer);
  int gap = 0;
  for (std::size_t k = 1; k < t.size(); ++k) gap = std::max(gap, t[k] - t[k - 1]);
  if (!log.steps.empty()) gap = std::max(gap, log.steps.back().index - t.back());
  return gap;
}

mtl::Trace realized_trace(const RunLog& log) {
  mtl::Trace tr(log.ts);
  std::vector<Vector> relay;
  std::vector<std::vector<Vector>> hat(log.explorer_names.size()), pos(log.explorer_names.size());
  for (const auto& s : log.steps) {
    relay.push_back(s.y0);
    for (std::size_t i = 0; i < log.explorer_names.size(); ++i) {
      hat[i].push_back(s.y_hat[i]);
      pos[i].push_back(s.y[i]);
    }
  }
  tr.set_signal(kRelay, std::move(relay));
  for (std::size_t i = 0; i < log.explorer_names.size(); ++i) {
    tr.set_signal(estimate_signal(log.explorer_names[i]), std::move(hat[i]));
    tr.set_signal(log.explorer_names[i], std::move(pos[i]));
  }
  return tr;
}

}  // namespace relay_mtl::runtime
