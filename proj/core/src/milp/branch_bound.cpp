#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "relay_mtl/milp/external.hpp"
#include "relay_mtl/milp/solver.hpp"

namespace relay_mtl::milp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (!(integrality_tolerance > 0.0) || !(relative_gap >= 0.0)) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
  if (node_limit <= 0) throw std::invalid_argument("solver node limit must be positive");
  if (!(time_limit_seconds > 0.0)) throw std::invalid_argument("solver time limit must be positive");
}

LpResult lp_relax_solve(const Model& model, const SimplexOptions& options) {
  Simplex engine(LpData::from_model(model), options);
  LpResult out;
  out.status = engine.solve();
  out.iterations = engine.iterations();
  if (out.status == LpStatus::Optimal) {
    out.objective = engine.objective();
    out.x = engine.solution();
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Basis {
  std::vector<int> head;
  std::vector<Simplex::Status> status;
};

struct Node {
  double bound = 0.0;
  int depth = 0;
  long seq = 0;
  std::vector<std::pair<int, double>> fixes;
  std::shared_ptr<const Simplex::State> warm;
  std::shared_ptr<const Basis> basis;
};

// Depth-first until an incumbent exists, best-bound afterwards.
struct NodeOrder {
  const bool* plunge;
  bool operator()(const Node& a, const Node& b) const {
    // Heap order: true means `a` is worse than `b`.
    if (*plunge && a.depth != b.depth) return a.depth < b.depth;
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  }
};

class OpenNodes {
 public:
  explicit OpenNodes(const bool* plunge) : order_{plunge} {}
  bool empty() const { return heap_.empty(); }
  const Node& top() const { return heap_.front(); }
  void push(Node n) {
    heap_.push_back(std::move(n));
    std::push_heap(heap_.begin(), heap_.end(), order_);
  }
  Node pop() {
    std::pop_heap(heap_.begin(), heap_.end(), order_);
    Node n = std::move(heap_.back());
    heap_.pop_back();
    return n;
  }
  void reorder() { std::make_heap(heap_.begin(), heap_.end(), order_); }
  double min_bound() const {
    double b = kInf;
    for (const auto& n : heap_) b = std::min(b, n.bound);
    return b;
  }

 private:
  NodeOrder order_;
  std::vector<Node> heap_;
};

class BranchAndBound {
 public:
  BranchAndBound(const Model& model, const SolverConfig& config)
      : model_(model), cfg_(config), root_lp_(LpData::from_model(model)), engine_(root_lp_, config.simplex) {
    for (const auto& v : model.variables()) {
      if (v.kind == VarKind::Binary) binaries_.push_back(v.id);
    }
  }

  SolverResult run() {
    start_ = Clock::now();
    SolverResult res;
    LpStatus st = engine_.solve();
    iterations_ += engine_.iterations();
    if (st == LpStatus::NumericalFailure || st == LpStatus::IterationLimit) {
      st = engine_.solve_primal();
      iterations_ += engine_.iterations();
    }
    stats_.nodes = 1;
    if (st == LpStatus::Infeasible) return finish(res, "LP relaxation infeasible");
    if (st == LpStatus::Unbounded) {
      res.status = SolveStatus::IterationLimit;
      return finish(res, "LP relaxation unbounded");
    }
    if (st != LpStatus::Optimal) {
      res.status = SolveStatus::IterationLimit;
      return finish(res, std::string("root LP failed: ") + to_string(st));
    }
    const double root_obj = engine_.objective();
    const auto root_state = snapshot();
    if (cfg_.root_dive) dive();

    bool plunge = !has_incumbent_;
    OpenNodes open(&plunge);
    {
      Node root;
      root.bound = root_obj;
      root.warm = root_state;
      branch_or_accept(root, root_obj, open);
    }
    bool limited = false;
    while (!open.empty()) {
      if (plunge && has_incumbent_) {
        plunge = false;
        open.reorder();
      }
      if (has_incumbent_ && open.top().bound >= cutoff()) break;
      if (stats_.nodes >= cfg_.node_limit || elapsed() > cfg_.time_limit_seconds) {
        limited = true;
        break;
      }
      Node node = open.pop();
      ++stats_.nodes;
      stats_.max_depth = std::max(stats_.max_depth, node.depth);
      double obj = 0.0;
      if (!solve_node(node, obj)) continue;
      if (obj < node.bound - 1e-7 * std::max(1.0, std::abs(node.bound))) ++stats_.monotonicity_violations;
      if (has_incumbent_ && obj >= cutoff()) continue;
      branch_or_accept(node, obj, open);
    }

    if (limited) {
      res.status = SolveStatus::IterationLimit;
      stats_.best_bound = std::min(open.min_bound(), incumbent_obj_);
      return finish(res, has_incumbent_ ? "limit reached; returning incumbent" : "limit reached; no incumbent");
    }
    if (!has_incumbent_) return finish(res, "no integer-feasible point");
    res.status = SolveStatus::Optimal;
    stats_.best_bound = std::min(open.min_bound(), incumbent_obj_);
    return finish(res, "");
  }

 private:
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  double cutoff() const {
    return incumbent_obj_ - cfg_.relative_gap * std::max(1.0, std::abs(incumbent_obj_));
  }

  SolverResult& finish(SolverResult& res, std::string message) {
    res.has_solution = has_incumbent_;
    if (has_incumbent_) {
      res.objective = incumbent_obj_;
      res.assignment = incumbent_;
    }
    stats_.simplex_iterations = iterations_;
    stats_.wall_seconds = elapsed();
    res.stats = stats_;
    res.message = std::move(message);
    return res;
  }

  std::shared_ptr<const Simplex::State> snapshot() {
    const auto m = static_cast<std::size_t>(root_lp_.m);
    const std::size_t bytes = m * m * sizeof(double);
    if (*live_bytes_ + bytes > cfg_.snapshot_memory_bytes) return nullptr;
    auto state = engine_.save();
    *live_bytes_ += bytes;
    auto counter = live_bytes_;
    return std::shared_ptr<const Simplex::State>(state.get(), [state, counter, bytes](const Simplex::State*) mutable {
      *counter -= bytes;
      state.reset();
    });
  }

  void apply_bounds(const std::vector<std::pair<int, double>>& fixes) {
    for (int j : binaries_) {
      const auto& v = model_.variable(j);
      engine_.set_bounds(j, v.lower, v.upper);
    }
    for (const auto& [j, val] : fixes) engine_.set_bounds(j, val, val);
  }

  bool solve_node(const Node& node, double& obj) {
    apply_bounds(node.fixes);
    LpStatus st;
    if (node.warm) {
      engine_.load(*node.warm);
      st = engine_.reoptimize();
    } else if (node.basis && engine_.load_basis(node.basis->head, node.basis->status)) {
      st = engine_.reoptimize();
    } else {
      st = engine_.solve();
    }
    iterations_ += engine_.iterations();
    if (st == LpStatus::NumericalFailure || st == LpStatus::IterationLimit) {
      st = engine_.solve_primal();
      iterations_ += engine_.iterations();
    }
    if (st != LpStatus::Optimal) return false;
    obj = engine_.objective();
    return true;
  }

  int most_fractional(const std::vector<double>& x) const { return most_fractional(x, cfg_.integrality_tolerance); }

  int most_fractional(const std::vector<double>& x, double tolerance) const {
    int best = -1;
    double best_frac = tolerance;
    for (int j : binaries_) {
      const double v = x[static_cast<std::size_t>(j)];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        best = j;
      }
    }
    return best;
  }

  void branch_or_accept(const Node& node, double obj, OpenNodes& open) {
    const std::vector<double> x = engine_.solution();
    int j = most_fractional(x);
    if (j < 0) {
      if (polish(x)) return;
      // Rounding within tolerance broke a big-M row; keep branching on what is left.
      j = most_fractional(x, 0.0);
      if (j < 0) return;
    }
    auto warm = snapshot();
    std::shared_ptr<const Basis> basis;
    if (!warm) {
      const auto state = engine_.save();
      basis = std::make_shared<const Basis>(Basis{state->head, state->status});
    }
    const double v = x[static_cast<std::size_t>(j)];
    const double first = v >= 0.5 ? 1.0 : 0.0;
    for (double val : {first, 1.0 - first}) {
      Node child;
      child.bound = obj;
      child.depth = node.depth + 1;
      child.seq = ++seq_;
      child.fixes = node.fixes;
      child.fixes.emplace_back(j, val);
      child.warm = warm;
      child.basis = basis;
      open.push(std::move(child));
    }
  }

  // Fixes the binaries at their rounded values and re-solves the LP from scratch so the
  // incumbent is exactly integral and freshly factorised.
  bool polish(const std::vector<double>& x) {
    LpData lp = root_lp_;
    for (int j : binaries_) {
      const double r = std::round(x[static_cast<std::size_t>(j)]);
      lp.lower[static_cast<std::size_t>(j)] = r;
      lp.upper[static_cast<std::size_t>(j)] = r;
    }
    Simplex fresh(std::move(lp), cfg_.simplex);
    LpStatus st = fresh.solve();
    iterations_ += fresh.iterations();
    if (st != LpStatus::Optimal) {
      st = fresh.solve_primal();
      iterations_ += fresh.iterations();
    }
    if (st != LpStatus::Optimal) return false;
    std::vector<double> sol = fresh.solution();
    if (model_.max_violation(sol) > 1e-7) return false;
    const double obj = model_.objective_value(sol);
    if (!has_incumbent_ || obj < incumbent_obj_) {
      has_incumbent_ = true;
      incumbent_obj_ = obj;
      incumbent_ = std::move(sol);
      ++stats_.incumbents;
    }
    return true;
  }

  // Rounding dive from the root relaxation: fix the most fractional binary to its nearest
  // value (the other value if that is infeasible) until the relaxation is integral.
  void dive() {
    const auto root = engine_.save();
    std::vector<std::pair<int, double>> fixes;
    for (std::size_t step = 0; step <= binaries_.size(); ++step) {
      const std::vector<double> x = engine_.solution();
      const int j = most_fractional(x);
      if (j < 0) {
        polish(x);
        break;
      }
      const double first = x[static_cast<std::size_t>(j)] >= 0.5 ? 1.0 : 0.0;
      bool ok = false;
      for (double val : {first, 1.0 - first}) {
        engine_.set_bounds(j, val, val);
        LpStatus st = engine_.reoptimize();
        iterations_ += engine_.iterations();
        if (st == LpStatus::Optimal) {
          fixes.emplace_back(j, val);
          ok = true;
          break;
        }
        if (st != LpStatus::Infeasible) break;
      }
      if (!ok || elapsed() > cfg_.time_limit_seconds) break;
    }
    apply_bounds({});
    engine_.load(*root);
  }

  const Model& model_;
  SolverConfig cfg_;
  LpData root_lp_;
  Simplex engine_;
  std::vector<int> binaries_;
  Clock::time_point start_;
  SolveStats stats_;
  long iterations_ = 0;
  long seq_ = 0;
  bool has_incumbent_ = false;
  double incumbent_obj_ = kInf;
  std::vector<double> incumbent_;
  std::shared_ptr<std::size_t> live_bytes_ = std::make_shared<std::size_t>(0);
};

}  // namespace

SolverResult branch_and_bound(const Model& model, const SolverConfig& config) {
  config.validate();
  BranchAndBound bb(model, config);
  return bb.run();
}

SolverResult solve(const Model& model, const SolverConfig& config) {
  config.validate();
  if (config.backend == "builtin" || config.backend.empty()) return branch_and_bound(model, config);
  const std::string prefix = "external:";
  if (config.backend.rfind(prefix, 0) == 0) {
    return ExternalBackend(config.backend.substr(prefix.size())).solve(model, config);
  }
  throw std::invalid_argument("unknown solver backend '" + config.backend + "'");
}

}  // namespace relay_mtl::milp
