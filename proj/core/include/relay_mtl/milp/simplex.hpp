#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "relay_mtl/milp/model.hpp"

namespace relay_mtl::milp {

/// LP in bounded form: min c^T x  s.t.  lower <= [x; A x] <= upper.
/// Column j < n is structural; column n + i is the logical (row activity) of row i.
struct LpData {
  int n = 0;
  int m = 0;
  std::vector<double> cost;   // n
  std::vector<double> lower;  // n + m
  std::vector<double> upper;  // n + m
  std::vector<int> start;     // CSC, n + 1
  std::vector<int> index;
  std::vector<double> value;

  /// Binaries are relaxed to their [lower, upper] interval.
  static LpData from_model(const Model& model);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

const char* to_string(LpStatus s);

struct SimplexOptions {
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  long max_iterations = 500000;
  int refactor_interval = 100;
  int stall_threshold = 50;
};

/// Bounded revised simplex with an explicit dense basis inverse (rank-one updates,
/// periodic refactorisation). The primal method runs a composite phase 1 and switches
/// to Bland's rule after `stall_threshold` consecutive degenerate pivots; the dual
/// method re-optimises after bound changes from a dual-feasible basis.
class Simplex {
 public:
  enum class Status : unsigned char { Basic, Lower, Upper, Free };

  struct State {
    std::vector<int> head;
    std::vector<Status> status;
    std::vector<double> x;
    std::vector<double> d;
    Eigen::MatrixXd binv;
    int since_refactor = 0;
  };

  explicit Simplex(LpData lp, SimplexOptions options = {});

  /// Solves from the all-logical basis: dual simplex when that basis can be made dual
  /// feasible, two-phase primal otherwise.
  LpStatus solve();
  /// Two-phase primal simplex from the all-logical basis.
  LpStatus solve_primal();
  /// Re-optimises from the current basis after bound changes.
  LpStatus reoptimize();

  /// Changes the bounds of structural column j; the basis is kept.
  void set_bounds(int j, double lower, double upper);
  double lower(int j) const { return lp_.lower[static_cast<std::size_t>(j)]; }
  double upper(int j) const { return lp_.upper[static_cast<std::size_t>(j)]; }

  double objective() const;
  /// Values of the structural columns.
  std::vector<double> solution() const;
  long iterations() const { return iterations_; }
  const LpData& data() const { return lp_; }

  std::shared_ptr<State> save() const;
  void load(const State& state);
  /// Restores only the basis (head and statuses) and refactorises.
  bool load_basis(const std::vector<int>& head, const std::vector<Status>& status);

 private:
  std::size_t cols() const { return static_cast<std::size_t>(lp_.n + lp_.m); }
  void logical_basis(bool dual_choice);
  bool dual_feasible_start() const;
  bool refactor();
  void compute_primal();
  void compute_duals(const std::vector<double>& basic_cost, const std::vector<double>* nonbasic_cost);
  void ftran(int j, Eigen::VectorXd& out) const;
  double row_dot(const Eigen::VectorXd& rho, int j) const;
  void pivot(int r, int q, const Eigen::VectorXd& alpha);
  double primal_infeasibility(int col, double v) const;
  void place_nonbasic(int j);
  LpStatus primal_loop();
  LpStatus dual_loop();
  bool dual_infeasible() const;

  LpData lp_;
  SimplexOptions opt_;
  std::vector<int> head_;
  std::vector<Status> status_;
  std::vector<double> x_;
  std::vector<double> d_;
  Eigen::MatrixXd binv_;
  int since_refactor_ = 0;
  long iterations_ = 0;
  bool has_basis_ = false;
};

}  // namespace relay_mtl::milp
