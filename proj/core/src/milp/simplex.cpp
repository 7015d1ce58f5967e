#include "relay_mtl/milp/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace relay_mtl::milp {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
    case LpStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

LpData LpData::from_model(const Model& model) {
  LpData lp;
  lp.n = model.num_variables();
  lp.m = model.num_constraints();
  const auto n = static_cast<std::size_t>(lp.n);
  lp.cost.assign(n, 0.0);
  for (const auto& t : model.objective()) lp.cost[static_cast<std::size_t>(t.var)] += t.coef;
  for (const auto& v : model.variables()) {
    lp.lower.push_back(v.lower);
    lp.upper.push_back(v.upper);
  }
  std::vector<std::vector<std::pair<int, double>>> columns(n);
  for (int i = 0; i < lp.m; ++i) {
    const auto& c = model.constraints()[static_cast<std::size_t>(i)];
    for (const auto& t : c.terms) columns[static_cast<std::size_t>(t.var)].emplace_back(i, t.coef);
    switch (c.sense) {
      case Sense::LessEqual:
        lp.lower.push_back(-kInf);
        lp.upper.push_back(c.rhs);
        break;
      case Sense::GreaterEqual:
        lp.lower.push_back(c.rhs);
        lp.upper.push_back(kInf);
        break;
      case Sense::Equal:
        lp.lower.push_back(c.rhs);
        lp.upper.push_back(c.rhs);
        break;
    }
  }
  lp.start.push_back(0);
  for (const auto& col : columns) {
    for (const auto& [row, coef] : col) {
      lp.index.push_back(row);
      lp.value.push_back(coef);
    }
    lp.start.push_back(static_cast<int>(lp.index.size()));
  }
  return lp;
}

Simplex::Simplex(LpData lp, SimplexOptions options) : lp_(std::move(lp)), opt_(options) {
  if (lp_.cost.size() != static_cast<std::size_t>(lp_.n) || lp_.lower.size() != cols() ||
      lp_.upper.size() != cols() || lp_.start.size() != static_cast<std::size_t>(lp_.n) + 1) {
    throw ModelError("LP data has inconsistent sizes");
  }
}

void Simplex::set_bounds(int j, double lower, double upper) {
  const auto k = static_cast<std::size_t>(j);
  lp_.lower.at(k) = lower;
  lp_.upper.at(k) = upper;
  if (!has_basis_ || status_[k] == Status::Basic) return;
  place_nonbasic(j);
}

// Keeps a nonbasic column on a finite bound consistent with its status.
void Simplex::place_nonbasic(int j) {
  const auto k = static_cast<std::size_t>(j);
  const double lo = lp_.lower[k];
  const double up = lp_.upper[k];
  Status& st = status_[k];
  if (st == Status::Lower && !std::isfinite(lo)) st = std::isfinite(up) ? Status::Upper : Status::Free;
  if (st == Status::Upper && !std::isfinite(up)) st = std::isfinite(lo) ? Status::Lower : Status::Free;
  if (st == Status::Free) {
    if (std::isfinite(lo)) st = Status::Lower;
    else if (std::isfinite(up)) st = Status::Upper;
  }
  if (st == Status::Lower) x_[k] = lo;
  else if (st == Status::Upper) x_[k] = up;
  else x_[k] = 0.0;
}

void Simplex::logical_basis(bool dual_choice) {
  const auto m = static_cast<std::size_t>(lp_.m);
  head_.resize(m);
  status_.assign(cols(), Status::Lower);
  x_.assign(cols(), 0.0);
  d_.assign(cols(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    head_[i] = lp_.n + static_cast<int>(i);
    status_[static_cast<std::size_t>(lp_.n) + i] = Status::Basic;
  }
  for (int j = 0; j < lp_.n; ++j) {
    const auto k = static_cast<std::size_t>(j);
    const double c = lp_.cost[k];
    Status st = Status::Free;
    if (dual_choice && c < 0.0 && std::isfinite(lp_.upper[k])) st = Status::Upper;
    else if (dual_choice && c > 0.0 && std::isfinite(lp_.lower[k])) st = Status::Lower;
    else if (std::isfinite(lp_.lower[k])) st = Status::Lower;
    else if (std::isfinite(lp_.upper[k])) st = Status::Upper;
    status_[k] = st;
    place_nonbasic(j);
  }
  binv_ = Eigen::MatrixXd::Identity(lp_.m, lp_.m);
  binv_ = -binv_;  // B = -I for logical columns
  since_refactor_ = 0;
  has_basis_ = true;
  compute_primal();
}

bool Simplex::dual_feasible_start() const {
  for (int j = 0; j < lp_.n; ++j) {
    const auto k = static_cast<std::size_t>(j);
    const double c = lp_.cost[k];
    if (c > opt_.dual_tolerance && !std::isfinite(lp_.lower[k])) return false;
    if (c < -opt_.dual_tolerance && !std::isfinite(lp_.upper[k])) return false;
  }
  return true;
}

void Simplex::ftran(int j, Eigen::VectorXd& out) const {
  if (j >= lp_.n) {
    out = -binv_.col(j - lp_.n);
    return;
  }
  out.setZero(lp_.m);
  const auto k = static_cast<std::size_t>(j);
  for (int p = lp_.start[k]; p < lp_.start[k + 1]; ++p) {
    out.noalias() += lp_.value[static_cast<std::size_t>(p)] * binv_.col(lp_.index[static_cast<std::size_t>(p)]);
  }
}

double Simplex::row_dot(const Eigen::VectorXd& rho, int j) const {
  if (j >= lp_.n) return -rho(j - lp_.n);
  const auto k = static_cast<std::size_t>(j);
  double s = 0.0;
  for (int p = lp_.start[k]; p < lp_.start[k + 1]; ++p) {
    s += rho(lp_.index[static_cast<std::size_t>(p)]) * lp_.value[static_cast<std::size_t>(p)];
  }
  return s;
}

bool Simplex::refactor() {
  const int m = lp_.m;
  // Basic logical columns are -e_r, so only the block of basic structural columns against the
  // rows whose logical is nonbasic needs a dense factorisation; the logical rows of B^{-1}
  // follow by substitution.
  std::vector<int> logical_slot(static_cast<std::size_t>(m), -1);
  std::vector<int> structural;
  for (int i = 0; i < m; ++i) {
    const int j = head_[static_cast<std::size_t>(i)];
    if (j >= lp_.n) {
      logical_slot[static_cast<std::size_t>(j - lp_.n)] = i;
    } else {
      structural.push_back(i);
    }
  }
  std::vector<int> rows;
  std::vector<int> local(static_cast<std::size_t>(m), -1);
  for (int r = 0; r < m; ++r) {
    if (logical_slot[static_cast<std::size_t>(r)] < 0) {
      local[static_cast<std::size_t>(r)] = static_cast<int>(rows.size());
      rows.push_back(r);
    }
  }
  const auto k = static_cast<Eigen::Index>(structural.size());
  if (static_cast<std::size_t>(k) != rows.size()) return false;
  Eigen::MatrixXd inv;
  if (k > 0) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(structural[static_cast<std::size_t>(c)])]);
      for (int p = lp_.start[j]; p < lp_.start[j + 1]; ++p) {
        const int t = local[static_cast<std::size_t>(lp_.index[static_cast<std::size_t>(p)])];
        if (t >= 0) block(t, c) = lp_.value[static_cast<std::size_t>(p)];
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(block);
    if (!(lu.rcond() > 1e-14)) return false;
    inv = lu.inverse();
  }
  binv_.setZero(m, m);
  for (Eigen::Index c = 0; c < k; ++c) {
    const int slot = structural[static_cast<std::size_t>(c)];
    for (Eigen::Index t = 0; t < k; ++t) binv_(slot, rows[static_cast<std::size_t>(t)]) = inv(c, t);
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    const int slot = structural[static_cast<std::size_t>(c)];
    const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(slot)]);
    for (int p = lp_.start[j]; p < lp_.start[j + 1]; ++p) {
      const int r = lp_.index[static_cast<std::size_t>(p)];
      const int target = logical_slot[static_cast<std::size_t>(r)];
      if (target >= 0) binv_.row(target) += lp_.value[static_cast<std::size_t>(p)] * binv_.row(slot);
    }
  }
  for (int r = 0; r < m; ++r) {
    const int slot = logical_slot[static_cast<std::size_t>(r)];
    if (slot >= 0) binv_(slot, r) = -1.0;
  }
  since_refactor_ = 0;
  compute_primal();
  return true;
}

void Simplex::compute_primal() {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(lp_.m);
  for (int j = 0; j < lp_.n; ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (status_[k] == Status::Basic || x_[k] == 0.0) continue;
    for (int p = lp_.start[k]; p < lp_.start[k + 1]; ++p) {
      r(lp_.index[static_cast<std::size_t>(p)]) += lp_.value[static_cast<std::size_t>(p)] * x_[k];
    }
  }
  for (int i = 0; i < lp_.m; ++i) {
    const auto k = static_cast<std::size_t>(lp_.n + i);
    if (status_[k] != Status::Basic) r(i) -= x_[k];
  }
  const Eigen::VectorXd xb = -(binv_ * r);
  for (int i = 0; i < lp_.m; ++i) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = xb(i);
}

// d_j = c_j - y^T a_j with y = B^{-T} c_B. `nonbasic_cost == nullptr` means zero costs.
void Simplex::compute_duals(const std::vector<double>& basic_cost, const std::vector<double>* nonbasic_cost) {
  Eigen::VectorXd cb(lp_.m);
  for (int i = 0; i < lp_.m; ++i) cb(i) = basic_cost[static_cast<std::size_t>(i)];
  const Eigen::VectorXd y = binv_.transpose() * cb;
  for (std::size_t k = 0; k < cols(); ++k) {
    if (status_[k] == Status::Basic) {
      d_[k] = 0.0;
      continue;
    }
    const int j = static_cast<int>(k);
    const double c = (nonbasic_cost != nullptr && j < lp_.n) ? (*nonbasic_cost)[k] : 0.0;
    d_[k] = c - row_dot(y, j);
  }
}

void Simplex::pivot(int r, int q, const Eigen::VectorXd& alpha) {
  const double piv = alpha(r);
  Eigen::RowVectorXd row = binv_.row(r) / piv;
  Eigen::VectorXd col = alpha;
  col(r) = 0.0;
  binv_.noalias() -= col * row;
  binv_.row(r) = row;
  const int leaving = head_[static_cast<std::size_t>(r)];
  head_[static_cast<std::size_t>(r)] = q;
  status_[static_cast<std::size_t>(q)] = Status::Basic;
  (void)leaving;
  ++since_refactor_;
  ++iterations_;
}

double Simplex::primal_infeasibility(int col, double v) const {
  const auto k = static_cast<std::size_t>(col);
  if (v < lp_.lower[k] - opt_.primal_tolerance) return lp_.lower[k] - v;
  if (v > lp_.upper[k] + opt_.primal_tolerance) return v - lp_.upper[k];
  return 0.0;
}

bool Simplex::dual_infeasible() const {
  for (std::size_t k = 0; k < cols(); ++k) {
    if (status_[k] == Status::Basic || lp_.lower[k] == lp_.upper[k]) continue;
    const double d = d_[k];
    if (status_[k] == Status::Lower && d < -opt_.dual_tolerance) return true;
    if (status_[k] == Status::Upper && d > opt_.dual_tolerance) return true;
    if (status_[k] == Status::Free && std::abs(d) > opt_.dual_tolerance) return true;
  }
  return false;
}

LpStatus Simplex::primal_loop() {
  const auto m = static_cast<std::size_t>(lp_.m);
  std::vector<double> cb(m);
  Eigen::VectorXd alpha(lp_.m);
  int degenerate = 0;
  bool bland = false;
  const double tol = opt_.primal_tolerance;
  for (;;) {
    if (iterations_ >= opt_.max_iterations) return LpStatus::IterationLimit;
    if (since_refactor_ >= opt_.refactor_interval && !refactor()) return LpStatus::NumericalFailure;

    bool phase1 = false;
    for (std::size_t i = 0; i < m; ++i) {
      const int h = head_[i];
      const auto k = static_cast<std::size_t>(h);
      const double v = x_[k];
      cb[i] = 0.0;
      if (v < lp_.lower[k] - tol) cb[i] = -1.0;
      else if (v > lp_.upper[k] + tol) cb[i] = 1.0;
      if (cb[i] != 0.0) phase1 = true;
    }
    if (!phase1) {
      for (std::size_t i = 0; i < m; ++i) {
        const int h = head_[i];
        cb[i] = h < lp_.n ? lp_.cost[static_cast<std::size_t>(h)] : 0.0;
      }
    }
    compute_duals(cb, phase1 ? nullptr : &lp_.cost);

    int q = -1;
    double best = 0.0;
    for (std::size_t k = 0; k < cols(); ++k) {
      const Status st = status_[k];
      if (st == Status::Basic || lp_.lower[k] == lp_.upper[k]) continue;
      const double d = d_[k];
      double score = 0.0;
      if ((st == Status::Lower || st == Status::Free) && d < -opt_.dual_tolerance) score = -d;
      if ((st == Status::Upper || st == Status::Free) && d > opt_.dual_tolerance) score = d;
      if (score <= 0.0) continue;
      if (bland) {
        q = static_cast<int>(k);
        break;
      }
      if (score > best) {
        best = score;
        q = static_cast<int>(k);
      }
    }
    if (q < 0) {
      if (phase1) return LpStatus::Infeasible;
      return LpStatus::Optimal;
    }
    const auto kq = static_cast<std::size_t>(q);
    const double sigma = d_[kq] < 0.0 ? 1.0 : -1.0;
    ftran(q, alpha);

    // Ratio test: x_B changes by -sigma * alpha * t.
    double t_best = kInf;
    int r = -1;
    double r_bound = 0.0;
    double r_mag = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = alpha(static_cast<Eigen::Index>(i));
      if (std::abs(a) < opt_.pivot_tolerance) continue;
      const double beta = -sigma * a;
      const auto k = static_cast<std::size_t>(head_[i]);
      const double v = x_[k];
      const double lo = lp_.lower[k];
      const double up = lp_.upper[k];
      double t = kInf;
      double bound = 0.0;
      if (beta < 0.0) {
        if (phase1 && v > up + tol) {
          t = (v - up) / -beta;
          bound = up;
        } else if (std::isfinite(lo) && v >= lo - tol) {
          t = std::max(v - lo, 0.0) / -beta;
          bound = lo;
        }
      } else {
        if (phase1 && v < lo - tol) {
          t = (lo - v) / beta;
          bound = lo;
        } else if (std::isfinite(up) && v <= up + tol) {
          t = std::max(up - v, 0.0) / beta;
          bound = up;
        }
      }
      if (!std::isfinite(t)) continue;
      const bool better = t < t_best - 1e-12 ||
                          (t <= t_best + 1e-12 &&
                           (bland ? (r < 0 || head_[i] < head_[static_cast<std::size_t>(r)])
                                  : std::abs(a) > r_mag));
      if (better) {
        t_best = std::min(t, t_best);
        r = static_cast<int>(i);
        r_bound = bound;
        r_mag = std::abs(a);
      }
    }
    const double span = lp_.upper[kq] - lp_.lower[kq];
    if (r < 0 && !std::isfinite(span)) {
      if (phase1) return LpStatus::NumericalFailure;
      return LpStatus::Unbounded;
    }
    if (std::isfinite(span) && (r < 0 || span <= t_best)) {
      // Bound flip.
      const double t = span;
      for (std::size_t i = 0; i < m; ++i) {
        x_[static_cast<std::size_t>(head_[i])] -= sigma * t * alpha(static_cast<Eigen::Index>(i));
      }
      status_[kq] = sigma > 0.0 ? Status::Upper : Status::Lower;
      x_[kq] = sigma > 0.0 ? lp_.upper[kq] : lp_.lower[kq];
      ++iterations_;
      degenerate = 0;
      continue;
    }
    const double t = t_best;
    for (std::size_t i = 0; i < m; ++i) {
      x_[static_cast<std::size_t>(head_[i])] -= sigma * t * alpha(static_cast<Eigen::Index>(i));
    }
    x_[kq] += sigma * t;
    const auto kp = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
    x_[kp] = r_bound;
    if (lp_.lower[kp] == lp_.upper[kp] || r_bound == lp_.lower[kp]) status_[kp] = Status::Lower;
    else status_[kp] = Status::Upper;
    const double xq = x_[kq];
    pivot(r, q, alpha);
    x_[kq] = xq;
    if (t < 1e-12) {
      if (++degenerate > opt_.stall_threshold) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
  }
}

LpStatus Simplex::dual_loop() {
  const auto m = static_cast<std::size_t>(lp_.m);
  Eigen::VectorXd alpha(lp_.m);
  Eigen::VectorXd rho(lp_.m);
  std::vector<double> arow(cols(), 0.0);
  std::vector<int> candidates;
  int retries = 0;
  for (;;) {
    if (iterations_ >= opt_.max_iterations) return LpStatus::IterationLimit;
    if (since_refactor_ >= opt_.refactor_interval) {
      if (!refactor()) return LpStatus::NumericalFailure;
      std::vector<double> cb(m);
      for (std::size_t i = 0; i < m; ++i) {
        const int h = head_[i];
        cb[i] = h < lp_.n ? lp_.cost[static_cast<std::size_t>(h)] : 0.0;
      }
      compute_duals(cb, &lp_.cost);
    }

    int r = -1;
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double inf = primal_infeasibility(head_[i], x_[static_cast<std::size_t>(head_[i])]);
      if (inf > worst) {
        worst = inf;
        r = static_cast<int>(i);
      }
    }
    if (r < 0) return LpStatus::Optimal;

    const auto kp = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
    const bool below = x_[kp] < lp_.lower[kp];
    const double target = below ? lp_.lower[kp] : lp_.upper[kp];
    const double delta = x_[kp] - target;
    const double s = delta < 0.0 ? -1.0 : 1.0;
    rho = binv_.row(r).transpose();

    // Harris two-pass ratio test.
    candidates.clear();
    double t_max = kInf;
    for (std::size_t k = 0; k < cols(); ++k) {
      const Status st = status_[k];
      if (st == Status::Basic || lp_.lower[k] == lp_.upper[k]) continue;
      const double a = row_dot(rho, static_cast<int>(k));
      arow[k] = a;
      if (std::abs(a) < opt_.pivot_tolerance) continue;
      const double abar = s * a;
      bool eligible = st == Status::Free || (st == Status::Lower && abar > 0.0) ||
                      (st == Status::Upper && abar < 0.0);
      if (!eligible) continue;
      candidates.push_back(static_cast<int>(k));
      const double bound = (std::abs(d_[k]) + opt_.dual_tolerance) / std::abs(abar);
      t_max = std::min(t_max, bound);
    }
    if (candidates.empty()) return LpStatus::Infeasible;
    int q = -1;
    double best_mag = 0.0;
    for (int k : candidates) {
      const auto kk = static_cast<std::size_t>(k);
      const double abar = s * arow[kk];
      const double ratio = std::abs(d_[kk]) / std::abs(abar);
      if (ratio <= t_max && std::abs(abar) > best_mag) {
        best_mag = std::abs(abar);
        q = k;
      }
    }
    if (q < 0) return LpStatus::NumericalFailure;  // non-finite reduced costs
    const auto kq = static_cast<std::size_t>(q);
    ftran(q, alpha);
    const double arq = arow[kq];
    if (std::abs(alpha(r) - arq) > 1e-6 * (1.0 + std::abs(arq))) {
      if (++retries > 3 || !refactor()) return LpStatus::NumericalFailure;
      std::vector<double> cb(m);
      for (std::size_t i = 0; i < m; ++i) {
        const int h = head_[i];
        cb[i] = h < lp_.n ? lp_.cost[static_cast<std::size_t>(h)] : 0.0;
      }
      compute_duals(cb, &lp_.cost);
      continue;
    }
    retries = 0;

    const double theta_d = d_[kq] / alpha(r);
    const double theta_p = delta / alpha(r);
    for (std::size_t i = 0; i < m; ++i) {
      x_[static_cast<std::size_t>(head_[i])] -= theta_p * alpha(static_cast<Eigen::Index>(i));
    }
    const double xq = x_[kq] + theta_p;
    for (std::size_t k = 0; k < cols(); ++k) {
      if (status_[k] == Status::Basic || lp_.lower[k] == lp_.upper[k]) continue;
      d_[k] -= theta_d * arow[k];
    }
    d_[kq] = 0.0;
    d_[kp] = -theta_d;
    status_[kp] = below ? Status::Lower : Status::Upper;
    x_[kp] = target;
    pivot(r, q, alpha);
    x_[kq] = xq;
  }
}

LpStatus Simplex::solve() {
  iterations_ = 0;
  const bool dual = dual_feasible_start();
  logical_basis(dual);
  if (dual) {
    std::vector<double> cb(static_cast<std::size_t>(lp_.m), 0.0);
    compute_duals(cb, &lp_.cost);
    if (!dual_infeasible()) {
      const LpStatus st = dual_loop();
      if (st != LpStatus::Optimal && st != LpStatus::NumericalFailure) return st;
      if (st == LpStatus::NumericalFailure) return solve_primal();
      return primal_loop();
    }
  }
  return solve_primal();
}

LpStatus Simplex::solve_primal() {
  iterations_ = 0;
  logical_basis(false);
  return primal_loop();
}

LpStatus Simplex::reoptimize() {
  if (!has_basis_) return solve();
  iterations_ = 0;
  if (since_refactor_ >= opt_.refactor_interval) {
    if (!refactor()) return solve_primal();
  } else {
    compute_primal();
  }
  std::vector<double> cb(static_cast<std::size_t>(lp_.m));
  for (int i = 0; i < lp_.m; ++i) {
    const int h = head_[static_cast<std::size_t>(i)];
    cb[static_cast<std::size_t>(i)] = h < lp_.n ? lp_.cost[static_cast<std::size_t>(h)] : 0.0;
  }
  compute_duals(cb, &lp_.cost);
  if (!dual_infeasible()) {
    const LpStatus st = dual_loop();
    if (st == LpStatus::Infeasible || st == LpStatus::IterationLimit) return st;
    if (st == LpStatus::NumericalFailure) return solve_primal();
  }
  return primal_loop();
}

double Simplex::objective() const {
  double s = 0.0;
  for (int j = 0; j < lp_.n; ++j) s += lp_.cost[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
  return s;
}

std::vector<double> Simplex::solution() const {
  return std::vector<double>(x_.begin(), x_.begin() + lp_.n);
}

std::shared_ptr<Simplex::State> Simplex::save() const {
  auto s = std::make_shared<State>();
  s->head = head_;
  s->status = status_;
  s->x = x_;
  s->d = d_;
  s->binv = binv_;
  s->since_refactor = since_refactor_;
  return s;
}

void Simplex::load(const State& state) {
  head_ = state.head;
  status_ = state.status;
  x_ = state.x;
  d_ = state.d;
  binv_ = state.binv;
  since_refactor_ = state.since_refactor;
  has_basis_ = true;
  for (int j = 0; j < lp_.n; ++j) {
    if (status_[static_cast<std::size_t>(j)] != Status::Basic) place_nonbasic(j);
  }
}

bool Simplex::load_basis(const std::vector<int>& head, const std::vector<Status>& status) {
  head_ = head;
  status_ = status;
  x_.assign(cols(), 0.0);
  d_.assign(cols(), 0.0);
  has_basis_ = true;
  for (std::size_t k = 0; k < cols(); ++k) {
    if (status_[k] != Status::Basic) place_nonbasic(static_cast<int>(k));
  }
  return refactor();
}

}  // namespace relay_mtl::milp
