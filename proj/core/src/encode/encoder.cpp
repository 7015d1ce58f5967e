#include "relay_mtl/encode/encoder.hpp"

#include "relay_mtl/mtl/rewrite.hpp"

#include <cmath>
#include <map>
#include <set>

namespace relay_mtl::encode {

using milp::Sense;
using milp::Term;
using mtl::Formula;

Matrix estimate_transition(const sim::ExplorerModel& model, double ts) {
  const Matrix closed = model.a - model.b * model.b.transpose() * model.p;
  return control::expm(closed * ts);
}

std::vector<Vector> precompute_estimates(const Vector& x_hat, const Vector& x_g, const sim::ExplorerModel& model,
                                         double ts, int count) {
  if (x_hat.size() != model.a.rows() || x_g.size() != model.a.rows()) {
    throw control::DimensionError("precompute_estimates: state dimension mismatch for '" + model.name + "'");
  }
  const Matrix phi = estimate_transition(model, ts);
  std::vector<Vector> out;
  Vector dev = x_hat - x_g;
  for (int q = 0; q < count; ++q) {
    dev = phi * dev;
    out.push_back(model.c * (dev + x_g));
  }
  return out;
}

namespace {

struct Lit {
  enum class K { True, False, Var } k = K::True;
  int var = -1;
  static Lit yes() { return {K::True, -1}; }
  static Lit no() { return {K::False, -1}; }
  static Lit of(int v) { return {K::Var, v}; }
};

// Closed box [lo, hi] around either the relay (variable) or a constant point.
struct Geometry {
  bool constant = false;
  bool constant_value = false;
  Vector lo;
  Vector hi;
  Vector offset;  // relay position minus this point is tested when `relative`
  bool ball = false;
};

class Encoder {
 public:
  Encoder(const sim::RelayModel& relay, const control::DiscretePair& relay_d, const Vector& x0_now,
          const EncodingContext& ctx, const EncoderOptions& opt, Encoding& out)
      : relay_(relay), rd_(relay_d), x0_now_(x0_now), ctx_(ctx), opt_(opt), out_(out), m_(out.model) {}

  void dynamics() {
    const int l = static_cast<int>(relay_.a0.rows());
    const int nu = static_cast<int>(relay_.b0.cols());
    const int n = ctx_.horizon;
    if (x0_now_.size() != l) throw EncodingError("relay initial state has wrong dimension");
    m_.big_m = opt_.big_m;
    for (int q = 0; q <= n; ++q) {
      std::vector<int> row;
      for (int s = 0; s < l; ++s) {
        row.push_back(m_.add_continuous("x0_" + std::to_string(ctx_.start + q) + "_" + std::to_string(s)));
      }
      out_.x0.push_back(row);
    }
    for (int q = 0; q < n; ++q) {
      std::vector<int> u;
      std::vector<int> s;
      for (int c = 0; c < nu; ++c) {
        u.push_back(m_.add_continuous("u0_" + std::to_string(ctx_.start + q) + "_" + std::to_string(c),
                                      relay_.u_min(c), relay_.u_max(c)));
      }
      for (int c = 0; c < nu; ++c) {
        const double cap = std::max(std::abs(relay_.u_min(c)), std::abs(relay_.u_max(c)));
        s.push_back(m_.add_continuous("abs_u0_" + std::to_string(ctx_.start + q) + "_" + std::to_string(c), 0.0, cap));
      }
      out_.u0.push_back(u);
      out_.l1.push_back(s);
    }
    for (int s = 0; s < l; ++s) m_.add_constraint({{out_.x0[0][s], 1.0}}, Sense::Equal, x0_now_(s), "init");
    for (int q = 0; q < n; ++q) {
      for (int s = 0; s < l; ++s) {
        std::vector<Term> t{{out_.x0[q + 1][s], 1.0}};
        for (int r = 0; r < l; ++r) {
          if (rd_.ad(s, r) != 0.0) t.push_back({out_.x0[q][r], -rd_.ad(s, r)});
        }
        for (int c = 0; c < nu; ++c) {
          if (rd_.bd(s, c) != 0.0) t.push_back({out_.u0[q][c], -rd_.bd(s, c)});
        }
        m_.add_constraint(t, Sense::Equal, 0.0, "dyn");
      }
      for (int c = 0; c < nu; ++c) {
        m_.add_constraint({{out_.l1[q][c], 1.0}, {out_.u0[q][c], -1.0}}, Sense::GreaterEqual, 0.0, "abs");
        m_.add_constraint({{out_.l1[q][c], 1.0}, {out_.u0[q][c], 1.0}}, Sense::GreaterEqual, 0.0, "abs");
      }
    }
    std::vector<Term> obj;
    for (const auto& s : out_.l1) {
      for (int v : s) obj.push_back({v, 1.0});
    }
    m_.set_objective(obj);
    reach();
  }

  Lit lit(const Formula& f, int j) {
    if (j > ctx_.last()) return tail(f);
    const auto key = std::make_pair(f.id(), j);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const Lit r = compute(f, j);
    memo_.emplace(key, r);
    return r;
  }

  void assert_true(const Formula& f, int j) {
    using K = Formula::Kind;
    if (j > ctx_.last()) {
      require(tail(f));
      return;
    }
    if (!asserted_.insert({f.id(), j}).second) return;
    switch (f.kind()) {
      case K::True:
        return;
      case K::False:
        infeasible();
        return;
      case K::Atom:
        require(atom(f.predicate(), j, false, true));
        return;
      case K::Not:
        require(atom(f.child().predicate(), j, true, true));
        return;
      case K::And:
        for (const auto& c : f.children()) assert_true(c, j);
        return;
      case K::Always: {
        const auto [a, b] = window(f, j);
        for (int k = a; k <= b; ++k) assert_true(f.child(), k);
        if (crosses_horizon(f, j)) require(tail(f.child()));
        return;
      }
      case K::At:
        assert_true(f.child(), f.index());
        return;
      case K::Or: {
        std::vector<Lit> lits;
        for (const auto& c : f.children()) lits.push_back(lit(c, j));
        require_any(lits, "or");
        return;
      }
      case K::Eventually: {
        const auto [a, b] = window(f, j);
        std::vector<Lit> lits;
        for (int k = a; k <= b; ++k) lits.push_back(lit(f.child(), k));
        if (crosses_horizon(f, j)) lits.push_back(tail(f.child()));
        require_any(lits, "eventually");
        return;
      }
      case K::Until:
        require(lit(f, j));
        return;
    }
  }

 private:
  // [j + lo, min(j + hi, H)]; unbounded windows stop at H.
  std::pair<int, int> window(const Formula& f, int j) const {
    const auto& iv = f.interval();
    const long a = static_cast<long>(j) + iv.lo;
    const long b = iv.hi ? std::min<long>(static_cast<long>(j) + *iv.hi, ctx_.last()) : ctx_.last();
    return {static_cast<int>(std::min<long>(a, ctx_.last() + 1L)), static_cast<int>(b)};
  }

  bool crosses_horizon(const Formula& f, int j) const {
    const auto& iv = f.interval();
    return !iv.hi || static_cast<long>(j) + *iv.hi > ctx_.last();
  }

  Lit compute(const Formula& f, int j) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::True:
        return Lit::yes();
      case K::False:
        return Lit::no();
      case K::Atom:
        return atom(f.predicate(), j, false, false);
      case K::Not:
        if (f.child().kind() != K::Atom) throw EncodingError("formula is not in negation normal form");
        return atom(f.child().predicate(), j, true, false);
      case K::And:
      case K::Or: {
        std::vector<Lit> lits;
        for (const auto& c : f.children()) lits.push_back(lit(c, j));
        return f.kind() == K::And ? make_and(lits) : make_or(lits);
      }
      case K::At:
        return lit(f.child(), f.index());
      case K::Eventually:
      case K::Always: {
        const auto [a, b] = window(f, j);
        std::vector<Lit> lits;
        for (int k = a; k <= b; ++k) lits.push_back(lit(f.child(), k));
        if (crosses_horizon(f, j)) lits.push_back(tail(f.child()));
        return f.kind() == K::Eventually ? make_or(lits) : make_and(lits);
      }
      case K::Until:
        return until(f, j);
    }
    throw EncodingError("unhandled formula node");
  }

  // Value of f at every index past H: literals there are weakly true, constants keep their value.
  Lit tail(const Formula& f) {
    using K = Formula::Kind;
    if (auto it = tail_memo_.find(f.id()); it != tail_memo_.end()) return it->second;
    Lit r = Lit::yes();
    switch (f.kind()) {
      case K::True:
      case K::Atom:
      case K::Not:
        break;
      case K::False:
        r = Lit::no();
        break;
      case K::And:
      case K::Or: {
        std::vector<Lit> lits;
        for (const auto& c : f.children()) lits.push_back(tail(c));
        r = f.kind() == K::And ? make_and(lits) : make_or(lits);
        break;
      }
      case K::At:
        r = lit(f.child(), f.index());
        break;
      case K::Eventually:
      case K::Always:
        r = tail(f.child());
        break;
      case K::Until:
        r = f.interval().lo == 0 ? tail(f.child(1)) : make_and({tail(f.child(0)), tail(f.child(1))});
        break;
    }
    tail_memo_.emplace(f.id(), r);
    return r;
  }

  // Witness j' in j + I: rhs at j' and lhs on [j, j'). Witnesses past H all look alike, so
  // the first one stands for the rest.
  Lit until(const Formula& f, int j) {
    const auto& iv = f.interval();
    const long past = static_cast<long>(ctx_.last()) + 1;
    const long first = static_cast<long>(j) + iv.lo;
    const long last = iv.hi ? static_cast<long>(j) + *iv.hi : -1;
    Lit prefix = Lit::yes();
    for (long k = j; k < std::min(first, past); ++k) prefix = make_and({prefix, lit(f.child(0), static_cast<int>(k))});
    if (first > past) prefix = make_and({prefix, tail(f.child(0))});
    std::vector<Lit> terms;
    for (long jp = first; prefix.k != Lit::K::False && (last < 0 || jp <= last); ++jp) {
      if (jp >= past) {
        terms.push_back(make_and({prefix, tail(f.child(1))}));
        break;
      }
      terms.push_back(make_and({prefix, lit(f.child(1), static_cast<int>(jp))}));
      prefix = make_and({prefix, lit(f.child(0), static_cast<int>(jp))});
    }
    return make_or(terms);
  }

  Lit make_and(std::vector<Lit> lits) {
    std::vector<int> vars;
    for (const auto& l : lits) {
      if (l.k == Lit::K::False) return Lit::no();
      if (l.k == Lit::K::Var) vars.push_back(l.var);
    }
    dedupe(vars);
    if (vars.empty()) return Lit::yes();
    if (vars.size() == 1) return Lit::of(vars[0]);
    const int z = m_.add_continuous("and" + std::to_string(m_.num_variables()), 0.0, 1.0);
    for (int v : vars) m_.add_constraint({{z, 1.0}, {v, -1.0}}, Sense::LessEqual, 0.0, "and");
    return Lit::of(z);
  }

  Lit make_or(std::vector<Lit> lits) {
    std::vector<int> vars;
    for (const auto& l : lits) {
      if (l.k == Lit::K::True) return Lit::yes();
      if (l.k == Lit::K::Var) vars.push_back(l.var);
    }
    dedupe(vars);
    if (vars.empty()) return Lit::no();
    if (vars.size() == 1) return Lit::of(vars[0]);
    const int z = m_.add_continuous("or" + std::to_string(m_.num_variables()), 0.0, 1.0);
    std::vector<Term> t;
    for (int v : vars) t.push_back({v, 1.0});
    t.push_back({z, -1.0});
    m_.add_constraint(t, Sense::GreaterEqual, 0.0, "or");
    return Lit::of(z);
  }

  static void dedupe(std::vector<int>& v) {
    std::set<int> seen;
    std::vector<int> out;
    for (int x : v) {
      if (seen.insert(x).second) out.push_back(x);
    }
    v.swap(out);
  }

  void require(Lit l) {
    if (l.k == Lit::K::True) return;
    if (l.k == Lit::K::False) {
      infeasible();
      return;
    }
    const auto& v = m_.variable(l.var);
    m_.set_bounds(l.var, 1.0, std::max(1.0, v.upper));
  }

  void require_any(const std::vector<Lit>& lits, const std::string& tag) {
    std::vector<int> vars;
    for (const auto& l : lits) {
      if (l.k == Lit::K::True) return;
      if (l.k == Lit::K::Var) vars.push_back(l.var);
    }
    dedupe(vars);
    if (vars.empty()) {
      infeasible();
      return;
    }
    if (vars.size() == 1) {
      require(Lit::of(vars[0]));
      return;
    }
    std::vector<Term> t;
    for (int v : vars) t.push_back({v, 1.0});
    m_.add_constraint(t, Sense::GreaterEqual, 1.0, tag);
  }

  void infeasible() {
    out_.trivially_infeasible = true;
    const int z = m_.add_continuous("unsat" + std::to_string(m_.num_variables()), 0.0, 0.0);
    m_.add_constraint({{z, 1.0}}, Sense::GreaterEqual, 1.0, "unsat");
  }

  void reach() {
    const Eigen::Index l = relay_.a0.rows();
    const Vector uc = 0.5 * (relay_.u_min + relay_.u_max);
    const Vector ur = 0.5 * (relay_.u_max - relay_.u_min);
    const Matrix abs_a = rd_.ad.cwiseAbs();
    const Matrix abs_b = rd_.bd.cwiseAbs();
    const Matrix abs_c = relay_.c0.cwiseAbs();
    Vector c = x0_now_;
    Vector r = Vector::Zero(l);
    for (int q = 0; q <= ctx_.horizon; ++q) {
      if (q > 0) {
        c = rd_.ad * c + rd_.bd * uc;
        r = abs_a * r + abs_b * ur;
      }
      out_.reach_lo.push_back(relay_.c0 * c - abs_c * r);
      out_.reach_hi.push_back(relay_.c0 * c + abs_c * r);
    }
  }

  std::vector<Term> position(int q, Eigen::Index axis) const {
    std::vector<Term> t;
    for (Eigen::Index s = 0; s < relay_.c0.cols(); ++s) {
      if (relay_.c0(axis, s) != 0.0) t.push_back({out_.x0[static_cast<std::size_t>(q)][static_cast<std::size_t>(s)], relay_.c0(axis, s)});
    }
    return t;
  }

  const Vector& constant(const std::string& name, int j) const {
    auto it = ctx_.constants.find(name);
    if (it == ctx_.constants.end()) {
      throw EncodingError("signal '" + name + "' is neither the relay nor a known constant");
    }
    const auto q = static_cast<std::size_t>(j - ctx_.start - 1);
    if (q >= it->second.size()) throw EncodingError("signal '" + name + "' has no sample " + std::to_string(j));
    return it->second[q];
  }

  // Box form of a predicate at sample j. For balls the box is the inner (positive use)
  // or outer (negated use) infinity-norm box.
  Geometry geometry(const mtl::AtomicPredicate& p, int j, bool negated) const {
    Geometry g;
    const std::string& subject = p.subject();
    if (const auto* box = std::get_if<mtl::BoxRegion>(&p.geometry)) {
      if (subject != ctx_.relay_signal) {
        g.constant = true;
        g.constant_value = p.contains(constant(subject, j), nullptr);
        return g;
      }
      g.lo = box->lo;
      g.hi = box->hi;
      return g;
    }
    const auto& ball = std::get<mtl::NormBall>(p.geometry);
    std::string center_name = ball.center_signal;
    std::string moving = subject;
    if (moving != ctx_.relay_signal && center_name == ctx_.relay_signal) std::swap(moving, center_name);
    if (moving != ctx_.relay_signal) {
      const Vector& a = constant(subject, j);
      if (ball.center_signal.empty()) {
        g.constant_value = p.contains(a, nullptr);
      } else {
        const Vector& c = constant(ball.center_signal, j);
        g.constant_value = p.contains(a, &c);
      }
      g.constant = true;
      return g;
    }
    if (center_name == ctx_.relay_signal) throw EncodingError("atom '" + p.id + "' centers a ball on its own subject");
    const Vector c = center_name.empty() ? ball.center : constant(center_name, j);
    const double dim = static_cast<double>(c.size());
    const double w = negated ? ball.radius * (1.0 + opt_.ball_margin) : ball.radius * (1.0 - opt_.ball_margin) / std::sqrt(dim);
    g.lo = c.array() - w;
    g.hi = c.array() + w;
    g.ball = true;
    return g;
  }

  double big_m(double needed) const {
    return opt_.tighten_big_m ? std::min(opt_.big_m, needed) : opt_.big_m;
  }

  Lit atom(const mtl::AtomicPredicate& p, int j, bool negated, bool forced) {
    if (j <= ctx_.start) {
      throw EncodingError("atom '" + p.id + "' at sample " + std::to_string(j) +
                          " is not after the planning start; specialize the formula first");
    }
    const Geometry g = geometry(p, j, negated);
    LiteralInfo info{p.id, j, negated, -1, forced};
    Lit result;
    if (g.constant) {
      result = (g.constant_value != negated) ? Lit::yes() : Lit::no();
    } else if (!negated) {
      result = inside(g, j, forced, info);
    } else {
      result = outside(g, j, forced, info);
    }
    if (result.k == Lit::K::Var) info.var = result.var;
    if (result.k != Lit::K::False) out_.literals.push_back(info);
    return result;
  }

  Lit inside(const Geometry& g, int j, bool forced, LiteralInfo& info) {
    const int q = j - ctx_.start;
    const Vector& rlo = out_.reach_lo[static_cast<std::size_t>(q)];
    const Vector& rhi = out_.reach_hi[static_cast<std::size_t>(q)];
    const double eps = g.ball ? 0.0 : opt_.box_margin;
    Vector lo = g.lo.array() + eps;
    Vector hi = g.hi.array() - eps;
    for (Eigen::Index k = 0; k < lo.size(); ++k) {
      if (lo(k) > hi(k)) lo(k) = hi(k) = 0.5 * (g.lo(k) + g.hi(k));
    }
    if (lo.size() != rlo.size()) throw EncodingError("atom '" + info.atom + "' dimension differs from the relay output");
    for (Eigen::Index k = 0; k < lo.size(); ++k) {
      if (rhi(k) < lo(k) || rlo(k) > hi(k)) return Lit::no();
    }
    int z = -1;
    const std::string tag = "in_" + info.atom + "_" + std::to_string(j);
    for (Eigen::Index k = 0; k < lo.size(); ++k) {
      const std::vector<Term> y = position(q, k);
      for (int side = 0; side < 2; ++side) {
        const bool upper = side == 0;
        const double need = upper ? rhi(k) - hi(k) : lo(k) - rlo(k);
        if (need <= 0.0) continue;  // implied by the reachable set
        std::vector<Term> t = y;
        if (forced) {
          m_.add_constraint(t, upper ? Sense::LessEqual : Sense::GreaterEqual, upper ? hi(k) : lo(k), tag);
          continue;
        }
        if (z < 0) z = m_.add_binary("z_" + info.atom + "_" + std::to_string(j));
        const double mm = big_m(need);
        if (upper) {
          t.push_back({z, mm});  // y <= hi + M (1 - z)
          m_.add_constraint(t, Sense::LessEqual, hi(k) + mm, tag);
        } else {
          t.push_back({z, -mm});  // y >= lo - M (1 - z)
          m_.add_constraint(t, Sense::GreaterEqual, lo(k) - mm, tag);
        }
      }
    }
    if (forced || z < 0) return Lit::yes();
    return Lit::of(z);
  }

  Lit outside(const Geometry& g, int j, bool forced, LiteralInfo& info) {
    const int q = j - ctx_.start;
    const Vector& rlo = out_.reach_lo[static_cast<std::size_t>(q)];
    const Vector& rhi = out_.reach_hi[static_cast<std::size_t>(q)];
    const double eps = g.ball ? 0.0 : opt_.box_margin;
    if (g.lo.size() != rlo.size()) throw EncodingError("atom '" + info.atom + "' dimension differs from the relay output");
    struct Face {
      Eigen::Index axis;
      bool above;
      double bound;
      double need;
    };
    std::vector<Face> faces;
    for (Eigen::Index k = 0; k < g.lo.size(); ++k) {
      const double above = g.hi(k) + eps;
      const double below = g.lo(k) - eps;
      if (rlo(k) >= above || rhi(k) <= below) return Lit::yes();
      if (rhi(k) >= above) faces.push_back({k, true, above, above - rlo(k)});
      if (rlo(k) <= below) faces.push_back({k, false, below, rhi(k) - below});
    }
    if (faces.empty()) return Lit::no();
    const std::string tag = "out_" + info.atom + "_" + std::to_string(j);
    if (forced && faces.size() == 1) {
      const Face& f = faces[0];
      m_.add_constraint(position(q, f.axis), f.above ? Sense::GreaterEqual : Sense::LessEqual, f.bound, tag);
      return Lit::yes();
    }
    std::vector<Term> pick;
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const Face& f = faces[i];
      const int s = m_.add_binary("f_" + info.atom + "_" + std::to_string(j) + "_" + std::to_string(i));
      const double mm = big_m(f.need);
      std::vector<Term> t = position(q, f.axis);
      if (f.above) {
        t.push_back({s, -mm});  // y >= bound - M (1 - s)
        m_.add_constraint(t, Sense::GreaterEqual, f.bound - mm, tag);
      } else {
        t.push_back({s, mm});  // y <= bound + M (1 - s)
        m_.add_constraint(t, Sense::LessEqual, f.bound + mm, tag);
      }
      pick.push_back({s, 1.0});
    }
    if (forced) {
      m_.add_constraint(pick, Sense::GreaterEqual, 1.0, tag);
      return Lit::yes();
    }
    const int z = m_.add_continuous("n_" + info.atom + "_" + std::to_string(j), 0.0, 1.0);
    pick.push_back({z, -1.0});
    m_.add_constraint(pick, Sense::GreaterEqual, 0.0, tag);
    return Lit::of(z);
  }

  const sim::RelayModel& relay_;
  const control::DiscretePair& rd_;
  const Vector& x0_now_;
  const EncodingContext& ctx_;
  const EncoderOptions& opt_;
  Encoding& out_;
  milp::Model& m_;
  std::map<std::pair<const void*, int>, Lit> memo_;
  std::map<const void*, Lit> tail_memo_;
  std::set<std::pair<const void*, int>> asserted_;
};

}  // namespace

Encoding build_milp(const sim::RelayModel& relay, const control::DiscretePair& relay_d, const Vector& x0_now,
                    const EncodingContext& ctx, const mtl::Formula& formula, const EncoderOptions& options) {
  if (ctx.horizon < 1) throw EncodingError("horizon N must be at least 1");
  if (ctx.start < 0) throw EncodingError("planning start must be non-negative");
  for (const auto& [name, samples] : ctx.constants) {
    if (static_cast<int>(samples.size()) != ctx.horizon) {
      throw EncodingError("constant signal '" + name + "' must have exactly N samples");
    }
  }
  if (!(options.big_m > 0.0)) throw EncodingError("big-M must be positive");
  relay.validate();
  Encoding out;
  Encoder enc(relay, relay_d, x0_now, ctx, options, out);
  enc.dynamics();
  enc.assert_true(mtl::to_nnf(formula), 0);
  return out;
}

std::vector<Vector> planned_positions(const Encoding& enc, const sim::RelayModel& relay,
                                      const std::vector<double>& assignment) {
  std::vector<Vector> out;
  for (const auto& row : enc.x0) {
    Vector x(static_cast<Eigen::Index>(row.size()));
    for (std::size_t s = 0; s < row.size(); ++s) x(static_cast<Eigen::Index>(s)) = assignment.at(static_cast<std::size_t>(row[s]));
    out.push_back(relay.c0 * x);
  }
  return out;
}

std::vector<Vector> planned_inputs(const Encoding& enc, const std::vector<double>& assignment) {
  std::vector<Vector> out;
  for (const auto& row : enc.u0) {
    Vector u(static_cast<Eigen::Index>(row.size()));
    for (std::size_t c = 0; c < row.size(); ++c) u(static_cast<Eigen::Index>(c)) = assignment.at(static_cast<std::size_t>(row[c]));
    out.push_back(u);
  }
  return out;
}

}  // namespace relay_mtl::encode
