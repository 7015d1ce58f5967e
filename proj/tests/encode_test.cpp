#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "relay_mtl/encode/encoder.hpp"
#include "relay_mtl/milp/lp_format.hpp"
#include "relay_mtl/milp/solver.hpp"
#include "relay_mtl/mtl/eval.hpp"
#include "relay_mtl/mtl/parse.hpp"
#include "relay_mtl/mtl/rewrite.hpp"
#include "support/generators.hpp"

using namespace relay_mtl;
using control::Matrix;
using control::Vector;
using encode::EncodingContext;
using milp::Sense;
using milp::SolveStatus;
using mtl::Formula;

namespace {

// Relay whose state is its position and whose input is its velocity.
sim::RelayModel integrator_relay(int dim, double bound = 1e3) {
  sim::RelayModel r;
  r.a0 = Matrix::Zero(dim, dim);
  r.b0 = Matrix::Identity(dim, dim);
  r.c0 = Matrix::Identity(dim, dim);
  r.u_min = Vector::Constant(dim, -bound);
  r.u_max = Vector::Constant(dim, bound);
  return r;
}

// Encodes @1 phi over samples 1..N with every relay position pinned to `trace` (trace index j-1).
encode::Encoding pinned(const mtl::Trace& trace, const Formula& phi, const encode::EncoderOptions& opt = {}) {
  const auto& samples = trace.signal("relay");
  const int dim = static_cast<int>(samples[0].size());
  const auto relay = integrator_relay(dim);
  const auto rd = control::zoh_discretize(relay.a0, relay.b0, 0.5);
  EncodingContext ctx;
  ctx.start = 0;
  ctx.horizon = static_cast<int>(samples.size());
  auto enc = encode::build_milp(relay, rd, Vector::Zero(dim), ctx, Formula::at(1, phi), opt);
  for (int q = 1; q <= ctx.horizon; ++q) {
    for (int s = 0; s < dim; ++s) {
      enc.model.add_constraint({{enc.x0[q][s], 1.0}}, Sense::Equal, samples[static_cast<std::size_t>(q - 1)](s), "pin");
    }
  }
  return enc;
}

bool feasible(const milp::Model& m) {
  const auto r = milp::solve(m);
  EXPECT_NE(r.status, SolveStatus::IterationLimit);
  return r.status == SolveStatus::Optimal;
}

sim::RelayModel hover() { return sim::hover_relay_model(Vector::Constant(4, -5.0), Vector::Constant(4, 5.0)); }

Matrix reference_p() {
  Matrix p(4, 4);
  p << 0.23, 0, 0.22, 0, 0, 0.23, 0, 0.22, 0.22, 0, 0.52, 0, 0, 0.22, 0, 0.52;
  return p;
}

}  // namespace

TEST(Estimates, FixedPointAndClosedForm) {
  auto e = sim::double_integrator_explorer("e1", 0.04, 0.1);
  const Vector xg = (Vector(4) << 5, -3, 0, 0).finished();
  for (const auto& y : encode::precompute_estimates(xg, xg, e, 0.5, 6)) EXPECT_LE((y - e.c * xg).norm(), 1e-12);
  e.p = reference_p();
  const Matrix closed = e.a - e.b * e.b.transpose() * e.p;
  const Matrix oracle = (closed * 0.5).exp();
  EXPECT_LE((encode::estimate_transition(e, 0.5) - oracle).cwiseAbs().maxCoeff(), 1e-13);
  const auto y = encode::precompute_estimates((Vector(4) << 1, 0, 0, 0).finished(), Vector::Zero(4), e, 0.5, 1);
  EXPECT_LE((y[0] - e.c * oracle.col(0)).norm(), 1e-13);
  EXPECT_LT(control::spectral_radius(encode::estimate_transition(e, 0.5)), 1.0);
}

TEST(Estimates, MatchSimulatedObserverWithoutServices) {
  const auto e = sim::double_integrator_explorer("e1", 0.04, 0.1);
  sim::WorldConfig cfg;
  cfg.x_g = Vector::Zero(4);
  const sim::World w(hover(), {e}, cfg);
  const Vector x = (Vector(4) << -100, -100, 0, 0).finished();
  sim::WorldState s = w.initial_state(Vector::Zero(8), {x});
  sim::Rng rng(1);
  const auto pred = encode::precompute_estimates(x, cfg.x_g, e, cfg.ts, 10);
  for (int q = 0; q < 10; ++q) {
    s = w.step(s, Vector::Zero(4), rng);
    EXPECT_LE((w.estimate_position(s, 0) - pred[static_cast<std::size_t>(q)]).norm(), 1e-7);
  }
}

TEST(Dynamics, SmallestHorizonAndSubstitution) {
  const auto relay = hover();
  const auto rd = control::zoh_discretize(relay.a0, relay.b0, 0.5);
  EncodingContext ctx;
  ctx.horizon = 1;
  const Vector x0 = (Vector(8) << 1, 2, 3, 0.5, -0.5, 0.01, 0.02, 0).finished();
  auto enc = encode::build_milp(relay, rd, x0, ctx, Formula::truth());
  int dyn = 0, init = 0;
  for (const auto& c : enc.model.constraints()) {
    dyn += c.tag == "dyn";
    init += c.tag == "init";
  }
  EXPECT_EQ(dyn, 8);
  EXPECT_EQ(init, 8);
  EXPECT_EQ(enc.model.num_binaries(), 0);
  const Vector u = (Vector(4) << 0.3, -1, 2, 0.5).finished();
  for (int c = 0; c < 4; ++c) enc.model.set_bounds(enc.u0[0][c], u(c), u(c));
  const auto r = milp::solve(enc.model);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  const Vector expect = relay.c0 * (rd.ad * x0 + rd.bd * u);
  EXPECT_LE((encode::planned_positions(enc, relay, r.assignment)[1] - expect).norm(), 1e-9);
  EXPECT_NEAR(r.objective, u.cwiseAbs().sum(), 1e-9);
}

TEST(Dynamics, InputBoundsAndObjective) {
  auto relay = hover();
  relay.u_min(1) = 0.0;
  relay.u_max(1) = 1e-300;
  const auto rd = control::zoh_discretize(relay.a0, relay.b0, 0.5);
  EncodingContext ctx;
  ctx.horizon = 3;
  const auto enc = encode::build_milp(relay, rd, Vector::Zero(8), ctx, Formula::truth());
  const auto r = milp::solve(enc.model);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_EQ(r.objective, 0.0);
  for (const auto& u : encode::planned_inputs(enc, r.assignment)) {
    EXPECT_GE(u.minCoeff(), -5.0 - 1e-9);
    EXPECT_LE(u.maxCoeff(), 5.0 + 1e-9);
  }
}

TEST(Dynamics, ForcedChannelCost) {
  const auto relay = integrator_relay(1, 10.0);
  const auto rd = control::zoh_discretize(relay.a0, relay.b0, 1.0);
  EncodingContext ctx;
  ctx.horizon = 1;
  auto enc = encode::build_milp(relay, rd, Vector::Zero(1), ctx, Formula::truth());
  enc.model.add_constraint({{enc.u0[0][0], 1.0}}, Sense::Equal, 3.0, "force");
  const auto r = milp::solve(enc.model);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_DOUBLE_EQ(r.objective, 3.0);
}

TEST(Predicates, BoxWithBigM) {
  mtl::AtomTable atoms;
  atoms["d"] = std::make_shared<mtl::AtomicPredicate>(
      mtl::AtomicPredicate{"d", mtl::BoxRegion{"relay", Vector::Constant(3, -150), Vector::Constant(3, 150)}});
  const Formula phi = mtl::parse_formula("d", atoms);
  encode::EncoderOptions opt;
  opt.big_m = 1e4;
  mtl::Trace tr(0.5);
  tr.set_signal("relay", {(Vector(3) << 10, -149, 0).finished()});
  EXPECT_TRUE(feasible(pinned(tr, phi, opt).model));
  tr.set_signal("relay", {(Vector(3) << 151, 0, 0).finished()});
  EXPECT_FALSE(feasible(pinned(tr, phi, opt).model));
  EXPECT_TRUE(feasible(pinned(tr, mtl::parse_formula("!d", atoms), opt).model));
}

TEST(Predicates, InnerBoxOfBall) {
  const double w = 4.0 / std::sqrt(3.0);
  EXPECT_NEAR(w, 2.309, 1e-3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-w, w);
  for (int i = 0; i < 10000; ++i) {
    const Vector v = (Vector(3) << u(rng), u(rng), u(rng)).finished();
    ASSERT_LE(v.norm(), 4.0 + 1e-12);
  }
}

TEST(Formula, EventuallyPicksOnlyWitness) {
  mtl::AtomTable atoms;
  atoms["p"] = std::make_shared<mtl::AtomicPredicate>(
      mtl::AtomicPredicate{"p", mtl::BoxRegion{"relay", Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)}});
  mtl::Trace tr(0.5);
  tr.set_signal("relay", {Vector::Constant(1, 5.0), Vector::Constant(1, 5.0), Vector::Constant(1, 0.5)});
  const auto enc = pinned(tr, mtl::parse_formula("F[0,2] p", atoms));
  const auto r = milp::solve(enc.model);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  int chosen = 0;
  for (const auto& l : enc.literals) {
    if (l.var >= 0 && r.assignment[static_cast<std::size_t>(l.var)] > 0.5) {
      EXPECT_EQ(l.index, 3);
      ++chosen;
    }
  }
  EXPECT_EQ(chosen, 1);
  tr.set_signal("relay", {Vector::Constant(1, 5.0), Vector::Constant(1, 5.0), Vector::Constant(1, 5.0)});
  EXPECT_FALSE(feasible(pinned(tr, mtl::parse_formula("F[0,2] p", atoms)).model));
}

TEST(Formula, TrueAddsNothing) {
  const auto relay = hover();
  const auto rd = control::zoh_discretize(relay.a0, relay.b0, 0.5);
  EncodingContext ctx;
  ctx.horizon = 4;
  const auto base = encode::build_milp(relay, rd, Vector::Zero(8), ctx, Formula::truth());
  EXPECT_EQ(base.model.num_binaries(), 0);
  EXPECT_TRUE(base.literals.empty());
  EXPECT_EQ(base.model.num_constraints(), 8 + 4 * 8 + 4 * 8);
}

TEST(Formula, WindowsClippedAtHorizon) {
  // G F[0,6] g over samples 1..20: windows starting after sample 14 reach past H and are weakly true.
  mtl::AtomTable atoms;
  atoms["g"] = std::make_shared<mtl::AtomicPredicate>(
      mtl::AtomicPredicate{"g", mtl::BoxRegion{"relay", Vector::Constant(1, 100.0), Vector::Constant(1, 101.0)}});
  mtl::Trace tr(0.5);
  std::vector<Vector> s(20, Vector::Constant(1, 0.0));
  s[6] = Vector::Constant(1, 100.5);  // sample 7
  tr.set_signal("relay", s);
  EXPECT_FALSE(feasible(pinned(tr, mtl::parse_formula("G F[0,6] g", atoms)).model));
  s[13] = Vector::Constant(1, 100.5);  // sample 14 covers windows starting at 8..14
  tr.set_signal("relay", s);
  EXPECT_TRUE(feasible(pinned(tr, mtl::parse_formula("G F[0,6] g", atoms)).model));
}

// Feasibility with the trajectory pinned must equal the weak verdict, for random formulas.
TEST(Oracle, FeasibilityMatchesWeakEvaluation) {
  std::mt19937_64 rng(20240611);
  gen::FormulaOptions fo;
  fo.max_depth = 3;
  fo.max_bound = 6;
  fo.unbounded_probability = 0.15;
  int sat = 0, unsat = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int dim = 1 + trial % 3;
    const auto atoms = gen::random_boxes(rng, 3, dim);
    const Formula phi = gen::random_formula(rng, atoms, fo);
    const mtl::Trace tr = gen::random_trace(rng, gen::uniform_int(rng, 0, 7), dim);
    const bool expect = mtl::eval_weak(tr, phi, 0);
    const bool got = feasible(pinned(tr, phi).model);
    ASSERT_EQ(got, expect) << "trial " << trial << ": " << mtl::to_string(phi) << " H=" << tr.horizon() << " nnf=" << mtl::to_string(mtl::to_nnf(phi));
    (expect ? sat : unsat)++;
  }
  EXPECT_GT(sat, 100);
  EXPECT_GT(unsat, 100);
}

// With bounded intervals and a trace longer than the formula needs, weak and strong agree
// and so must the encoding.
TEST(Oracle, LongHorizonMatchesStrongEvaluation) {
  std::mt19937_64 rng(77);
  gen::FormulaOptions fo;
  fo.max_depth = 2;
  fo.max_bound = 4;
  for (int trial = 0; trial < 150; ++trial) {
    const auto atoms = gen::random_boxes(rng, 2, 2);
    const Formula phi = gen::random_formula(rng, atoms, fo);
    const int need = mtl::necessary_length(phi).value();
    const mtl::Trace tr = gen::random_trace(rng, need + 1, 2);
    const bool strong = mtl::eval_strong(tr, phi, 0);
    ASSERT_EQ(strong, mtl::eval_weak(tr, phi, 0));
    ASSERT_EQ(feasible(pinned(tr, phi).model), strong) << mtl::to_string(phi);
  }
}

// Solutions that satisfy a ball literal through its inner box satisfy the exact ball.
TEST(Soundness, BallLiteralsHoldExactly) {
  const auto relay = hover();
  const auto rd = control::zoh_discretize(relay.a0, relay.b0, 0.5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  mtl::AtomTable atoms;
  atoms["near"] = std::make_shared<mtl::AtomicPredicate>(mtl::AtomicPredicate{"near", mtl::NormBall{"relay", "e.hat", Vector(), 1.5}});
  atoms["far"] = std::make_shared<mtl::AtomicPredicate>(mtl::AtomicPredicate{"far", mtl::NormBall{"relay", "", Vector::Zero(3), 0.5}});
  const Formula phi = mtl::parse_formula("F[0,5] near & G !far", atoms);
  for (int trial = 0; trial < 20; ++trial) {
    EncodingContext ctx;
    ctx.horizon = 6;
    std::vector<Vector> est;
    for (int q = 0; q < 6; ++q) est.push_back((Vector(3) << u(rng), u(rng), 2.0).finished());
    ctx.constants["e.hat"] = est;
    const Vector x0 = (Vector(8) << 1, 1, 1, 0, 0, 0, 0, 0).finished();
    const auto enc = encode::build_milp(relay, rd, x0, ctx, Formula::at(1, phi));
    const auto r = milp::solve(enc.model);
    if (r.status != SolveStatus::Optimal) continue;
    const auto pos = encode::planned_positions(enc, relay, r.assignment);
    for (const auto& l : enc.literals) {
      const bool active = l.forced || (l.var >= 0 && r.assignment[static_cast<std::size_t>(l.var)] > 0.5);
      if (!active) continue;
      const int q = l.index;
      const auto& p = *atoms.at(l.atom);
      const Vector& y = pos[static_cast<std::size_t>(q)];
      const Vector* center = l.atom == "near" ? &est[static_cast<std::size_t>(q - 1)] : nullptr;
      EXPECT_EQ(p.contains(y, center), !l.negated) << l.atom << "@" << q;
    }
  }
}

TEST(Determinism, IdenticalInputsGiveIdenticalBytes) {
  const auto relay = hover();
  const auto rd = control::zoh_discretize(relay.a0, relay.b0, 0.5);
  mtl::AtomTable atoms;
  atoms["g"] = std::make_shared<mtl::AtomicPredicate>(
      mtl::AtomicPredicate{"g", mtl::BoxRegion{"relay", Vector::Constant(3, 1.0), Vector::Constant(3, 2.0)}});
  const Formula phi = Formula::at(1, mtl::parse_formula("G F[0,3] g & F[2,4] !g", atoms));
  EncodingContext ctx;
  ctx.horizon = 6;
  const auto a = encode::build_milp(relay, rd, Vector::Zero(8), ctx, phi);
  const auto b = encode::build_milp(relay, rd, Vector::Zero(8), ctx, phi);
  EXPECT_EQ(milp::export_lp(a.model), milp::export_lp(b.model));
  EXPECT_GT(a.model.num_binaries(), 0);
}

TEST(Errors, UnspecializedAndUnknownSignals) {
  const auto relay = hover();
  const auto rd = control::zoh_discretize(relay.a0, relay.b0, 0.5);
  mtl::AtomTable atoms;
  atoms["g"] = std::make_shared<mtl::AtomicPredicate>(
      mtl::AtomicPredicate{"g", mtl::BoxRegion{"relay", Vector::Constant(3, 1.0), Vector::Constant(3, 2.0)}});
  atoms["q"] = std::make_shared<mtl::AtomicPredicate>(mtl::AtomicPredicate{"q", mtl::NormBall{"relay", "nobody", Vector(), 1.0}});
  EncodingContext ctx;
  ctx.horizon = 3;
  EXPECT_THROW(encode::build_milp(relay, rd, Vector::Zero(8), ctx, mtl::parse_formula("g", atoms)), encode::EncodingError);
  EXPECT_THROW(encode::build_milp(relay, rd, Vector::Zero(8), ctx, Formula::at(1, mtl::parse_formula("q", atoms))),
               encode::EncodingError);
  ctx.constants["short"] = {Vector::Zero(3)};
  EXPECT_THROW(encode::build_milp(relay, rd, Vector::Zero(8), ctx, Formula::truth()), encode::EncodingError);
}
