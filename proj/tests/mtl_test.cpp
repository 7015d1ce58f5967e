#include <random>

#include <gtest/gtest.h>

#include "relay_mtl/mtl/eval.hpp"
#include "relay_mtl/mtl/parse.hpp"
#include "relay_mtl/mtl/rewrite.hpp"
#include "support/generators.hpp"
#include "support/naive_mtl.hpp"

using namespace relay_mtl::mtl;

namespace {

AtomPtr box_atom(const std::string& id, double lo, double hi) {
  BoxRegion b;
  b.subject = "relay";
  b.lo = Eigen::VectorXd::Constant(1, lo);
  b.hi = Eigen::VectorXd::Constant(1, hi);
  return std::make_shared<AtomicPredicate>(AtomicPredicate{id, b});
}

// 1-D trace whose samples are 1.0 where `truth` is set and 0.0 elsewhere; pair with box_atom(.., 0.5, 1.5).
Trace bool_trace(const std::vector<int>& truth) {
  Trace tr(0.5);
  std::vector<Eigen::VectorXd> s;
  for (int v : truth) s.push_back(Eigen::VectorXd::Constant(1, v ? 1.0 : 0.0));
  tr.set_signal("relay", s);
  return tr;
}

AtomTable table(std::initializer_list<const char*> names) {
  AtomTable t;
  for (const char* n : names) t[n] = box_atom(n, 0.5, 1.5);
  return t;
}

Trace extend(const Trace& prefix, std::mt19937_64& rng, int extra) {
  Trace tail = gen::random_trace(rng, extra - 1, 1);
  auto s = prefix.signal("relay");
  for (const auto& v : tail.signal("relay")) s.push_back(v);
  Trace out(prefix.sampling_period());
  out.set_signal("relay", s);
  return out;
}

}  // namespace

TEST(Parse, PracticalConstraintExample) {
  auto atoms = table({"g1", "g2", "d"});
  Formula f = parse_formula("G ( F[0,6] (g1 | g2) ) & G d", atoms);
  Formula expected = Formula::conjunction(
      {Formula::always(TimeInterval::unbounded(),
                       Formula::eventually(TimeInterval(0, 6),
                                           Formula::disjunction({Formula::atom(atoms["g1"]), Formula::atom(atoms["g2"])}))),
       Formula::always(TimeInterval::unbounded(), Formula::atom(atoms["d"]))});
  EXPECT_TRUE(structurally_equal(f, expected)) << to_string(f);
}

TEST(Parse, Constants) {
  EXPECT_TRUE(parse_formula("true", {}).is_true());
  EXPECT_TRUE(parse_formula(" false ", {}).is_false());
}

TEST(Parse, UntilRoundTrip) {
  auto atoms = table({"a", "b"});
  Formula f = parse_formula("a U[2,4] b", atoms);
  ASSERT_EQ(f.kind(), Formula::Kind::Until);
  EXPECT_EQ(f.interval(), TimeInterval(2, 4));
  EXPECT_TRUE(structurally_equal(parse_formula(to_string(f), atoms), f));
}

TEST(Parse, PrecedenceAndAssociativity) {
  auto atoms = table({"a", "b", "c"});
  EXPECT_EQ(to_string(parse_formula("a | b & c", atoms)), "(a | (b & c))");
  EXPECT_EQ(to_string(parse_formula("a U b U[1,2] c", atoms)), "(a U (b U[1,2] c))");
  EXPECT_EQ(to_string(parse_formula("!F G[0,2] a", atoms)), "!F G[0,2] a");
  EXPECT_EQ(to_string(parse_formula("a & b U c | a", atoms)), "((a & b) U (c | a))");
  EXPECT_EQ(to_string(parse_formula("F[3,inf] a", atoms)), "F[3,inf] a");
  EXPECT_EQ(to_string(parse_formula("@4 (a & b)", atoms)), "@4 (a & b)");
}

TEST(Parse, Errors) {
  auto atoms = table({"a", "b"});
  try {
    parse_formula("a & zz", atoms);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
    EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
  }
  try {
    parse_formula("F[5,2] a", atoms);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 1u);
  }
  EXPECT_THROW(parse_formula("(a & b", atoms), ParseError);
  EXPECT_THROW(parse_formula("a b", atoms), ParseError);
  EXPECT_THROW(parse_formula("", atoms), ParseError);
  EXPECT_THROW(parse_formula("a # b", atoms), ParseError);
  EXPECT_THROW(parse_formula("U b", atoms), ParseError);
}

TEST(Parse, RandomRoundTrip) {
  std::mt19937_64 rng(17);
  auto atoms = gen::random_boxes(rng, 3, 1);
  AtomTable t;
  for (auto& a : atoms) t[a->id] = a;
  gen::FormulaOptions o;
  o.max_depth = 4;
  o.unbounded_probability = 0.2;
  for (int i = 0; i < 300; ++i) {
    Formula f = gen::random_formula(rng, atoms, o);
    EXPECT_TRUE(structurally_equal(parse_formula(to_string(f), t), f)) << to_string(f);
  }
}

TEST(Eval, AlwaysOverShortTrace) {
  auto atoms = table({"p"});
  Formula f = parse_formula("G[0,5] p", atoms);
  Trace tr = bool_trace({1, 1, 1, 1});
  EXPECT_FALSE(eval_strong(tr, f, 0));
  EXPECT_TRUE(eval_weak(tr, f, 0));
  EXPECT_TRUE(eval_strong(tr, parse_formula("!G[0,5] p", atoms), 0) == false);
  Trace violated = bool_trace({1, 0, 1, 1});
  EXPECT_TRUE(eval_strong(violated, parse_formula("!G[0,5] p", atoms), 0));
}

TEST(Eval, ConstantsAndBeyondHorizon) {
  auto atoms = table({"p"});
  Trace tr = bool_trace({1, 0, 0});
  EXPECT_TRUE(eval_strong(tr, Formula::truth(), 0));
  EXPECT_TRUE(eval_strong(tr, Formula::truth(), 9));
  Formula p = Formula::atom(atoms["p"]);
  EXPECT_TRUE(eval_weak(tr, p, 3));
  EXPECT_FALSE(eval_strong(tr, p, 3));
  EXPECT_FALSE(eval_weak(tr, Formula::negation(p), 0));
  EXPECT_TRUE(eval_weak(tr, Formula::negation(p), 3));
}

TEST(Eval, EventuallyWitness) {
  auto atoms = table({"p"});
  Trace tr = bool_trace({0, 0, 1, 0, 0, 0});
  EXPECT_TRUE(eval_strong(tr, parse_formula("F[0,2] p", atoms), 0));
  EXPECT_FALSE(eval_weak(tr, parse_formula("F[0,1] p", atoms), 0));
}

TEST(Eval, UnknownSignal) {
  BoxRegion b;
  b.subject = "nope";
  b.lo = b.hi = Eigen::VectorXd::Zero(1);
  Formula f = Formula::atom(std::make_shared<AtomicPredicate>(AtomicPredicate{"x", b}));
  EXPECT_THROW(eval_weak(bool_trace({1}), f, 0), UnknownSignalError);
}

TEST(Eval, NormBallUsesEuclideanNormAndCenterSignal) {
  NormBall ball;
  ball.subject = "relay";
  ball.center_signal = "e1.hat";
  ball.radius = 4.0;
  Formula f = Formula::atom(std::make_shared<AtomicPredicate>(AtomicPredicate{"m1", ball}));
  Trace tr(0.5);
  tr.set_signal("relay", {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 0, 0)});
  tr.set_signal("e1.hat", {Eigen::Vector3d(0, 4, 0), Eigen::Vector3d(3, 3, 0)});
  EXPECT_TRUE(eval_strong(tr, f, 0));  // boundary is inclusive
  EXPECT_FALSE(eval_weak(tr, f, 1));   // ||(3,3)|| > 4 although each coordinate is inside
}

TEST(Eval, AgreesWithDirectDefinitions) {
  std::mt19937_64 rng(1);
  gen::FormulaOptions o;
  o.unbounded_probability = 0.25;
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    auto atoms = gen::random_boxes(rng, 3, 2);
    Formula f = gen::random_formula(rng, atoms, o);
    Trace tr = gen::random_trace(rng, gen::uniform_int(rng, 0, 12), 2);
    for (int j = 0; j <= tr.horizon() + 2; ++j) {
      ASSERT_EQ(eval_strong(tr, f, j), naive::sat(tr, f, j, true)) << to_string(f) << " j=" << j;
      ASSERT_EQ(eval_weak(tr, f, j), naive::sat(tr, f, j, false)) << to_string(f) << " j=" << j;
      ++checked;
    }
  }
  EXPECT_GT(checked, 2000);
}

TEST(Eval, StrongImpliesWeakAndDuality) {
  std::mt19937_64 rng(2);
  gen::FormulaOptions o;
  for (int i = 0; i < 500; ++i) {
    auto atoms = gen::random_boxes(rng, 2, 1);
    Formula f = gen::random_formula(rng, atoms, o);
    Trace tr = gen::random_trace(rng, gen::uniform_int(rng, 0, 12), 1);
    for (int j = 0; j <= tr.horizon(); ++j) {
      Verdict v = evaluate(tr, f, j);
      ASSERT_TRUE(!v.strong || v.weak) << to_string(f);
      Verdict n = evaluate(tr, Formula::negation(f), j);
      ASSERT_EQ(n.strong, !v.weak);
      ASSERT_EQ(n.weak, !v.strong);
    }
  }
}

TEST(Eval, SugarMatchesUntilExpansion) {
  std::mt19937_64 rng(3);
  gen::FormulaOptions o;
  o.unbounded_probability = 0.3;
  o.max_depth = 2;
  for (int i = 0; i < 300; ++i) {
    auto atoms = gen::random_boxes(rng, 2, 1);
    Formula body = gen::random_formula(rng, atoms, o);
    TimeInterval iv = gen::random_interval(rng, o);
    Formula ev = Formula::eventually(iv, body);
    Formula ev_u = Formula::until(iv, Formula::truth(), body);
    Formula al = Formula::always(iv, body);
    Formula al_u = Formula::negation(Formula::until(iv, Formula::truth(), Formula::negation(body)));
    Trace tr = gen::random_trace(rng, gen::uniform_int(rng, 0, 12), 1);
    for (int j = 0; j <= tr.horizon() + 1; ++j) {
      ASSERT_EQ(evaluate(tr, ev, j), evaluate(tr, ev_u, j));
      ASSERT_EQ(evaluate(tr, al, j), evaluate(tr, al_u, j));
    }
  }
}

TEST(Eval, ViewsAgreeOnceTraceIsLongEnough) {
  std::mt19937_64 rng(4);
  gen::FormulaOptions o;
  for (int i = 0; i < 300; ++i) {
    auto atoms = gen::random_boxes(rng, 2, 1);
    Formula f = gen::random_formula(rng, atoms, o);
    const int len = *necessary_length(f);
    const int j = gen::uniform_int(rng, 0, 3);
    Trace tr = gen::random_trace(rng, len + j + gen::uniform_int(rng, 0, 2), 1);
    Verdict v = evaluate(tr, f, j);
    ASSERT_EQ(v.strong, v.weak) << to_string(f);
  }
}

TEST(NecessaryLength, Examples) {
  auto atoms = table({"a", "b", "p"});
  EXPECT_EQ(necessary_length(parse_formula("G[0,5] p", atoms)), 5);
  EXPECT_EQ(necessary_length(parse_formula("p", atoms)), 0);
  EXPECT_EQ(necessary_length(parse_formula("F[0,3] a & F[0,7] b", atoms)), 7);
  EXPECT_EQ(necessary_length(parse_formula("a U[1,4] F[0,2] b", atoms)), 6);
  EXPECT_EQ(necessary_length(parse_formula("!(a & G b)", atoms)), std::nullopt);
}

TEST(Specialize, ObservedWitnessFoldsToTrue) {
  auto atoms = table({"p"});
  Formula f = parse_formula("F[0,2] p", atoms);
  EXPECT_TRUE(specialize(f, bool_trace({1}), 0).is_true());
}

TEST(Specialize, ObservedViolationFoldsToFalse) {
  auto atoms = table({"p"});
  EXPECT_TRUE(specialize(parse_formula("G[0,1] p", atoms), bool_trace({0}), 0).is_false());
}

TEST(Specialize, EmptyPrefixIsIdentity) {
  auto atoms = table({"p"});
  Formula f = parse_formula("G F[0,3] p", atoms);
  EXPECT_EQ(specialize(f, Trace(0.5), -1).id(), f.id());
}

TEST(Specialize, ShortPrefixIsRejected) {
  auto atoms = table({"p"});
  EXPECT_THROW(specialize(parse_formula("p", atoms), bool_trace({1, 1}), 2), SpecializeError);
}

TEST(Specialize, RemainderIsAnchoredAfterPrefix) {
  auto atoms = table({"p"});
  Formula f = parse_formula("G F[0,3] p", atoms);
  Formula s = specialize(f, bool_trace({1, 0}), 1);
  // windows starting at 0 and 1 are not yet closed only for j=1; the rest starts at 2
  EXPECT_EQ(to_string(s), "(@2 F[0,2] p & @2 G F[0,3] p)");
}

TEST(Specialize, PreservesVerdictsOnExtensions) {
  std::mt19937_64 rng(5);
  gen::FormulaOptions o;
  o.unbounded_probability = 0.25;
  for (int i = 0; i < 600; ++i) {
    auto atoms = gen::random_boxes(rng, 3, 1);
    Formula f = gen::random_formula(rng, atoms, o);
    const int last = gen::uniform_int(rng, 0, 8);
    Trace prefix = gen::random_trace(rng, last, 1);
    Formula s = specialize(f, prefix, last);
    for (int rep = 0; rep < 3; ++rep) {
      Trace full = rep == 0 ? prefix : extend(prefix, rng, gen::uniform_int(rng, 1, 10));
      ASSERT_EQ(evaluate(full, s, 0), evaluate(full, f, 0)) << to_string(f) << " => " << to_string(s);
    }
    // specializing twice in a row is the same as once with the longer prefix
    if (last >= 1) {
      Trace shorter = prefix.prefix(last);
      Formula twice = specialize(specialize(f, shorter, last - 1), prefix, last);
      Trace full = extend(prefix, rng, 6);
      ASSERT_EQ(evaluate(full, twice, 0), evaluate(full, f, 0));
    }
  }
}

TEST(Nnf, Examples) {
  auto atoms = table({"a", "b", "e"});
  EXPECT_EQ(to_string(to_nnf(parse_formula("!F G[0,2] e", atoms))), "G F[0,2] !e");
  EXPECT_EQ(to_string(to_nnf(parse_formula("!!a", atoms))), "a");
  EXPECT_EQ(to_string(to_nnf(parse_formula("!(a & b)", atoms))), "(!a | !b)");
}

TEST(Nnf, PreservesBothViews) {
  std::mt19937_64 rng(6);
  gen::FormulaOptions o;
  o.unbounded_probability = 0.25;
  for (int i = 0; i < 600; ++i) {
    auto atoms = gen::random_boxes(rng, 3, 1);
    Formula f = gen::random_formula(rng, atoms, o);
    Formula n = to_nnf(f);
    ASSERT_TRUE(is_nnf(n));
    Trace tr = gen::random_trace(rng, gen::uniform_int(rng, 0, 12), 1);
    for (int j = 0; j <= tr.horizon() + 1; ++j) {
      ASSERT_EQ(evaluate(tr, n, j), evaluate(tr, f, j)) << to_string(f) << " => " << to_string(n);
    }
  }
}

TEST(Nnf, DeMorganOnRandomTraces) {
  std::mt19937_64 rng(7);
  auto atoms = table({"a", "b"});
  Formula f = parse_formula("!(a & b)", atoms);
  Formula n = to_nnf(f);
  for (int i = 0; i < 100; ++i) {
    Trace tr = gen::random_trace(rng, gen::uniform_int(rng, 0, 12), 1);
    for (int j = 0; j <= tr.horizon(); ++j) ASSERT_EQ(evaluate(tr, n, j), evaluate(tr, f, j));
  }
}
