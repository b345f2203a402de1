#include <gtest/gtest.h>

#include <random>

#include "hddl/logic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hddl;
using testing_support::atom;
using testing_support::lit;
using testing_support::vatom;

namespace {

ObjectPool pool_of(std::vector<std::string> names, const std::string& type = kRootType) {
  ObjectPool p;
  for (const auto& n : names) p.add(n, type);
  return p;
}

Formula vlit(const std::string& pred, std::vector<std::string> vars) { return Formula::of(vatom(pred, std::move(vars))); }

TypedVariable var(const std::string& n, const std::string& type = kRootType) { return {n, type}; }

}  // namespace

TEST(Substitute, ReplacesFreeOccurrence) {
  Formula f = Formula::of([] {
    Atom a;
    a.predicate = "p";
    a.args = {Term::variable("x"), Term::constant("a")};
    return a;
  }());
  EXPECT_EQ(substitute(f, "x", "b"), lit("p", {"b", "a"}));
}

TEST(Substitute, BoundOccurrenceUntouched) {
  Formula f = Formula::forall(var("x"), vlit("p", {"x"}));
  EXPECT_EQ(substitute(f, "x", "b"), f);
}

TEST(Substitute, ShadowedQuantifierKeepsInnerVariable) {
  Formula f = Formula::all({vlit("p", {"x"}), Formula::exists(var("x"), vlit("q", {"x"}))});
  Formula want = Formula::all({lit("p", {"c"}), Formula::exists(var("x"), vlit("q", {"x"}))});
  EXPECT_EQ(substitute(f, "x", "c"), want);
}

TEST(Ground, ForallBecomesConjunction) {
  auto g = ground(Formula::forall(var("x"), vlit("p", {"x"})), pool_of({"a", "b"}));
  EXPECT_EQ(g, Formula::all({lit("p", {"a"}), lit("p", {"b"})}));
}

TEST(Ground, ExistsBecomesDisjunction) {
  auto g = ground(Formula::exists(var("x"), vlit("p", {"x"})), pool_of({"a", "b"}));
  EXPECT_EQ(g, Formula::any({lit("p", {"a"}), lit("p", {"b"})}));
}

TEST(Ground, NestedQuantifiersMatchTruthTable) {
  Formula f = Formula::forall(var("x"), Formula::exists(var("y"), vlit("r", {"x", "y"})));
  auto g = ground(f, pool_of({"a", "b"}));
  Formula want = Formula::all({Formula::any({lit("r", {"a", "a"}), lit("r", {"a", "b"})}),
                               Formula::any({lit("r", {"b", "a"}), lit("r", {"b", "b"})})});
  EXPECT_EQ(g, want);
  // every interpretation of r over {a,b}
  std::vector<Atom> rs = {atom("r", {"a", "a"}), atom("r", {"a", "b"}), atom("r", {"b", "a"}), atom("r", {"b", "b"})};
  for (int mask = 0; mask < 16; ++mask) {
    State s;
    for (int k = 0; k < 4; ++k)
      if (mask >> k & 1) s.insert(rs[static_cast<std::size_t>(k)]);
    bool expected = ((mask & 1) || (mask & 2)) && ((mask & 4) || (mask & 8));
    EXPECT_EQ(evaluate(s, g), expected) << mask;
    EXPECT_EQ(oracle::truth(f, s, {"a", "b"}), expected) << mask;
  }
}

TEST(Ground, RespectsTypes) {
  ObjectPool p;
  p.types().declare("block");
  p.types().declare("table");
  p.add("a", "block");
  p.add("b", "block");
  p.add("t", "table");
  auto g = ground(Formula::forall(var("x", "block"), vlit("clear", {"x"})), p);
  EXPECT_EQ(g, Formula::all({lit("clear", {"a"}), lit("clear", {"b"})}));
  auto h = ground(Formula::forall(var("x"), vlit("clear", {"x"})), p);
  EXPECT_EQ(h.children.size(), 3u);
}

TEST(Ground, FreeVariableIsAnError) {
  try {
    ground(vlit("p", {"x"}), pool_of({"a"}));
    FAIL();
  } catch (const LogicError& e) {
    EXPECT_EQ(e.code, LogicError::Code::unbound_variable);
  }
}

TEST(Ground, EmptyDomainIsAnError) {
  ObjectPool p;
  p.types().declare("block");
  try {
    ground(Formula::forall(var("x", "block"), vlit("p", {"x"})), p);
    FAIL();
  } catch (const LogicError& e) {
    EXPECT_EQ(e.code, LogicError::Code::empty_domain);
  }
}

TEST(Ground, IdempotentOnGroundFormulas) {
  Formula f = Formula::all({lit("p", {"a"}), Formula::negate(lit("q", {"b"}))});
  auto pool = pool_of({"a", "b"});
  EXPECT_EQ(ground(f, pool), f);
  auto g = ground(Formula::forall(var("x"), vlit("p", {"x"})), pool);
  EXPECT_EQ(ground(g, pool), g);
}

TEST(Ground, ConjunctCountEqualsDomainSize) {
  for (int n = 1; n <= 5; ++n) {
    std::vector<std::string> names;
    for (int k = 0; k < n; ++k) names.push_back("c" + std::to_string(k));
    auto g = ground(Formula::forall(var("x"), Formula::forall(var("y"), vlit("r", {"x", "y"}))), pool_of(names));
    ASSERT_EQ(g.kind, Formula::Kind::conjunction);
    EXPECT_EQ(g.children.size(), static_cast<std::size_t>(n));
    for (const auto& c : g.children) EXPECT_EQ(c.children.size(), static_cast<std::size_t>(n));
  }
}

TEST(Evaluate, ClosedWorld) {
  EXPECT_TRUE(evaluate({atom("p", {"a"})}, Formula::all({lit("p", {"a"}), Formula::negate(lit("p", {"b"}))})));
  EXPECT_TRUE(evaluate({}, Formula::negate(lit("p", {"a"}))));
  EXPECT_TRUE(evaluate({atom("p", {"a"}), atom("q", {"b"})}, Formula::any({lit("p", {"b"}), lit("q", {"b"})})));
}

TEST(Evaluate, EqualityIsStructural) {
  EXPECT_TRUE(evaluate({}, Formula::equals(Term::constant("a"), Term::constant("a"))));
  EXPECT_FALSE(evaluate({atom("=", {"a", "b"})}, Formula::equals(Term::constant("a"), Term::constant("b"))));
}

TEST(Evaluate, RejectsVariables) {
  try {
    evaluate({}, vlit("p", {"x"}));
    FAIL();
  } catch (const LogicError& e) {
    EXPECT_EQ(e.code, LogicError::Code::not_ground);
  }
}

TEST(Holds, FreeVariablesAreExistential) {
  auto pool = pool_of({"a", "b"});
  EXPECT_TRUE(holds({atom("p", {"a"})}, vlit("p", {"x"}), pool));
  EXPECT_FALSE(holds({}, vlit("p", {"x"}), pool));
  EXPECT_TRUE(holds({atom("p", {"a"}), atom("p", {"b"})}, Formula::forall(var("x"), vlit("p", {"x"})), pool));
  EXPECT_FALSE(holds({atom("p", {"a"})}, Formula::forall(var("x"), vlit("p", {"x"})), pool));
}

TEST(Holds, TwoFreeVariablesShareOneBinding) {
  auto pool = pool_of({"a", "b"});
  Formula f = Formula::all({vlit("p", {"x"}), Formula::negate(vlit("q", {"x"}))});
  EXPECT_TRUE(holds({atom("p", {"a"}), atom("q", {"b"})}, f, pool));
  EXPECT_FALSE(holds({atom("p", {"a"}), atom("q", {"a"})}, f, pool));
}

TEST(Canonical, EliminatesImplicationAndExists) {
  Formula f = Formula::implies(lit("p"), Formula::exists(var("x"), vlit("q", {"x"})));
  auto c = canonical(f);
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    EXPECT_NE(g.kind, Formula::Kind::implication);
    EXPECT_NE(g.kind, Formula::Kind::exists);
    for (const auto& k : g.children) walk(k);
  };
  walk(c);
  auto pool = pool_of({"a", "b"});
  for (const State& s : std::vector<State>{{}, {atom("p")}, {atom("p"), atom("q", {"b"})}, {atom("q", {"a"})}})
    EXPECT_EQ(holds(s, f, pool), holds(s, c, pool));
}

TEST(Properties, DeMorganExhaustiveOverThreeAtoms) {
  std::vector<Formula> atoms = {lit("a"), lit("b"), lit("c")};
  for (int mask = 0; mask < 8; ++mask) {
    State s;
    for (int k = 0; k < 3; ++k)
      if (mask >> k & 1) s.insert(atoms[static_cast<std::size_t>(k)].atom);
    for (const auto& x : atoms)
      for (const auto& y : atoms) {
        EXPECT_EQ(evaluate(s, Formula::negate(Formula::all({x, y}))),
                  evaluate(s, Formula::any({Formula::negate(x), Formula::negate(y)})));
        EXPECT_EQ(evaluate(s, Formula::negate(Formula::any({x, y}))),
                  evaluate(s, Formula::all({Formula::negate(x), Formula::negate(y)})));
      }
  }
}

TEST(Properties, HoldsEqualsEvaluateOfGroundOnRandomFormulas) {
  std::mt19937 rng(7);
  std::vector<std::string> objects = {"a", "b", "c"};
  auto pool = pool_of(objects);
  oracle::FormulaGen gen(rng, {1, 2, 0}, objects, 2);
  for (int n = 0; n < 300; ++n) {
    Formula f = gen.closed(6);
    auto g = ground(f, pool);
    EXPECT_TRUE(is_ground(g));
    for (int k = 0; k < 20; ++k) {
      State s;
      for (const auto& o : objects) {
        if (rng() % 2) s.insert(atom("p0", {o}));
        for (const auto& o2 : objects)
          if (rng() % 3 == 0) s.insert(atom("p1", {o, o2}));
      }
      if (rng() % 2) s.insert(atom("p2"));
      bool want = oracle::truth(f, s, objects);
      ASSERT_EQ(holds(s, f, pool), want) << f.str();
      ASSERT_EQ(evaluate(s, g), want) << f.str();
    }
  }
}

TEST(ObjectPool, TypeQueriesFollowHierarchy) {
  ObjectPool p;
  p.types().declare("vehicle");
  p.types().declare("truck", "vehicle");
  p.add("t1", "truck");
  p.add("v1", "vehicle");
  p.add("x");
  EXPECT_EQ(p.objects_of("vehicle"), (std::vector<std::string>{"t1", "v1"}));
  EXPECT_EQ(p.objects_of("truck"), (std::vector<std::string>{"t1"}));
  EXPECT_EQ(p.objects_of(kRootType).size(), 3u);
  EXPECT_TRUE(p.has_type("t1", "vehicle"));
  EXPECT_FALSE(p.has_type("v1", "truck"));
}

TEST(ObjectPool, CycleIsDetected) {
  TypeHierarchy h;
  h.declare("a", "b");
  h.declare("b", "a");
  EXPECT_THROW(h.check_acyclic(), LogicError);
}
