#include <gtest/gtest.h>

#include <random>

#include "hddl/parser.hpp"
#include "support.hpp"

using namespace hddl;
using testing_support::lit;

namespace {

std::vector<std::string> texts(const std::vector<Token>& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(t.text);
  return out;
}

std::string rule_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.rule;
  }
  return "";
}

const char* kMini = R"((define (domain mini)
  (:predicates (p) (q))
  (:action go :parameters () :precondition (p) :effect (and (q) (not (p))))))";

}  // namespace

TEST(Tokenize, Parenthesized) {
  auto ts = tokenize("(and (p ?x) (q a))");
  EXPECT_EQ(texts(ts), (std::vector<std::string>{"(", "and", "(", "p", "?x", ")", "(", "q", "a", ")", ")"}));
  EXPECT_EQ(ts[4].kind, Token::Kind::variable);
  EXPECT_EQ(ts[3].span.line, 1u);
  EXPECT_EQ(ts[3].span.column, 7u);
}

TEST(Tokenize, CommentsAreStripped) {
  auto ts = tokenize("; comment\n(p)");
  EXPECT_EQ(texts(ts), (std::vector<std::string>{"(", "p", ")"}));
  EXPECT_EQ(ts[1].span.line, 2u);
}

TEST(Tokenize, DurationClause) {
  auto ts = tokenize("(= ?duration 5)");
  EXPECT_EQ(texts(ts), (std::vector<std::string>{"(", "=", "?duration", "5", ")"}));
  EXPECT_EQ(ts[3].kind, Token::Kind::integer);
  EXPECT_EQ(tokenize(":Durative-Action")[0].kind, Token::Kind::keyword);
}

TEST(Tokenize, IllegalCharacterHasLocation) {
  try {
    tokenize("(p a)\n(q $)", "f.hddl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.rule, "illegal-character");
    EXPECT_EQ(e.span.line, 2u);
    EXPECT_EQ(e.span.column, 4u);
    EXPECT_EQ(e.diagnostic().str().rfind("f.hddl:2:4: error:", 0), 0u);
  }
}

TEST(ParseDomain, MinimalSnapAction) {
  auto d = parse_domain(kMini);
  EXPECT_EQ(d.name, "mini");
  ASSERT_EQ(d.actions.size(), 1u);
  EXPECT_TRUE(d.methods.empty());
  EXPECT_FALSE(d.actions[0].durative);
  EXPECT_EQ(d.actions[0].start.precond, lit("p"));
  EXPECT_EQ(d.actions[0].start.add.size(), 1u);
  EXPECT_EQ(d.actions[0].start.del.size(), 1u);
}

TEST(ParseDomain, DurativeConditionsMapToSnapsAndInvariant) {
  auto d = parse_domain(R"((define (domain d) (:requirements :durative-actions)
    (:predicates (p) (q) (r) (s))
    (:durative-action a :parameters () :duration (= ?duration 4)
      :condition (and (at start (p)) (over all (q)) (at end (r)))
      :effect (and (at start (not (p))) (at end (s))))))");
  const auto& a = d.actions.at(0);
  EXPECT_TRUE(a.durative);
  EXPECT_EQ(a.start.precond, lit("p"));
  EXPECT_EQ(a.invariant, lit("q"));
  EXPECT_EQ(a.end.precond, lit("r"));
  EXPECT_EQ(a.start.del.size(), 1u);
  EXPECT_EQ(a.end.add.size(), 1u);
  EXPECT_EQ(a.duration, DurationExpr::literal(4));
}

TEST(ParseDomain, MethodOrderingBecomesPointConstraint) {
  auto d = parse_domain(R"((define (domain d) (:requirements :hierarchy)
    (:task t :parameters ())
    (:method m :parameters () :task (t)
      :subtasks (and (t1 (a)) (t2 (a)))
      :ordering (and (< (end t1) (start t2))))
    (:action a :parameters ())))");
  const auto& co = d.methods.at(0).network.co;
  ASSERT_EQ(co.size(), 1u);
  EXPECT_EQ(co[0].left, TimePoint::end_of("t1"));
  EXPECT_EQ(co[0].rel, Relation::lt);
  EXPECT_EQ(co[0].right, TimePoint::start_of("t2"));
}

TEST(ParseDomain, OrderedSubtasksChainEndToStart) {
  auto d = parse_domain(R"((define (domain d) (:requirements :hierarchy)
    (:task t :parameters ())
    (:method m :parameters () :task (t) :ordered-subtasks (and (a) (a) (a)))
    (:action a :parameters ())))");
  const auto& w = d.methods.at(0).network;
  ASSERT_EQ(w.ids.size(), 3u);
  ASSERT_EQ(w.co.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(w.co[k].left, TimePoint::end_of(w.ids[k]));
    EXPECT_EQ(w.co[k].rel, Relation::le);
    EXPECT_EQ(w.co[k].right, TimePoint::start_of(w.ids[k + 1]));
  }
}

TEST(ParseDomain, AllSixRelationsAndDurationConstraints) {
  auto l = testing_support::load(testing_support::instance("pa-stress/p1"));
  std::set<Relation> seen;
  for (const auto& c : l.problem.network.co) seen.insert(c.rel);
  EXPECT_EQ(seen.size(), 6u);
  ASSERT_EQ(l.problem.network.cd.size(), 1u);
  EXPECT_EQ(l.problem.network.cd[0].rel, Relation::lt);
}

TEST(ParseDomain, DuplicateDeclarationRejected) {
  EXPECT_EQ(rule_of([] { parse_domain("(define (domain d) (:predicates (p) (p)))"); }), "duplicate-declaration");
}

TEST(ParseDomain, FunctionsAreAnUnsupportedFeature) {
  auto d = parse_domain("(define (domain d) (:functions (fuel ?x)) (:predicates (p)))");
  ASSERT_EQ(d.notes.size(), 1u);
  EXPECT_EQ(d.notes[0].rule, "unsupported-feature");
  EXPECT_TRUE(has_errors(d.notes));
}

TEST(ParseDomain, UnknownRequirementIsWarning) {
  auto d = parse_domain("(define (domain d) (:requirements :hierarchy :fancy-stuff))");
  ASSERT_EQ(d.notes.size(), 1u);
  EXPECT_EQ(d.notes[0].rule, "unknown-requirement");
  EXPECT_FALSE(has_errors(d.notes));
}

TEST(ParseDomain, KeywordsAreCaseInsensitive) {
  auto d = parse_domain("(DEFINE (DOMAIN Mixed) (:PREDICATES (P)) (:Action Go :Parameters () :Effect (P)))");
  EXPECT_EQ(d.name, "Mixed");
  ASSERT_EQ(d.actions.size(), 1u);
  EXPECT_EQ(d.actions[0].name, "Go");
}

TEST(ParseProblem, EmptyNetwork) {
  auto p = parse_problem("(define (problem e) (:domain d) (:htn :subtasks ()) (:init))");
  EXPECT_TRUE(p.network.ids.empty());
  EXPECT_NE(print_problem(p).find(":subtasks ()"), std::string::npos);
}

TEST(ParseProblem, InitAtomsCounted) {
  auto p = parse_problem("(define (problem e) (:domain d) (:objects a b) (:init (p a) (p b) (q a b)))");
  EXPECT_EQ(p.init.size(), 3u);
}

TEST(ParseProblem, AtConstraintInHtn) {
  auto p = parse_problem(R"((define (problem e) (:domain d) (:objects d1)
    (:htn :subtasks (and (t1 (serve d1))) :constraints (and (at (end t1) (served d1))))
    (:init)))");
  ASSERT_EQ(p.network.ct.size(), 1u);
  const auto& c = p.network.ct[0];
  EXPECT_EQ(c.form, DecompositionConstraint::Form::at);
  EXPECT_EQ(c.point, TimePoint::end_of("t1"));
  EXPECT_EQ(c.condition, lit("served", {"d1"}));
}

TEST(ParsePlan, ActionLine) {
  auto doc = parse_plan("0: (drive t1 a b) [5]\n");
  ASSERT_EQ(doc.actions.size(), 1u);
  EXPECT_EQ(doc.actions[0].date, 0);
  EXPECT_EQ(doc.actions[0].task.str(), "(drive t1 a b)");
  EXPECT_EQ(doc.actions[0].duration, 5);
  EXPECT_EQ(doc.roots, (std::vector<std::string>{"0"}));
}

TEST(ParsePlan, HierarchyBlock) {
  auto doc = parse_plan("1 0: (a) [1]\n2 1: (b) [1]\n==>\nroot 0\n0 deliver m-direct 1 2\n<==\n");
  EXPECT_EQ(doc.roots, (std::vector<std::string>{"0"}));
  ASSERT_EQ(doc.decompositions.size(), 1u);
  EXPECT_EQ(doc.decompositions[0].method, "m-direct");
  EXPECT_FALSE(doc.decompositions[0].task_args_given);
  EXPECT_EQ(doc.decompositions[0].children, (std::vector<std::string>{"1", "2"}));
}

TEST(ParsePlan, RejectsNonIntegerAndNegativeDates) {
  EXPECT_EQ(rule_of([] { parse_plan("0.5: (a) [1]\n"); }), "non-integer");
  EXPECT_EQ(rule_of([] { parse_plan("-1: (a) [1]\n"); }), "negative-date");
  EXPECT_EQ(rule_of([] { parse_plan("0: (a) [1.5]\n"); }), "non-integer");
}

TEST(ParsePlan, StructuralErrors) {
  EXPECT_EQ(rule_of([] { parse_plan("x 0: (a) [1]\nx 1: (a) [1]\n"); }), "duplicate-identifier");
  EXPECT_EQ(rule_of([] { parse_plan("1 0: (a) [1]\n==>\nroot 0\n0 t m 1 2\n<==\n"); }), "missing-timed-entry");
  EXPECT_EQ(rule_of([] { parse_plan("1 0: (a) [1]\n9 0: (a) [1]\n==>\nroot 0\n0 t m 1\n<==\n"); }),
            "unreferenced-identifier");
}

TEST(ParsePlan, SortsByDateStably) {
  auto doc = parse_plan("b 3: (x) [1]\na 0: (y) [1]\nc 3: (z) [1]\n");
  std::vector<std::string> ids;
  for (const auto& a : doc.actions) ids.push_back(a.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"a", "b", "c"}));
  auto printed = print_plan(doc);
  EXPECT_LT(printed.find("a 0:"), printed.find("b 3:"));
  EXPECT_LT(printed.find("b 3:"), printed.find("c 3:"));
}

TEST(RoundTrip, CorpusFilesAreFixedPoints) {
  namespace fs = std::filesystem;
  for (const auto& ci : testing_support::corpus_instances()) {
    auto l = testing_support::load(ci);
    auto d2 = parse_domain(print_domain(l.domain));
    EXPECT_EQ(d2, l.domain) << ci.name;
    EXPECT_EQ(print_domain(d2), print_domain(l.domain));
    auto p2 = parse_problem(print_problem(l.problem));
    EXPECT_EQ(p2, l.problem) << ci.name;
    EXPECT_EQ(print_problem(p2), print_problem(l.problem));
    if (l.plan) {
      auto doc2 = parse_plan(print_plan(*l.plan));
      EXPECT_EQ(doc2, *l.plan) << ci.name;
      EXPECT_EQ(print_plan(doc2), print_plan(*l.plan));
    }
  }
}

TEST(Errors, CorruptedInputsCarryExpectationsAndInBoundsSpans) {
  std::mt19937 rng(11);
  int errors = 0;
  for (const auto& ci : testing_support::corpus_instances()) {
    for (const auto& path : {ci.domain, ci.problem}) {
      std::string text = testing_support::read_text(path);
      for (int k = 0; k < 60; ++k) {
        std::string t = text;
        std::size_t pos = rng() % t.size();
        switch (rng() % 4) {
          case 0: t.erase(pos, 1); break;
          case 1: t.insert(pos, ")"); break;
          case 2: t.resize(pos); break;
          default: t.insert(pos, "(:bogus"); break;
        }
        try {
          if (path == ci.domain)
            parse_domain(t, "x");
          else
            parse_problem(t, "x");
        } catch (const ParseError& e) {
          ++errors;
          EXPECT_FALSE(e.expected.empty()) << e.what();
          ASSERT_TRUE(e.span.known()) << e.what();
          std::vector<std::string> lines;
          std::stringstream ss(t);
          for (std::string line; std::getline(ss, line);) lines.push_back(line);
          if (lines.empty()) lines.push_back("");
          ASSERT_LE(e.span.line, lines.size()) << e.what();
          EXPECT_LE(e.span.column, lines[e.span.line - 1].size() + 1) << e.what();
        }
      }
    }
  }
  EXPECT_GT(errors, 100);
}
