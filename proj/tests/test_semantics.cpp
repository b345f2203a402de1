#include <gtest/gtest.h>

#include <random>

#include "hddl/semantics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hddl;
using testing_support::atom;
using testing_support::lit;

namespace {

SnapAction snap(Formula pre, std::vector<Atom> add = {}, std::vector<Atom> del = {}) {
  return SnapAction{"", std::move(pre), std::move(add), std::move(del)};
}

GroundAction durative(const std::string& name, std::int64_t d, SnapAction s, SnapAction e,
                      Formula inv = Formula::truth()) {
  GroundAction a;
  a.name = name;
  a.durative = true;
  a.start = std::move(s);
  a.end = std::move(e);
  a.invariant = std::move(inv);
  a.duration = d;
  return a;
}

GroundAction instant(const std::string& name, SnapAction s) {
  GroundAction a;
  a.name = name;
  a.start = std::move(s);
  return a;
}

PlanEntry entry(const std::string& id, const GroundAction& a, std::int64_t date) {
  return PlanEntry{id, a.task(), date, a.durative ? a.duration : 0, a};
}

ObjectPool no_objects() { return {}; }

}  // namespace

TEST(Happenings, EventsAreStartsAndEnds) {
  auto a = durative("a", 4, snap(Formula::truth()), snap(Formula::truth()));
  auto b = durative("b", 1, snap(Formula::truth()), snap(Formula::truth()));
  TemporalPlan p{{entry("0", a, 0), entry("1", b, 2)}};
  EXPECT_EQ(happening_events(p), (std::vector<std::int64_t>{0, 2, 3, 4}));
  EXPECT_EQ(p.makespan(), 4);
}

TEST(Happenings, InvariantsOnlyStrictlyInside) {
  auto a = durative("a", 4, snap(Formula::truth()), snap(Formula::truth()));
  auto b = durative("b", 1, snap(Formula::truth()), snap(Formula::truth()));
  auto hs = happening_schedule(TemporalPlan{{entry("0", a, 0), entry("1", b, 2)}});
  ASSERT_EQ(hs.size(), 4u);
  EXPECT_TRUE(hs[0].invariants.empty());
  EXPECT_EQ(hs[1].invariants, (std::vector<std::size_t>{0}));
  EXPECT_EQ(hs[2].invariants, (std::vector<std::size_t>{0}));
  EXPECT_TRUE(hs[3].invariants.empty());
  EXPECT_EQ(hs[0].snaps, (std::vector<SnapRef>{{0, false}}));
  EXPECT_EQ(hs[2].snaps, (std::vector<SnapRef>{{1, true}}));
  EXPECT_EQ(hs[3].snaps, (std::vector<SnapRef>{{0, true}}));
}

TEST(Happenings, SnapActionHasSingleEvent) {
  auto a = instant("a", snap(Formula::truth()));
  auto hs = happening_schedule(TemporalPlan{{entry("0", a, 3)}});
  ASSERT_EQ(hs.size(), 1u);
  EXPECT_EQ(hs[0].snaps, (std::vector<SnapRef>{{0, false}}));
}

TEST(Interference, Examples) {
  auto p = atom("p"), q = atom("q");
  // reading an atom the other deletes
  EXPECT_TRUE(interferes(snap(Formula::of(p)), snap(Formula::truth(), {}, {p})));
  // polarity does not matter: a negative precondition still mentions p
  EXPECT_TRUE(interferes(snap(Formula::negate(Formula::of(p))), snap(Formula::truth(), {p})));
  EXPECT_TRUE(interferes(snap(Formula::truth(), {p}), snap(Formula::truth(), {}, {p})));
  EXPECT_FALSE(interferes(snap(Formula::of(p), {q}), snap(Formula::of(p), {q})));
  EXPECT_FALSE(interferes(snap(Formula::of(p)), snap(Formula::of(p))));
}

TEST(Interference, MatchesSetDefinitionAndIsSymmetric) {
  std::mt19937 rng(11);
  std::vector<Atom> pool = {atom("a"), atom("b"), atom("c"), atom("d")};
  auto subset = [&] {
    std::vector<Atom> out;
    for (const auto& x : pool)
      if (rng() % 3 == 0) out.push_back(x);
    return out;
  };
  for (int n = 0; n < 2000; ++n) {
    auto make = [&] {
      std::vector<Formula> lits;
      for (const auto& x : subset()) lits.push_back(rng() % 2 ? Formula::of(x) : Formula::negate(Formula::of(x)));
      auto add = subset(), del = subset();
      del.erase(std::remove_if(del.begin(), del.end(),
                               [&](const Atom& x) { return std::find(add.begin(), add.end(), x) != add.end(); }),
                del.end());
      return snap(Formula::all(std::move(lits)), add, del);
    };
    auto x = make(), y = make();
    ASSERT_EQ(interferes(x, y), oracle::plain_interferes(oracle::flatten(x), oracle::flatten(y)));
    ASSERT_EQ(interferes(x, y), interferes(y, x));
  }
}

TEST(Simulate, TransitionDeletesThenAdds) {
  auto p = atom("p");
  auto a = instant("a", snap(Formula::of(p), {p}, {}));
  auto b = instant("b", snap(Formula::truth(), {atom("q")}, {}));
  auto r = simulate(TemporalPlan{{entry("0", a, 0), entry("1", b, 0)}}, {p});
  ASSERT_TRUE(r.ok()) << r.error->str();
  EXPECT_EQ(r.timeline.final_state(), (State{p, atom("q")}));
}

TEST(Simulate, InterferenceAtSharedHappening) {
  auto p = atom("p");
  auto a = instant("a", snap(Formula::of(p), {}, {}));
  auto b = instant("b", snap(Formula::truth(), {}, {p}));
  auto r = simulate(TemporalPlan{{entry("0", a, 1), entry("1", b, 1)}}, {p});
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error->kind, ErrorKind::Interference);
  EXPECT_EQ(r.error->date, 1);
  // staggered, the same pair is fine
  EXPECT_TRUE(simulate(TemporalPlan{{entry("0", a, 1), entry("1", b, 2)}}, {p}).ok());
}

TEST(Simulate, InvariantCheckedInsideButNotAtEndpoints) {
  auto p = atom("p");
  auto hold = durative("hold", 4, snap(Formula::truth()), snap(Formula::truth()), Formula::of(p));
  auto drop = instant("drop", snap(Formula::truth(), {}, {p}));
  State s0{p};
  // p removed at the end happening: the invariant no longer applies there
  EXPECT_TRUE(simulate(TemporalPlan{{entry("0", hold, 0), entry("1", drop, 3)}}, s0).ok());
  auto r = simulate(TemporalPlan{{entry("0", hold, 0), entry("1", drop, 1), entry("2", instant("tick", snap(Formula::truth())), 2)}}, s0);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error->kind, ErrorKind::InvariantViolation);
  EXPECT_EQ(r.error->date, 2);
  EXPECT_EQ(r.timeline.steps.back().pre, r.timeline.steps.back().post);
}

TEST(Simulate, CompoundEntryIsRejected) {
  TemporalPlan p;
  p.entries.push_back(PlanEntry{"t1", Task{"deliver", {}, {}}, 0, 0, std::nullopt});
  auto r = simulate(p, {});
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error->kind, ErrorKind::NonPrimitiveTask);
}

TEST(Simulate, AgreesWithReferenceExecutorOnRandomPlans) {
  std::mt19937 rng(23);
  std::vector<std::string> objs = {"o"};
  oracle::FormulaGen gen(rng, {0, 0, 0, 0}, objs, 0);
  std::vector<Atom> atoms = {atom("p0"), atom("p1"), atom("p2"), atom("p3")};
  auto effects = [&](std::vector<Atom>& add, std::vector<Atom>& del) {
    for (const auto& x : atoms) {
      int r = static_cast<int>(rng() % 5);
      if (r == 0) add.push_back(x);
      if (r == 1) del.push_back(x);
    }
  };
  int failures = 0, kinds[3] = {0, 0, 0};
  for (int n = 0; n < 3000; ++n) {
    std::vector<oracle::Entry> ref;
    TemporalPlan plan;
    int count = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < count; ++k) {
      GroundAction a;
      a.name = "a" + std::to_string(k);
      a.durative = rng() % 3 != 0;
      a.start.precond = gen.closed(1 + static_cast<int>(rng() % 3));
      effects(a.start.add, a.start.del);
      if (a.durative) {
        a.end.precond = gen.closed(1 + static_cast<int>(rng() % 2));
        effects(a.end.add, a.end.del);
        a.invariant = rng() % 2 ? gen.closed(1) : Formula::truth();
        a.duration = 1 + static_cast<std::int64_t>(rng() % 3);
      }
      std::int64_t date = static_cast<std::int64_t>(rng() % 6);
      ref.push_back({a, date, a.duration});
      plan.entries.push_back(entry(std::to_string(k), a, date));
    }
    State s0;
    for (const auto& x : atoms)
      if (rng() % 2) s0.insert(x);
    auto got = simulate(plan, s0);
    auto want = oracle::execute(ref, s0);
    ASSERT_EQ(got.ok(), !want.error) << n;
    if (want.error) {
      ++failures;
      ASSERT_EQ(got.error->kind, *want.error) << n;
      ASSERT_EQ(got.error->date, want.error_date) << n;
      if (*want.error == ErrorKind::Interference) ++kinds[0];
      if (*want.error == ErrorKind::PreconditionFailure) ++kinds[1];
      if (*want.error == ErrorKind::InvariantViolation) ++kinds[2];
    }
    ASSERT_EQ(got.timeline.steps.size(), want.steps.size()) << n;
    for (std::size_t i = 0; i < want.steps.size(); ++i) {
      ASSERT_EQ(got.timeline.steps[i].date, want.steps[i].date);
      ASSERT_EQ(got.timeline.steps[i].pre, want.steps[i].pre);
      ASSERT_EQ(got.timeline.steps[i].post, want.steps[i].post);
    }
  }
  // the generator reaches every failure mode
  EXPECT_GT(failures, 100);
  EXPECT_GT(kinds[0], 0);
  EXPECT_GT(kinds[1], 0);
  EXPECT_GT(kinds[2], 0);
}

TEST(Simulate, Deterministic) {
  auto p = atom("p");
  auto a = durative("a", 2, snap(Formula::truth(), {p}), snap(Formula::of(p), {}, {p}));
  TemporalPlan plan{{entry("0", a, 0), entry("1", a, 3)}};
  auto r1 = simulate(plan, {}), r2 = simulate(plan, {});
  ASSERT_EQ(r1.timeline.steps.size(), r2.timeline.steps.size());
  for (std::size_t i = 0; i < r1.timeline.steps.size(); ++i) EXPECT_EQ(r1.timeline.steps[i].post, r2.timeline.steps[i].post);
}

TEST(CheckOrdering, ViolationAndUnmappedPoint) {
  using TP = TimePoint;
  PointDates dates{{TP::start_of("a"), 0}, {TP::end_of("a"), 4}, {TP::start_of("b"), 3}};
  std::vector<OrderingConstraint> ok{{TP::start_of("a"), Relation::lt, TP::start_of("b"), {}}};
  EXPECT_FALSE(check_ordering(ok, dates));
  std::vector<OrderingConstraint> bad{{TP::end_of("a"), Relation::le, TP::start_of("b"), {}}};
  auto e = check_ordering(bad, dates);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, ErrorKind::OrderingViolation);
  std::vector<OrderingConstraint> ghost{{TP::end_of("b"), Relation::eq, TP::end_of("a"), {}}};
  e = check_ordering(ghost, dates);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, ErrorKind::UnmappedTimePoint);
}

TEST(CheckOrdering, AgreesWithComparisonForEveryRelation) {
  using TP = TimePoint;
  for (auto r : {Relation::lt, Relation::le, Relation::gt, Relation::ge, Relation::eq, Relation::ne})
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) {
        PointDates dates{{TP::start_of("a"), x}, {TP::start_of("b"), y}};
        bool sat = r == Relation::lt ? x < y : r == Relation::le ? x <= y : r == Relation::gt ? x > y
                 : r == Relation::ge ? x >= y : r == Relation::eq ? x == y : x != y;
        EXPECT_EQ(!check_ordering({{TP::start_of("a"), r, TP::start_of("b"), {}}}, dates), sat);
      }
}

TEST(CheckDurations, ArithmeticAndUnknownIds) {
  using K = DurationExpr::Kind;
  DurationConstraint c{DurationExpr::apply(K::sum, {DurationExpr::duration_of("a"), DurationExpr::duration_of("b")}),
                       Relation::le, DurationExpr::duration_of(""), {}};
  EXPECT_FALSE(check_durations({c}, {{"a", 2}, {"b", 3}, {"", 5}}));
  auto e = check_durations({c}, {{"a", 2}, {"b", 4}, {"", 5}});
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, ErrorKind::DurationViolation);
  e = check_durations({c}, {{"a", 2}, {"", 5}});
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, ErrorKind::UnmappedDuration);
}

namespace {

// p true during [2, 5): added at 2, deleted at 5
Timeline p_window() {
  auto p = atom("p");
  auto add = instant("on", snap(Formula::truth(), {p}));
  auto del = instant("off", snap(Formula::truth(), {}, {p}));
  auto tick = instant("tick", snap(Formula::truth()));
  TemporalPlan plan{{entry("0", tick, 0), entry("1", add, 2), entry("2", tick, 3), entry("3", del, 5),
                     entry("4", tick, 7)}};
  auto r = simulate(plan, {});
  EXPECT_TRUE(r.ok());
  return r.timeline;
}

Obligation window(bool open, Obligation::StateAt st) {
  Obligation o;
  o.from = {Obligation::Pick::latest, {TimePoint::start_of("x")}};
  o.to = {Obligation::Pick::earliest, {TimePoint::end_of("x")}};
  o.open = open;
  o.state = st;
  o.condition = lit("p");
  o.origin = "test";
  return o;
}

}  // namespace

TEST(TemporalConstraints, SingleEventPreAndPostState) {
  auto tl = p_window();
  Obligation at2;
  at2.from = at2.to = {Obligation::Pick::earliest, {TimePoint::start_of("x")}};
  at2.condition = lit("p");
  at2.origin = "at";
  PointDates d{{TimePoint::start_of("x"), 2}};
  at2.state = Obligation::StateAt::post;
  EXPECT_FALSE(check_temporal_constraints(tl, {at2}, d, no_objects()));
  at2.state = Obligation::StateAt::pre;
  auto e = check_temporal_constraints(tl, {at2}, d, no_objects());
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, ErrorKind::ConstraintViolation);
  EXPECT_EQ(e->date, 2);
}

TEST(TemporalConstraints, AnchorThatIsNotAHappening) {
  auto tl = p_window();
  Obligation o;
  o.from = o.to = {Obligation::Pick::earliest, {TimePoint::start_of("x")}};
  o.condition = lit("p");
  o.origin = "at";
  auto e = check_temporal_constraints(tl, {o}, {{TimePoint::start_of("x"), 4}}, no_objects());
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, ErrorKind::AnchorOutOfScope);
}

TEST(TemporalConstraints, ClosedAndOpenWindows) {
  auto tl = p_window();
  using S = Obligation::StateAt;
  auto dates = [](std::int64_t a, std::int64_t b) {
    return PointDates{{TimePoint::start_of("x"), a}, {TimePoint::end_of("x"), b}};
  };
  // post-states at 2 and 3 have p; at 5 it is gone
  EXPECT_FALSE(check_temporal_constraints(tl, {window(false, S::post)}, dates(2, 3), no_objects()));
  EXPECT_TRUE(check_temporal_constraints(tl, {window(false, S::post)}, dates(2, 5), no_objects()));
  // open window (2, 5) only sees 3; pre-state at 3 has p
  EXPECT_FALSE(check_temporal_constraints(tl, {window(true, S::pre)}, dates(2, 5), no_objects()));
  // closed pre window would include 2, where p is not yet true
  EXPECT_TRUE(check_temporal_constraints(tl, {window(false, S::pre)}, dates(2, 5), no_objects()));
  // window with no happening inside is vacuous
  EXPECT_FALSE(check_temporal_constraints(tl, {window(true, S::post)}, dates(5, 7), no_objects()));
}

TEST(TemporalConstraints, EarliestAndLatestPicks) {
  auto tl = p_window();
  Obligation o;
  o.from = {Obligation::Pick::latest, {TimePoint::end_of("a"), TimePoint::end_of("b")}};
  o.to = o.from;
  o.condition = lit("p");
  o.origin = "after";
  PointDates d{{TimePoint::end_of("a"), 0}, {TimePoint::end_of("b"), 3}};
  EXPECT_FALSE(check_temporal_constraints(tl, {o}, d, no_objects()));
  o.from.pick = o.to.pick = Obligation::Pick::earliest;
  EXPECT_TRUE(check_temporal_constraints(tl, {o}, d, no_objects()));
  d.erase(TimePoint::end_of("b"));
  auto e = check_temporal_constraints(tl, {o}, d, no_objects());
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, ErrorKind::UnmappedTimePoint);
}

TEST(GoalCheck, FinalStateAndExistentialClosure) {
  auto tl = p_window();
  EXPECT_FALSE(goal_check(tl, std::nullopt, no_objects()));
  EXPECT_FALSE(goal_check(tl, Formula::negate(lit("p")), no_objects()));
  auto e = goal_check(tl, lit("p"), no_objects());
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, ErrorKind::GoalNotReached);
  EXPECT_EQ(e->date, 7);
  ObjectPool pool;
  pool.add("a");
  Timeline t2;
  t2.initial = {atom("at", {"a"})};
  Atom v;
  v.predicate = "at";
  v.args = {Term::variable("x")};
  EXPECT_FALSE(goal_check(t2, Formula::of(v), pool));
}
