#include <gtest/gtest.h>

#include <random>

#include "hddl/decomposition.hpp"
#include "hddl/validator.hpp"
#include "support.hpp"

using namespace hddl;

namespace {

struct Fixture {
  testing_support::Loaded l;
  GroundModel gm;
  explicit Fixture(const std::string& name)
      : l(testing_support::load(testing_support::instance(name))), gm(ground_problem(l.domain, l.problem)) {}
  std::function<bool(const Task&)> compound() const {
    return [this](const Task& t) { return gm.is_compound(t); };
  }
};

Task task(const std::string& name, std::vector<std::string> args) {
  Task t{name, {}, {}};
  for (auto& a : args) t.args.push_back(Term::constant(std::move(a)));
  return t;
}

const GroundMethod& method(const GroundModel& gm, const std::string& name, const Task& t) {
  auto* m = gm.find_method(name, t);
  if (!m) throw std::runtime_error("no ground method " + name + " for " + t.str());
  return *m;
}

const GroundMethod& method(const GroundModel& gm, const std::string& name, const std::vector<std::string>& args,
                           const Task& t) {
  for (const auto* m : gm.methods_for(t))
    if (m->name == name && m->args == args) return *m;
  throw std::runtime_error("no ground method " + name + " for " + t.str());
}

bool has(const std::vector<OrderingConstraint>& co, const TimePoint& l, Relation r, const TimePoint& rt) {
  return std::any_of(co.begin(), co.end(), [&](const OrderingConstraint& c) {
    return c.left == l && c.rel == r && c.right == rt;
  });
}

}  // namespace

TEST(Decompose, ReplacesTargetAndAddsContainment) {
  Fixture f("transport/p1");
  const auto& w0 = f.gm.initial_networks.at(0);
  const auto& m = method(f.gm, "m-deliver-fetch", {"p1", "l2", "l3", "t1"}, task("deliver", {"p1", "l3"}));
  auto ren = hierarchical_renaming(m, "d1");
  EXPECT_EQ(ren.at("g1"), "d1.1");
  EXPECT_EQ(ren.at("u"), "d1.4");
  auto w1 = decompose(w0, {"d1", m, ren});
  EXPECT_EQ(w1.ids, (std::vector<std::string>{"d1.1", "d1.2", "d1.3", "d1.4"}));
  EXPECT_EQ(w1.alpha.at("d1.2").str(), "(load p1 t1 l2)");
  // the decomposed id keeps its task so its points stay addressable
  EXPECT_TRUE(w1.alpha.count("d1"));
  for (const auto& j : w1.ids) {
    EXPECT_TRUE(has(w1.co, TimePoint::start_of("d1"), Relation::le, TimePoint::start_of(j))) << j;
    EXPECT_TRUE(has(w1.co, TimePoint::end_of(j), Relation::le, TimePoint::end_of("d1"))) << j;
  }
  // ordered subtasks become end <= start chains
  EXPECT_TRUE(has(w1.co, TimePoint::end_of("d1.1"), Relation::le, TimePoint::start_of("d1.2")));
  for (const auto& c : w1.ct) EXPECT_EQ(c.owner, "d1");
}

TEST(Decompose, RejectsWrongTaskAndStaleTarget) {
  Fixture f("transport/p1");
  const auto& w0 = f.gm.initial_networks.at(0);
  const auto& drive = method(f.gm, "m-drive", task("get-to", {"t1", "l2"}));
  try {
    decompose(w0, {"d1", drive, hierarchical_renaming(drive, "d1")});
    FAIL();
  } catch (const ValidationFailure& e) {
    EXPECT_EQ(e.error.kind, ErrorKind::TaskMismatch);
  }
  const auto& m = method(f.gm, "m-deliver-fetch", task("deliver", {"p1", "l3"}));
  auto w1 = decompose(w0, {"d1", m, hierarchical_renaming(m, "d1")});
  try {
    decompose(w1, {"d1", m, hierarchical_renaming(m, "d1")});
    FAIL();
  } catch (const ValidationFailure& e) {
    EXPECT_EQ(e.error.kind, ErrorKind::TaskMismatch);
  }
}

TEST(Decompose, FreshIdsMustNotCollide) {
  Fixture f("transport/p1");
  const auto& w0 = f.gm.initial_networks.at(0);
  const auto& m = method(f.gm, "m-deliver-fetch", task("deliver", {"p1", "l3"}));
  auto ren = hierarchical_renaming(m, "d1");
  ren["g2"] = ren["g1"];
  try {
    decompose(w0, {"d1", m, ren});
    FAIL();
  } catch (const ValidationFailure& e) {
    EXPECT_EQ(e.error.kind, ErrorKind::IdentifierCollision);
  }
  ren = hierarchical_renaming(m, "d1");
  ren["u"] = "d1";
  EXPECT_THROW(decompose(w0, {"d1", m, ren}), ValidationFailure);
}

TEST(ReplayTrace, ResidueOnlyWhenPrimitiveRequired) {
  Fixture f("transport/p1");
  const auto& w0 = f.gm.initial_networks.at(0);
  const auto& m = method(f.gm, "m-deliver-fetch", task("deliver", {"p1", "l3"}));
  std::vector<DecompositionStep> trace{{"d1", m, hierarchical_renaming(m, "d1")}};
  try {
    replay_trace(w0, trace, f.compound());
    FAIL();
  } catch (const ValidationFailure& e) {
    EXPECT_EQ(e.error.kind, ErrorKind::NonPrimitiveResidue);
  }
  auto r = replay_trace(w0, trace, f.compound(), false);
  EXPECT_EQ(r.aux.order, (std::vector<std::string>{"d1"}));
  EXPECT_EQ(decomposition_depth({"d1"}, r.aux), 1);
}

TEST(ReplayTrace, ErrorNamesTheStep) {
  Fixture f("transport/p1");
  const auto& w0 = f.gm.initial_networks.at(0);
  const auto& m = method(f.gm, "m-deliver-fetch", task("deliver", {"p1", "l3"}));
  std::vector<DecompositionStep> trace{{"d1", m, hierarchical_renaming(m, "d1")}, {"d1", m, hierarchical_renaming(m, "x")}};
  try {
    replay_trace(w0, trace, f.compound());
    FAIL();
  } catch (const ValidationFailure& e) {
    EXPECT_NE(e.error.message.find("step 2"), std::string::npos) << e.error.message;
  }
}

TEST(BindPlan, GoldenTransportDatesAuxiliaryPoints) {
  Fixture f("transport/p1");
  auto rh = resolve_hierarchy(*f.l.plan, f.gm);
  EXPECT_EQ(rh.roots, (std::vector<std::string>{"d1"}));
  auto bp = bind_plan_to_network(rh.replay.network, rh.roots, *f.l.plan, rh.replay.aux, f.gm);
  EXPECT_EQ(bp.dates.at(TimePoint::start_of("d1")), 0);
  EXPECT_EQ(bp.dates.at(TimePoint::end_of("d1")), 12);
  EXPECT_EQ(bp.dates.at(TimePoint::start_of("g2")), 6);
  EXPECT_EQ(bp.dates.at(TimePoint::end_of("g2")), 10);
  EXPECT_EQ(bp.durations.at(""), 12);
  EXPECT_EQ(bp.plan.entries.size(), 4u);
  EXPECT_TRUE(bp.undatable.empty());
  EXPECT_EQ(decomposition_depth(rh.roots, rh.replay.aux), 2);
}

TEST(BindPlan, MismatchedLines) {
  Fixture f("transport/p1");
  auto rh = resolve_hierarchy(*f.l.plan, f.gm);
  auto expect_kind = [&](PlanDocument doc, ErrorKind k) {
    try {
      bind_plan_to_network(rh.replay.network, rh.roots, doc, rh.replay.aux, f.gm);
      ADD_FAILURE() << "no error";
    } catch (const ValidationFailure& e) {
      EXPECT_EQ(e.error.kind, k) << e.error.str();
    }
  };
  auto doc = *f.l.plan;
  doc.actions[1].task = task("load", {"p1", "t1", "l1"});
  expect_kind(doc, ErrorKind::TaskNameMismatch);
  doc = *f.l.plan;
  doc.actions[1].duration = 2;
  expect_kind(doc, ErrorKind::DurationViolation);
  doc = *f.l.plan;
  doc.actions.erase(doc.actions.begin() + 2);
  expect_kind(doc, ErrorKind::MissingTimedEntry);
  doc = *f.l.plan;
  doc.actions.push_back({"extra", 3, task("drive", {"t1", "l2", "l1"}), 4, {}});
  expect_kind(doc, ErrorKind::MissingTimedEntry);
}

TEST(BindPlan, EmptyMethodLeavesPointsUndatable) {
  AuxiliaryPoints aux;
  aux.order = {"a", "b"};
  aux.children["a"] = {"b", "x"};
  aux.children["b"] = {};
  BoundPlan bp;
  bp.dates[TimePoint::start_of("x")] = 3;
  bp.dates[TimePoint::end_of("x")] = 5;
  date_auxiliary_points({"a"}, aux, bp);
  EXPECT_EQ(bp.undatable, (std::set<std::string>{"b"}));
  EXPECT_EQ(bp.dates.at(TimePoint::start_of("a")), 3);
  EXPECT_EQ(bp.dates.at(TimePoint::end_of("")), 5);
  OrderingConstraint c{TimePoint::end_of("b"), Relation::lt, TimePoint::start_of("x"), {}};
  EXPECT_TRUE(mentions_any(c, bp.undatable));
}

// Random complete decompositions of transport/p2 with hierarchical ids.
TEST(Properties, RandomDecompositionsKeepNetworkInvariants) {
  Fixture f("transport/p2");
  std::mt19937 rng(5);
  int complete = 0;
  for (int run = 0; run < 200; ++run) {
    TaskNetwork w = f.gm.initial_networks.at(0);
    auto roots = w.ids;
    AuxiliaryPoints aux;
    bool stuck = false;
    for (int guard = 0; guard < 50 && !stuck; ++guard) {
      std::vector<std::string> open;
      for (const auto& id : w.ids)
        if (f.gm.is_compound(w.alpha.at(id))) open.push_back(id);
      if (open.empty()) break;
      const auto& target = open[rng() % open.size()];
      auto ms = f.gm.methods_for(w.alpha.at(target));
      if (ms.empty()) {
        stuck = true;
        break;
      }
      const auto& m = *ms[rng() % ms.size()];
      auto ren = hierarchical_renaming(m, target);
      auto next = decompose(w, {target, m, ren});
      ASSERT_EQ(next.ids.size(), w.ids.size() - 1 + m.network.ids.size());
      ASSERT_EQ(next.co.size(), w.co.size() + m.network.co.size() + 2 * m.network.ids.size());
      ASSERT_EQ(std::set<std::string>(next.ids.begin(), next.ids.end()).size(), next.ids.size());
      ASSERT_TRUE(std::find(next.ids.begin(), next.ids.end(), target) == next.ids.end());
      // constraint stores only grow
      ASSERT_TRUE(std::equal(w.co.begin(), w.co.end(), next.co.begin()));
      ASSERT_GE(next.ct.size(), w.ct.size());
      for (const auto& [id, kid] : ren) {
        ASSERT_EQ(kid.rfind(target + ".", 0), 0u);
        ASSERT_TRUE(has(next.co, TimePoint::start_of(target), Relation::le, TimePoint::start_of(kid)));
      }
      aux.order.push_back(target);
      for (const auto& id : m.network.ids) aux.children[target].push_back(ren.at(id));
      w = std::move(next);
    }
    if (stuck) continue;
    ++complete;
    ASSERT_FALSE(find_residue(w, f.compound()));
    // auxiliary dates equal min/max over primitive descendants
    BoundPlan bp;
    std::map<std::string, std::int64_t> start;
    for (const auto& id : w.ids) {
      start[id] = static_cast<std::int64_t>(rng() % 20);
      bp.dates[TimePoint::start_of(id)] = start[id];
      bp.dates[TimePoint::end_of(id)] = start[id] + 1;
    }
    date_auxiliary_points(roots, aux, bp);
    for (const auto& parent : aux.order) {
      std::int64_t lo = 1 << 30, hi = -1;
      for (const auto& id : w.ids)
        if (id.rfind(parent + ".", 0) == 0) {
          lo = std::min(lo, start[id]);
          hi = std::max(hi, start[id] + 1);
        }
      ASSERT_EQ(bp.dates.at(TimePoint::start_of(parent)), lo) << parent;
      ASSERT_EQ(bp.dates.at(TimePoint::end_of(parent)), hi) << parent;
    }
  }
  EXPECT_GT(complete, 100);
}

TEST(Properties, GoldenTracesYieldExactlyThePlanLines) {
  for (const auto& ci : testing_support::corpus_instances()) {
    if (!ci.plan) continue;
    auto l = testing_support::load(ci);
    auto gm = ground_problem(l.domain, l.problem);
    auto rh = resolve_hierarchy(*l.plan, gm);
    std::set<std::string> net(rh.replay.network.ids.begin(), rh.replay.network.ids.end()), lines;
    for (const auto& a : l.plan->actions) lines.insert(a.id);
    EXPECT_EQ(net, lines) << ci.name;
  }
}
