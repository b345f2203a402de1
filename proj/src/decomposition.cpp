#include "hddl/decomposition.hpp"

#include <algorithm>

namespace hddl {

namespace {

[[noreturn]] void raise(ErrorKind k, std::vector<std::string> items, std::string msg) {
  throw ValidationFailure(ExecutionError{k, std::nullopt, std::move(items), "", std::move(msg)});
}

struct Renamer {
  const std::map<std::string, std::string>& map;
  const std::string& target;

  std::string id(const std::string& i) const {
    if (i.empty()) return target;
    auto it = map.find(i);
    return it == map.end() ? i : it->second;
  }
  TimePoint point(const TimePoint& p) const { return {p.side, id(p.id)}; }
  DurationExpr duration(DurationExpr e) const {
    if (e.kind == DurationExpr::Kind::duration_of) e.id = id(e.id);
    for (auto& o : e.operands) o = duration(std::move(o));
    return e;
  }
  std::vector<std::string> ids(std::vector<std::string> v) const {
    for (auto& i : v) i = id(i);
    return v;
  }
};

}  // namespace

std::map<std::string, std::string> hierarchical_renaming(const GroundMethod& m, const std::string& target) {
  std::map<std::string, std::string> out;
  for (std::size_t k = 0; k < m.network.ids.size(); ++k) out[m.network.ids[k]] = target + "." + std::to_string(k + 1);
  return out;
}

TaskNetwork decompose(const TaskNetwork& w, const DecompositionStep& step) {
  const auto& target = step.target;
  auto pos = std::find(w.ids.begin(), w.ids.end(), target);
  if (pos == w.ids.end())
    raise(ErrorKind::TaskMismatch, {target},
          w.alpha.count(target) ? "task '" + target + "' was already decomposed" : "no task '" + target + "' in the network");
  const Task& t = w.alpha.at(target);
  if (!(t.name == step.method.task.name && t.args == step.method.task.args))
    raise(ErrorKind::TaskMismatch, {target, step.method.str()},
          "method " + step.method.str() + " refines " + step.method.task.str() + ", but task '" + target + "' is " + t.str());

  const auto& mw = step.method.network;
  std::set<std::string> fresh;
  for (const auto& id : mw.ids) {
    auto it = step.renaming.find(id);
    if (it == step.renaming.end())
      raise(ErrorKind::MethodMismatch, {target, id}, "subtask '" + id + "' of " + step.method.str() + " is not renamed");
    const auto& f = it->second;
    if (f.empty() || w.alpha.count(f) || !fresh.insert(f).second)
      raise(ErrorKind::IdentifierCollision, {target, f}, "identifier '" + f + "' is not fresh");
  }

  Renamer rn{step.renaming, target};
  TaskNetwork out = w;
  std::vector<std::string> children;
  for (const auto& id : mw.ids) children.push_back(rn.id(id));
  pos = out.ids.begin() + (pos - w.ids.begin());
  pos = out.ids.erase(pos);
  out.ids.insert(pos, children.begin(), children.end());
  for (const auto& id : mw.ids) out.alpha.emplace(rn.id(id), mw.alpha.at(id));

  for (const auto& c : mw.co) out.co.push_back({rn.point(c.left), c.rel, rn.point(c.right), c.span});
  for (const auto& j : children) {
    out.co.push_back({TimePoint::start_of(target), Relation::le, TimePoint::start_of(j), {}});
    out.co.push_back({TimePoint::end_of(j), Relation::le, TimePoint::end_of(target), {}});
  }
  out.cv.insert(out.cv.end(), mw.cv.begin(), mw.cv.end());
  for (const auto& c : mw.cd) out.cd.push_back({rn.duration(c.lhs), c.rel, rn.duration(c.rhs), c.span});
  for (const auto& c : mw.ct) {
    DecompositionConstraint r = c;
    if (!r.point.id.empty() || r.form == DecompositionConstraint::Form::at) r.point.id = rn.id(r.point.id);
    r.first = rn.ids(r.first);
    r.second = rn.ids(r.second);
    r.owner = target;
    out.ct.push_back(std::move(r));
  }
  return out;
}

std::optional<ExecutionError> find_residue(const TaskNetwork& w, const std::function<bool(const Task&)>& is_compound) {
  for (const auto& id : w.ids) {
    const Task& t = w.alpha.at(id);
    if (is_compound(t))
      return ExecutionError{ErrorKind::NonPrimitiveResidue, std::nullopt, {id, t.str()}, "",
                            "compound task " + t.str() + " (" + id + ") is never decomposed"};
  }
  return std::nullopt;
}

ReplayResult replay_trace(const TaskNetwork& w0, const std::vector<DecompositionStep>& trace,
                          const std::function<bool(const Task&)>& is_compound, bool require_primitive) {
  ReplayResult r{w0, {}};
  for (std::size_t k = 0; k < trace.size(); ++k) {
    try {
      r.network = decompose(r.network, trace[k]);
    } catch (ValidationFailure& f) {
      f.error.message = "step " + std::to_string(k + 1) + ": " + f.error.message;
      throw ValidationFailure(f.error);
    }
    const auto& step = trace[k];
    r.aux.order.push_back(step.target);
    auto& kids = r.aux.children[step.target];
    for (const auto& id : step.method.network.ids) kids.push_back(step.renaming.at(id));
  }
  if (require_primitive)
    if (auto e = find_residue(r.network, is_compound)) throw ValidationFailure(*e);
  return r;
}

void date_auxiliary_points(const std::vector<std::string>& root_ids, const AuxiliaryPoints& aux, BoundPlan& bp) {
  auto date_parent = [&](const std::string& parent, const std::vector<std::string>& kids) {
    std::optional<std::int64_t> lo, hi;
    for (const auto& k : kids) {
      auto s = bp.dates.find(TimePoint::start_of(k));
      auto e = bp.dates.find(TimePoint::end_of(k));
      if (s == bp.dates.end() || e == bp.dates.end()) continue;
      lo = lo ? std::min(*lo, s->second) : s->second;
      hi = hi ? std::max(*hi, e->second) : e->second;
    }
    if (!lo) {
      bp.undatable.insert(parent);
      return;
    }
    bp.dates[TimePoint::start_of(parent)] = *lo;
    bp.dates[TimePoint::end_of(parent)] = *hi;
    bp.durations[parent] = *hi - *lo;
  };
  for (auto it = aux.order.rbegin(); it != aux.order.rend(); ++it) date_parent(*it, aux.children.at(*it));
  date_parent("", root_ids);
}

BoundPlan bind_plan_to_network(const TaskNetwork& w, const std::vector<std::string>& root_ids, const PlanDocument& doc,
                               const AuxiliaryPoints& aux, const GroundModel& gm) {
  BoundPlan bp;
  std::set<std::string> live(w.ids.begin(), w.ids.end());
  for (const auto& a : doc.actions)
    if (!live.count(a.id))
      raise(ErrorKind::MissingTimedEntry, {a.id},
            "plan line '" + a.id + "' " + a.task.str() + " is not a primitive task of the decomposed network");
  for (const auto& id : w.ids) {
    const Task& t = w.alpha.at(id);
    const PlanAction* pa = doc.action(id);
    if (!pa) raise(ErrorKind::MissingTimedEntry, {id, t.str()}, "task " + t.str() + " (" + id + ") has no timed plan line");
    if (!(pa->task.name == t.name && pa->task.args == t.args))
      raise(ErrorKind::TaskNameMismatch, {id, t.str(), pa->task.str()},
            "plan line '" + id + "' executes " + pa->task.str() + " but the network expects " + t.str());
    const GroundAction* ga = gm.find_action(t);
    if (!ga)
      throw ValidationFailure(ExecutionError{ErrorKind::PreconditionFailure, pa->date, {id, t.str()}, "",
                                             "no executable instance of " + t.str() + " exists in the initial state"});
    if (pa->duration != ga->duration)
      throw ValidationFailure(ExecutionError{ErrorKind::DurationViolation, pa->date, {id, t.str()}, "",
                                             "task " + t.str() + " (" + id + ") lasts " + std::to_string(pa->duration) +
                                                 " but its action has duration " + std::to_string(ga->duration)});
    bp.plan.entries.push_back({id, t, pa->date, pa->duration, *ga});
    bp.dates[TimePoint::start_of(id)] = pa->date;
    bp.dates[TimePoint::end_of(id)] = pa->date + pa->duration;
    bp.durations[id] = pa->duration;
  }
  date_auxiliary_points(root_ids, aux, bp);
  return bp;
}

bool mentions_any(const OrderingConstraint& c, const std::set<std::string>& ids) {
  return ids.count(c.left.id) || ids.count(c.right.id);
}

bool mentions_any(const DurationConstraint& c, const std::set<std::string>& ids) {
  std::vector<std::string> refs;
  c.lhs.referenced_ids(refs);
  c.rhs.referenced_ids(refs);
  return std::any_of(refs.begin(), refs.end(), [&](const std::string& r) { return ids.count(r) != 0; });
}

bool mentions_any(const Obligation& o, const std::set<std::string>& ids) {
  for (const auto* ref : {&o.from, &o.to})
    for (const auto& p : ref->points)
      if (ids.count(p.id)) return true;
  return false;
}

int decomposition_depth(const std::vector<std::string>& root_ids, const AuxiliaryPoints& aux) {
  auto rec = [&](auto&& self, const std::string& id) -> int {
    auto it = aux.children.find(id);
    if (it == aux.children.end()) return 0;
    int d = 0;
    for (const auto& k : it->second) d = std::max(d, self(self, k));
    return d + 1;
  };
  int depth = 0;
  for (const auto& r : root_ids) depth = std::max(depth, rec(rec, r));
  return depth;
}

}  // namespace hddl
