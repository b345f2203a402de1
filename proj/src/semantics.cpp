#include "hddl/semantics.hpp"

#include <algorithm>
#include <set>

namespace hddl {

std::string_view kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::PreconditionFailure: return "PreconditionFailure";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::Interference: return "Interference";
    case ErrorKind::NonPrimitiveTask: return "NonPrimitiveTask";
    case ErrorKind::OrderingViolation: return "OrderingViolation";
    case ErrorKind::DurationViolation: return "DurationViolation";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::GoalNotReached: return "GoalNotReached";
    case ErrorKind::UnmappedTimePoint: return "UnmappedTimePoint";
    case ErrorKind::UnmappedDuration: return "UnmappedDuration";
    case ErrorKind::AnchorOutOfScope: return "AnchorOutOfScope";
    case ErrorKind::TaskMismatch: return "TaskMismatch";
    case ErrorKind::MethodMismatch: return "MethodMismatch";
    case ErrorKind::IdentifierCollision: return "IdentifierCollision";
    case ErrorKind::NonPrimitiveResidue: return "NonPrimitiveResidue";
    case ErrorKind::MissingTimedEntry: return "MissingTimedEntry";
    case ErrorKind::TaskNameMismatch: return "TaskNameMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ModelError: return "ModelError";
    case ErrorKind::GroundingError: return "GroundingError";
  }
  return "?";
}

std::string ExecutionError::str() const {
  std::string out(kind_name(kind));
  if (date) out += " at " + std::to_string(*date);
  out += ": " + message;
  return out;
}

std::int64_t TemporalPlan::makespan() const {
  std::int64_t m = 0;
  for (const auto& e : entries) m = std::max(m, e.date + e.duration);
  return m;
}

std::vector<std::int64_t> happening_events(const TemporalPlan& plan) {
  std::set<std::int64_t> dates;
  for (const auto& e : plan.entries) {
    dates.insert(e.date);
    dates.insert(e.date + e.duration);
  }
  return {dates.begin(), dates.end()};
}

std::vector<Happening> happening_schedule(const TemporalPlan& plan) {
  std::vector<Happening> out;
  for (auto d : happening_events(plan)) {
    Happening h;
    h.date = d;
    for (std::size_t i = 0; i < plan.entries.size(); ++i) {
      const auto& e = plan.entries[i];
      const bool durative = e.action && e.action->durative;
      if (e.date == d) h.snaps.push_back({i, false});
      if (durative && e.date + e.duration == d) h.snaps.push_back({i, true});
      if (durative && e.date < d && d < e.date + e.duration) h.invariants.push_back(i);
    }
    out.push_back(std::move(h));
  }
  return out;
}

const SnapAction& snap_of(const TemporalPlan& plan, const SnapRef& r) {
  const auto& a = *plan.entries[r.entry].action;
  return r.is_end ? a.end : a.start;
}

namespace {

bool intersects(const std::vector<Atom>& a, const std::vector<Atom>& b) {
  for (const auto& x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  return false;
}

bool mentions_effect_of(const SnapAction& a, const SnapAction& b) {
  auto atoms = atoms_of(a.precond);
  return intersects(atoms, b.add) || intersects(atoms, b.del);
}

std::string snap_label(const TemporalPlan& plan, const SnapRef& r) {
  const auto& e = plan.entries[r.entry];
  std::string label = e.id + ":" + e.task.str();
  if (e.action && e.action->durative) label = (r.is_end ? "end " : "start ") + label;
  return label;
}

}  // namespace

bool interferes(const SnapAction& a, const SnapAction& b) {
  return mentions_effect_of(a, b) || mentions_effect_of(b, a) || intersects(a.add, b.del) || intersects(b.add, a.del);
}

std::optional<std::size_t> Timeline::step_at(std::int64_t date) const {
  auto it = std::lower_bound(steps.begin(), steps.end(), date,
                             [](const TimelineStep& s, std::int64_t d) { return s.date < d; });
  if (it == steps.end() || it->date != date) return std::nullopt;
  return static_cast<std::size_t>(it - steps.begin());
}

SimulationResult simulate(const TemporalPlan& plan, const State& s0) {
  SimulationResult r;
  r.timeline.initial = s0;
  for (const auto& e : plan.entries) {
    if (!e.action) {
      r.error = ExecutionError{ErrorKind::NonPrimitiveTask, e.date, {e.id, e.task.str()}, "",
                               "task " + e.task.str() + " (" + e.id + ") is not primitive"};
      return r;
    }
  }
  State s = s0;
  for (const auto& h : happening_schedule(plan)) {
    TimelineStep step;
    step.date = h.date;
    step.pre = s;
    for (const auto& ref : h.snaps) step.snaps.push_back(snap_label(plan, ref));
    for (auto i : h.invariants) step.invariants.push_back(plan.entries[i].id + ":" + plan.entries[i].task.str());
    auto fail = [&](ErrorKind k, std::vector<std::string> items, std::string formula, std::string msg) {
      step.post = step.pre;
      r.timeline.steps.push_back(std::move(step));
      r.error = ExecutionError{k, h.date, std::move(items), std::move(formula), std::move(msg)};
      return r;
    };

    for (std::size_t i = 0; i < h.snaps.size(); ++i)
      for (std::size_t j = i + 1; j < h.snaps.size(); ++j)
        if (interferes(snap_of(plan, h.snaps[i]), snap_of(plan, h.snaps[j]))) {
          auto a = snap_label(plan, h.snaps[i]), b = snap_label(plan, h.snaps[j]);
          return fail(ErrorKind::Interference, {a, b}, "", a + " interferes with " + b);
        }
    for (const auto& ref : h.snaps) {
      const auto& snap = snap_of(plan, ref);
      if (!evaluate(s, snap.precond)) {
        auto label = snap_label(plan, ref);
        return fail(ErrorKind::PreconditionFailure, {label}, snap.precond.str(),
                    "precondition of " + label + " does not hold: " + snap.precond.str());
      }
    }
    for (auto i : h.invariants) {
      const auto& inv = plan.entries[i].action->invariant;
      if (!evaluate(s, inv)) {
        auto label = plan.entries[i].id + ":" + plan.entries[i].task.str();
        return fail(ErrorKind::InvariantViolation, {label}, inv.str(),
                    "invariant of " + label + " does not hold: " + inv.str());
      }
    }
    State next = s;
    for (const auto& ref : h.snaps)
      for (const auto& a : snap_of(plan, ref).del) next.erase(a);
    for (const auto& ref : h.snaps)
      for (const auto& a : snap_of(plan, ref).add) next.insert(a);
    s = std::move(next);
    step.post = s;
    r.timeline.steps.push_back(std::move(step));
  }
  return r;
}

std::optional<ExecutionError> check_ordering(const std::vector<OrderingConstraint>& co, const PointDates& dates) {
  for (const auto& c : co) {
    auto l = dates.find(c.left), r = dates.find(c.right);
    if (l == dates.end() || r == dates.end()) {
      const auto& missing = l == dates.end() ? c.left : c.right;
      return ExecutionError{ErrorKind::UnmappedTimePoint, std::nullopt, {c.str(), missing.str()}, "",
                            "time point " + missing.str() + " of " + c.str() + " has no date"};
    }
    if (!compare(c.rel, l->second, r->second))
      return ExecutionError{ErrorKind::OrderingViolation, r->second, {c.str()}, "",
                            "ordering " + c.str() + " violated: " + std::to_string(l->second) + " " +
                                std::string(symbol(c.rel)) + " " + std::to_string(r->second) + " is false"};
  }
  return std::nullopt;
}

std::optional<ExecutionError> check_durations(const std::vector<DurationConstraint>& cd, const Durations& durations) {
  for (const auto& c : cd) {
    std::string missing;
    auto lookup = [&](const std::string& id) -> std::optional<std::int64_t> {
      auto it = durations.find(id);
      if (it == durations.end()) {
        missing = id;
        return std::nullopt;
      }
      return it->second;
    };
    auto l = c.lhs.evaluate(lookup);
    auto r = c.rhs.evaluate(lookup);
    if (!l || !r)
      return ExecutionError{ErrorKind::UnmappedDuration, std::nullopt, {c.str(), missing}, "",
                            "duration of '" + missing + "' in " + c.str() + " is unknown"};
    if (!compare(c.rel, *l, *r))
      return ExecutionError{ErrorKind::DurationViolation, std::nullopt, {c.str()}, "",
                            "duration constraint " + c.str() + " violated: " + std::to_string(*l) + " " +
                                std::string(symbol(c.rel)) + " " + std::to_string(*r) + " is false"};
  }
  return std::nullopt;
}

namespace {

std::optional<std::int64_t> resolve(const Obligation::EventRef& ref, const PointDates& dates, std::string& missing) {
  std::optional<std::int64_t> out;
  for (const auto& p : ref.points) {
    auto it = dates.find(p);
    if (it == dates.end()) {
      missing = p.str();
      return std::nullopt;
    }
    if (!out) out = it->second;
    else out = ref.pick == Obligation::Pick::earliest ? std::min(*out, it->second) : std::max(*out, it->second);
  }
  return out;
}

}  // namespace

std::optional<ExecutionError> check_temporal_constraints(const Timeline& tl, const std::vector<Obligation>& obligations,
                                                         const PointDates& dates, const ObjectPool& pool) {
  for (const auto& o : obligations) {
    std::string missing;
    auto from = resolve(o.from, dates, missing);
    auto to = from ? resolve(o.to, dates, missing) : std::nullopt;
    if (!from || !to)
      return ExecutionError{ErrorKind::UnmappedTimePoint, std::nullopt, {o.origin, missing}, o.condition.str(),
                            "time point " + missing + " of " + o.origin + " has no date"};
    auto state_of = [&](const TimelineStep& s) -> const State& { return o.state == Obligation::StateAt::pre ? s.pre : s.post; };
    auto violated = [&](std::int64_t date) {
      return ExecutionError{ErrorKind::ConstraintViolation, date, {o.origin}, o.condition.str(),
                            "constraint " + o.origin + " does not hold at " + std::to_string(date) + ": " +
                                o.condition.str()};
    };
    if (o.single_event()) {
      auto idx = tl.step_at(*from);
      if (!idx)
        return ExecutionError{ErrorKind::AnchorOutOfScope, *from, {o.origin}, o.condition.str(),
                              "anchor date " + std::to_string(*from) + " of " + o.origin + " is not a happening"};
      if (!holds(state_of(tl.steps[*idx]), o.condition, pool)) return violated(*from);
      continue;
    }
    for (const auto& s : tl.steps) {
      bool inside = o.open ? (*from < s.date && s.date < *to) : (*from <= s.date && s.date <= *to);
      if (inside && !holds(state_of(s), o.condition, pool)) return violated(s.date);
    }
  }
  return std::nullopt;
}

std::optional<ExecutionError> goal_check(const Timeline& tl, const std::optional<Formula>& goal, const ObjectPool& pool) {
  if (!goal) return std::nullopt;
  if (holds(tl.final_state(), *goal, pool)) return std::nullopt;
  std::optional<std::int64_t> date;
  if (!tl.steps.empty()) date = tl.steps.back().date;
  return ExecutionError{ErrorKind::GoalNotReached, date, {}, goal->str(), "goal " + goal->str() + " is not satisfied"};
}

}  // namespace hddl
