#include "hddl/validator.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace hddl {

namespace {

[[noreturn]] void raise(ErrorKind k, std::vector<std::string> items, std::string msg) {
  throw ValidationFailure(ExecutionError{k, std::nullopt, std::move(items), "", std::move(msg)});
}

bool same_task(const Task& a, const Task& b) { return a.name == b.name && a.args == b.args; }

// Whether plan entity `id` is compatible with the expected task.
bool entity_matches(const PlanDocument& doc, const std::string& id, const Task& expected) {
  if (const auto* a = doc.action(id)) return same_task(a->task, expected);
  if (const auto* d = doc.decomposition(id))
    return d->task_args_given ? same_task(d->task, expected) : d->task.name == expected.name;
  return false;
}

std::string entity_task(const PlanDocument& doc, const std::string& id) {
  if (const auto* a = doc.action(id)) return a->task.str();
  if (const auto* d = doc.decomposition(id)) return d->task_args_given ? d->task.str() : "(" + d->task.name + " ...)";
  return "?";
}

const TaskNetwork& choose_initial_network(const PlanDocument& doc, const GroundModel& gm) {
  if (gm.initial_networks.empty())
    raise(ErrorKind::ModelError, {}, "the initial task network has no admissible binding");
  std::set<std::string> roots(doc.roots.begin(), doc.roots.end());
  for (const auto& w : gm.initial_networks) {
    if (std::set<std::string>(w.ids.begin(), w.ids.end()) != roots) continue;
    if (std::all_of(w.ids.begin(), w.ids.end(), [&](const std::string& id) { return entity_matches(doc, id, w.alpha.at(id)); }))
      return w;
  }
  const TaskNetwork& w = gm.initial_networks.front();
  for (const auto& id : w.ids)
    if (!roots.count(id))
      raise(ErrorKind::MissingTimedEntry, {id, w.alpha.at(id).str()},
            "initial task " + w.alpha.at(id).str() + " (" + id + ") is not a root of the plan");
  for (const auto& r : doc.roots)
    if (!w.alpha.count(r))
      raise(ErrorKind::TaskMismatch, {r}, "plan root '" + r + "' is not a task of the initial network");
  for (const auto& id : w.ids)
    if (!entity_matches(doc, id, w.alpha.at(id)))
      raise(ErrorKind::TaskMismatch, {id, w.alpha.at(id).str(), entity_task(doc, id)},
            "plan root '" + id + "' is " + entity_task(doc, id) + " but the initial network has " + w.alpha.at(id).str());
  raise(ErrorKind::TaskMismatch, {}, "no binding of the initial network matches the plan roots");
}

DecompositionStep resolve_step(const TaskNetwork& w, const PlanDecomposition& d, const PlanDocument& doc,
                               const GroundModel& gm) {
  if (std::find(w.ids.begin(), w.ids.end(), d.id) == w.ids.end())
    raise(ErrorKind::TaskMismatch, {d.id},
          w.alpha.count(d.id) ? "task '" + d.id + "' was already decomposed" : "no live task '" + d.id + "' in the network");
  const Task& t = w.alpha.at(d.id);
  if (d.task.name != t.name || (d.task_args_given && d.task.args != t.args))
    raise(ErrorKind::TaskMismatch, {d.id, t.str(), d.task.str()},
          "decomposition of '" + d.id + "' names " + d.task.str() + " but the network has " + t.str());
  if (!gm.is_compound(t))
    raise(ErrorKind::TaskMismatch, {d.id, t.str()}, "task " + t.str() + " is primitive and cannot be decomposed");

  bool named = false;
  for (const auto* m : gm.methods_for(t)) {
    if (m->name != d.method) continue;
    named = true;
    const auto& ids = m->network.ids;
    if (ids.size() != d.children.size()) continue;
    bool ok = true;
    for (std::size_t k = 0; k < ids.size() && ok; ++k) ok = entity_matches(doc, d.children[k], m->network.alpha.at(ids[k]));
    if (!ok) continue;
    DecompositionStep step{d.id, *m, {}};
    for (std::size_t k = 0; k < ids.size(); ++k) step.renaming[ids[k]] = d.children[k];
    return step;
  }
  if (!named) {
    bool exists = std::any_of(gm.methods.begin(), gm.methods.end(), [&](const GroundMethod& m) { return m.name == d.method; });
    if (exists)
      raise(ErrorKind::TaskMismatch, {d.id, d.method, t.str()}, "method '" + d.method + "' does not refine " + t.str());
    raise(ErrorKind::MethodMismatch, {d.id, d.method}, "no applicable instance of method '" + d.method + "' for " + t.str());
  }
  raise(ErrorKind::MethodMismatch, {d.id, d.method},
        "the subtasks of method '" + d.method + "' for " + t.str() + " do not match the children of '" + d.id + "'");
}

}  // namespace

ResolvedHierarchy resolve_hierarchy(const PlanDocument& doc, const GroundModel& gm) {
  const TaskNetwork& w0 = choose_initial_network(doc, gm);
  ResolvedHierarchy out{w0.ids, {w0, {}}};
  for (std::size_t k = 0; k < doc.decompositions.size(); ++k) {
    const auto& d = doc.decompositions[k];
    try {
      DecompositionStep step = resolve_step(out.replay.network, d, doc, gm);
      out.replay.network = decompose(out.replay.network, step);
      out.replay.aux.order.push_back(step.target);
      auto& kids = out.replay.aux.children[step.target];
      for (const auto& id : step.method.network.ids) kids.push_back(step.renaming.at(id));
    } catch (ValidationFailure& f) {
      f.error.message = "step " + std::to_string(k + 1) + ": " + f.error.message;
      throw ValidationFailure(f.error);
    }
  }
  if (auto e = find_residue(out.replay.network, [&](const Task& t) { return gm.is_compound(t); }))
    throw ValidationFailure(*e);
  return out;
}

Verdict validate(const Domain& d, const Problem& p, const GroundModel& gm, const PlanDocument& doc,
                 const ValidateOptions& opts) {
  Verdict v;
  if (p.goal) v.goal = p.goal->str();
  auto finish = [&]() {
    v.valid = v.errors.empty();
    return v;
  };

  std::vector<Diagnostic> diags = validate_model(d, p);
  diags.insert(diags.end(), d.notes.begin(), d.notes.end());
  diags.insert(diags.end(), p.notes.begin(), p.notes.end());
  for (const auto& diag : diags)
    if (diag.is_error()) {
      v.errors.push_back({ErrorKind::ModelError, std::nullopt, {diag.rule}, "", diag.str()});
      if (!opts.audit) return finish();
    }
  if (!v.errors.empty()) return finish();

  BoundPlan bp;
  ResolvedHierarchy h;
  try {
    check_plan_structure(doc);
    h = resolve_hierarchy(doc, gm);
    bp = bind_plan_to_network(h.replay.network, h.roots, doc, h.replay.aux, gm);
  } catch (const ValidationFailure& f) {
    v.errors.push_back(f.error);
    return finish();
  } catch (const hddl::ParseError& e) {
    v.errors.push_back({ErrorKind::ParseError, std::nullopt, {e.rule}, "", e.diagnostic().str()});
    return finish();
  }
  v.stats.depth = decomposition_depth(h.roots, h.replay.aux);
  v.stats.makespan = bp.plan.makespan();

  const TaskNetwork& w = h.replay.network;
  auto sim = simulate(bp.plan, gm.init);
  v.stats.happenings = sim.timeline.steps.size();
  v.timeline = sim.timeline;
  if (sim.error) {
    v.errors.push_back(*sim.error);
    if (!opts.audit) return finish();
  }

  auto record = [&](std::optional<ExecutionError> e) {
    if (!e) return true;
    v.errors.push_back(std::move(*e));
    return opts.audit;
  };
  for (const auto& c : w.co)
    if (!mentions_any(c, bp.undatable) && !record(check_ordering({c}, bp.dates))) return finish();
  for (const auto& c : w.cd)
    if (!mentions_any(c, bp.undatable) && !record(check_durations({c}, bp.durations))) return finish();
  if (sim.error) return finish();

  for (const auto& c : w.ct) {
    std::vector<Obligation> obs;
    try {
      obs = normalize_constraint(c, w);
    } catch (const hddl::ModelError& e) {
      if (!record(ExecutionError{ErrorKind::UnmappedTimePoint, std::nullopt, {c.str()}, "", e.what()})) return finish();
      continue;
    }
    for (const auto& o : obs)
      if (!mentions_any(o, bp.undatable) && !record(check_temporal_constraints(sim.timeline, {o}, bp.dates, gm.pool)))
        return finish();
  }
  record(goal_check(sim.timeline, gm.goal, gm.pool));
  return finish();
}

Verdict validate(const Domain& d, const Problem& p, const PlanDocument& doc, const ValidateOptions& opts) {
  GroundModel gm;
  auto diags = validate_model(d, p);
  bool model_ok = !has_errors(diags) && !has_errors(d.notes) && !has_errors(p.notes);
  if (model_ok) {
    try {
      gm = ground_problem(d, p, {opts.prune_static});
    } catch (const GroundingError& e) {
      Verdict v;
      if (p.goal) v.goal = p.goal->str();
      v.errors.push_back({ErrorKind::GroundingError, std::nullopt, {}, "", e.what()});
      return v;
    } catch (const LogicError& e) {
      Verdict v;
      if (p.goal) v.goal = p.goal->str();
      v.errors.push_back({ErrorKind::GroundingError, std::nullopt, {}, "", e.what()});
      return v;
    }
  }
  return validate(d, p, gm, doc, opts);
}

Verdict validate_text(const std::string& domain, const std::string& problem, const std::string& plan,
                      const ValidateOptions& opts, const std::vector<std::string>& file_names) {
  auto name = [&](std::size_t k, const char* fallback) {
    return k < file_names.size() ? file_names[k] : std::string(fallback);
  };
  try {
    Domain d = parse_domain(domain, name(0, "domain"));
    Problem p = parse_problem(problem, name(1, "problem"));
    PlanDocument doc = parse_plan(plan, name(2, "plan"));
    return validate(d, p, doc, opts);
  } catch (const hddl::ParseError& e) {
    Verdict v;
    v.errors.push_back({ErrorKind::ParseError, std::nullopt, {e.rule}, "", e.diagnostic().str()});
    return v;
  }
}

namespace {

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out;
}

}  // namespace

std::string explain(const Verdict& v) {
  std::ostringstream os;
  if (v.timeline) {
    for (const auto& s : v.timeline->steps) {
      os << "t=" << s.date << ": apply " << (s.snaps.empty() ? "nothing" : join(s.snaps, ", "));
      if (!s.invariants.empty()) os << "; over all " << join(s.invariants, ", ");
      std::vector<std::string> delta;
      for (const auto& a : s.post)
        if (!s.pre.count(a)) delta.push_back("+" + a.str());
      for (const auto& a : s.pre)
        if (!s.post.count(a)) delta.push_back("-" + a.str());
      if (!delta.empty()) os << "; " << join(delta, " ");
      for (const auto& e : v.errors)
        if (e.date && *e.date == s.date) os << "; FAILED " << e.str();
      os << "\n";
    }
  }
  if (!v.valid) {
    os << "INVALID: " << (v.errors.empty() ? std::string("unknown error") : v.errors.front().str());
    if (v.errors.size() > 1) os << " (+" << v.errors.size() - 1 << " more)";
  } else if (v.stats.happenings == 0 && v.goal.empty()) {
    os << "VALID: vacuously valid (empty plan, no goal)";
  } else if (v.goal.empty()) {
    os << "VALID: no goal; all constraints satisfied, makespan " << v.stats.makespan;
  } else {
    os << "VALID: goal " << v.goal << " holds in the final state, makespan " << v.stats.makespan;
  }
  os << "\n";
  return os.str();
}

std::string verdict_json(const Verdict& v) {
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : v.errors) {
    nlohmann::json j = {{"kind", std::string(kind_name(e.kind))}, {"items", e.items}, {"message", e.message}};
    j["date"] = e.date ? nlohmann::json(*e.date) : nlohmann::json(nullptr);
    errors.push_back(std::move(j));
  }
  nlohmann::json out = {{"valid", v.valid},
                        {"errors", errors},
                        {"stats", {{"happenings", v.stats.happenings}, {"makespan", v.stats.makespan}, {"depth", v.stats.depth}}}};
  return out.dump(2);
}

}  // namespace hddl
