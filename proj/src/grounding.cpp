#include "hddl/grounding.hpp"

#include <algorithm>
#include "json.hpp"

namespace hddl {

namespace {

std::string term_value(const Term& t, const Binding& b) {
  if (!t.is_variable()) return t.name;
  auto it = b.find(t.name);
  return it == b.end() ? std::string() : it->second;
}

}  // namespace

bool satisfies(const VariableConstraint& c, const Binding& b) {
  return (term_value(c.left, b) == term_value(c.right, b)) == c.equal;
}

std::vector<Binding> enumerate_bindings(const std::vector<TypedVariable>& params, const ObjectPool& pool,
                                        const std::vector<VariableConstraint>& cv) {
  // A constraint is tested at the depth where its last variable gets bound.
  std::vector<std::vector<const VariableConstraint*>> due(params.size() + 1);
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < params.size(); ++i) position.emplace(params[i].name, i + 1);
  for (const auto& c : cv) {
    std::size_t depth = 0;
    bool known = true;
    for (const Term* t : {&c.left, &c.right}) {
      if (!t->is_variable()) continue;
      auto it = position.find(t->name);
      if (it == position.end()) known = false;
      else depth = std::max(depth, it->second);
    }
    if (known) due[depth].push_back(&c);
  }
  std::vector<std::vector<std::string>> domains;
  for (const auto& p : params) domains.push_back(pool.objects_of(p.type));

  std::vector<Binding> out;
  Binding b;
  auto ok_at = [&](std::size_t depth) {
    return std::all_of(due[depth].begin(), due[depth].end(), [&](const VariableConstraint* c) { return satisfies(*c, b); });
  };
  auto rec = [&](auto&& self, std::size_t k) -> void {
    if (k == params.size()) {
      out.push_back(b);
      return;
    }
    for (const auto& c : domains[k]) {
      b[params[k].name] = c;
      if (ok_at(k + 1)) self(self, k + 1);
    }
    b.erase(params[k].name);
  };
  if (ok_at(0)) rec(rec, 0);
  return out;
}

Formula ground_formula(const Formula& f, const Binding& b, const ObjectPool& pool) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::atom:
    case K::equals: {
      Formula out = f;
      out.atom = substitute(f.atom, b);
      return out;
    }
    case K::implication: {
      Formula out = Formula::any({Formula::negate(ground_formula(f.children[0], b, pool)),
                                  ground_formula(f.children[1], b, pool)});
      out.span = f.span;
      return out;
    }
    case K::forall:
    case K::exists: {
      std::vector<Formula> parts;
      Binding inner = b;
      for (const auto& c : pool.objects_of(f.bound.type)) {
        inner[f.bound.name] = c;
        parts.push_back(ground_formula(f.children[0], inner, pool));
      }
      Formula out = f.kind == K::forall ? Formula::all(std::move(parts)) : Formula::any(std::move(parts));
      out.span = f.span;
      return out;
    }
    default: {
      Formula out = f;
      for (auto& c : out.children) c = ground_formula(c, b, pool);
      return out;
    }
  }
}

Task GroundAction::task() const {
  Task t;
  t.name = name;
  for (const auto& a : args) t.args.push_back(Term::constant(a));
  return t;
}

namespace {

std::vector<Atom> ground_atoms(const std::vector<Atom>& as, const Binding& b) {
  std::vector<Atom> out;
  for (const auto& a : as) {
    Atom g = substitute(a, b);
    g.span = {};
    if (!g.is_ground()) throw GroundingError(GroundingError::Kind::unbound_variable, "effect " + g.str() + " is not ground");
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SnapAction ground_snap(const SnapAction& s, const Binding& b, const ObjectPool& pool, const std::string& name) {
  SnapAction g;
  g.name = name;
  g.precond = ground_formula(s.precond, b, pool);
  g.add = ground_atoms(s.add, b);
  g.del = ground_atoms(s.del, b);
  std::vector<Atom> both;
  std::set_intersection(g.add.begin(), g.add.end(), g.del.begin(), g.del.end(), std::back_inserter(both));
  if (!both.empty())
    throw GroundingError(GroundingError::Kind::effect_overlap,
                         name + " both adds and deletes " + both.front().str());
  return g;
}

Task ground_task(const Task& t, const Binding& b) {
  Task g;
  g.name = t.name;
  for (const auto& a : t.args) g.args.push_back(substitute(a, b));
  return g;
}

std::string task_key(const Task& t) {
  std::string k = t.name;
  for (const auto& a : t.args) k += " " + a.name;
  return k;
}

}  // namespace

GroundAction ground_action(const Action& a, const Binding& b, const ObjectPool& pool) {
  GroundAction g;
  g.name = a.name;
  g.durative = a.durative;
  for (const auto& p : a.params) {
    auto it = b.find(p.name);
    if (it == b.end())
      throw GroundingError(GroundingError::Kind::unbound_variable, "parameter ?" + p.name + " of " + a.name + " is unbound");
    g.args.push_back(it->second);
  }
  const std::string label = g.str();
  g.start = ground_snap(a.start, b, pool, a.durative ? "start" + label : label);
  if (a.durative) {
    g.end = ground_snap(a.end, b, pool, "end" + label);
    g.invariant = ground_formula(a.invariant, b, pool);
    auto d = a.duration.evaluate([](const std::string&) -> std::optional<std::int64_t> { return std::nullopt; });
    if (!d)
      throw GroundingError(GroundingError::Kind::invalid_duration,
                           "duration of " + a.name + " is not a closed integer expression");
    if (*d < 0)
      throw GroundingError(GroundingError::Kind::negative_duration,
                           label + " has negative duration " + std::to_string(*d));
    g.duration = *d;
  } else {
    g.end.name = "end" + label;
  }
  return g;
}

TaskNetwork ground_network(const TaskNetwork& w, const Binding& b, const ObjectPool& pool) {
  TaskNetwork g;
  g.ids = w.ids;
  for (const auto& [id, t] : w.alpha) g.alpha.emplace(id, ground_task(t, b));
  g.co = w.co;
  g.cd = w.cd;
  for (const auto& c : w.ct) {
    DecompositionConstraint gc = c;
    gc.condition = ground_formula(c.condition, b, pool);
    g.ct.push_back(std::move(gc));
  }
  return g;
}

std::string GroundMethod::str() const {
  std::string out = "(" + name;
  for (const auto& a : args) out += " " + a;
  return out + ")";
}

GroundMethod ground_method(const Method& m, const Binding& b, const ObjectPool& pool) {
  GroundMethod g;
  g.name = m.name;
  for (const auto& p : m.params) g.args.push_back(term_value(Term::variable(p.name), b));
  g.binding = b;
  g.task = ground_task(m.task, b);
  g.task.span = {};
  g.network = ground_network(m.network, b, pool);
  return g;
}

const GroundAction* GroundModel::find_action(const Task& t) const {
  auto it = action_index_.find(task_key(t));
  return it == action_index_.end() ? nullptr : &actions[it->second];
}

std::vector<const GroundMethod*> GroundModel::methods_for(const Task& t) const {
  std::vector<const GroundMethod*> out;
  auto it = method_index_.find(task_key(t));
  if (it != method_index_.end())
    for (auto i : it->second) out.push_back(&methods[i]);
  return out;
}

const GroundMethod* GroundModel::find_method(const std::string& name, const Task& t) const {
  for (const auto* m : methods_for(t))
    if (m->name == name) return m;
  return nullptr;
}

void GroundModel::index() {
  action_index_.clear();
  method_index_.clear();
  for (std::size_t i = 0; i < actions.size(); ++i) action_index_.emplace(task_key(actions[i].task()), i);
  for (std::size_t i = 0; i < methods.size(); ++i) method_index_[task_key(methods[i].task)].push_back(i);
}

namespace {

void top_literals(const Formula& f, std::vector<const Formula*>& out) {
  if (f.kind == Formula::Kind::conjunction) {
    for (const auto& c : f.children) top_literals(c, out);
  } else {
    out.push_back(&f);
  }
}

// False when a top-level static literal of f is already false in s0.
bool static_ok(const Formula& f, const std::set<std::string>& fluent, const State& s0) {
  std::vector<const Formula*> lits;
  top_literals(f, lits);
  for (const Formula* l : lits) {
    bool positive = true;
    const Formula* a = l;
    if (a->kind == Formula::Kind::negation) {
      positive = false;
      a = &a->children[0];
    }
    if (a->kind != Formula::Kind::atom || fluent.count(a->atom.predicate) || !a->atom.is_ground()) continue;
    Atom key = a->atom;
    key.span = {};
    if ((s0.count(key) != 0) != positive) return false;
  }
  return true;
}

}  // namespace

GroundModel ground_problem(const Domain& d, const Problem& p, const GroundOptions& opts) {
  GroundModel gm;
  gm.pool = merged_pool(d, p);
  for (const auto& a : p.init) {
    Atom g = a;
    g.span = {};
    gm.init.insert(std::move(g));
  }
  for (const auto& t : d.tasks) gm.compound_names.insert(t.name);

  std::set<std::string> fluent;
  for (const auto& a : d.actions)
    for (const SnapAction* s : {&a.start, &a.end}) {
      for (const auto& x : s->add) fluent.insert(x.predicate);
      for (const auto& x : s->del) fluent.insert(x.predicate);
    }

  for (const auto& a : d.actions) {
    std::size_t count = 0;
    auto bindings = enumerate_bindings(a.params, gm.pool, {});
    if (bindings.empty() && !a.params.empty())
      gm.diagnostics.push_back({a.span, Diagnostic::Severity::warning, "empty-domain",
                                "action '" + a.name + "' has no instances: a parameter type has no objects"});
    for (const auto& b : bindings) {
      GroundAction g;
      try {
        g = ground_action(a, b, gm.pool);
      } catch (const GroundingError& e) {
        if (e.kind != GroundingError::Kind::effect_overlap) throw;
        ++gm.stats.rejected_overlap;
        gm.diagnostics.push_back({a.span, Diagnostic::Severity::warning, "effect-overlap", e.what()});
        continue;
      }
      if (opts.prune_static && !(static_ok(g.start.precond, fluent, gm.init) && static_ok(g.end.precond, fluent, gm.init) &&
                                 static_ok(g.invariant, fluent, gm.init))) {
        ++gm.stats.pruned_static;
        continue;
      }
      gm.actions.push_back(std::move(g));
      ++count;
    }
    gm.stats.instances[a.name] = count;
  }

  for (const auto& m : d.methods) {
    auto bindings = enumerate_bindings(m.params, gm.pool, m.network.cv);
    if (bindings.empty() && !m.params.empty())
      gm.diagnostics.push_back({m.span, Diagnostic::Severity::warning, "empty-domain",
                                "method '" + m.name + "' has no instances"});
    for (const auto& b : bindings) gm.methods.push_back(ground_method(m, b, gm.pool));
  }
  gm.index();

  // Drop methods whose subtasks can never be realised, up to a fixpoint.
  if (opts.prune_static) {
    std::vector<bool> alive(gm.methods.size(), true);
    std::map<std::string, bool> achievable;
    bool changed = true;
    while (changed) {
      changed = false;
      achievable.clear();
      for (std::size_t i = 0; i < gm.methods.size(); ++i)
        if (alive[i]) achievable[task_key(gm.methods[i].task)] = true;
      for (std::size_t i = 0; i < gm.methods.size(); ++i) {
        if (!alive[i]) continue;
        for (const auto& id : gm.methods[i].network.ids) {
          const Task& t = gm.methods[i].network.alpha.at(id);
          bool ok = gm.is_compound(t) ? achievable.count(task_key(t)) != 0 : gm.find_action(t) != nullptr;
          if (!ok) {
            alive[i] = false;
            changed = true;
            break;
          }
        }
      }
    }
    std::vector<GroundMethod> kept;
    for (std::size_t i = 0; i < gm.methods.size(); ++i) {
      if (alive[i]) kept.push_back(std::move(gm.methods[i]));
      else ++gm.stats.pruned_methods;
    }
    gm.methods = std::move(kept);
  }
  for (const auto& m : d.methods)
    gm.stats.instances[m.name] = static_cast<std::size_t>(
        std::count_if(gm.methods.begin(), gm.methods.end(), [&](const GroundMethod& g) { return g.name == m.name; }));
  gm.index();

  for (const auto& b : enumerate_bindings(p.htn_params, gm.pool, p.network.cv))
    gm.initial_networks.push_back(ground_network(p.network, b, gm.pool));
  if (gm.initial_networks.empty())
    gm.diagnostics.push_back({{}, Diagnostic::Severity::warning, "empty-domain",
                              "the initial task network has no binding satisfying its variable constraints"});
  if (p.goal) gm.goal = ground_formula(*p.goal, {}, gm.pool);
  return gm;
}

namespace {

nlohmann::json atoms_json(const std::vector<Atom>& as) {
  auto j = nlohmann::json::array();
  for (const auto& a : as) j.push_back(a.str());
  return j;
}

nlohmann::json snap_json(const SnapAction& s) {
  return {{"precondition", s.precond.str()}, {"add", atoms_json(s.add)}, {"delete", atoms_json(s.del)}};
}

nlohmann::json network_json(const TaskNetwork& w) {
  nlohmann::json tasks = nlohmann::json::array(), ordering = nlohmann::json::array(),
                 durations = nlohmann::json::array(), constraints = nlohmann::json::array();
  for (const auto& id : w.ids) tasks.push_back({{"id", id}, {"task", w.alpha.at(id).str()}});
  for (const auto& c : w.co) ordering.push_back(c.str());
  for (const auto& c : w.cd) durations.push_back(c.str());
  for (const auto& c : w.ct) constraints.push_back(c.str());
  return {{"tasks", tasks}, {"ordering", ordering}, {"durations", durations}, {"constraints", constraints}};
}

}  // namespace

std::string dump_ground_json(const GroundModel& gm) {
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : gm.actions) {
    nlohmann::json j = {{"task", a.str()}, {"durative", a.durative}, {"duration", a.duration}, {"start", snap_json(a.start)}};
    if (a.durative) {
      j["end"] = snap_json(a.end);
      j["invariant"] = a.invariant.str();
    }
    actions.push_back(std::move(j));
  }
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : gm.methods)
    methods.push_back({{"method", m.str()}, {"task", m.task.str()}, {"network", network_json(m.network)}});
  nlohmann::json initial = nlohmann::json::array();
  for (const auto& w : gm.initial_networks) initial.push_back(network_json(w));
  nlohmann::json init = nlohmann::json::array();
  for (const auto& a : gm.init) init.push_back(a.str());
  nlohmann::json stats = {{"instances", gm.stats.instances},
                          {"pruned_static", gm.stats.pruned_static},
                          {"pruned_methods", gm.stats.pruned_methods},
                          {"rejected_overlap", gm.stats.rejected_overlap}};
  nlohmann::json out = {{"init", init},           {"actions", actions}, {"methods", methods},
                        {"initial_networks", initial}, {"stats", stats}};
  out["goal"] = gm.goal ? nlohmann::json(gm.goal->str()) : nlohmann::json(nullptr);
  return out.dump(2);
}

}  // namespace hddl
