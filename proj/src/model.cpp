#include "hddl/model.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace hddl {

std::string_view symbol(Relation r) {
  switch (r) {
    case Relation::lt: return "<";
    case Relation::le: return "<=";
    case Relation::gt: return ">";
    case Relation::ge: return ">=";
    case Relation::eq: return "=";
    case Relation::ne: return "!=";
  }
  return "?";
}

std::optional<Relation> parse_relation(std::string_view s) {
  if (s == "<") return Relation::lt;
  if (s == "<=") return Relation::le;
  if (s == ">") return Relation::gt;
  if (s == ">=") return Relation::ge;
  if (s == "=") return Relation::eq;
  if (s == "!=" || s == "/=") return Relation::ne;
  return std::nullopt;
}

bool compare(Relation r, std::int64_t lhs, std::int64_t rhs) {
  switch (r) {
    case Relation::lt: return lhs < rhs;
    case Relation::le: return lhs <= rhs;
    case Relation::gt: return lhs > rhs;
    case Relation::ge: return lhs >= rhs;
    case Relation::eq: return lhs == rhs;
    case Relation::ne: return lhs != rhs;
  }
  return false;
}

Relation converse(Relation r) {
  switch (r) {
    case Relation::lt: return Relation::gt;
    case Relation::le: return Relation::ge;
    case Relation::gt: return Relation::lt;
    case Relation::ge: return Relation::le;
    default: return r;
  }
}

std::string Task::str() const {
  std::string out = "(" + name;
  for (const auto& a : args) out += " " + a.str();
  return out + ")";
}

std::string TimePoint::str() const {
  std::string out = side == Side::start ? "(start" : "(end";
  if (!id.empty()) out += " " + id;
  return out + ")";
}

std::string OrderingConstraint::str() const {
  return "(" + std::string(symbol(rel)) + " " + left.str() + " " + right.str() + ")";
}

std::string VariableConstraint::str() const {
  std::string eq = "(= " + left.str() + " " + right.str() + ")";
  return equal ? eq : "(not " + eq + ")";
}

std::optional<std::int64_t> DurationExpr::evaluate(
    const std::function<std::optional<std::int64_t>(const std::string&)>& lookup) const {
  switch (kind) {
    case Kind::literal:
      return value;
    case Kind::duration_of:
      return lookup(id);
    default:
      break;
  }
  std::optional<std::int64_t> acc;
  for (const auto& op : operands) {
    auto v = op.evaluate(lookup);
    if (!v) return std::nullopt;
    if (!acc) {
      acc = *v;
      continue;
    }
    if (kind == Kind::sum) *acc += *v;
    if (kind == Kind::difference) *acc -= *v;
    if (kind == Kind::product) *acc *= *v;
  }
  return acc ? acc : std::optional<std::int64_t>(kind == Kind::product ? 1 : 0);
}

void DurationExpr::referenced_ids(std::vector<std::string>& out) const {
  if (kind == Kind::duration_of) out.push_back(id);
  for (const auto& op : operands) op.referenced_ids(out);
}

std::string DurationExpr::str() const {
  switch (kind) {
    case Kind::literal:
      return std::to_string(value);
    case Kind::duration_of:
      return id.empty() ? "(duration)" : "(duration " + id + ")";
    default:
      break;
  }
  std::string out = kind == Kind::sum ? "(+" : kind == Kind::difference ? "(-" : "(*";
  for (const auto& op : operands) out += " " + op.str();
  return out + ")";
}

std::string DurationConstraint::str() const {
  return "(" + std::string(symbol(rel)) + " " + lhs.str() + " " + rhs.str() + ")";
}

DecompositionConstraint DecompositionConstraint::at(TimePoint p, Formula f) {
  DecompositionConstraint c;
  c.form = Form::at;
  c.point = std::move(p);
  c.condition = std::move(f);
  return c;
}

DecompositionConstraint DecompositionConstraint::before(std::vector<std::string> ids, Formula f) {
  DecompositionConstraint c;
  c.form = Form::before;
  c.first = std::move(ids);
  c.condition = std::move(f);
  return c;
}

DecompositionConstraint DecompositionConstraint::after(std::vector<std::string> ids, Formula f) {
  DecompositionConstraint c;
  c.form = Form::after;
  c.first = std::move(ids);
  c.condition = std::move(f);
  return c;
}

DecompositionConstraint DecompositionConstraint::between(std::vector<std::string> a, std::vector<std::string> b,
                                                         Formula f) {
  DecompositionConstraint c;
  c.form = Form::between;
  c.first = std::move(a);
  c.second = std::move(b);
  c.condition = std::move(f);
  return c;
}

DecompositionConstraint DecompositionConstraint::method_condition(Phase p, Formula f) {
  DecompositionConstraint c;
  c.form = Form::method_condition;
  c.phase = p;
  c.condition = std::move(f);
  return c;
}

namespace {

std::string id_set(const std::vector<std::string>& ids) {
  std::string out = "(";
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? " " : "") + ids[i];
  return out + ")";
}

}  // namespace

std::string DecompositionConstraint::str() const {
  const std::string cond = condition.str();
  switch (form) {
    case Form::at:
      return "(at " + point.str() + " " + cond + ")";
    case Form::before:
      return "(before " + id_set(first) + " " + cond + ")";
    case Form::after:
      return "(after " + id_set(first) + " " + cond + ")";
    case Form::between:
      return "(between " + id_set(first) + " " + id_set(second) + " " + cond + ")";
    case Form::method_condition:
      switch (phase) {
        case Phase::at_start: return "(at start " + cond + ")";
        case Phase::at_end: return "(at end " + cond + ")";
        case Phase::overall: return "(over all " + cond + ")";
      }
  }
  return cond;
}

bool TaskNetwork::contains(const std::string& id) const {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

void TaskNetwork::add_task(const std::string& id, Task t) {
  ids.push_back(id);
  alpha[id] = std::move(t);
}

std::string Diagnostic::str() const {
  std::ostringstream os;
  os << span.file_name() << ":" << span.line << ":" << span.column << ": "
     << (severity == Severity::error ? "error" : "warning") << ": " << message << " [" << rule << "]";
  return os.str();
}

bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.is_error(); });
}

const PredicateSchema* Domain::predicate(std::string_view n) const {
  for (const auto& p : predicates)
    if (p.name == n) return &p;
  return nullptr;
}

const TaskSchema* Domain::compound_task(std::string_view n) const {
  for (const auto& t : tasks)
    if (t.name == n) return &t;
  return nullptr;
}

const Action* Domain::action(std::string_view n) const {
  for (const auto& a : actions)
    if (a.name == n) return &a;
  return nullptr;
}

const Method* Domain::method(std::string_view n) const {
  for (const auto& m : methods)
    if (m.name == n) return &m;
  return nullptr;
}

TaskKind Domain::kind_of(std::string_view task_name) const {
  if (action(task_name)) return TaskKind::primitive;
  if (compound_task(task_name)) return TaskKind::compound;
  return TaskKind::unknown;
}

bool Domain::operator==(const Domain& o) const {
  return name == o.name && requirements == o.requirements && constants == o.constants &&
         predicates == o.predicates && tasks == o.tasks && actions == o.actions && methods == o.methods;
}

bool Problem::operator==(const Problem& o) const {
  return name == o.name && domain_name == o.domain_name && requirements == o.requirements &&
         objects == o.objects && init == o.init && htn_params == o.htn_params && network == o.network &&
         goal == o.goal;
}

ObjectPool merged_pool(const Domain& d, const Problem& p) {
  ObjectPool pool = d.constants;
  for (const auto& t : p.objects.types().types())
    if (!pool.types().contains(t)) pool.types().declare(t, p.objects.types().parent_of(t) ? *p.objects.types().parent_of(t) : kRootType);
  for (const auto& o : p.objects.objects()) pool.add(o.name, o.type);
  return pool;
}

// ---------------------------------------------------------------------------
// Static validation

namespace {

class Checker {
 public:
  Checker(const Domain& d, const Problem* p) : domain_(d), problem_(p) {
    if (p) pool_ = merged_pool(d, *p);
    else pool_ = d.constants;
  }

  std::vector<Diagnostic> run() {
    check_types();
    for (const auto& pr : domain_.predicates) check_params(pr.params, pr.span);
    for (const auto& t : domain_.tasks) check_params(t.params, t.span);
    for (const auto& a : domain_.actions) check_action(a);
    for (const auto& m : domain_.methods) check_method(m);
    for (const auto& t : domain_.tasks) {
      bool any = std::any_of(domain_.methods.begin(), domain_.methods.end(),
                             [&](const Method& m) { return m.task.name == t.name; });
      if (!any) warn(t.span, "no-method", "compound task '" + t.name + "' has no method");
    }
    if (problem_) check_problem(*problem_);
    return std::move(out_);
  }

 private:
  using Scope = std::map<std::string, std::string>;  // variable -> type

  void error(const SourceSpan& s, std::string rule, std::string msg) {
    out_.push_back({s, Diagnostic::Severity::error, std::move(rule), std::move(msg)});
  }
  void warn(const SourceSpan& s, std::string rule, std::string msg) {
    out_.push_back({s, Diagnostic::Severity::warning, std::move(rule), std::move(msg)});
  }

  void check_types() {
    try {
      pool_.types().check_acyclic();
    } catch (const LogicError& e) {
      error({}, "type-cycle", e.what());
    }
  }

  void check_type(const std::string& t, const SourceSpan& s) {
    if (!pool_.types().contains(t)) error(s, "unknown-type", "unknown type '" + t + "'");
  }

  void check_params(const std::vector<TypedVariable>& ps, const SourceSpan& s) {
    std::set<std::string> seen;
    for (const auto& p : ps) {
      check_type(p.type, s);
      if (!seen.insert(p.name).second) error(s, "duplicate-parameter", "parameter ?" + p.name + " declared twice");
    }
  }

  Scope scope_of(const std::vector<TypedVariable>& ps) {
    Scope sc;
    for (const auto& p : ps) sc[p.name] = p.type;
    return sc;
  }

  void check_term(const Term& t, const Scope& sc, const SourceSpan& s) {
    if (t.is_variable()) {
      if (!sc.count(t.name)) error(s, "unknown-variable", "variable ?" + t.name + " is not in scope");
    } else if (!pool_.contains(t.name)) {
      error(s, "unknown-constant", "unknown constant '" + t.name + "'");
    }
  }

  void check_atom(const Atom& a, const Scope& sc, const SourceSpan& fallback) {
    const SourceSpan& s = a.span.known() ? a.span : fallback;
    const PredicateSchema* p = domain_.predicate(a.predicate);
    if (!p) {
      error(s, "unknown-predicate", "unknown predicate '" + a.predicate + "'");
    } else if (p->params.size() != a.args.size()) {
      error(s, "arity-mismatch",
            "predicate '" + a.predicate + "' expects " + std::to_string(p->params.size()) + " arguments, got " +
                std::to_string(a.args.size()));
    }
    for (const auto& t : a.args) check_term(t, sc, s);
  }

  void check_formula(const Formula& f, Scope sc, const SourceSpan& fallback) {
    using K = Formula::Kind;
    const SourceSpan& s = f.span.known() ? f.span : fallback;
    switch (f.kind) {
      case K::atom:
        check_atom(f.atom, sc, s);
        return;
      case K::equals:
        for (const auto& t : f.atom.args) check_term(t, sc, s);
        return;
      case K::forall:
      case K::exists:
        check_type(f.bound.type, s);
        sc[f.bound.name] = f.bound.type;
        check_formula(f.children[0], sc, s);
        return;
      default:
        for (const auto& c : f.children) check_formula(c, sc, s);
    }
  }

  void check_task(const Task& t, const Scope& sc, const SourceSpan& fallback) {
    const SourceSpan& s = t.span.known() ? t.span : fallback;
    std::size_t arity = 0;
    if (const Action* a = domain_.action(t.name)) arity = a->params.size();
    else if (const TaskSchema* ts = domain_.compound_task(t.name)) arity = ts->params.size();
    else {
      error(s, "unknown-task", "unknown task '" + t.name + "'");
      return;
    }
    if (arity != t.args.size())
      error(s, "arity-mismatch",
            "task '" + t.name + "' expects " + std::to_string(arity) + " arguments, got " +
                std::to_string(t.args.size()));
    for (const auto& a : t.args) check_term(a, sc, s);
  }

  void check_snap(const SnapAction& snap, const Scope& sc, const SourceSpan& s) {
    check_formula(snap.precond, sc, s);
    for (const auto& a : snap.add) check_atom(a, sc, s);
    for (const auto& a : snap.del) check_atom(a, sc, s);
  }

  // Classes of terms forced equal by unifying the add and delete atoms.
  static std::optional<std::map<std::string, std::string>> unify(const Atom& a, const Atom& b) {
    if (a.predicate != b.predicate || a.args.size() != b.args.size()) return std::nullopt;
    std::map<std::string, std::string> parent;
    std::function<std::string(const std::string&)> find = [&](const std::string& x) {
      auto it = parent.find(x);
      if (it == parent.end() || it->second == x) return x;
      return it->second = find(it->second);
    };
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      std::string l = a.args[i].str(), r = b.args[i].str();
      std::string rl = find(l), rr = find(r);
      if (rl == rr) continue;
      bool lc = rl[0] != '?', rc = rr[0] != '?';
      if (lc && rc) return std::nullopt;  // two different constants
      if (lc) parent[rr] = rl;
      else parent[rl] = rr;
    }
    std::map<std::string, std::string> classes;
    for (auto& [k, v] : parent) classes[k] = find(k);
    return classes;
  }

  static std::vector<std::pair<Term, Term>> forbidden_equalities(const Formula& pre) {
    std::vector<std::pair<Term, Term>> out;
    auto visit = [&](const Formula& f) {
      if (f.kind == Formula::Kind::negation && f.children[0].kind == Formula::Kind::equals)
        out.emplace_back(f.children[0].atom.args[0], f.children[0].atom.args[1]);
    };
    if (pre.kind == Formula::Kind::conjunction)
      for (const auto& c : pre.children) visit(c);
    else
      visit(pre);
    return out;
  }

  void check_overlap(const Action& a, const SnapAction& snap, const char* which) {
    auto forbidden = forbidden_equalities(snap.precond);
    auto more = forbidden_equalities(a.start.precond);
    forbidden.insert(forbidden.end(), more.begin(), more.end());
    Scope sc = scope_of(a.params);
    for (const auto& add : snap.add) {
      for (const auto& del : snap.del) {
        auto classes = unify(add, del);
        if (!classes) continue;
        auto root = [&](const Term& t) {
          auto it = classes->find(t.str());
          return it == classes->end() ? t.str() : it->second;
        };
        bool blocked = std::any_of(forbidden.begin(), forbidden.end(),
                                   [&](const auto& p) { return root(p.first) == root(p.second); });
        // Each merged class must admit at least one object of all its variable types.
        std::map<std::string, std::vector<std::string>> members;
        for (const auto& [term, r] : *classes) members[r].push_back(term);
        for (auto& [r, ms] : members) {
          if (blocked) break;
          ms.push_back(r);
          std::vector<std::string> candidates;
          if (r[0] != '?') candidates = {r};
          else
            for (const auto& o : pool_.objects()) candidates.push_back(o.name);
          bool satisfiable = std::any_of(candidates.begin(), candidates.end(), [&](const std::string& obj) {
            return std::all_of(ms.begin(), ms.end(), [&](const std::string& m) {
              if (m[0] != '?') return m == obj;
              auto it = sc.find(m.substr(1));
              return it == sc.end() || pool_.has_type(obj, it->second);
            });
          });
          if (problem_ && !satisfiable) blocked = true;
        }
        if (!blocked)
          warn(a.span, "effect-overlap",
               "action '" + a.name + "' may add and delete " + add.str() + " at " + which +
                   " for some binding");
      }
    }
  }

  void check_action(const Action& a) {
    check_params(a.params, a.span);
    Scope sc = scope_of(a.params);
    check_snap(a.start, sc, a.span);
    check_overlap(a, a.start, a.durative ? "start" : "once");
    if (a.durative) {
      check_snap(a.end, sc, a.span);
      check_formula(a.invariant, sc, a.span);
      check_overlap(a, a.end, "end");
      std::vector<std::string> refs;
      a.duration.referenced_ids(refs);
      if (!refs.empty()) {
        error(a.span, "invalid-duration", "action duration must be closed integer arithmetic");
      } else if (auto v = a.duration.evaluate([](const std::string&) { return std::nullopt; }); v && *v < 0) {
        error(a.span, "negative-duration", "action '" + a.name + "' has negative duration " + std::to_string(*v));
      }
    }
  }

  void check_network(const TaskNetwork& w, const Scope& sc, const SourceSpan& s) {
    std::set<std::string> known(w.ids.begin(), w.ids.end());
    for (const auto& id : w.ids) check_task(w.alpha.at(id), sc, s);
    auto point_ok = [&](const TimePoint& p) { return p.id.empty() || known.count(p.id); };
    for (const auto& c : w.co) {
      for (const auto* p : {&c.left, &c.right})
        if (!point_ok(*p))
          error(c.span.known() ? c.span : s, "dangling-identifier",
                "ordering constraint references unknown task id '" + p->id + "'");
    }
    for (const auto& c : w.cv) {
      check_term(c.left, sc, c.span.known() ? c.span : s);
      check_term(c.right, sc, c.span.known() ? c.span : s);
    }
    for (const auto& c : w.cd) {
      std::vector<std::string> refs;
      c.lhs.referenced_ids(refs);
      c.rhs.referenced_ids(refs);
      for (const auto& r : refs)
        if (!r.empty() && !known.count(r))
          error(c.span.known() ? c.span : s, "dangling-identifier",
                "duration constraint references unknown task id '" + r + "'");
    }
    for (const auto& c : w.ct) {
      const SourceSpan& cs = c.span.known() ? c.span : s;
      try {
        normalize_constraint(c, w);
      } catch (const ModelError& e) {
        error(cs, "dangling-identifier", e.what());
      }
      check_formula(c.condition, sc, cs);
    }
  }

  void check_method(const Method& m) {
    check_params(m.params, m.span);
    Scope sc = scope_of(m.params);
    const SourceSpan& ts = m.task.span.known() ? m.task.span : m.span;
    if (domain_.action(m.task.name)) {
      error(ts, "method-for-primitive", "method '" + m.name + "' refines primitive task '" + m.task.name + "'");
    } else if (!domain_.compound_task(m.task.name)) {
      error(ts, "unknown-task", "method '" + m.name + "' refines undeclared task '" + m.task.name + "'");
    } else {
      check_task(m.task, sc, ts);
    }
    check_network(m.network, sc, m.span);
  }

  void check_problem(const Problem& p) {
    if (p.domain_name != domain_.name)
      warn({}, "domain-name", "problem targets domain '" + p.domain_name + "' but domain is '" + domain_.name + "'");
    for (const auto& o : p.objects.objects())
      if (!domain_.constants.types().contains(o.type))
        error({}, "unknown-type", "object '" + o.name + "' has undeclared type '" + o.type + "'");
    Scope empty;
    for (const auto& a : p.init) {
      check_atom(a, empty, a.span);
      if (!a.is_ground()) error(a.span, "non-ground-init", "initial state atom " + a.str() + " is not ground");
    }
    check_params(p.htn_params, {});
    check_network(p.network, scope_of(p.htn_params), {});
    if (p.goal) check_formula(*p.goal, free_scope(*p.goal), p.goal->span);
  }

  // Goals may carry free variables; they are existentially closed when checked.
  Scope free_scope(const Formula& f) {
    Scope sc;
    for (const auto& v : free_variables(f)) sc[v] = kRootType;
    return sc;
  }

  const Domain& domain_;
  const Problem* problem_;
  ObjectPool pool_;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate_model(const Domain& d) {
  return Checker(d, nullptr).run();
}

std::vector<Diagnostic> validate_model(const Domain& d, const Problem& p) { return Checker(d, &p).run(); }

// ---------------------------------------------------------------------------

std::vector<Obligation> normalize_constraint(const DecompositionConstraint& c, const TaskNetwork& scope) {
  auto require = [&](const std::string& id) {
    if (!id.empty() && !scope.alpha.count(id))
      throw ModelError("unknown-identifier", "constraint " + c.str() + " references unknown task id '" + id + "'");
  };
  auto points = [&](const std::vector<std::string>& ids, TimePoint::Side side) {
    std::vector<TimePoint> out;
    for (const auto& id : ids) {
      require(id);
      out.push_back({side, id});
    }
    return out;
  };
  using Pick = Obligation::Pick;
  using StateAt = Obligation::StateAt;
  auto single = [&](Pick pick, std::vector<TimePoint> pts, StateAt st) {
    Obligation o;
    o.from = {pick, std::move(pts)};
    o.to = o.from;
    o.state = st;
    o.condition = c.condition;
    o.origin = c.str();
    return std::vector<Obligation>{o};
  };
  const TimePoint net_start = TimePoint::start_of(c.owner);
  const TimePoint net_end = TimePoint::end_of(c.owner);

  switch (c.form) {
    case DecompositionConstraint::Form::at:
      require(c.point.id);
      return single(Pick::earliest, {c.point.id.empty() ? TimePoint{c.point.side, c.owner} : c.point}, StateAt::post);
    case DecompositionConstraint::Form::before: {
      auto pts = points(c.first, TimePoint::Side::start);
      if (pts.empty()) pts = {net_start};
      return single(Pick::earliest, std::move(pts), StateAt::pre);
    }
    case DecompositionConstraint::Form::after: {
      auto pts = points(c.first, TimePoint::Side::end);
      if (pts.empty()) pts = {net_end};
      return single(Pick::latest, std::move(pts), StateAt::post);
    }
    case DecompositionConstraint::Form::between: {
      auto lo = points(c.first, TimePoint::Side::end);
      auto hi = points(c.second, TimePoint::Side::start);
      Obligation o;
      o.from = {Pick::latest, lo.empty() ? std::vector<TimePoint>{net_start} : lo};
      o.to = {Pick::earliest, hi.empty() ? std::vector<TimePoint>{net_end} : hi};
      o.state = StateAt::post;
      o.condition = c.condition;
      o.origin = c.str();
      return {o};
    }
    case DecompositionConstraint::Form::method_condition:
      switch (c.phase) {
        case DecompositionConstraint::Phase::at_start:
          return single(Pick::earliest, {net_start}, StateAt::pre);
        case DecompositionConstraint::Phase::at_end:
          return single(Pick::latest, {net_end}, StateAt::post);
        case DecompositionConstraint::Phase::overall: {
          Obligation o;
          o.from = {Pick::earliest, {net_start}};
          o.to = {Pick::latest, {net_end}};
          o.open = true;
          o.state = StateAt::pre;
          o.condition = c.condition;
          o.origin = c.str();
          return {o};
        }
      }
  }
  return {};
}

}  // namespace hddl
