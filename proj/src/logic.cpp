#include "hddl/logic.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace hddl {

bool Atom::is_ground() const {
  return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

std::string Atom::str() const {
  std::string out = "(" + predicate;
  for (const auto& a : args) out += " " + a.str();
  return out + ")";
}

Formula Formula::of(Atom a) {
  Formula f;
  f.kind = Kind::atom;
  f.span = a.span;
  f.atom = std::move(a);
  return f;
}

Formula Formula::equals(Term l, Term r) {
  Formula f;
  f.kind = Kind::equals;
  f.atom.predicate = "=";
  f.atom.args = {std::move(l), std::move(r)};
  return f;
}

Formula Formula::negate(Formula inner) { return make(Kind::negation, {std::move(inner)}); }

Formula Formula::forall(TypedVariable v, Formula body) {
  Formula f = make(Kind::forall, {std::move(body)});
  f.bound = std::move(v);
  return f;
}

Formula Formula::exists(TypedVariable v, Formula body) {
  Formula f = make(Kind::exists, {std::move(body)});
  f.bound = std::move(v);
  return f;
}

namespace {

void print(std::ostream& os, const Formula& f) {
  using K = Formula::Kind;
  auto list = [&](const char* head) {
    os << "(" << head;
    for (const auto& c : f.children) {
      os << " ";
      print(os, c);
    }
    os << ")";
  };
  switch (f.kind) {
    case K::atom:
    case K::equals:
      os << f.atom.str();
      return;
    case K::negation:
      list("not");
      return;
    case K::conjunction:
      list("and");
      return;
    case K::disjunction:
      list("or");
      return;
    case K::implication:
      list("imply");
      return;
    case K::forall:
    case K::exists:
      os << "(" << (f.kind == K::forall ? "forall" : "exists") << " (?" << f.bound.name << " - "
         << f.bound.type << ") ";
      print(os, f.children.front());
      os << ")";
      return;
  }
}

}  // namespace

std::string Formula::str() const {
  std::ostringstream os;
  print(os, *this);
  return os.str();
}

std::string to_string(const State& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& a : s) {
    if (!first) out += " ";
    out += a.str();
    first = false;
  }
  return out + "}";
}

// ---------------------------------------------------------------------------

TypeHierarchy::TypeHierarchy() {
  parent_[kRootType] = "";
  order_.push_back(kRootType);
}

void TypeHierarchy::declare(const std::string& type, const std::string& parent) {
  if (type == kRootType) return;
  if (!contains(parent)) declare(parent, kRootType);
  if (!contains(type)) order_.push_back(type);
  parent_[type] = parent;
}

const std::string* TypeHierarchy::parent_of(const std::string& type) const {
  auto it = parent_.find(type);
  if (it == parent_.end() || it->second.empty()) return nullptr;
  return &it->second;
}

bool TypeHierarchy::is_subtype(const std::string& type, const std::string& ancestor) const {
  if (ancestor == kRootType) return true;
  std::string cur = type;
  for (std::size_t steps = 0; steps <= order_.size(); ++steps) {
    if (cur == ancestor) return true;
    const std::string* p = parent_of(cur);
    if (!p) return false;
    cur = *p;
  }
  return false;
}

void TypeHierarchy::check_acyclic() const {
  for (const auto& t : order_) {
    std::string cur = t;
    for (std::size_t steps = 0;; ++steps) {
      if (steps > order_.size()) throw LogicError(LogicError::Code::type_cycle, "cyclic type hierarchy at '" + t + "'");
      const std::string* p = parent_of(cur);
      if (!p) break;
      cur = *p;
    }
  }
}

void ObjectPool::add(const std::string& name, const std::string& type) {
  if (contains(name)) return;
  if (!types_.contains(type)) types_.declare(type);
  objects_.push_back({name, type});
}

bool ObjectPool::contains(const std::string& name) const { return type_of(name) != nullptr; }

const std::string* ObjectPool::type_of(const std::string& name) const {
  for (const auto& o : objects_)
    if (o.name == name) return &o.type;
  return nullptr;
}

std::vector<std::string> ObjectPool::objects_of(const std::string& type) const {
  std::vector<std::string> out;
  for (const auto& o : objects_)
    if (types_.is_subtype(o.type, type)) out.push_back(o.name);
  return out;
}

bool ObjectPool::has_type(const std::string& name, const std::string& type) const {
  const std::string* t = type_of(name);
  return t && types_.is_subtype(*t, type);
}

// ---------------------------------------------------------------------------

Term substitute(const Term& t, const Binding& b) {
  if (!t.is_variable()) return t;
  auto it = b.find(t.name);
  return it == b.end() ? t : Term::constant(it->second);
}

Atom substitute(const Atom& a, const Binding& b) {
  Atom out = a;
  for (auto& t : out.args) t = substitute(t, b);
  return out;
}

Formula substitute(const Formula& f, const Binding& b) {
  using K = Formula::Kind;
  if (b.empty()) return f;
  Formula out = f;
  switch (f.kind) {
    case K::atom:
    case K::equals:
      out.atom = substitute(f.atom, b);
      return out;
    case K::forall:
    case K::exists: {
      if (b.count(f.bound.name) == 0) {
        out.children[0] = substitute(f.children[0], b);
        return out;
      }
      Binding inner = b;
      inner.erase(f.bound.name);
      out.children[0] = substitute(f.children[0], inner);
      return out;
    }
    default:
      for (auto& c : out.children) c = substitute(c, b);
      return out;
  }
}

Formula substitute(const Formula& f, const std::string& var, const std::string& constant) {
  return substitute(f, Binding{{var, constant}});
}

namespace {

void collect_free(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::atom:
    case K::equals:
      for (const auto& t : f.atom.args)
        if (t.is_variable() && !bound.count(t.name)) out.insert(t.name);
      return;
    case K::forall:
    case K::exists: {
      bool fresh = bound.insert(f.bound.name).second;
      collect_free(f.children[0], bound, out);
      if (fresh) bound.erase(f.bound.name);
      return;
    }
    default:
      for (const auto& c : f.children) collect_free(c, bound, out);
  }
}

bool has_variables(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::atom:
    case K::equals:
      return !f.atom.is_ground();
    case K::forall:
    case K::exists:
      return true;
    default:
      return std::any_of(f.children.begin(), f.children.end(), has_variables);
  }
}

Formula expand(const Formula& f, const ObjectPool& pool) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::atom:
    case K::equals:
      return f;
    case K::implication: {
      Formula out = Formula::any({Formula::negate(expand(f.children[0], pool)), expand(f.children[1], pool)});
      out.span = f.span;
      return out;
    }
    case K::forall:
    case K::exists: {
      auto domain = pool.objects_of(f.bound.type);
      if (domain.empty())
        throw LogicError(LogicError::Code::empty_domain,
                         "no constants of type '" + f.bound.type + "' for ?" + f.bound.name);
      std::vector<Formula> parts;
      parts.reserve(domain.size());
      for (const auto& c : domain) parts.push_back(expand(substitute(f.children[0], f.bound.name, c), pool));
      Formula out = f.kind == K::forall ? Formula::all(std::move(parts)) : Formula::any(std::move(parts));
      out.span = f.span;
      return out;
    }
    default: {
      Formula out = f;
      for (auto& c : out.children) c = expand(c, pool);
      return out;
    }
  }
}

bool eval_ground(const State& s, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::atom:
      return s.count(f.atom) != 0;
    case K::equals:
      return f.atom.args[0].name == f.atom.args[1].name;
    case K::negation:
      return !eval_ground(s, f.children[0]);
    case K::conjunction:
      return std::all_of(f.children.begin(), f.children.end(), [&](const Formula& c) { return eval_ground(s, c); });
    case K::disjunction:
      return std::any_of(f.children.begin(), f.children.end(), [&](const Formula& c) { return eval_ground(s, c); });
    case K::implication:
      return !eval_ground(s, f.children[0]) || eval_ground(s, f.children[1]);
    case K::forall:
    case K::exists:
      break;
  }
  throw LogicError(LogicError::Code::not_ground, "quantifier in ground evaluation: " + f.str());
}

// Direct model checking under an environment; independent of `expand`.
bool eval_env(const State& s, const Formula& f, const ObjectPool& pool, Binding& env) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::atom:
      return s.count(substitute(f.atom, env)) != 0;
    case K::equals: {
      Term l = substitute(f.atom.args[0], env);
      Term r = substitute(f.atom.args[1], env);
      return l == r;
    }
    case K::negation:
      return !eval_env(s, f.children[0], pool, env);
    case K::conjunction:
      for (const auto& c : f.children)
        if (!eval_env(s, c, pool, env)) return false;
      return true;
    case K::disjunction:
      for (const auto& c : f.children)
        if (eval_env(s, c, pool, env)) return true;
      return false;
    case K::implication:
      return !eval_env(s, f.children[0], pool, env) || eval_env(s, f.children[1], pool, env);
    case K::forall:
    case K::exists: {
      const bool universal = f.kind == K::forall;
      auto saved = env.find(f.bound.name);
      std::optional<std::string> previous;
      if (saved != env.end()) previous = saved->second;
      bool result = universal;
      for (const auto& c : pool.objects_of(f.bound.type)) {
        env[f.bound.name] = c;
        if (eval_env(s, f.children[0], pool, env) != universal) {
          result = !universal;
          break;
        }
      }
      if (previous)
        env[f.bound.name] = *previous;
      else
        env.erase(f.bound.name);
      return result;
    }
  }
  return false;
}

bool close_and_eval(const State& s, const Formula& f, const ObjectPool& pool, const std::vector<std::string>& free,
                    std::size_t next, Binding& env) {
  if (next == free.size()) return eval_env(s, f, pool, env);
  for (const auto& o : pool.objects()) {
    env[free[next]] = o.name;
    if (close_and_eval(s, f, pool, free, next + 1, env)) return true;
  }
  env.erase(free[next]);
  return false;
}

void collect_atoms(const Formula& f, std::vector<Atom>& out) {
  if (f.kind == Formula::Kind::atom) {
    out.push_back(f.atom);
    return;
  }
  for (const auto& c : f.children) collect_atoms(c, out);
}

}  // namespace

std::set<std::string> free_variables(const Formula& f) {
  std::set<std::string> bound, out;
  collect_free(f, bound, out);
  return out;
}

bool is_ground(const Formula& f) { return !has_variables(f); }

Formula ground(const Formula& f, const ObjectPool& pool) {
  auto free = free_variables(f);
  if (!free.empty())
    throw LogicError(LogicError::Code::unbound_variable, "free variable ?" + *free.begin() + " in " + f.str());
  return expand(f, pool);
}

bool evaluate(const State& s, const Formula& f) {
  if (has_variables(f)) throw LogicError(LogicError::Code::not_ground, "formula is not ground: " + f.str());
  return eval_ground(s, f);
}

bool holds(const State& s, const Formula& f, const ObjectPool& pool) {
  auto free_set = free_variables(f);
  std::vector<std::string> free(free_set.begin(), free_set.end());
  Binding env;
  return close_and_eval(s, f, pool, free, 0, env);
}

Formula canonical(const Formula& f) {
  using K = Formula::Kind;
  Formula out = f;
  for (auto& c : out.children) c = canonical(c);
  if (f.kind == K::implication) {
    Formula r = Formula::any({Formula::negate(out.children[0]), out.children[1]});
    r.span = f.span;
    return r;
  }
  if (f.kind == K::exists) {
    Formula r = Formula::negate(Formula::forall(f.bound, Formula::negate(out.children[0])));
    r.span = f.span;
    return r;
  }
  return out;
}

std::vector<Atom> atoms_of(const Formula& f) {
  std::vector<Atom> out;
  collect_atoms(f, out);
  return out;
}

}  // namespace hddl
