#pragma once

// Function-free first-order formulas over typed constants: substitution,
// quantifier expansion and truth evaluation in closed-world states.

#include <compare>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hddl/source_span.hpp"

namespace hddl {

inline constexpr const char* kRootType = "object";

struct Term {
  enum class Kind { variable, constant };

  Kind kind = Kind::constant;
  std::string name;  // without the '?' sigil for variables

  static Term variable(std::string n) { return {Kind::variable, std::move(n)}; }
  static Term constant(std::string n) { return {Kind::constant, std::move(n)}; }

  bool is_variable() const { return kind == Kind::variable; }
  std::string str() const { return is_variable() ? "?" + name : name; }

  auto operator<=>(const Term&) const = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;
  SourceSpan span;

  bool is_ground() const;
  std::string str() const;

  auto operator<=>(const Atom&) const = default;
};

/// A typed variable declaration `?name - type`.
struct TypedVariable {
  std::string name;
  std::string type = kRootType;

  auto operator<=>(const TypedVariable&) const = default;
};

/// Formula tree. `conjunction` with no children is true, `disjunction` with
/// no children is false. Equality atoms compare their two terms structurally.
struct Formula {
  enum class Kind { atom, equals, negation, conjunction, disjunction, implication, forall, exists };

  Kind kind = Kind::conjunction;
  Atom atom;                      // atom / equals (predicate "=", two args)
  std::vector<Formula> children;  // connectives and quantifier body
  TypedVariable bound;            // quantifiers
  SourceSpan span;

  static Formula truth() { return {}; }
  static Formula falsity() { return make(Kind::disjunction, {}); }
  static Formula of(Atom a);
  static Formula equals(Term l, Term r);
  static Formula negate(Formula f);
  static Formula all(std::vector<Formula> fs) { return make(Kind::conjunction, std::move(fs)); }
  static Formula any(std::vector<Formula> fs) { return make(Kind::disjunction, std::move(fs)); }
  static Formula implies(Formula l, Formula r) { return make(Kind::implication, {std::move(l), std::move(r)}); }
  static Formula forall(TypedVariable v, Formula body);
  static Formula exists(TypedVariable v, Formula body);

  bool is_truth() const { return kind == Kind::conjunction && children.empty(); }
  std::string str() const;

  bool operator==(const Formula&) const = default;

 private:
  static Formula make(Kind k, std::vector<Formula> cs) {
    Formula f;
    f.kind = k;
    f.children = std::move(cs);
    return f;
  }
};

using State = std::set<Atom>;
using Binding = std::map<std::string, std::string>;  // variable name -> constant

std::string to_string(const State& s);

class LogicError : public std::runtime_error {
 public:
  enum class Code { unbound_variable, empty_domain, not_ground, unknown_type, type_cycle };
  LogicError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
  Code code;
};

/// Single-inheritance type tree rooted at `object`.
class TypeHierarchy {
 public:
  TypeHierarchy();

  /// Declares `type` below `parent`. Redeclaring with a different parent
  /// replaces the edge; cycles are reported by `check_acyclic`.
  void declare(const std::string& type, const std::string& parent = kRootType);
  bool contains(const std::string& type) const { return parent_.count(type) != 0; }
  bool is_subtype(const std::string& type, const std::string& ancestor) const;
  const std::string* parent_of(const std::string& type) const;
  const std::vector<std::string>& types() const { return order_; }
  /// Throws LogicError(type_cycle) on a cyclic declaration.
  void check_acyclic() const;

  bool operator==(const TypeHierarchy&) const = default;

 private:
  std::map<std::string, std::string> parent_;
  std::vector<std::string> order_;
};

/// Constants with type tags, in declaration order.
class ObjectPool {
 public:
  struct Object {
    std::string name;
    std::string type = kRootType;
    auto operator<=>(const Object&) const = default;
  };

  ObjectPool() = default;
  explicit ObjectPool(TypeHierarchy types) : types_(std::move(types)) {}

  /// Adds a constant; re-adding an existing name keeps the first declaration.
  void add(const std::string& name, const std::string& type = kRootType);
  bool contains(const std::string& name) const;
  const std::string* type_of(const std::string& name) const;
  /// Constants whose tag is `type` or one of its subtypes, in declaration order.
  std::vector<std::string> objects_of(const std::string& type) const;
  bool has_type(const std::string& name, const std::string& type) const;

  const std::vector<Object>& objects() const { return objects_; }
  const TypeHierarchy& types() const { return types_; }
  TypeHierarchy& types() { return types_; }

  bool operator==(const ObjectPool&) const = default;

 private:
  TypeHierarchy types_;
  std::vector<Object> objects_;
};

/// φ[x/c]: replaces free occurrences of variable `var` by constant `constant`.
Formula substitute(const Formula& f, const std::string& var, const std::string& constant);
/// Simultaneous substitution of every bound variable in `b`.
Formula substitute(const Formula& f, const Binding& b);
Atom substitute(const Atom& a, const Binding& b);
Term substitute(const Term& t, const Binding& b);

std::set<std::string> free_variables(const Formula& f);
bool is_ground(const Formula& f);

/// Expands quantifiers over type-compatible constants. Throws
/// LogicError(unbound_variable) for open formulas and
/// LogicError(empty_domain) when a quantified type has no constants.
/// Implications are rewritten as disjunctions.
Formula ground(const Formula& f, const ObjectPool& pool);

/// Closed-world truth of a ground formula. Throws LogicError(not_ground).
bool evaluate(const State& s, const Formula& f);

/// True iff some binding of the free variables makes f true in s, with
/// quantifiers ranging over the pool. Empty quantifier domains follow the
/// usual convention (forall true, exists false).
bool holds(const State& s, const Formula& f, const ObjectPool& pool);

/// Implication and existential eliminated: φ→ψ = ¬φ∨ψ, ∃x φ = ¬∀x ¬φ.
Formula canonical(const Formula& f);

/// Every non-equality atom occurring in f, in traversal order (duplicates kept).
std::vector<Atom> atoms_of(const Formula& f);

}  // namespace hddl
