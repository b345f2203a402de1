#pragma once

// Instantiation of lifted schemas over an object pool.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hddl/model.hpp"

namespace hddl {

class GroundingError : public std::runtime_error {
 public:
  enum class Kind { negative_duration, effect_overlap, invalid_duration, unbound_variable };
  GroundingError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

/// Type-respecting total bindings of `params` that satisfy every constraint in
/// `cv`, first parameter varying slowest, constants in declaration order.
std::vector<Binding> enumerate_bindings(const std::vector<TypedVariable>& params, const ObjectPool& pool,
                                        const std::vector<VariableConstraint>& cv);

/// True when the (ground) variable constraint holds under `b`.
bool satisfies(const VariableConstraint& c, const Binding& b);

struct GroundAction {
  std::string name;
  std::vector<std::string> args;
  bool durative = false;
  SnapAction start;  // ground; add/del sorted and deduplicated
  SnapAction end;
  Formula invariant;
  std::int64_t duration = 0;

  Task task() const;
  std::string str() const { return task().str(); }
  bool operator==(const GroundAction&) const = default;
};

/// Throws GroundingError(negative_duration / effect_overlap / invalid_duration).
GroundAction ground_action(const Action& a, const Binding& b, const ObjectPool& pool);

/// Substitutes `b` and expands quantifiers; an empty quantifier domain yields
/// true for forall and false for exists.
Formula ground_formula(const Formula& f, const Binding& b, const ObjectPool& pool);

struct GroundMethod {
  std::string name;
  std::vector<std::string> args;  // one constant per method parameter
  Binding binding;
  Task task;
  TaskNetwork network;  // ground tasks and conditions; variable constraints discharged

  std::string str() const;
  bool operator==(const GroundMethod&) const = default;
};

GroundMethod ground_method(const Method& m, const Binding& b, const ObjectPool& pool);

/// Grounds a network's tasks and condition formulas; C_v is dropped because
/// the binding already satisfies it.
TaskNetwork ground_network(const TaskNetwork& w, const Binding& b, const ObjectPool& pool);

struct GroundingStats {
  std::map<std::string, std::size_t> instances;  // per schema name
  std::size_t pruned_static = 0;
  std::size_t pruned_methods = 0;
  std::size_t rejected_overlap = 0;
};

struct GroundOptions {
  bool prune_static = true;
};

struct GroundModel {
  ObjectPool pool;
  State init;
  std::vector<GroundAction> actions;
  std::vector<GroundMethod> methods;
  /// One ground initial network per binding of the problem's parameters.
  std::vector<TaskNetwork> initial_networks;
  std::optional<Formula> goal;  // quantifiers expanded; free variables closed existentially by `holds`
  std::set<std::string> compound_names;
  GroundingStats stats;
  std::vector<Diagnostic> diagnostics;

  const GroundAction* find_action(const Task& t) const;
  std::vector<const GroundMethod*> methods_for(const Task& t) const;
  const GroundMethod* find_method(const std::string& name, const Task& t) const;
  bool is_compound(const Task& t) const { return compound_names.count(t.name) != 0; }

  void index();

 private:
  std::unordered_map<std::string, std::size_t> action_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> method_index_;
};

/// Grounds every schema. Instances whose effects overlap are skipped with a
/// warning; negative or non-constant durations raise GroundingError.
GroundModel ground_problem(const Domain& d, const Problem& p, const GroundOptions& opts = {});

std::string dump_ground_json(const GroundModel& gm);

}  // namespace hddl
