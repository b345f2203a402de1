#pragma once

// Object model for hierarchical temporal planning domains and problems.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hddl/logic.hpp"
#include "hddl/source_span.hpp"

namespace hddl {

/// Point-algebra relations plus their arithmetic reading on integers.
enum class Relation { lt, le, gt, ge, eq, ne };

std::string_view symbol(Relation r);
std::optional<Relation> parse_relation(std::string_view s);
bool compare(Relation r, std::int64_t lhs, std::int64_t rhs);
Relation converse(Relation r);

struct Task {
  std::string name;
  std::vector<Term> args;
  SourceSpan span;

  std::string str() const;
  auto operator<=>(const Task&) const = default;
};

enum class TaskKind { primitive, compound, unknown };

/// start(id) or end(id). The empty id denotes the enclosing network itself:
/// the decomposed task for a method network, the whole plan for the problem.
struct TimePoint {
  enum class Side { start, end };

  Side side = Side::start;
  std::string id;

  static TimePoint start_of(std::string id) { return {Side::start, std::move(id)}; }
  static TimePoint end_of(std::string id) { return {Side::end, std::move(id)}; }

  std::string str() const;
  auto operator<=>(const TimePoint&) const = default;
};

struct OrderingConstraint {
  TimePoint left;
  Relation rel = Relation::le;
  TimePoint right;
  SourceSpan span;

  std::string str() const;
  bool operator==(const OrderingConstraint&) const = default;
};

struct VariableConstraint {
  Term left;
  bool equal = true;
  Term right;
  SourceSpan span;

  std::string str() const;
  bool operator==(const VariableConstraint&) const = default;
};

/// Integer arithmetic over literals and task durations (+, -, *).
struct DurationExpr {
  enum class Kind { literal, duration_of, sum, difference, product };

  Kind kind = Kind::literal;
  std::int64_t value = 0;
  std::string id;  // duration_of; empty id is the enclosing network
  std::vector<DurationExpr> operands;

  static DurationExpr literal(std::int64_t v) { return {Kind::literal, v, {}, {}}; }
  static DurationExpr duration_of(std::string id) { return {Kind::duration_of, 0, std::move(id), {}}; }
  static DurationExpr apply(Kind k, std::vector<DurationExpr> ops) { return {k, 0, {}, std::move(ops)}; }

  /// nullopt when a referenced duration is missing from `lookup`.
  std::optional<std::int64_t> evaluate(
      const std::function<std::optional<std::int64_t>(const std::string&)>& lookup) const;
  void referenced_ids(std::vector<std::string>& out) const;
  std::string str() const;
  bool operator==(const DurationExpr&) const = default;
};

struct DurationConstraint {
  DurationExpr lhs;
  Relation rel = Relation::eq;
  DurationExpr rhs;
  SourceSpan span;

  std::string str() const;
  bool operator==(const DurationConstraint&) const = default;
};

/// Surface forms of state constraints attached to a task network.
struct DecompositionConstraint {
  enum class Form { at, before, after, between, method_condition };
  enum class Phase { at_start, at_end, overall };

  Form form = Form::at;
  TimePoint point;                  // at
  std::vector<std::string> first;   // before / after / between (first set)
  std::vector<std::string> second;  // between (second set)
  Phase phase = Phase::at_start;    // method_condition
  Formula condition;
  std::string owner;  // the task id that the enclosing network stands for; empty at the root
  SourceSpan span;

  static DecompositionConstraint at(TimePoint p, Formula f);
  static DecompositionConstraint before(std::vector<std::string> ids, Formula f);
  static DecompositionConstraint after(std::vector<std::string> ids, Formula f);
  static DecompositionConstraint between(std::vector<std::string> a, std::vector<std::string> b, Formula f);
  static DecompositionConstraint method_condition(Phase p, Formula f);

  std::string str() const;
  bool operator==(const DecompositionConstraint&) const = default;
};

/// A normalized `(at e φ)` obligation. The window [from, to] is computed from
/// concrete dates: `from` is the earliest/latest of its points, likewise `to`.
/// Every happening inside the window (exclusive when `open`) must satisfy the
/// condition in the chosen state: `pre` is the state before the happening's
/// snaps apply, `post` the state after.
struct Obligation {
  enum class Pick { earliest, latest };
  enum class StateAt { pre, post };
  struct EventRef {
    Pick pick = Pick::earliest;
    std::vector<TimePoint> points;
    bool operator==(const EventRef&) const = default;
  };

  EventRef from;
  EventRef to;
  bool open = false;
  StateAt state = StateAt::post;
  Formula condition;
  std::string origin;  // printed source constraint

  bool single_event() const { return from == to && !open; }
  bool operator==(const Obligation&) const = default;
};

/// w = (I, <Co, Cv, Cd, Ct>) with alpha. `alpha` keeps the tasks of ids that
/// were decomposed away so their time points remain addressable.
struct TaskNetwork {
  std::vector<std::string> ids;
  std::map<std::string, Task> alpha;
  std::vector<OrderingConstraint> co;
  std::vector<VariableConstraint> cv;
  std::vector<DurationConstraint> cd;
  std::vector<DecompositionConstraint> ct;

  bool contains(const std::string& id) const;
  const Task& task(const std::string& id) const { return alpha.at(id); }
  void add_task(const std::string& id, Task t);

  bool operator==(const TaskNetwork&) const = default;
};

struct SnapAction {
  std::string name;
  Formula precond;
  std::vector<Atom> add;
  std::vector<Atom> del;

  bool operator==(const SnapAction&) const = default;
};

/// A primitive task carrier. Instantaneous actions use only `start` and have
/// duration 0; durative actions bracket an invariant between start and end.
struct Action {
  std::string name;
  std::vector<TypedVariable> params;
  bool durative = false;
  SnapAction start;
  SnapAction end;
  Formula invariant;
  DurationExpr duration;
  SourceSpan span;

  bool operator==(const Action&) const = default;
};

struct PredicateSchema {
  std::string name;
  std::vector<TypedVariable> params;
  SourceSpan span;
  bool operator==(const PredicateSchema&) const = default;
};

struct TaskSchema {
  std::string name;
  std::vector<TypedVariable> params;
  SourceSpan span;
  bool operator==(const TaskSchema&) const = default;
};

struct Method {
  std::string name;
  std::vector<TypedVariable> params;
  Task task;
  TaskNetwork network;
  SourceSpan span;
  bool operator==(const Method&) const = default;
};

struct Diagnostic {
  enum class Severity { error, warning };

  SourceSpan span;
  Severity severity = Severity::error;
  std::string rule;
  std::string message;

  bool is_error() const { return severity == Severity::error; }
  /// `file:line:col: severity: message [rule]`
  std::string str() const;
};

bool has_errors(const std::vector<Diagnostic>& ds);

struct Domain {
  std::string name;
  std::vector<std::string> requirements;
  ObjectPool constants;  // also owns the type hierarchy
  std::vector<PredicateSchema> predicates;
  std::vector<TaskSchema> tasks;
  std::vector<Action> actions;
  std::vector<Method> methods;
  std::vector<Diagnostic> notes;  // parse-time warnings; not part of equality

  const PredicateSchema* predicate(std::string_view n) const;
  const TaskSchema* compound_task(std::string_view n) const;
  const Action* action(std::string_view n) const;
  const Method* method(std::string_view n) const;
  TaskKind kind_of(std::string_view task_name) const;

  bool operator==(const Domain& o) const;
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<std::string> requirements;
  ObjectPool objects;
  State init;
  std::vector<TypedVariable> htn_params;
  TaskNetwork network;
  std::optional<Formula> goal;
  std::vector<Diagnostic> notes;

  bool operator==(const Problem& o) const;
};

/// Domain constants, the domain's types and the problem objects.
ObjectPool merged_pool(const Domain& d, const Problem& p);

class ModelError : public std::runtime_error {
 public:
  ModelError(std::string rule, const std::string& msg) : std::runtime_error(msg), rule(std::move(rule)) {}
  std::string rule;
};

/// Static well-formedness checks. Warnings for compound tasks without methods
/// and for effect overlaps; errors for everything that would break grounding.
std::vector<Diagnostic> validate_model(const Domain& d);
std::vector<Diagnostic> validate_model(const Domain& d, const Problem& p);

/// Rewrites a surface constraint into `(at e φ)` obligations over the ids of
/// `scope`. Throws ModelError("unknown-identifier").
std::vector<Obligation> normalize_constraint(const DecompositionConstraint& c, const TaskNetwork& scope);

}  // namespace hddl
