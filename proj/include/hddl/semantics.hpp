#pragma once

// Execution of timed primitive plans: happenings, non-interference, state
// transitions, invariants, and checks of ordering, duration and state
// constraints against concrete dates.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hddl/grounding.hpp"

namespace hddl {

enum class ErrorKind {
  PreconditionFailure,
  InvariantViolation,
  Interference,
  NonPrimitiveTask,
  OrderingViolation,
  DurationViolation,
  ConstraintViolation,
  GoalNotReached,
  UnmappedTimePoint,
  UnmappedDuration,
  AnchorOutOfScope,
  TaskMismatch,
  MethodMismatch,
  IdentifierCollision,
  NonPrimitiveResidue,
  MissingTimedEntry,
  TaskNameMismatch,
  ParseError,
  ModelError,
  GroundingError,
};

std::string_view kind_name(ErrorKind k);

struct ExecutionError {
  ErrorKind kind = ErrorKind::PreconditionFailure;
  std::optional<std::int64_t> date;
  std::vector<std::string> items;  // offending tasks, snaps, constraints or ids
  std::string formula;             // the formula that failed, when there is one
  std::string message;

  std::string str() const;
};

/// Carries an ExecutionError out of pipeline stages that cannot continue.
class ValidationFailure : public std::runtime_error {
 public:
  explicit ValidationFailure(ExecutionError e) : std::runtime_error(e.message), error(std::move(e)) {}
  ExecutionError error;
};

struct PlanEntry {
  std::string id;
  Task task;
  std::int64_t date = 0;
  std::int64_t duration = 0;
  std::optional<GroundAction> action;  // empty for compound tasks
};

struct TemporalPlan {
  std::vector<PlanEntry> entries;
  std::int64_t makespan() const;
};

struct SnapRef {
  std::size_t entry = 0;
  bool is_end = false;
  bool operator==(const SnapRef&) const = default;
};

struct Happening {
  std::int64_t date = 0;
  std::vector<SnapRef> snaps;        // B_e, in entry order, starts before ends
  std::vector<std::size_t> invariants;  // I_e: entries with e_j < e < e_j + d_j
};

std::vector<std::int64_t> happening_events(const TemporalPlan& plan);
/// Requires every entry to carry a ground action.
std::vector<Happening> happening_schedule(const TemporalPlan& plan);

/// Syntactic non-interference: a precondition mentioning an atom the other
/// snap adds or deletes, or one snap adding what the other deletes.
bool interferes(const SnapAction& a, const SnapAction& b);

const SnapAction& snap_of(const TemporalPlan& plan, const SnapRef& r);

/// (state, date) pairs. `pre` is the state the happening's snaps are checked
/// in, `post` the state after their effects.
struct TimelineStep {
  std::int64_t date = 0;
  State pre;
  State post;
  std::vector<std::string> snaps;
  std::vector<std::string> invariants;
};

struct Timeline {
  State initial;
  std::vector<TimelineStep> steps;

  const State& final_state() const { return steps.empty() ? initial : steps.back().post; }
  /// Index of the step at `date`, if that date is a happening.
  std::optional<std::size_t> step_at(std::int64_t date) const;
};

struct SimulationResult {
  Timeline timeline;  // up to and including the failing happening
  std::optional<ExecutionError> error;
  bool ok() const { return !error; }
};

/// Runs the plan from s0. At each happening: interference, then snap
/// preconditions, then active invariants, then the transition.
SimulationResult simulate(const TemporalPlan& plan, const State& s0);

using PointDates = std::map<TimePoint, std::int64_t>;
using Durations = std::map<std::string, std::int64_t>;

std::optional<ExecutionError> check_ordering(const std::vector<OrderingConstraint>& co, const PointDates& dates);
std::optional<ExecutionError> check_durations(const std::vector<DurationConstraint>& cd, const Durations& durations);
/// Checks normalized `(at e φ)` obligations against the timeline.
std::optional<ExecutionError> check_temporal_constraints(const Timeline& tl, const std::vector<Obligation>& obligations,
                                                         const PointDates& dates, const ObjectPool& pool);
std::optional<ExecutionError> goal_check(const Timeline& tl, const std::optional<Formula>& goal, const ObjectPool& pool);

}  // namespace hddl
